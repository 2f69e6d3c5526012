#pragma once

#include "nmepi/grid.h"
#include "nmepi/kernels.h"
#include "nmepi/model.h"
#include "nmepi/volterra.h"

#include <cstdint>
#include <optional>
#include <vector>

namespace nmepi {

struct SolverDiagnostics {
    int max_iterations = 0;
    double max_residual = 0.0;
    int halvings = 0;
};

/// Deterministic limit paths on a uniform grid. Compartments absent from the model are zero.
struct FluidSolution {
    TimeGrid grid;
    ModelKind kind = ModelKind::SIR;
    std::vector<double> S, E, I, R, A, L;
    /// Infection rate lambda(t) S(t) I(t) and its left limits at the nodes.
    std::vector<double> rate, rate_left;
    std::optional<ModelSpec> spec;
    std::uint64_t spec_fingerprint = 0;
    SolverDiagnostics diagnostics;

    const std::vector<double>& column(Compartment c) const;
};

/// Kernel and forcing ingredients of a model on a grid, shared by the fluid and FCLT solvers.
struct ModelKernels {
    TimeGrid grid;
    /// Per compartment, in the order S, E, I, R, A, L: convolution kernels and their left limits.
    std::vector<double> kernel[6], kernel_left[6];
    /// Residual survival of the initial second-phase cohort and its CDF.
    std::vector<double> second_residual_survival, second_residual_survival_left;
    /// Survival of the initial first-phase cohort and psi0 / phi0.
    std::vector<double> first_residual_survival, first_residual_survival_left;
    std::vector<double> psi0, psi0_left, phi0, phi0_left;
    /// First-phase CDF of H0 (for L).
    std::vector<double> first_residual_cdf, first_residual_cdf_left;
    std::vector<std::string> warnings;
};

ModelKernels build_model_kernels(const ModelSpec& spec, const TimeGrid& grid);
ModelKernels build_model_kernels(const ModelSpec& spec, const KernelTable& table);

struct FluidOptions {
    RateSolveOptions solver;
    int max_halvings = 4;
};

/// Solves the fluid system by trapezoidal time stepping.
FluidSolution solve_fluid(const ModelSpec& spec, const TimeGrid& grid, const FluidOptions& options = {});
/// Uses a kernel table tabulated on the solution grid (SEIR/SIRS).
FluidSolution solve_fluid(const ModelSpec& spec, const KernelTable& kernels, const FluidOptions& options = {});

/// phi(t) = a + x(t) + c int_0^t (phi z + w psi) ds,
/// psi(t) = y(t) + c int_0^t K(t - s) (phi z + w psi) ds.
struct VolterraPair {
    std::vector<double> phi, psi;
    double max_residual = 0.0;
};
VolterraPair solve_linear_volterra_2d(double a, std::span<const double> x, std::span<const double> y,
                                      std::span<const double> z, std::span<const double> w, double c,
                                      std::span<const double> kernel, const TimeGrid& grid);

struct MarkovRates {
    double lambda = 0.0;
    double gamma = 1.0; // E -> I (SEIR) or I -> R (SIRS)
    double mu = 1.0;    // I -> R (SIR/SIS/SEIR) or R -> S (SIRS)
};

/// RK4 for the classical compartmental ODEs.
FluidSolution solve_markovian_ode(ModelKind kind, const MarkovRates& rates, const InitialFractions& init,
                                  const TimeGrid& grid);

/// SIRS with deterministic infectious period xi and immune period eta, uniform initial residuals.
FluidSolution solve_deterministic_delay(ModelKind kind, double lambda, double xi, double eta,
                                        const InitialFractions& init, const TimeGrid& grid);

/// Max over the grid of |a - b| for the listed compartments.
double sup_distance(const FluidSolution& a, const FluidSolution& b, std::span<const Compartment> compartments);

} // namespace nmepi
