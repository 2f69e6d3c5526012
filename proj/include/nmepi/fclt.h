#pragma once

#include "nmepi/fluid.h"
#include "nmepi/kernels.h"
#include "nmepi/model.h"
#include "nmepi/rng.h"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nmepi {

/// Gaussian drivers of the fluctuation equations.
///
/// Suffix 1: generated by infections after time 0. Suffix 0: initially exposed / infectious.
/// SEIR splits the initial terms into 01 (initially infectious) and 02 (initially exposed).
/// SIRS uses I0, I1 for the infectious phase and R01, R02, R1 for the immune phase.
enum class Driver { MA, E0, E1, L0, L1, I0, I1, R0, R1, I01, I02, R01, R02 };

std::string to_string(Driver d);
Driver parse_driver(const std::string& name);
/// Drivers defined for a model kind.
std::vector<Driver> drivers_of(ModelKind kind);

/// Source of a driver: new infections, or one of the two initial cohorts.
enum class Cohort { New, InitialFirst, InitialSecond };

/// Closed-form driver covariances evaluated against a fluid solution.
class DriverCovariance {
public:
    /// The fluid must carry its spec.
    explicit DriverCovariance(const FluidSolution& fluid);

    ModelKind kind() const { return kind_; }
    const FluidSolution& fluid() const { return fluid_; }
    const TimeGrid& grid() const { return fluid_.grid; }
    const std::vector<Driver>& drivers() const { return drivers_; }
    bool has_driver(Driver d) const;

    /// Cov(X(t), Y(t2)); t and t2 must be fluid grid nodes. Throws for drivers outside the model.
    double operator()(Driver x, double t, Driver y, double t2) const;
    double at_nodes(Driver x, std::size_t i, Driver y, std::size_t j) const;

    /// Joint covariance over all (driver, time) combinations, drivers outermost.
    Eigen::MatrixXd assemble(const std::vector<Driver>& drivers, const std::vector<double>& times) const;

    /// Variance of the white noise on {infection time in (a, b], end of first phase in (c, d],
    /// end of second phase in (e, f]}; bounds are grid nodes or +-infinity.
    double white_noise_variance(double a, double b, double c, double d, double e, double f) const;

    // Used by the sampler.
    Cohort cohort_of(Driver d) const;
    /// Bitmask over Phase values (bit 0 first, bit 1 second, bit 2 done).
    unsigned phases_of(Driver d) const;
    const LifeTable& life(Cohort c) const;
    double cohort_mass(Cohort c) const;
    /// lambda-weighted fluid rate used by the white-noise integrals.
    double rate(std::size_t k) const { return fluid_.rate[k]; }
    double rate_left(std::size_t k) const { return fluid_.rate_left[k]; }

private:
    double new_cohort(unsigned px, std::size_t i, unsigned py, std::size_t j) const;
    double initial_cohort(Cohort c, unsigned px, std::size_t i, unsigned py, std::size_t j) const;

    FluidSolution fluid_;
    ModelKind kind_;
    std::vector<Driver> drivers_;
    LifeTable new_, first_, second_;
    double first_mass_ = 0.0, second_mass_ = 0.0;
};

/// Convenience wrapper around DriverCovariance.
double driver_covariance(const FluidSolution& fluid, Driver x, double t, Driver y, double t2);

/// Driver paths on a sampling grid.
struct DriverPaths {
    TimeGrid grid;
    std::map<Driver, std::vector<double>> paths;
};

/// Precomputed cell variances and Cholesky factors for repeated driver sampling.
class DriverSampler {
public:
    /// `grid` must be coarsened from the fluid grid by an integer factor.
    DriverSampler(const DriverCovariance& cov, const TimeGrid& grid);

    DriverPaths sample(Rng& rng) const;
    const TimeGrid& grid() const { return grid_; }
    std::size_t cell_count() const { return cells_.size(); }

private:
    struct Cell {
        std::uint32_t k, m, p;
        double sd;
    };
    ModelKind kind_;
    TimeGrid grid_;
    std::vector<Cell> cells_;
    Eigen::MatrixXd chol_first_, chol_second_;
};

DriverPaths sample_drivers(const DriverCovariance& cov, const TimeGrid& grid, Rng& rng);

/// Initial fluctuation Xhat(0) = value + sqrt(variance) * N(0, 1).
struct InitialFluctuation {
    double value = 0.0;
    double variance = 0.0;
};

struct FcltInitial {
    InitialFluctuation exposed, infectious, recovered;
};

struct FcltPath {
    TimeGrid grid;
    std::map<Driver, std::vector<double>> drivers;
    std::vector<double> S, E, I, R;
    double e0 = 0.0, i0 = 0.0, r0 = 0.0;
    std::uint64_t seed = 0;

    const std::vector<double>& column(Compartment c) const;
};

/// Solves the linear fluctuation equations for given driver paths and initial values.
/// The fluid grid must refine the driver grid.
FcltPath solve_fclt_path(const DriverPaths& drivers, const FluidSolution& fluid, double e0, double i0, double r0);

/// Draws initial values and drivers, then solves.
FcltPath sample_fclt_path(const DriverSampler& sampler, const FluidSolution& fluid, const FcltInitial& init,
                          Rng& rng);

/// Euler-Maruyama for the Markovian SIS fluctuation SDE.
std::vector<double> sis_sde_path(double lambda, double mu, const FluidSolution& fluid, double ihat0,
                                 const TimeGrid& grid, Rng& rng, bool noise = true);

} // namespace nmepi
