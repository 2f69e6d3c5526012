#pragma once

#include "nmepi/agent_sim.h"
#include "nmepi/fclt.h"
#include "nmepi/fluid.h"
#include "nmepi/model.h"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <vector>

namespace nmepi {

/// Real-valued compartment paths (fluid-scaled counts or fluctuations).
struct ScaledPath {
    TimeGrid grid;
    ModelKind kind = ModelKind::SIR;
    std::int64_t n = 0;
    std::uint64_t spec_fingerprint = 0;
    std::vector<double> S, E, I, R, A, L;

    const std::vector<double>& column(Compartment c) const;
    std::vector<double>& column(Compartment c);
};

/// Divides all counts by n.
ScaledPath fluid_scale(const CompartmentPath& path);

/// sqrt(n) (X / n - Xbar). The fluid grid must refine the path grid and the specs must agree.
ScaledPath diffusion_scale(const CompartmentPath& path, const FluidSolution& fluid);
ScaledPath diffusion_scale(const ScaledPath& scaled, const FluidSolution& fluid);

struct Probe {
    Compartment compartment;
    double t;
};

struct EnsembleStats {
    TimeGrid grid;
    std::size_t reps = 0;
    std::map<Compartment, std::vector<double>> mean, variance, mean_se;
    std::vector<Probe> probes;
    Eigen::MatrixXd covariance, covariance_se;
};

/// Per-time mean/variance of every compartment and the unbiased covariance at the probes.
EnsembleStats empirical_cov(const std::vector<ScaledPath>& paths, const std::vector<Probe>& probes);

/// Unbiased covariance of columns of `samples` (rows are replications) and the standard error of
/// each entry from the variance of centred products.
struct SampleCovariance {
    Eigen::MatrixXd cov, se;
    Eigen::VectorXd mean;
};
SampleCovariance sample_covariance(const Eigen::MatrixXd& samples);

struct LogLogFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
/// Least squares of log(y) on log(x); throws ValidationError if any y <= 0.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct RateReport {
    std::vector<std::int64_t> n_list;
    std::vector<double> errors;
    std::optional<LogLogFit> fit;
    std::string note;
};

struct RateOptions {
    std::size_t reps = 20;
    std::uint64_t master_seed = 1;
    unsigned threads = 0;
    FluidOptions fluid;
};

/// Mean sup-norm error of I/n against the fluid on `grid` for each n, and the log-log slope.
RateReport convergence_rate(const ModelSpec& spec, const std::vector<std::int64_t>& n_list, const TimeGrid& grid,
                            const RateOptions& options = {});

nlohmann::json to_json(const RateReport& report);
nlohmann::json to_json(const EnsembleStats& stats);

/// Diffusion-scaled drivers MA, I1, R1 (and I0, R0) of an SIR/SIS run at the given times,
/// rebuilt from its event log.
std::map<Driver, std::vector<double>> reconstruct_drivers(const EventLog& log, const ModelSpec& spec,
                                                          const std::vector<double>& times);

} // namespace nmepi
