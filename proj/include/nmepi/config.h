#pragma once

#include "nmepi/fclt.h"
#include "nmepi/grid.h"
#include "nmepi/harness.h"
#include "nmepi/model.h"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nmepi {

enum class Engine { Simulate, Fluid, Fclt, Verify, Equilibrium, Rate };
std::string to_string(Engine e);
Engine parse_engine(const std::string& name);

struct EnsembleConfig {
    std::int64_t n = 1000;
    std::size_t reps = 1;
    std::uint64_t master_seed = 1;
    unsigned threads = 0;
};

struct OutputConfig {
    std::string directory = "runs";
    std::string run_name;
    bool csv = true;
    bool json = true;
    bool events = false;
    bool drivers = false;
};

struct FcltConfig {
    /// Sampling step; 0 means the grid step.
    double dt = 0.0;
    std::size_t paths = 100;
    FcltInitial initial;
    /// Times at which the analytic driver covariance matrix is dumped.
    std::vector<double> covariance_times;
};

struct VerifyConfig {
    /// markov_ode, deterministic_delay or equilibrium.
    std::string check = "markov_ode";
    std::optional<double> tolerance;
};

struct RateConfig {
    std::vector<std::int64_t> n_list;
};

/// A parsed experiment file. Unknown keys are rejected with their key path.
struct ExperimentConfig {
    std::optional<Engine> engine;
    ModelSpec spec;
    TimeGrid grid;
    EnsembleConfig ensemble;
    OutputConfig output;
    std::vector<Probe> probes;
    FcltConfig fclt;
    VerifyConfig verify;
    RateConfig rate;
    /// Normalised config text used for the run hash.
    std::string canonical;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& file);

} // namespace nmepi
