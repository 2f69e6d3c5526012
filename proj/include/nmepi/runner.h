#pragma once

#include "nmepi/config.h"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace nmepi {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2, kExitCheckFailed = 3 };

struct RunRequest {
    std::filesystem::path config;
    /// Overrides the engine named in the config.
    std::optional<Engine> engine;
    /// Output base directory; beats NMEPI_OUTPUT_DIR and output.directory.
    std::optional<std::filesystem::path> out;
    bool force = false;
    /// Worker cap; beats NMEPI_THREADS and ensemble.threads.
    std::optional<unsigned> threads;
};

struct RunOutcome {
    int exit_code = kExitOk;
    std::filesystem::path directory;
    std::string message;
};

/// Loads the config, runs the engine and writes artifacts plus manifest.json into one run directory.
/// Errors are mapped to exit codes; the message explains failures.
RunOutcome run_experiment(const RunRequest& request, std::ostream& log);

/// Limit equations, required laws and initial-condition defaults of a model, as plain text.
std::string describe_model(ModelKind kind);

} // namespace nmepi
