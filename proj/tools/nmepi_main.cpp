#include "nmepi/errors.h"
#include "nmepi/io.h"
#include "nmepi/runner.h"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace nmepi;
    CLI::App app{"Non-Markovian epidemic models: simulation, fluid limits and Gaussian fluctuations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    RunRequest req;
    std::string config, out;
    unsigned threads = 0;

    struct Sub {
        const char* name;
        const char* help;
        std::optional<Engine> engine;
    };
    const Sub subs[] = {
        {"simulate", "Exact stochastic simulation ensemble", Engine::Simulate},
        {"fluid", "Deterministic limit (integral equations)", Engine::Fluid},
        {"fclt", "Gaussian fluctuation paths and driver covariances", Engine::Fclt},
        {"verify", "Numerical acceptance check (exit 3 on failure)", Engine::Verify},
        {"equilibrium", "Closed-form equilibria and identity residuals", Engine::Equilibrium},
        {"rate", "Convergence-rate study of the scaled simulator", Engine::Rate},
        {"run", "Run the engine named in the config", std::nullopt},
    };
    std::vector<std::pair<CLI::App*, std::optional<Engine>>> runners;
    for (const Sub& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("-c,--config", config, "Experiment config file (YAML)")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", out, "Output base directory (overrides NMEPI_OUTPUT_DIR)");
        sub->add_flag("-f,--force", req.force, "Overwrite an existing run directory");
        sub->add_option("-j,--threads", threads, "Worker thread cap (overrides NMEPI_THREADS; 0 = all cores)");
        runners.emplace_back(sub, s.engine);
    }
    std::string kind;
    CLI::App* describe = app.add_subcommand("describe", "Print the limit equations of a model kind");
    describe->add_option("kind", kind, "SIS, SIR, SEIR or SIRS")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    if (describe->parsed()) {
        try {
            std::cout << describe_model(parse_model_kind(kind));
            return kExitOk;
        } catch (const ValidationError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitValidation;
        }
    }
    for (const auto& [sub, engine] : runners) {
        if (!sub->parsed()) {
            continue;
        }
        req.config = config;
        req.engine = engine;
        if (!out.empty()) {
            req.out = out;
        }
        if (sub->count("--threads") > 0) {
            req.threads = threads;
        }
        const RunOutcome res = run_experiment(req, std::cout);
        if (res.exit_code == kExitOk) {
            std::cout << "artifacts: " << res.directory.string() << "\n";
        } else {
            std::cerr << "error: " << res.message << "\n";
        }
        return res.exit_code;
    }
    return kExitValidation;
}
