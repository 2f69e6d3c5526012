#include "nmepi/runner.h"

#include "nmepi/equilibria.h"
#include "nmepi/errors.h"
#include "nmepi/io.h"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace nmepi {

namespace fs = std::filesystem;

namespace {

struct RunContext {
    const ExperimentConfig& cfg;
    Engine engine;
    fs::path dir;
    unsigned threads;
    std::ostream& log;
    std::vector<std::string> files;
    nlohmann::json extra = nlohmann::json::object();
    int exit_code = kExitOk;

    void text(const std::string& name, const std::string& body)
    {
        write_text_file(dir / name, body);
        files.push_back(name);
    }
    void json(const std::string& name, const nlohmann::json& j)
    {
        write_json_file(dir / name, j);
        files.push_back(name);
    }
};

std::optional<std::string> env(const char* name)
{
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') {
        return std::nullopt;
    }
    return std::string(v);
}

unsigned resolve_thread_cap(const RunRequest& req, const ExperimentConfig& cfg)
{
    if (req.threads) {
        return *req.threads;
    }
    if (const auto e = env("NMEPI_THREADS")) {
        try {
            std::size_t used = 0;
            const long v = std::stol(*e, &used);
            if (used != e->size() || v < 0) {
                throw std::invalid_argument("bad");
            }
            return static_cast<unsigned>(v);
        } catch (const std::exception&) {
            throw ValidationError("NMEPI_THREADS must be a nonnegative integer, got '" + *e + "'");
        }
    }
    return cfg.ensemble.threads;
}

std::string padded(std::size_t r, std::size_t total)
{
    const std::size_t width = std::max<std::size_t>(3, std::to_string(total > 0 ? total - 1 : 0).size());
    std::string s = std::to_string(r);
    return std::string(width - std::min(width, s.size()), '0') + s;
}

double constant_lambda(const ModelSpec& spec, const char* what)
{
    if (!spec.lambda.is_constant()) {
        throw ValidationError(std::string(what) + " needs a constant contact rate");
    }
    return spec.lambda.values().front();
}

std::vector<Compartment> active_compartments(ModelKind kind)
{
    switch (kind) {
    case ModelKind::SIS:
        return {Compartment::S, Compartment::I};
    case ModelKind::SIR:
        return {Compartment::S, Compartment::I, Compartment::R};
    case ModelKind::SEIR:
        return {Compartment::S, Compartment::E, Compartment::I, Compartment::R};
    case ModelKind::SIRS:
        return {Compartment::S, Compartment::I, Compartment::R};
    }
    return {};
}

std::string probe_label(const Probe& p)
{
    return to_string(p.compartment) + "@" + format_double(p.t);
}

void run_simulate(RunContext& ctx)
{
    const ExperimentConfig& cfg = ctx.cfg;
    const std::size_t reps = cfg.ensemble.reps;
    const nlohmann::json spec_json = cfg.spec.to_json();
    std::vector<ScaledPath> scaled(cfg.probes.empty() ? 0 : reps);
    SimulationOptions opts;
    opts.record_events = cfg.output.events;
    parallel_for(reps, ctx.threads, [&](std::size_t r) {
        const auto t0 = std::chrono::steady_clock::now();
        const SimulationResult res = simulate_replication(cfg.spec, cfg.ensemble.n, cfg.grid, cfg.ensemble.master_seed, r, opts);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const std::string stem = "path_" + padded(r, reps);
        if (cfg.output.csv) {
            std::ostringstream os;
            write_path_csv(os, res.path);
            write_text_file(ctx.dir / (stem + ".csv"), os.str());
            if (cfg.output.events) {
                std::ostringstream ev;
                write_events_csv(ev, res.log);
                write_text_file(ctx.dir / (stem + "_events.csv"), ev.str());
            }
        }
        if (cfg.output.json) {
            nlohmann::json meta = path_metadata(res.path, spec_json, wall);
            meta["replication"] = r;
            write_json_file(ctx.dir / (stem + ".json"), meta);
        }
        if (!scaled.empty()) {
            scaled[r] = fluid_scale(res.path);
        }
    });
    for (std::size_t r = 0; r < reps; ++r) {
        const std::string stem = "path_" + padded(r, reps);
        if (cfg.output.csv) {
            ctx.files.push_back(stem + ".csv");
            if (cfg.output.events) {
                ctx.files.push_back(stem + "_events.csv");
            }
        }
        if (cfg.output.json) {
            ctx.files.push_back(stem + ".json");
        }
    }
    if (!scaled.empty()) {
        if (reps < 2) {
            throw ValidationError("probe statistics need ensemble.reps >= 2");
        }
        const FluidSolution fluid = solve_fluid(cfg.spec, cfg.grid);
        std::vector<ScaledPath> fluct;
        fluct.reserve(reps);
        for (const auto& s : scaled) {
            fluct.push_back(diffusion_scale(s, fluid));
        }
        const EnsembleStats st = empirical_cov(fluct, cfg.probes);
        ctx.json("ensemble_stats.json", to_json(st));
        std::vector<std::string> labels;
        for (const auto& p : cfg.probes) {
            labels.push_back(probe_label(p));
        }
        std::ostringstream os;
        write_matrix_csv(os, st.covariance, labels);
        ctx.text("ensemble_covariance.csv", os.str());
    }
    ctx.log << "simulated " << reps << " replication(s) with n = " << cfg.ensemble.n << "\n";
}

void run_fluid(RunContext& ctx)
{
    const ExperimentConfig& cfg = ctx.cfg;
    const FluidSolution fluid = solve_fluid(cfg.spec, cfg.grid);
    std::vector<std::string> warnings;
    if (cfg.spec.has_first_phase()) {
        const KernelTable kt = tabulate_kernels(cfg.spec.life, cfg.spec.initial_first, cfg.grid);
        warnings = kt.warnings;
        if (cfg.output.csv) {
            std::ostringstream os;
            write_kernel_csv(os, kt);
            ctx.text("kernels.csv", os.str());
        }
    }
    if (cfg.output.csv) {
        std::ostringstream os;
        write_fluid_csv(os, fluid);
        ctx.text("fluid.csv", os.str());
    }
    if (cfg.output.json) {
        ctx.json("fluid.json", fluid_metadata(fluid, warnings));
    }
    for (const auto& w : warnings) {
        ctx.log << "warning: " << w << "\n";
    }
    ctx.log << "fluid solved on " << cfg.grid.size() << " nodes, " << fluid.diagnostics.halvings << " halving(s)\n";
}

void run_fclt(RunContext& ctx)
{
    const ExperimentConfig& cfg = ctx.cfg;
    const FluidSolution fluid = solve_fluid(cfg.spec, cfg.grid);
    const TimeGrid coarse(cfg.grid.horizon(), cfg.fclt.dt > 0.0 ? cfg.fclt.dt : cfg.grid.dt());
    const DriverCovariance cov(fluid);
    const DriverSampler sampler(cov, coarse);
    std::vector<FcltPath> paths(cfg.fclt.paths);
    parallel_for(paths.size(), ctx.threads, [&](std::size_t p) {
        const std::uint64_t seed = stream_seed(cfg.ensemble.master_seed, p);
        Rng rng(seed);
        paths[p] = sample_fclt_path(sampler, fluid, cfg.fclt.initial, rng);
        paths[p].seed = seed;
    });
    if (cfg.output.csv) {
        std::ostringstream os;
        write_fclt_csv(os, paths, cfg.output.drivers);
        ctx.text("fclt_paths.csv", os.str());

        std::ostringstream var;
        var << "t,var_Shat,var_Ehat,var_Ihat,var_Rhat\n";
        const double np = static_cast<double>(paths.size());
        for (std::size_t k = 0; k < coarse.size(); ++k) {
            var << format_time(coarse.time(k));
            for (Compartment c : {Compartment::S, Compartment::E, Compartment::I, Compartment::R}) {
                double m = 0.0, s2 = 0.0;
                for (const auto& fp : paths) {
                    m += fp.column(c)[k];
                }
                m /= np;
                for (const auto& fp : paths) {
                    const double d = fp.column(c)[k] - m;
                    s2 += d * d;
                }
                var << ',' << format_double(paths.size() > 1 ? s2 / (np - 1.0) : 0.0);
            }
            var << '\n';
        }
        ctx.text("fclt_variance.csv", var.str());
    }
    if (!cfg.fclt.covariance_times.empty()) {
        const std::vector<Driver> drivers = drivers_of(cfg.spec.kind);
        const Eigen::MatrixXd m = cov.assemble(drivers, cfg.fclt.covariance_times);
        std::vector<std::string> labels;
        for (Driver d : drivers) {
            for (double t : cfg.fclt.covariance_times) {
                labels.push_back(to_string(d) + "@" + format_double(t));
            }
        }
        std::ostringstream os;
        write_matrix_csv(os, m, labels);
        ctx.text("driver_covariance.csv", os.str());
    }
    if (!cfg.probes.empty() && paths.size() >= 2) {
        Eigen::MatrixXd samples(static_cast<Eigen::Index>(paths.size()), static_cast<Eigen::Index>(cfg.probes.size()));
        for (std::size_t q = 0; q < cfg.probes.size(); ++q) {
            if (!coarse.has_node(cfg.probes[q].t)) {
                throw ValidationError("probe time " + format_double(cfg.probes[q].t) +
                                      " is not a node of the fclt sampling grid");
            }
            const std::size_t k = coarse.index_of(cfg.probes[q].t);
            for (std::size_t p = 0; p < paths.size(); ++p) {
                samples(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
                    paths[p].column(cfg.probes[q].compartment)[k];
            }
        }
        const SampleCovariance sc = sample_covariance(samples);
        std::vector<std::string> labels;
        for (const auto& p : cfg.probes) {
            labels.push_back(probe_label(p));
        }
        std::ostringstream os;
        write_matrix_csv(os, sc.cov, labels);
        ctx.text("fclt_probe_covariance.csv", os.str());
    }
    ctx.extra["fclt"] = {{"paths", paths.size()}, {"sampling_dt", coarse.dt()}, {"cells", sampler.cell_count()}};
    ctx.log << "sampled " << paths.size() << " fluctuation path(s) on a grid of step " << coarse.dt() << "\n";
}

void run_verify(RunContext& ctx)
{
    const ExperimentConfig& cfg = ctx.cfg;
    const ModelSpec& spec = cfg.spec;
    const std::string& check = cfg.verify.check;
    nlohmann::json report;
    report["check"] = check;
    double error = 0.0, tol = 0.0;
    if (check == "markov_ode") {
        tol = cfg.verify.tolerance.value_or(1e-4);
        const double lambda = constant_lambda(spec, "the Markovian check");
        const DurationDist& f = spec.second_law();
        auto exp_rate = [](const DurationDist& d, const char* what) {
            if (!d.is_exponential()) {
                throw ValidationError(std::string("the Markovian check needs an exponential ") + what);
            }
            return 1.0 / d.mean();
        };
        MarkovRates rates;
        rates.lambda = lambda;
        rates.mu = exp_rate(f, "second-phase law");
        if (spec.has_first_phase()) {
            if (!spec.life.is_independent()) {
                throw ValidationError("the Markovian check needs independent phase durations");
            }
            rates.gamma = exp_rate(spec.life.first(), "first-phase law");
            const double g0 = exp_rate(spec.initial_first.first(), "initial first-phase law");
            if (std::abs(g0 - rates.gamma) > 1e-12 * rates.gamma) {
                throw ValidationError("the Markovian check needs the initial first-phase law to equal the first-phase law");
            }
        }
        if (std::abs(exp_rate(spec.initial_second, "initial residual law") - rates.mu) > 1e-12 * rates.mu) {
            throw ValidationError("the Markovian check needs the initial residual law to equal the second-phase law");
        }
        const FluidSolution fluid = solve_fluid(spec, cfg.grid);
        const FluidSolution ode = solve_markovian_ode(spec.kind, rates, spec.init, cfg.grid);
        const auto comps = active_compartments(spec.kind);
        error = sup_distance(fluid, ode, comps);
    } else if (check == "deterministic_delay") {
        tol = cfg.verify.tolerance.value_or(1e-6);
        if (spec.kind != ModelKind::SIRS || !spec.life.is_independent() || !spec.life.first().is_deterministic() ||
            !spec.second_law().is_deterministic()) {
            throw ValidationError("the delay check needs SIRS with deterministic independent periods");
        }
        const double xi = spec.life.first().mean();
        const double eta = spec.second_law().mean();
        const double lambda = constant_lambda(spec, "the delay check");
        const FluidSolution fluid = solve_fluid(spec, cfg.grid);
        const FluidSolution delay = solve_deterministic_delay(ModelKind::SIRS, lambda, xi, eta, spec.init, cfg.grid);
        error = sup_distance(fluid, delay, active_compartments(ModelKind::SIRS));
    } else {
        tol = cfg.verify.tolerance.value_or(1e-3);
        const double lambda = constant_lambda(spec, "the equilibrium check");
        EquilibriumPoint point;
        if (spec.kind == ModelKind::SIS) {
            point = sis_equilibrium(lambda, 1.0 / spec.second_law().mean());
        } else if (spec.kind == ModelKind::SIRS) {
            point = sirs_equilibrium(lambda, 1.0 / spec.life.first().mean(), 1.0 / spec.second_law().mean());
        } else {
            throw ValidationError("the equilibrium check needs an SIS or SIRS model");
        }
        const FluidSolution fluid = solve_fluid(spec, cfg.grid);
        const std::size_t k = cfg.grid.steps();
        error = std::max(std::abs(fluid.S[k] - point.S), std::abs(fluid.I[k] - point.I));
        if (spec.kind == ModelKind::SIRS) {
            error = std::max(error, std::abs(fluid.R[k] - point.R));
        }
        report["equilibrium"] = {{"S", point.S}, {"I", point.I}, {"R", point.R}};
    }
    const bool passed = error < tol;
    report["sup_error"] = error;
    report["tolerance"] = tol;
    report["passed"] = passed;
    ctx.json("verify_report.json", report);
    ctx.log << "verify " << check << ": error " << format_double(error) << " (tolerance " << format_double(tol)
            << ") " << (passed ? "PASS" : "FAIL") << "\n";
    if (!passed) {
        ctx.exit_code = kExitCheckFailed;
    }
}

void run_equilibrium(RunContext& ctx)
{
    const ModelSpec& spec = ctx.cfg.spec;
    const double lambda = constant_lambda(spec, "the equilibrium engine");
    if (!spec.life.is_independent()) {
        throw ValidationError("the equilibrium engine needs independent phase durations");
    }
    EquilibriumPoint point;
    const DurationDist& f = spec.second_law();
    std::string note;
    if (spec.kind == ModelKind::SIS) {
        point = sis_equilibrium(lambda, 1.0 / f.mean());
        if (to_json(spec.initial_second) != to_json(equilibrium_dist(f))) {
            note = "initial residual law is not the stationary excess of F; the closed form need not be the long-run limit";
        }
    } else if (spec.kind == ModelKind::SIRS) {
        const DurationDist& g = spec.life.first();
        point = sirs_equilibrium(lambda, 1.0 / g.mean(), 1.0 / f.mean());
        if (to_json(spec.initial_second) != to_json(equilibrium_dist(f)) ||
            to_json(spec.initial_first.first()) != to_json(equilibrium_dist(g))) {
            note = "initial laws are not the stationary excess laws; the closed form need not be the long-run limit";
        }
    } else {
        throw ValidationError("equilibria are computed for SIS and SIRS only");
    }
    const IdentityReport rep = verify_equilibrium_identities(
        point, spec.kind == ModelKind::SIS ? f : spec.life.first(), f, ctx.cfg.grid,
        ctx.cfg.verify.tolerance.value_or(1e-6));
    nlohmann::json j = to_json(point, rep);
    if (!note.empty()) {
        j["initial_law_note"] = note;
    }
    ctx.json("equilibrium.json", j);
    ctx.log << to_string(point.kind) << " equilibrium: S* = " << format_double(point.S)
            << ", I* = " << format_double(point.I) << ", R* = " << format_double(point.R) << "\n";
}

void run_rate(RunContext& ctx)
{
    const ExperimentConfig& cfg = ctx.cfg;
    RateOptions opts;
    opts.reps = cfg.ensemble.reps;
    opts.master_seed = cfg.ensemble.master_seed;
    opts.threads = ctx.threads;
    const std::vector<std::int64_t> n_list =
        cfg.rate.n_list.empty() ? std::vector<std::int64_t>{100, 1000, 10000, 100000} : cfg.rate.n_list;
    const RateReport rep = convergence_rate(cfg.spec, n_list, cfg.grid, opts);
    ctx.json("rate.json", to_json(rep));
    if (cfg.output.csv) {
        std::ostringstream os;
        os << "n,mean_sup_error\n";
        for (std::size_t i = 0; i < rep.n_list.size(); ++i) {
            os << rep.n_list[i] << ',' << format_double(rep.errors[i]) << '\n';
        }
        ctx.text("rate.csv", os.str());
    }
    if (rep.fit) {
        ctx.log << "log-log slope " << format_double(rep.fit->slope) << "\n";
    } else {
        ctx.log << rep.note << "\n";
    }
}

} // namespace

RunOutcome run_experiment(const RunRequest& request, std::ostream& log)
{
    RunOutcome out;
    try {
        const auto t0 = std::chrono::steady_clock::now();
        const ExperimentConfig cfg = load_config(request.config);
        const Engine engine = request.engine ? *request.engine : cfg.engine.value_or(Engine::Simulate);
        if (!request.engine && !cfg.engine) {
            throw ValidationError("config: engine: required when running without a subcommand");
        }
        const unsigned threads = resolve_thread_cap(request, cfg);
        fs::path base = cfg.output.directory;
        if (request.out) {
            base = *request.out;
        } else if (const auto e = env("NMEPI_OUTPUT_DIR")) {
            base = *e;
        }
        const std::string hash = fnv1a_hex(cfg.canonical + "\nengine=" + to_string(engine));
        const std::string name = cfg.output.run_name.empty() ? to_string(engine) + "-" + hash.substr(0, 12)
                                                             : cfg.output.run_name;
        const fs::path dir = base / name;
        if (fs::exists(dir) && !fs::is_empty(dir)) {
            if (!request.force) {
                throw ValidationError("run directory " + dir.string() + " already exists; pass --force to overwrite");
            }
            fs::remove_all(dir);
        }
        fs::create_directories(dir);
        out.directory = dir;

        RunContext ctx{cfg, engine, dir, threads, log, {}, nlohmann::json::object(), kExitOk};
        ctx.text("config.yaml", cfg.canonical + "\n");
        switch (engine) {
        case Engine::Simulate:
            run_simulate(ctx);
            break;
        case Engine::Fluid:
            run_fluid(ctx);
            break;
        case Engine::Fclt:
            run_fclt(ctx);
            break;
        case Engine::Verify:
            run_verify(ctx);
            break;
        case Engine::Equilibrium:
            run_equilibrium(ctx);
            break;
        case Engine::Rate:
            run_rate(ctx);
            break;
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        nlohmann::json manifest;
        manifest["tool"] = "nmepi";
        manifest["version"] = kVersion;
        manifest["engine"] = to_string(engine);
        manifest["config_hash"] = hash;
        manifest["spec_fingerprint"] = cfg.spec.fingerprint();
        manifest["master_seed"] = cfg.ensemble.master_seed;
        manifest["threads"] = resolve_threads(threads);
        manifest["wall_time_s"] = wall;
        manifest["exit_code"] = ctx.exit_code;
        manifest["files"] = ctx.files;
        for (auto it = ctx.extra.begin(); it != ctx.extra.end(); ++it) {
            manifest[it.key()] = it.value();
        }
        write_json_file(dir / "manifest.json", manifest);
        out.exit_code = ctx.exit_code;
        out.message = ctx.exit_code == kExitOk ? "ok" : "check failed";
    } catch (const ValidationError& e) {
        out.exit_code = kExitValidation;
        out.message = e.what();
    } catch (const NumericalError& e) {
        out.exit_code = kExitNumerical;
        out.message = std::string(e.what()) + " (residual " + format_double(e.residual()) + ")";
    } catch (const fs::filesystem_error& e) {
        out.exit_code = kExitValidation;
        out.message = e.what();
    }
    return out;
}

std::string describe_model(ModelKind kind)
{
    std::ostringstream os;
    const char* rate = "  with rate(s) = lambda(s) Sbar(s) Ibar(s)\n";
    switch (kind) {
    case ModelKind::SIR:
        os << "SIR: susceptible -> infectious (duration eta ~ F) -> recovered\n\n"
           << "Limit equations:\n"
           << "  Sbar(t) = 1 - Ibar(0) - int_0^t rate(s) ds\n"
           << "  Ibar(t) = Ibar(0) F0c(t) + int_0^t Fc(t - s) rate(s) ds\n"
           << "  Rbar(t) = Ibar(0) F0(t) + int_0^t F(t - s) rate(s) ds\n"
           << rate << "\n"
           << "Required laws:\n"
           << "  model.infectious_period           F, infectious period of newly infected individuals\n"
           << "  model.initial_infectious_residual F0, remaining infectious time of the initially infectious (optional)\n\n"
           << "Defaults:\n"
           << "  F0 = stationary-excess (equilibrium) law of F\n"
           << "  init: I only; Sbar(0) = 1 - Ibar(0), Rbar(0) = 0\n";
        break;
    case ModelKind::SIS:
        os << "SIS: susceptible -> infectious (duration eta ~ F) -> susceptible\n\n"
           << "Limit equations:\n"
           << "  Ibar(t) = Ibar(0) F0c(t) + int_0^t Fc(t - s) rate(s) ds\n"
           << "  Sbar(t) = 1 - Ibar(t)\n"
           << rate << "\n"
           << "Constraint: Sbar + Ibar = 1 at all times.\n\n"
           << "Required laws:\n"
           << "  model.infectious_period           F\n"
           << "  model.initial_infectious_residual F0 (optional)\n\n"
           << "Defaults:\n"
           << "  F0 = stationary-excess (equilibrium) law of F\n";
        break;
    case ModelKind::SEIR:
        os << "SEIR: susceptible -> exposed (xi) -> infectious (eta) -> recovered, (xi, eta) ~ H\n\n"
           << "Limit equations:\n"
           << "  Sbar(t) = 1 - Ebar(0) - Ibar(0) - int_0^t rate(s) ds\n"
           << "  Ebar(t) = Ebar(0) G0c(t) + int_0^t Gc(t - s) rate(s) ds\n"
           << "  Ibar(t) = Ibar(0) F0c(t) + Ebar(0) Psi0(t) + int_0^t Psi(t - s) rate(s) ds\n"
           << "  Rbar(t) = Ibar(0) F0(t) + Ebar(0) Phi0(t) + int_0^t Phi(t - s) rate(s) ds\n"
           << "  Abar(t) = int_0^t rate(s) ds,  Lbar(t) = Ebar(0) G0(t) + int_0^t G(t - s) rate(s) ds\n"
           << rate << "\n"
           << "Kernels:\n"
           << "  Phi(t)  = P(xi + eta <= t)         Psi(t)  = P(xi <= t < xi + eta)      for (xi, eta) ~ H\n"
           << "  Phi0(t) = P(xi0 + eta <= t)        Psi0(t) = P(xi0 <= t < xi0 + eta)    for (xi0, eta) ~ H0\n"
           << "  Both pairs need the joint law, not only the marginals.\n\n"
           << "Required laws:\n"
           << "  model.exposed_period              G, law of xi\n"
           << "  model.infectious_period           F, law of eta (independent case)\n"
           << "  model.infectious_given_exposed    buckets {u, dist}: law of eta given xi near u (dependent case)\n"
           << "  model.initial_exposed_residual    G0, remaining exposed time of the initially exposed (optional)\n"
           << "  model.initial_infectious_residual F0 (optional)\n\n"
           << "Defaults:\n"
           << "  G0 = stationary excess of G, F0 = stationary excess of F (independent laws only;\n"
           << "  a dependent H needs both given explicitly)\n";
        break;
    case ModelKind::SIRS:
        os << "SIRS: susceptible -> infectious (xi) -> immune (eta) -> susceptible, (xi, eta) ~ H\n\n"
           << "Limit equations:\n"
           << "  Ibar(t) = Ibar(0) G0c(t) + int_0^t Gc(t - s) rate(s) ds\n"
           << "  Rbar(t) = Rbar(0) F0c(t) + Ibar(0) Psi0(t) + int_0^t Psi(t - s) rate(s) ds\n"
           << "  Sbar(t) = 1 - Ibar(t) - Rbar(t)\n"
           << rate << "\n"
           << "Kernels:\n"
           << "  Psi(t) = P(xi <= t < xi + eta) for H, Psi0 the same for H0\n\n"
           << "Required laws:\n"
           << "  model.infectious_period           G, law of xi\n"
           << "  model.immune_period               F, law of eta (independent case)\n"
           << "  model.immune_given_infectious     buckets {u, dist} (dependent case)\n"
           << "  model.initial_infectious_residual G0 (optional)\n"
           << "  model.initial_immune_residual     F0 (optional)\n\n"
           << "Defaults:\n"
           << "  G0 = stationary excess of G, F0 = stationary excess of F\n"
           << "  Endemic point for mean periods 1/gamma, 1/mu and lambda > gamma:\n"
           << "  S* = gamma/lambda, I* = (1 - gamma/lambda)/(1 + gamma/mu), R* = (gamma/mu) I*\n";
        break;
    }
    return os.str();
}

} // namespace nmepi
