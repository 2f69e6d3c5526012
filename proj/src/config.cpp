#include "nmepi/config.h"

#include "nmepi/errors.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace nmepi {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw ValidationError("config: " + path + ": " + what);
}

std::string join(const std::string& base, const std::string& key)
{
    return base.empty() ? key : base + "." + key;
}

void require_map(const YAML::Node& node, const std::string& path)
{
    if (!node.IsMap()) {
        fail(path.empty() ? "<root>" : path, "expected a mapping");
    }
}

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed)
{
    require_map(node, path);
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            fail(join(path, key), "unknown key");
        }
    }
}

double as_double(const YAML::Node& node, const std::string& path)
{
    if (!node.IsScalar()) {
        fail(path, "expected a number");
    }
    try {
        return node.as<double>();
    } catch (const YAML::Exception&) {
        fail(path, "expected a number, got '" + node.Scalar() + "'");
    }
}

std::int64_t as_int(const YAML::Node& node, const std::string& path)
{
    if (!node.IsScalar()) {
        fail(path, "expected an integer");
    }
    try {
        return node.as<std::int64_t>();
    } catch (const YAML::Exception&) {
        fail(path, "expected an integer, got '" + node.Scalar() + "'");
    }
}

bool as_bool(const YAML::Node& node, const std::string& path)
{
    if (!node.IsScalar()) {
        fail(path, "expected true or false");
    }
    try {
        return node.as<bool>();
    } catch (const YAML::Exception&) {
        fail(path, "expected true or false, got '" + node.Scalar() + "'");
    }
}

std::string as_string(const YAML::Node& node, const std::string& path)
{
    if (!node.IsScalar()) {
        fail(path, "expected a string");
    }
    return node.Scalar();
}

std::vector<double> as_doubles(const YAML::Node& node, const std::string& path)
{
    if (!node.IsSequence()) {
        fail(path, "expected a list of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        out.push_back(as_double(node[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

template <class F>
auto wrap(const std::string& path, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        if (msg.rfind("config: ", 0) == 0) {
            throw;
        }
        fail(path, msg);
    }
}

DurationDist parse_dist(const YAML::Node& node, const std::string& path)
{
    check_keys(node, path, {"family", "params", "base"});
    if (!node["family"]) {
        fail(join(path, "family"), "required");
    }
    const std::string family = as_string(node["family"], join(path, "family"));
    if (family == "equilibrium") {
        if (node["params"]) {
            fail(join(path, "params"), "not used by the equilibrium family; give 'base'");
        }
        if (!node["base"]) {
            fail(join(path, "base"), "required");
        }
        const DurationDist base = parse_dist(node["base"], join(path, "base"));
        return wrap(path, [&] { return equilibrium_dist(base); });
    }
    if (node["base"]) {
        fail(join(path, "base"), "only used by the equilibrium family");
    }
    if (!node["params"]) {
        fail(join(path, "params"), "required");
    }
    const std::vector<double> params = as_doubles(node["params"], join(path, "params"));
    return wrap(path, [&] { return DurationDist::from_record(family, params); });
}

std::vector<JointDurationDist::Bucket> parse_buckets(const YAML::Node& node, const std::string& path)
{
    if (!node.IsSequence() || node.size() == 0) {
        fail(path, "expected a non-empty list of {u, dist} entries");
    }
    std::vector<JointDurationDist::Bucket> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        check_keys(node[i], p, {"u", "dist"});
        if (!node[i]["u"]) {
            fail(join(p, "u"), "required");
        }
        if (!node[i]["dist"]) {
            fail(join(p, "dist"), "required");
        }
        out.push_back({as_double(node[i]["u"], join(p, "u")), parse_dist(node[i]["dist"], join(p, "dist"))});
    }
    return out;
}

ContactRate parse_lambda(const YAML::Node& node, const std::string& path)
{
    if (node.IsScalar()) {
        const double v = as_double(node, path);
        return wrap(path, [&] { return ContactRate(v); });
    }
    check_keys(node, path, {"breaks", "values"});
    if (!node["values"]) {
        fail(join(path, "values"), "required");
    }
    std::vector<double> breaks;
    if (node["breaks"]) {
        breaks = as_doubles(node["breaks"], join(path, "breaks"));
    }
    const std::vector<double> values = as_doubles(node["values"], join(path, "values"));
    return wrap(path, [&] { return ContactRate(breaks, values); });
}

ModelSpec parse_model(const YAML::Node& node)
{
    const std::string path = "model";
    require_map(node, path);
    if (!node["kind"]) {
        fail("model.kind", "required");
    }
    const ModelKind kind = wrap("model.kind", [&] { return parse_model_kind(as_string(node["kind"], "model.kind")); });
    std::set<std::string> allowed = {"kind", "lambda", "init"};
    std::set<std::string> init_keys;
    switch (kind) {
    case ModelKind::SIR:
    case ModelKind::SIS:
        allowed.insert({"infectious_period", "initial_infectious_residual"});
        init_keys = {"I"};
        break;
    case ModelKind::SEIR:
        allowed.insert({"exposed_period", "infectious_period", "infectious_given_exposed", "initial_exposed_residual",
                        "initial_infectious_residual"});
        init_keys = {"E", "I"};
        break;
    case ModelKind::SIRS:
        allowed.insert({"infectious_period", "immune_period", "immune_given_infectious", "initial_infectious_residual",
                        "initial_immune_residual"});
        init_keys = {"I", "R"};
        break;
    }
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            fail(join(path, key), "unknown key for " + to_string(kind));
        }
    }
    if (!node["lambda"]) {
        fail("model.lambda", "required");
    }
    const ContactRate lambda = parse_lambda(node["lambda"], "model.lambda");
    InitialFractions init;
    if (node["init"]) {
        check_keys(node["init"], "model.init", init_keys);
        if (node["init"]["E"]) {
            init.exposed = as_double(node["init"]["E"], "model.init.E");
        }
        if (node["init"]["I"]) {
            init.infectious = as_double(node["init"]["I"], "model.init.I");
        }
        if (node["init"]["R"]) {
            init.recovered = as_double(node["init"]["R"], "model.init.R");
        }
    }
    auto dist = [&](const char* key) -> std::optional<DurationDist> {
        if (!node[key]) {
            return std::nullopt;
        }
        return parse_dist(node[key], join(path, key));
    };
    auto required = [&](const char* key) {
        auto d = dist(key);
        if (!d) {
            fail(join(path, key), "required");
        }
        return *d;
    };

    switch (kind) {
    case ModelKind::SIR:
    case ModelKind::SIS: {
        const DurationDist f = required("infectious_period");
        const auto f0 = dist("initial_infectious_residual");
        return wrap(path, [&] {
            return kind == ModelKind::SIR ? ModelSpec::sir(lambda, f, init.infectious, f0)
                                          : ModelSpec::sis(lambda, f, init.infectious, f0);
        });
    }
    case ModelKind::SEIR:
    case ModelKind::SIRS: {
        const bool seir = kind == ModelKind::SEIR;
        const char* first_key = seir ? "exposed_period" : "infectious_period";
        const char* second_key = seir ? "infectious_period" : "immune_period";
        const char* cond_key = seir ? "infectious_given_exposed" : "immune_given_infectious";
        const char* first0_key = seir ? "initial_exposed_residual" : "initial_infectious_residual";
        const char* second0_key = seir ? "initial_infectious_residual" : "initial_immune_residual";
        const DurationDist g = required(first_key);
        std::optional<JointDurationDist> life;
        if (node[cond_key]) {
            if (node[second_key]) {
                fail(join(path, second_key), std::string("conflicts with ") + cond_key);
            }
            auto buckets = parse_buckets(node[cond_key], join(path, cond_key));
            life = wrap(join(path, cond_key), [&] { return JointDurationDist::conditional(g, buckets); });
        } else {
            life = JointDurationDist::independent(g, required(second_key));
        }
        std::optional<JointDurationDist> h0;
        if (const auto g0 = dist(first0_key)) {
            h0 = life->is_independent() ? JointDurationDist::independent(*g0, life->second_given(0.0))
                                        : wrap(join(path, first0_key), [&] {
                                              return JointDurationDist::conditional(*g0, life->buckets());
                                          });
        }
        const auto f0 = dist(second0_key);
        return wrap(path, [&] {
            return seir ? ModelSpec::seir(lambda, *life, init.exposed, init.infectious, h0, f0)
                        : ModelSpec::sirs(lambda, *life, init.infectious, init.recovered, h0, f0);
        });
    }
    }
    fail(path, "unsupported model kind");
}

} // namespace

std::string to_string(Engine e)
{
    static const char* names[] = {"simulate", "fluid", "fclt", "verify", "equilibrium", "rate"};
    return names[static_cast<int>(e)];
}

Engine parse_engine(const std::string& name)
{
    std::string l = name;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    for (int i = 0; i <= static_cast<int>(Engine::Rate); ++i) {
        if (to_string(static_cast<Engine>(i)) == l) {
            return static_cast<Engine>(i);
        }
    }
    throw ValidationError("unknown engine '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ValidationError(std::string("config: malformed YAML: ") + e.what());
    }
    check_keys(root, "", {"engine", "model", "grid", "ensemble", "output", "probes", "fclt", "verify", "rate"});
    ExperimentConfig cfg;
    if (root["engine"]) {
        cfg.engine = wrap("engine", [&] { return parse_engine(as_string(root["engine"], "engine")); });
    }
    if (!root["model"]) {
        fail("model", "required");
    }
    cfg.spec = parse_model(root["model"]);

    if (!root["grid"]) {
        fail("grid", "required");
    }
    check_keys(root["grid"], "grid", {"horizon", "dt"});
    if (!root["grid"]["horizon"]) {
        fail("grid.horizon", "required");
    }
    if (!root["grid"]["dt"]) {
        fail("grid.dt", "required");
    }
    const double horizon = as_double(root["grid"]["horizon"], "grid.horizon");
    const double dt = as_double(root["grid"]["dt"], "grid.dt");
    if (!(dt > 0.0)) {
        fail("grid.dt", "must be positive");
    }
    if (!(horizon >= dt)) {
        fail("grid.horizon", "must be at least grid.dt");
    }
    cfg.grid = wrap("grid", [&] { return TimeGrid(horizon, dt); });

    if (const YAML::Node e = root["ensemble"]) {
        check_keys(e, "ensemble", {"n", "reps", "master_seed", "threads"});
        if (e["n"]) {
            cfg.ensemble.n = as_int(e["n"], "ensemble.n");
            if (cfg.ensemble.n < 1) {
                fail("ensemble.n", "must be at least 1");
            }
        }
        if (e["reps"]) {
            const std::int64_t reps = as_int(e["reps"], "ensemble.reps");
            if (reps < 1) {
                fail("ensemble.reps", "must be at least 1");
            }
            cfg.ensemble.reps = static_cast<std::size_t>(reps);
        }
        if (e["master_seed"]) {
            try {
                cfg.ensemble.master_seed = e["master_seed"].as<std::uint64_t>();
            } catch (const YAML::Exception&) {
                fail("ensemble.master_seed", "expected a nonnegative integer");
            }
        }
        if (e["threads"]) {
            const std::int64_t t = as_int(e["threads"], "ensemble.threads");
            if (t < 0) {
                fail("ensemble.threads", "must be nonnegative");
            }
            cfg.ensemble.threads = static_cast<unsigned>(t);
        }
    }

    if (const YAML::Node o = root["output"]) {
        check_keys(o, "output", {"directory", "run_name", "formats", "events", "drivers"});
        if (o["directory"]) {
            cfg.output.directory = as_string(o["directory"], "output.directory");
        }
        if (o["run_name"]) {
            cfg.output.run_name = as_string(o["run_name"], "output.run_name");
            if (cfg.output.run_name.find('/') != std::string::npos || cfg.output.run_name == "." ||
                cfg.output.run_name == "..") {
                fail("output.run_name", "must be a plain directory name");
            }
        }
        if (o["formats"]) {
            if (!o["formats"].IsSequence()) {
                fail("output.formats", "expected a list");
            }
            cfg.output.csv = cfg.output.json = false;
            for (std::size_t i = 0; i < o["formats"].size(); ++i) {
                const std::string p = "output.formats[" + std::to_string(i) + "]";
                const std::string f = as_string(o["formats"][i], p);
                if (f == "csv") {
                    cfg.output.csv = true;
                } else if (f == "json") {
                    cfg.output.json = true;
                } else {
                    fail(p, "unknown format '" + f + "'");
                }
            }
        }
        if (o["events"]) {
            cfg.output.events = as_bool(o["events"], "output.events");
        }
        if (o["drivers"]) {
            cfg.output.drivers = as_bool(o["drivers"], "output.drivers");
        }
    }

    if (const YAML::Node p = root["probes"]) {
        if (!p.IsSequence()) {
            fail("probes", "expected a list of {compartment, t}");
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            const std::string path = "probes[" + std::to_string(i) + "]";
            check_keys(p[i], path, {"compartment", "t"});
            if (!p[i]["compartment"] || !p[i]["t"]) {
                fail(path, "needs compartment and t");
            }
            const Compartment c = wrap(join(path, "compartment"), [&] {
                return parse_compartment(as_string(p[i]["compartment"], join(path, "compartment")));
            });
            const double t = as_double(p[i]["t"], join(path, "t"));
            if (!cfg.grid.has_node(t)) {
                fail(join(path, "t"), "is not a grid node");
            }
            cfg.probes.push_back({c, t});
        }
    }

    if (const YAML::Node f = root["fclt"]) {
        check_keys(f, "fclt", {"dt", "paths", "initial", "covariance_times"});
        if (f["dt"]) {
            cfg.fclt.dt = as_double(f["dt"], "fclt.dt");
            if (!(cfg.fclt.dt > 0.0)) {
                fail("fclt.dt", "must be positive");
            }
            wrap("fclt.dt", [&] { return cfg.grid.refinement_of(TimeGrid(cfg.grid.horizon(), cfg.fclt.dt)); });
        }
        if (f["paths"]) {
            const std::int64_t n = as_int(f["paths"], "fclt.paths");
            if (n < 1) {
                fail("fclt.paths", "must be at least 1");
            }
            cfg.fclt.paths = static_cast<std::size_t>(n);
        }
        if (const YAML::Node init = f["initial"]) {
            check_keys(init, "fclt.initial", {"E", "I", "R"});
            auto read = [&](const char* key, InitialFluctuation& out) {
                if (!init[key]) {
                    return;
                }
                const std::string p = std::string("fclt.initial.") + key;
                check_keys(init[key], p, {"value", "variance"});
                if (init[key]["value"]) {
                    out.value = as_double(init[key]["value"], p + ".value");
                }
                if (init[key]["variance"]) {
                    out.variance = as_double(init[key]["variance"], p + ".variance");
                    if (!(out.variance >= 0.0)) {
                        fail(p + ".variance", "must be nonnegative");
                    }
                }
            };
            read("E", cfg.fclt.initial.exposed);
            read("I", cfg.fclt.initial.infectious);
            read("R", cfg.fclt.initial.recovered);
        }
        if (f["covariance_times"]) {
            cfg.fclt.covariance_times = as_doubles(f["covariance_times"], "fclt.covariance_times");
            for (double t : cfg.fclt.covariance_times) {
                if (!cfg.grid.has_node(t)) {
                    fail("fclt.covariance_times", "contains a time that is not a grid node");
                }
            }
        }
    }

    if (const YAML::Node v = root["verify"]) {
        check_keys(v, "verify", {"check", "tolerance"});
        if (v["check"]) {
            cfg.verify.check = as_string(v["check"], "verify.check");
            if (cfg.verify.check != "markov_ode" && cfg.verify.check != "deterministic_delay" &&
                cfg.verify.check != "equilibrium") {
                fail("verify.check", "must be markov_ode, deterministic_delay or equilibrium");
            }
        }
        if (v["tolerance"]) {
            cfg.verify.tolerance = as_double(v["tolerance"], "verify.tolerance");
            if (!(*cfg.verify.tolerance > 0.0)) {
                fail("verify.tolerance", "must be positive");
            }
        }
    }

    if (const YAML::Node r = root["rate"]) {
        check_keys(r, "rate", {"n_list"});
        if (r["n_list"]) {
            if (!r["n_list"].IsSequence()) {
                fail("rate.n_list", "expected a list of integers");
            }
            for (std::size_t i = 0; i < r["n_list"].size(); ++i) {
                const std::string p = "rate.n_list[" + std::to_string(i) + "]";
                const std::int64_t n = as_int(r["n_list"][i], p);
                if (n < 1) {
                    fail(p, "must be at least 1");
                }
                cfg.rate.n_list.push_back(n);
            }
        }
    }

    YAML::Emitter em;
    em << root;
    cfg.canonical = em.c_str();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot read config file " + file.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

} // namespace nmepi
