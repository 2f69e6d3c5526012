#include "nmepi/model.h"

#include "nmepi/errors.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace nmepi {

namespace {

std::string upper(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

void check_fraction(double x, const char* name)
{
    if (!(std::isfinite(x) && x >= 0.0 && x <= 1.0)) {
        throw ValidationError(std::string("initial fraction ") + name + " must lie in [0, 1]");
    }
}

JointDurationDist default_initial_first(const JointDurationDist& life, const char* what)
{
    if (!life.is_independent()) {
        throw ValidationError(std::string("a dependent life law needs an explicit ") + what);
    }
    // A zero first phase stays zero for agents already in it.
    const DurationDist& g = life.first();
    return JointDurationDist::independent(g.is_zero() ? g : equilibrium_dist(g), life.second_given(0.0));
}

DurationDist default_initial_second(const JointDurationDist& life, const char* what)
{
    if (!life.is_independent()) {
        throw ValidationError(std::string("a dependent life law needs an explicit ") + what);
    }
    return equilibrium_dist(life.second_given(0.0));
}

} // namespace

std::string to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::SIS:
        return "SIS";
    case ModelKind::SIR:
        return "SIR";
    case ModelKind::SIRS:
        return "SIRS";
    case ModelKind::SEIR:
        return "SEIR";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& name)
{
    const std::string u = upper(name);
    if (u == "SIS") {
        return ModelKind::SIS;
    }
    if (u == "SIR") {
        return ModelKind::SIR;
    }
    if (u == "SIRS") {
        return ModelKind::SIRS;
    }
    if (u == "SEIR") {
        return ModelKind::SEIR;
    }
    throw ValidationError("unknown model kind '" + name + "'");
}

std::string to_string(Compartment c)
{
    static const char* names[] = {"S", "E", "I", "R", "A", "L"};
    return names[static_cast<int>(c)];
}

Compartment parse_compartment(const std::string& name)
{
    const std::string u = upper(name);
    static const char* names[] = {"S", "E", "I", "R", "A", "L"};
    for (int i = 0; i < 6; ++i) {
        if (u == names[i]) {
            return static_cast<Compartment>(i);
        }
    }
    throw ValidationError("unknown compartment '" + name + "'");
}

ContactRate::ContactRate(double value) : values_{value}
{
    if (!(std::isfinite(value) && value >= 0.0)) {
        throw ValidationError("contact rate must be finite and nonnegative");
    }
}

ContactRate::ContactRate(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values))
{
    if (values_.size() != breaks_.size() + 1) {
        throw ValidationError("piecewise contact rate needs one more value than breakpoints");
    }
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
        if (!(std::isfinite(breaks_[i]) && breaks_[i] > 0.0) || (i > 0 && breaks_[i] <= breaks_[i - 1])) {
            throw ValidationError("contact rate breakpoints must be positive and increasing");
        }
    }
    for (double v : values_) {
        if (!(std::isfinite(v) && v >= 0.0)) {
            throw ValidationError("contact rate values must be finite and nonnegative");
        }
    }
}

double ContactRate::value(double t) const
{
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

double ContactRate::value_left(double t) const
{
    const auto it = std::lower_bound(breaks_.begin(), breaks_.end(), t);
    return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

double ContactRate::max_on(double a, double b) const
{
    const auto lo = std::upper_bound(breaks_.begin(), breaks_.end(), a) - breaks_.begin();
    const auto hi = std::upper_bound(breaks_.begin(), breaks_.end(), b) - breaks_.begin();
    return *std::max_element(values_.begin() + lo, values_.begin() + hi + 1);
}

double ContactRate::max() const
{
    return *std::max_element(values_.begin(), values_.end());
}

ModelSpec ModelSpec::sir(ContactRate lambda, DurationDist infectious, double i0,
                         std::optional<DurationDist> initial_residual)
{
    ModelSpec s;
    s.kind = ModelKind::SIR;
    s.lambda = std::move(lambda);
    s.life = JointDurationDist::independent(DurationDist::deterministic(0.0), infectious);
    s.initial_first = s.life;
    s.initial_second = initial_residual ? *initial_residual : equilibrium_dist(infectious);
    s.init.infectious = i0;
    s.validate();
    return s;
}

ModelSpec ModelSpec::sis(ContactRate lambda, DurationDist infectious, double i0,
                         std::optional<DurationDist> initial_residual)
{
    ModelSpec s = sir(std::move(lambda), std::move(infectious), i0, std::move(initial_residual));
    s.kind = ModelKind::SIS;
    return s;
}

ModelSpec ModelSpec::seir(ContactRate lambda, JointDurationDist life, double e0, double i0,
                          std::optional<JointDurationDist> initial_exposed,
                          std::optional<DurationDist> initial_infectious)
{
    ModelSpec s;
    s.kind = ModelKind::SEIR;
    s.lambda = std::move(lambda);
    s.initial_first = initial_exposed ? *initial_exposed : default_initial_first(life, "initial exposed law");
    s.initial_second =
        initial_infectious ? *initial_infectious : default_initial_second(life, "initial infectious residual");
    s.life = std::move(life);
    s.init.exposed = e0;
    s.init.infectious = i0;
    s.validate();
    return s;
}

ModelSpec ModelSpec::sirs(ContactRate lambda, JointDurationDist life, double i0, double r0,
                          std::optional<JointDurationDist> initial_infectious,
                          std::optional<DurationDist> initial_immune)
{
    ModelSpec s;
    s.kind = ModelKind::SIRS;
    s.lambda = std::move(lambda);
    s.initial_first =
        initial_infectious ? *initial_infectious : default_initial_first(life, "initial infectious law");
    s.initial_second = initial_immune ? *initial_immune : default_initial_second(life, "initial immune residual");
    s.life = std::move(life);
    s.init.infectious = i0;
    s.init.recovered = r0;
    s.validate();
    return s;
}

void ModelSpec::validate() const
{
    check_fraction(init.exposed, "E");
    check_fraction(init.infectious, "I");
    check_fraction(init.recovered, "R");
    if (kind != ModelKind::SEIR && init.exposed != 0.0) {
        throw ValidationError("initial fraction E is only used by SEIR");
    }
    if (kind != ModelKind::SIRS && init.recovered != 0.0) {
        throw ValidationError("initial fraction R is only used by SIRS");
    }
    if (first_phase_fraction() + second_phase_fraction() > 1.0) {
        throw ValidationError("initial non-susceptible fractions must not exceed 1");
    }
    if (!has_first_phase() && !life.first().is_zero()) {
        throw ValidationError(to_string(kind) + " has no first phase; its first-phase law must be zero");
    }
}

double ModelSpec::first_phase_fraction() const
{
    switch (kind) {
    case ModelKind::SEIR:
        return init.exposed;
    case ModelKind::SIRS:
        return init.infectious;
    default:
        return 0.0;
    }
}

double ModelSpec::second_phase_fraction() const
{
    return kind == ModelKind::SIRS ? init.recovered : init.infectious;
}

nlohmann::json to_json(const DurationDist& d)
{
    if (const auto* se = std::get_if<DurationDist::StationaryExcess>(&d.family())) {
        return {{"family", "equilibrium"}, {"base", to_json(*se->base)}};
    }
    return {{"family", d.family_name()}, {"params", d.params()}};
}

nlohmann::json to_json(const JointDurationDist& h)
{
    nlohmann::json j;
    j["first"] = to_json(h.first());
    if (h.is_independent()) {
        j["second"] = to_json(h.second_given(0.0));
    } else {
        nlohmann::json buckets = nlohmann::json::array();
        for (const auto& b : h.buckets()) {
            buckets.push_back({{"u", b.u}, {"dist", to_json(b.dist)}});
        }
        j["second_given_first"] = buckets;
    }
    return j;
}

nlohmann::json ModelSpec::to_json() const
{
    nlohmann::json j;
    j["kind"] = to_string(kind);
    if (lambda.is_constant()) {
        j["lambda"] = lambda.values().front();
    } else {
        j["lambda"] = {{"breaks", lambda.breaks()}, {"values", lambda.values()}};
    }
    j["life"] = nmepi::to_json(life);
    if (has_first_phase()) {
        j["initial_first"] = nmepi::to_json(initial_first);
    }
    j["initial_second"] = nmepi::to_json(initial_second);
    j["init"] = {{"E", init.exposed}, {"I", init.infectious}, {"R", init.recovered}};
    return j;
}

std::uint64_t ModelSpec::fingerprint() const
{
    const std::string text = to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace nmepi
