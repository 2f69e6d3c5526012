#include "nmepi/equilibria.h"

#include "nmepi/errors.h"
#include "nmepi/kernels.h"

#include <algorithm>
#include <cmath>

namespace nmepi {

namespace {

void require_positive(double x, const char* name)
{
    if (!(std::isfinite(x) && x > 0.0)) {
        throw ValidationError(std::string(name) + " must be finite and positive");
    }
}

void require_rate_matches(const DurationDist& d, double rate, const char* what)
{
    const double m = d.mean();
    if (!(std::isfinite(m) && m > 0.0) || std::abs(m * rate - 1.0) > 1e-9) {
        throw ValidationError(std::string(what) + " mean does not match the reciprocal rate of the point");
    }
}

std::vector<std::size_t> probe_nodes(const TimeGrid& grid, std::size_t count)
{
    std::vector<std::size_t> out;
    const std::size_t steps = grid.steps();
    for (std::size_t p = 1; p <= count; ++p) {
        out.push_back(std::max<std::size_t>(1, p * steps / count));
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

EquilibriumPoint sis_equilibrium(double lambda, double mu)
{
    require_positive(lambda, "lambda");
    require_positive(mu, "mu");
    EquilibriumPoint p;
    p.kind = ModelKind::SIS;
    p.lambda = lambda;
    p.mu = mu;
    if (mu < lambda) {
        p.I = 1.0 - mu / lambda;
        p.S = mu / lambda;
        p.classification = EquilibriumClass::Endemic;
    } else {
        p.note = "mu >= lambda: only the disease-free equilibrium exists";
    }
    return p;
}

EquilibriumPoint sirs_equilibrium(double lambda, double gamma, double mu)
{
    require_positive(lambda, "lambda");
    require_positive(gamma, "gamma");
    require_positive(mu, "mu");
    EquilibriumPoint p;
    p.kind = ModelKind::SIRS;
    p.lambda = lambda;
    p.gamma = gamma;
    p.mu = mu;
    if (lambda > gamma) {
        p.S = gamma / lambda;
        p.I = (1.0 - gamma / lambda) / (1.0 + gamma / mu);
        p.R = (gamma / mu) * p.I;
        p.classification = EquilibriumClass::Endemic;
    } else {
        p.note = "lambda <= gamma: only the disease-free equilibrium exists";
    }
    return p;
}

IdentityReport verify_equilibrium_identities(const EquilibriumPoint& point, const DurationDist& first,
                                             const DurationDist& second, const TimeGrid& grid, double tolerance)
{
    IdentityReport rep;
    const bool endemic = point.classification == EquilibriumClass::Endemic;
    const double scale = endemic ? 1.0 : point.I;
    const std::vector<std::size_t> probes = probe_nodes(grid, 50);
    rep.probes = probes.size();
    double fp = 0.0;

    if (point.kind == ModelKind::SIS) {
        require_rate_matches(first, point.mu, "infectious period");
        rep.residual1 = std::abs(scale * (point.lambda * (1.0 - point.I) - point.mu));
        rep.residual2 = std::abs(point.S + point.I - 1.0);
        const DurationDist fe = equilibrium_dist(first);
        for (std::size_t k : probes) {
            const double t = grid.time(k);
            const double rhs =
                point.I * fe.survival(t) + point.lambda * point.S * point.I * first.integrated_survival(t);
            fp = std::max(fp, std::abs(point.I - rhs));
        }
    } else if (point.kind == ModelKind::SIRS) {
        require_rate_matches(first, point.gamma, "infectious period");
        require_rate_matches(second, point.mu, "immune period");
        rep.residual1 = std::abs(scale * (point.lambda * (1.0 - point.I - point.R) - point.gamma));
        rep.residual2 = std::abs(scale * (point.mu * point.R - point.gamma * point.I));
        const DurationDist ge = equilibrium_dist(first);
        const DurationDist fe = equilibrium_dist(second);
        const KernelTable kt = tabulate_kernels(JointDurationDist::independent(first, second),
                                                JointDurationDist::independent(ge, second), grid);
        const double force = point.lambda * point.S * point.I;
        std::vector<double> cum_psi(grid.size(), 0.0);
        for (std::size_t k = 1; k < grid.size(); ++k) {
            cum_psi[k] = cum_psi[k - 1] + 0.5 * grid.dt() * (kt.psi[k - 1] + kt.psi_left[k]);
        }
        for (std::size_t k : probes) {
            const double t = grid.time(k);
            const double ri = point.I - (point.I * ge.survival(t) + force * first.integrated_survival(t));
            const double rr =
                point.R - (point.R * fe.survival(t) + point.I * kt.psi0[k] + force * cum_psi[k]);
            fp = std::max({fp, std::abs(ri), std::abs(rr)});
        }
    } else {
        throw ValidationError("equilibrium identities are defined for SIS and SIRS only");
    }
    rep.fixed_point_residual = fp;
    rep.ok = rep.residual1 < 1e-10 && rep.residual2 < 1e-10 && fp < tolerance;
    return rep;
}

nlohmann::json to_json(const EquilibriumPoint& point, const IdentityReport& report)
{
    nlohmann::json j;
    j["kind"] = to_string(point.kind);
    j["classification"] = point.classification == EquilibriumClass::Endemic ? "endemic" : "trivial";
    j["S*"] = point.S;
    j["I*"] = point.I;
    if (point.kind == ModelKind::SIRS) {
        j["R*"] = point.R;
    }
    j["rates"] = {{"lambda", point.lambda}, {"gamma", point.gamma}, {"mu", point.mu}};
    if (!point.note.empty()) {
        j["note"] = point.note;
    }
    j["identities"] = {{"residual1", report.residual1},
                       {"residual2", report.residual2},
                       {"fixed_point_residual", report.fixed_point_residual},
                       {"probes", report.probes},
                       {"ok", report.ok}};
    return j;
}

} // namespace nmepi
