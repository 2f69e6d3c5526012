#include "nmepi/equilibria.h"
#include "nmepi/errors.h"
#include "nmepi/fluid.h"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace nmepi;

TEST_CASE("SIS equilibrium")
{
    const EquilibriumPoint p = sis_equilibrium(2.0, 1.0);
    CHECK(p.classification == EquilibriumClass::Endemic);
    CHECK(p.I == 0.5);
    CHECK(p.S == 0.5);
    const EquilibriumPoint q = sis_equilibrium(1.0, 1.0);
    CHECK(q.classification == EquilibriumClass::Trivial);
    CHECK(q.I == 0.0);
    CHECK_THROWS_AS(sis_equilibrium(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(sis_equilibrium(1.0, -1.0), ValidationError);
}

TEST_CASE("long-run SIS fluid with general periods reaches 1 - mu/lambda")
{
    const auto f = DurationDist::lognormal_with_mean(1.0, 0.5);
    const ModelSpec spec = ModelSpec::sis(ContactRate(2.0), f, 0.1);
    const FluidSolution sol = solve_fluid(spec, TimeGrid(100.0, 0.02));
    CHECK(std::abs(sol.I.back() - 0.5) < 1e-3);
}

TEST_CASE("SIRS equilibrium")
{
    const EquilibriumPoint p = sirs_equilibrium(3.0, 1.0, 2.0);
    CHECK(p.classification == EquilibriumClass::Endemic);
    CHECK(p.S == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(p.I == doctest::Approx(4.0 / 9.0).epsilon(1e-15));
    CHECK(p.R == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
    // lambda (1 - I - R) = gamma and mu R = gamma I.
    CHECK(3.0 * (1.0 - p.I - p.R) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(2.0 * p.R == doctest::Approx(p.I).epsilon(1e-15));

    const EquilibriumPoint near = sirs_equilibrium(3.0, 3.0 * (1.0 - 1e-9), 2.0);
    CHECK(near.I < 1e-8);
    CHECK(near.S > 1.0 - 1e-8);

    const EquilibriumPoint triv = sirs_equilibrium(1.0, 2.0, 1.0);
    CHECK(triv.classification == EquilibriumClass::Trivial);
    CHECK(triv.S == 1.0);
    CHECK_FALSE(triv.note.empty());
    CHECK_THROWS_AS(sirs_equilibrium(1.0, 0.0, 1.0), ValidationError);
}

TEST_CASE("SIRS point sums to one and is monotone in the rates")
{
    const double eps = std::numeric_limits<double>::epsilon();
    auto lam = [](int i) { return 0.5 + 0.5 * i; };
    auto gam = [](int j) { return 0.2 + 0.3 * j; };
    auto mu = [](int k) { return 0.25 + 0.4 * k; };
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            for (int k = 0; k < 10; ++k) {
                const EquilibriumPoint p = sirs_equilibrium(lam(i), gam(j), mu(k));
                CHECK(p.S >= 0.0);
                CHECK(p.I >= 0.0);
                CHECK(p.R >= 0.0);
                CHECK(std::abs(p.S + p.I + p.R - 1.0) <= 2.0 * eps);
                if (p.classification != EquilibriumClass::Endemic) {
                    continue;
                }
                if (i + 1 < 10) {
                    CHECK(sirs_equilibrium(lam(i + 1), gam(j), mu(k)).I > p.I);
                }
                if (k + 1 < 10) {
                    CHECK(sirs_equilibrium(lam(i), gam(j), mu(k + 1)).I > p.I);
                }
                if (j + 1 < 10) {
                    CHECK(sirs_equilibrium(lam(i), gam(j + 1), mu(k)).I < p.I);
                }
            }
        }
    }
}

TEST_CASE("identity checks")
{
    const TimeGrid grid(50.0, 0.001);
    const EquilibriumPoint p = sirs_equilibrium(3.0, 1.0, 2.0);
    const IdentityReport rep =
        verify_equilibrium_identities(p, DurationDist::exponential(1.0), DurationDist::exponential(2.0), grid);
    CHECK(rep.residual1 < 1e-10);
    CHECK(rep.residual2 < 1e-10);
    CHECK(rep.fixed_point_residual < 1e-6);
    CHECK(rep.probes == 50);
    CHECK(rep.ok);

    // General laws with the right means: the point only depends on gamma and mu.
    const auto g = DurationDist::gamma(2.0, 2.0);
    const auto f = DurationDist::weibull(1.5, 0.5 / std::tgamma(1.0 + 1.0 / 1.5));
    const EquilibriumPoint pg = sirs_equilibrium(3.0, 1.0 / g.mean(), 1.0 / f.mean());
    const IdentityReport rg = verify_equilibrium_identities(pg, g, f, TimeGrid(20.0, 0.005), 1e-4);
    CHECK(rg.ok);

    const EquilibriumPoint triv = sirs_equilibrium(1.0, 2.0, 1.0);
    const IdentityReport rt = verify_equilibrium_identities(triv, DurationDist::exponential(2.0),
                                                            DurationDist::exponential(1.0), TimeGrid(10.0, 0.01));
    CHECK(rt.residual1 == 0.0);
    CHECK(rt.residual2 == 0.0);

    const IdentityReport rs = verify_equilibrium_identities(sis_equilibrium(2.0, 1.0),
                                                            DurationDist::lognormal_with_mean(1.0, 0.5),
                                                            DurationDist::exponential(1.0), TimeGrid(20.0, 0.01));
    CHECK(rs.ok);

    // A point that is not an equilibrium is reported, not thrown.
    EquilibriumPoint wrong = p;
    wrong.I += 0.01;
    wrong.S -= 0.01;
    const IdentityReport rw = verify_equilibrium_identities(
        wrong, DurationDist::exponential(1.0), DurationDist::exponential(2.0), TimeGrid(10.0, 0.01));
    CHECK_FALSE(rw.ok);
    CHECK(rw.residual1 > 1e-3);
}

TEST_CASE("equilibrium JSON")
{
    const EquilibriumPoint p = sirs_equilibrium(3.0, 1.0, 2.0);
    IdentityReport rep;
    rep.residual1 = 1e-17;
    const nlohmann::json j = to_json(p, rep);
    CHECK(j["kind"] == "SIRS");
    CHECK(j["classification"] == "endemic");
    CHECK(j.contains("S*"));
    CHECK(j.contains("I*"));
    CHECK(j.contains("R*"));
    CHECK(j["identities"].contains("residual1"));
    CHECK(j["identities"].contains("residual2"));
    CHECK_FALSE(to_json(sis_equilibrium(2.0, 1.0), rep).contains("R*"));
}
