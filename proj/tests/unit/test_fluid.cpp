#include "nmepi/errors.h"
#include "nmepi/fluid.h"
#include "oracle_values.h"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace nmepi;

namespace {

const Compartment kAll[] = {Compartment::S, Compartment::E, Compartment::I, Compartment::R};

ModelSpec spec_of(ModelKind kind)
{
    const ContactRate lam(std::vector<double>{2.0}, std::vector<double>{1.8, 1.2});
    switch (kind) {
    case ModelKind::SIR:
        return ModelSpec::sir(lam, DurationDist::gamma(2.0, 2.0), 0.05);
    case ModelKind::SIS:
        return ModelSpec::sis(lam, DurationDist::lognormal_with_mean(1.0, 0.5), 0.1);
    case ModelKind::SEIR:
        return ModelSpec::seir(
            lam, JointDurationDist::independent(DurationDist::gamma(2.0, 4.0), DurationDist::weibull(1.5, 1.1)), 0.05,
            0.05);
    case ModelKind::SIRS:
        return ModelSpec::sirs(
            lam, JointDurationDist::independent(DurationDist::exponential(1.0), DurationDist::uniform(0.5, 1.5)), 0.1,
            0.2);
    }
    return {};
}

double self_distance(const FluidSolution& coarse, const FluidSolution& fine)
{
    const std::size_t r = fine.grid.refinement_of(coarse.grid);
    double d = 0.0;
    for (std::size_t k = 0; k < coarse.grid.size(); ++k) {
        d = std::max(d, std::abs(coarse.I[k] - fine.I[k * r]));
    }
    return d;
}

} // namespace

TEST_CASE("zero contact rate")
{
    const auto f0 = DurationDist::gamma(3.0, 2.0);
    const ModelSpec spec = ModelSpec::sir(ContactRate(0.0), DurationDist::exponential(1.0), 0.3, f0);
    const FluidSolution sol = solve_fluid(spec, TimeGrid(5.0, 0.01));
    for (std::size_t k = 0; k < sol.grid.size(); ++k) {
        const double t = sol.grid.time(k);
        CHECK(sol.S[k] == doctest::Approx(0.7).epsilon(1e-14));
        CHECK(sol.I[k] == doctest::Approx(0.3 * f0.survival(t)).epsilon(1e-12));
        CHECK(sol.R[k] == doctest::Approx(0.3 * f0.cdf(t)).epsilon(1e-12));
        CHECK(sol.A[k] == 0.0);
    }
}

TEST_CASE("disease-free fixed point")
{
    const ModelSpec spec = ModelSpec::sir(ContactRate(3.0), DurationDist::gamma(2.0, 2.0), 0.0);
    const FluidSolution sol = solve_fluid(spec, TimeGrid(5.0, 0.05));
    for (std::size_t k = 0; k < sol.grid.size(); ++k) {
        CHECK(sol.S[k] == 1.0);
        CHECK(sol.I[k] == 0.0);
        CHECK(sol.R[k] == 0.0);
    }
}

TEST_CASE("Markovian SIR against the reference ODE values")
{
    const ModelSpec spec = ModelSpec::sir(ContactRate(1.5), DurationDist::exponential(1.0), 0.05);
    const TimeGrid grid(10.0, 0.002);
    const FluidSolution sol = solve_fluid(spec, grid);
    const FluidSolution ode = solve_markovian_ode(ModelKind::SIR, {1.5, 1.0, 1.0}, {0.0, 0.05, 0.0}, grid);
    for (const auto& p : oracle::kMarkovSir) {
        if (p.t > 10.0) {
            continue;
        }
        const std::size_t k = grid.index_of(p.t);
        CAPTURE(p.t);
        CHECK(std::abs(sol.S[k] - p.S) < 1e-5);
        CHECK(std::abs(sol.I[k] - p.I) < 1e-5);
        CHECK(std::abs(sol.A[k] - p.A) < 1e-5);
        CHECK(std::abs(ode.I[k] - p.I) < 1e-10);
        CHECK(std::abs(ode.R[k] - p.R) < 1e-10);
    }
    CHECK(sup_distance(sol, ode, kAll) < 1e-4);
}

TEST_CASE("linear Volterra pair")
{
    const TimeGrid grid(1.0, 0.001);
    const std::size_t n = grid.size();
    const std::vector<double> zero(n, 0.0), one(n, 1.0);
    std::vector<double> x(n), y(n), z(n), w(n), kern(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = grid.time(k);
        x[k] = std::sin(3.0 * t);
        y[k] = 0.5 * t * t;
        z[k] = 1.0 + 0.5 * std::cos(t);
        w[k] = 0.3 - 0.2 * t;
        kern[k] = std::exp(-2.0 * t);
    }

    SUBCASE("decoupled")
    {
        const VolterraPair vp = solve_linear_volterra_2d(0.7, x, y, z, w, 0.0, kern, grid);
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(vp.phi[k] == 0.7 + x[k]);
            CHECK(vp.psi[k] == y[k]);
        }
    }
    SUBCASE("exponential growth")
    {
        const VolterraPair vp = solve_linear_volterra_2d(2.0, zero, zero, one, zero, 1.3, zero, grid);
        double err = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            err = std::max(err, std::abs(vp.phi[k] - 2.0 * std::exp(1.3 * grid.time(k))));
            CHECK(vp.psi[k] == 0.0);
        }
        CHECK(err < 2.0 * grid.dt() * grid.dt() * std::exp(1.3));
    }
    SUBCASE("Picard iteration of the discretized system")
    {
        const double a = 0.4, c = 0.9;
        const VolterraPair vp = solve_linear_volterra_2d(a, x, y, z, w, c, kern, grid);
        CHECK(vp.max_residual < 1e-10);
        std::vector<double> phi(n, a), psi(n, 0.0), f(n);
        const double h = grid.dt();
        for (int it = 0; it < 50; ++it) {
            for (std::size_t k = 0; k < n; ++k) {
                f[k] = c * (phi[k] * z[k] + w[k] * psi[k]);
            }
            std::vector<double> phi2(n), psi2(n);
            for (std::size_t k = 0; k < n; ++k) {
                double s1 = 0.0, s2 = 0.0;
                for (std::size_t j = 0; j <= k; ++j) {
                    const double wt = (j == 0 || j == k) ? 0.5 * h : h;
                    s1 += wt * f[j];
                    s2 += wt * kern[k - j] * f[j];
                }
                phi2[k] = a + x[k] + (k == 0 ? 0.0 : s1);
                psi2[k] = y[k] + (k == 0 ? 0.0 : s2);
            }
            phi.swap(phi2);
            psi.swap(psi2);
        }
        double d = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            d = std::max({d, std::abs(phi[k] - vp.phi[k]), std::abs(psi[k] - vp.psi[k])});
        }
        CHECK(d < 1e-8);
    }
    SUBCASE("length mismatch")
    {
        const std::vector<double> short_x(n - 1, 0.0);
        CHECK_THROWS_AS(solve_linear_volterra_2d(0.0, short_x, y, z, w, 1.0, kern, grid), ValidationError);
    }
}

TEST_CASE("Markovian ODE")
{
    const TimeGrid grid(5.0, 0.001);
    const FluidSolution decay = solve_markovian_ode(ModelKind::SIR, {0.0, 1.0, 0.7}, {0.0, 0.2, 0.0}, grid);
    for (std::size_t k = 0; k < grid.size(); k += 100) {
        CHECK(std::abs(decay.I[k] - 0.2 * std::exp(-0.7 * grid.time(k))) < 1e-10);
    }
    const FluidSolution seir = solve_markovian_ode(ModelKind::SEIR, {2.0, 1.3, 0.8}, {0.05, 0.05, 0.0}, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(std::abs(seir.S[k] + seir.E[k] + seir.I[k] + seir.R[k] - 1.0) < 1e-12);
    }
    const FluidSolution sis =
        solve_markovian_ode(ModelKind::SIS, {2.0, 1.0, 1.0}, {0.0, 0.1, 0.0}, TimeGrid(50.0, 0.001));
    CHECK(std::abs(sis.I.back() - 0.5) < 1e-6);
    CHECK_THROWS_AS(solve_markovian_ode(ModelKind::SIR, {1.0, 1.0, -1.0}, {0.0, 0.1, 0.0}, grid), ValidationError);
}

TEST_CASE("deterministic-delay SIRS")
{
    const TimeGrid grid(4.0, 0.01);
    const FluidSolution lin = solve_deterministic_delay(ModelKind::SIRS, 0.0, 1.5, 1.0, {0.0, 0.3, 0.2}, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.time(k);
        CHECK(lin.I[k] == doctest::Approx(0.3 * std::max(0.0, 1.0 - t / 1.5)).epsilon(1e-9));
    }

    const double lambda = 2.5, xi = 1.0, eta = 1.5;
    const InitialFractions init{0.0, 0.1, 0.2};
    const FluidSolution dde = solve_deterministic_delay(ModelKind::SIRS, lambda, xi, eta, init, grid);
    const ModelSpec spec = ModelSpec::sirs(
        ContactRate(lambda),
        JointDurationDist::independent(DurationDist::deterministic(xi), DurationDist::deterministic(eta)), 0.1, 0.2,
        JointDurationDist::independent(DurationDist::uniform(0.0, xi), DurationDist::deterministic(eta)),
        DurationDist::uniform(0.0, eta));
    const FluidSolution gen = solve_fluid(spec, grid);
    CHECK(sup_distance(dde, gen, kAll) < 1e-6);

    CHECK_THROWS_AS(solve_deterministic_delay(ModelKind::SIRS, 1.0, 0.333, 1.0, init, TimeGrid(2.0, 0.01)),
                    ValidationError);
    CHECK_THROWS_AS(solve_deterministic_delay(ModelKind::SIR, 1.0, 1.0, 1.0, init, grid), ValidationError);
}

TEST_CASE("fluid invariants for every model")
{
    for (ModelKind kind : {ModelKind::SIR, ModelKind::SIS, ModelKind::SEIR, ModelKind::SIRS}) {
        CAPTURE(to_string(kind));
        const ModelSpec spec = spec_of(kind);
        const FluidSolution sol = solve_fluid(spec, TimeGrid(8.0, 0.01));
        const double lam_max = spec.lambda.max();
        for (std::size_t k = 0; k < sol.grid.size(); ++k) {
            for (Compartment c : kAll) {
                CHECK(sol.column(c)[k] >= -1e-12);
                CHECK(sol.column(c)[k] <= 1.0 + 1e-12);
            }
            CHECK(std::abs(sol.S[k] + sol.E[k] + sol.I[k] + sol.R[k] - 1.0) < 1e-8);
            if (kind == ModelKind::SIS) {
                CHECK(sol.S[k] + sol.I[k] == doctest::Approx(1.0).epsilon(1e-14));
            }
            if (kind == ModelKind::SEIR) {
                CHECK(std::abs(sol.E[k] - (sol.E[0] + sol.A[k] - sol.L[k])) < 1e-8);
            }
            if (k > 0) {
                const double da = sol.A[k] - sol.A[k - 1];
                CHECK(da >= 0.0);
                CHECK(da <= lam_max * sol.grid.dt() + 1e-15);
                if (kind == ModelKind::SIR || kind == ModelKind::SEIR) {
                    CHECK(sol.S[k] <= sol.S[k - 1]);
                }
            }
        }
    }
}

TEST_CASE("second-order convergence under refinement")
{
    for (ModelKind kind : {ModelKind::SIR, ModelKind::SEIR}) {
        CAPTURE(to_string(kind));
        ModelSpec spec = spec_of(kind);
        spec.lambda = ContactRate(1.8);
        const FluidSolution a = solve_fluid(spec, TimeGrid(4.0, 0.04));
        const FluidSolution b = solve_fluid(spec, TimeGrid(4.0, 0.02));
        const FluidSolution c = solve_fluid(spec, TimeGrid(4.0, 0.01));
        const double ratio = self_distance(a, c) / self_distance(b, c);
        // (4 - 1) / (1 - 1/4) for an exact second-order error.
        CHECK(ratio > 3.0);
        CHECK(ratio < 6.0);
    }
}

TEST_CASE("within-step iteration start does not matter")
{
    for (ModelKind kind : {ModelKind::SIR, ModelKind::SIS, ModelKind::SEIR, ModelKind::SIRS}) {
        CAPTURE(to_string(kind));
        const ModelSpec spec = spec_of(kind);
        FluidOptions prev, extra;
        extra.solver.extrapolate_start = true;
        const TimeGrid grid(6.0, 0.01);
        const FluidSolution a = solve_fluid(spec, grid, prev);
        const FluidSolution b = solve_fluid(spec, grid, extra);
        CHECK(sup_distance(a, b, kAll) < 1e-10);
    }
}

TEST_CASE("non-convergence is reported")
{
    FluidOptions opt;
    opt.solver.tolerance = 0.0;
    opt.solver.max_iterations = 1;
    const ModelSpec spec = ModelSpec::sir(ContactRate(2.0), DurationDist::gamma(2.0, 2.0), 0.1);
    try {
        solve_fluid(spec, TimeGrid(1.0, 0.1), opt);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("SEIR with an instantaneous latent period reduces to SIR")
{
    const auto f = DurationDist::gamma(2.0, 2.0);
    const ModelSpec sir = ModelSpec::sir(ContactRate(1.7), f, 0.08);
    const ModelSpec seir = ModelSpec::seir(ContactRate(1.7),
                                           JointDurationDist::independent(DurationDist::deterministic(0.0), f), 0.0,
                                           0.08);
    const TimeGrid grid(6.0, 0.01);
    const FluidSolution a = solve_fluid(sir, grid);
    const FluidSolution b = solve_fluid(seir, grid);
    CHECK(sup_distance(a, b, kAll) < 1e-10);
}
