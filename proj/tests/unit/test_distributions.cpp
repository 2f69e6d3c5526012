#include "nmepi/distributions.h"
#include "nmepi/errors.h"
#include "nmepi/kernels.h"
#include "oracle_values.h"
#include "test_util.h"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace nmepi;

namespace {

std::vector<DurationDist> all_families()
{
    return {DurationDist::exponential(1.3),
            DurationDist::deterministic(0.7),
            DurationDist::uniform(0.2, 1.9),
            DurationDist::gamma(2.0, 1.0),
            DurationDist::lognormal_with_mean(1.0, 0.5),
            DurationDist::weibull(1.5, 1.1),
            DurationDist::empirical({0.0, 1.0, 2.0}, {0.0, 0.3, 1.0}),
            DurationDist::empirical({0.5, 2.0}, {0.2, 1.0}),
            DurationDist::stationary_excess(DurationDist::gamma(2.0, 1.0))};
}

double survival_integral(const DurationDist& d, double upper, double h)
{
    // Midpoint rule; exact for piecewise linear survival away from atoms.
    double s = 0.0;
    for (double t = 0.5 * h; t < upper; t += h) {
        s += d.survival(t) * h;
    }
    return s;
}

} // namespace

TEST_CASE("survival examples")
{
    CHECK(DurationDist::exponential(1.0).survival(0.0) == 1.0);
    const auto det = DurationDist::deterministic(2.0);
    CHECK(det.survival(1.0) == 1.0);
    CHECK(det.survival(2.0) == 0.0);
    CHECK(det.survival_left(2.0) == 1.0);
    CHECK(DurationDist::gamma(2.0, 1.0).survival(1.0) == doctest::Approx(oracle::kGamma21Survival1).epsilon(1e-12));
    for (const auto& d : all_families()) {
        CHECK(d.survival(-0.5) == 1.0);
        CHECK(d.cdf(-1e-9) == 0.0);
    }
}

TEST_CASE("cdf is a distribution function for every family")
{
    for (const auto& d : all_families()) {
        CAPTURE(d.family_name());
        double prev = 0.0;
        for (int k = 0; k <= 1000; ++k) {
            const double t = 6.0 * k / 1000.0;
            const double f = d.cdf(t);
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
            CHECK(f >= prev - 1e-15);
            CHECK(d.survival(t) == 1.0 - f);
            prev = f;
        }
        CHECK(d.cdf(1e3) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("mean equals the integrated survival")
{
    for (const auto& d : all_families()) {
        CAPTURE(d.family_name());
        CHECK(d.mean() == doctest::Approx(survival_integral(d, 40.0, 1e-4)).epsilon(1e-5));
    }
    CHECK(DurationDist::weibull(1.5, 1.1).mean() == doctest::Approx(oracle::kWeibullMean).epsilon(1e-10));
    CHECK(DurationDist::weibull(1.5, 1.1).integrated_survival(1.0) ==
          doctest::Approx(oracle::kWeibullIntSurv1).epsilon(1e-8));
    const auto ln = DurationDist::lognormal_with_mean(1.0, 0.5);
    CHECK(ln.cdf(1.0) == doctest::Approx(oracle::kLogNormalCdf1).epsilon(1e-10));
    CHECK(ln.integrated_survival(2.0) == doctest::Approx(oracle::kLogNormalIntSurv2).epsilon(1e-8));
}

TEST_CASE("atoms")
{
    const auto det = DurationDist::deterministic(0.7);
    REQUIRE(det.atoms().size() == 1);
    CHECK(det.atoms()[0].at == 0.7);
    CHECK(det.atoms()[0].mass == 1.0);
    CHECK(DurationDist::exponential(2.0).atoms().empty());
    CHECK(DurationDist::gamma(2.0, 1.0).atoms().empty());
    CHECK(DurationDist::uniform(0.0, 1.0).atoms().empty());
    CHECK(DurationDist::lognormal(0.0, 1.0).atoms().empty());
    CHECK(DurationDist::weibull(2.0, 1.0).atoms().empty());
    const auto emp = DurationDist::empirical({0.5, 2.0}, {0.2, 1.0});
    REQUIRE(emp.atoms().size() == 1);
    CHECK(emp.atoms()[0].at == 0.5);
    CHECK(emp.atoms()[0].mass == doctest::Approx(0.2));
    CHECK(DurationDist::deterministic(0.0).is_zero());
}

TEST_CASE("equilibrium transform")
{
    const auto e = equilibrium_dist(DurationDist::exponential(2.5));
    for (int k = 0; k <= 100; ++k) {
        const double t = 0.05 * k;
        CHECK(std::abs(e.cdf(t) - DurationDist::exponential(2.5).cdf(t)) <= 1e-12);
    }
    const auto u = equilibrium_dist(DurationDist::deterministic(3.0));
    CHECK(u.family_name() == "uniform");
    CHECK(u.cdf(1.5) == doctest::Approx(0.5));
    CHECK(u.atoms().empty());

    const auto g = equilibrium_dist(DurationDist::gamma(2.0, 1.0));
    CHECK(g.cdf(1.0) == doctest::Approx(oracle::kGamma21EquilibriumCdf1).epsilon(1e-9));
    CHECK(g.atoms().empty());
    // F_e(t) = integral of survival / mean, checked against a midpoint sum.
    const auto w = DurationDist::weibull(1.5, 1.1);
    const auto we = equilibrium_dist(w);
    CHECK(we.cdf(0.8) == doctest::Approx(survival_integral(w, 0.8, 1e-5) / w.mean()).epsilon(1e-8));

    CHECK_THROWS_AS(equilibrium_dist(DurationDist::deterministic(0.0)), ValidationError);
}

TEST_CASE("sampling")
{
    Rng rng(12345);
    const auto det = DurationDist::deterministic(0.4);
    for (int i = 0; i < 100; ++i) {
        CHECK(det.sample(rng) == 0.4);
    }

    std::vector<double> xs(100000);
    const auto ex = DurationDist::exponential(2.0);
    for (auto& x : xs) {
        x = ex.sample(rng);
    }
    // sd of the mean is 0.5 / sqrt(1e5).
    CHECK(std::abs(testutil::mean(xs) - 0.5) < 3.0 * 0.5 / std::sqrt(1e5));

    const auto un = DurationDist::uniform(0.0, 1.0);
    Rng ks_rng(make_stream(99, 0));
    std::vector<double> us(10000);
    for (auto& x : us) {
        x = un.sample(ks_rng);
    }
    CHECK(testutil::ks_statistic(us, [&](double t) { return un.cdf(t); }) < oracle::kKsCritical1pct10k);

    std::uint64_t stream = 1;
    for (const auto& d : all_families()) {
        if (d.has_atoms()) {
            continue;
        }
        CAPTURE(d.family_name());
        Rng family_rng(make_stream(99, stream++));
        std::vector<double> s(10000);
        for (auto& x : s) {
            x = d.sample(family_rng);
            REQUIRE(x >= 0.0);
        }
        CHECK(testutil::ks_statistic(s, [&](double t) { return d.cdf(t); }) < oracle::kKsCritical1pct10k);
    }
}

TEST_CASE("quantile inverts the cdf")
{
    const auto g = DurationDist::gamma(3.0, 2.0);
    for (double u : {0.01, 0.3, 0.5, 0.9, 0.999}) {
        CHECK(g.cdf(g.quantile(u)) == doctest::Approx(u).epsilon(1e-9));
    }
}

TEST_CASE("config records")
{
    const double p[] = {2.0, 1.0};
    CHECK(DurationDist::from_record("gamma", p).mean() == doctest::Approx(2.0));
    CHECK_THROWS_AS(DurationDist::from_record("pareto", p), ValidationError);
    const double one[] = {1.0};
    CHECK_THROWS_AS(DurationDist::from_record("gamma", one), ValidationError);
    CHECK_THROWS_AS(DurationDist::exponential(-1.0), ValidationError);
    CHECK_THROWS_AS(DurationDist::uniform(2.0, 1.0), ValidationError);
}

TEST_CASE("joint law")
{
    const auto ind = JointDurationDist::independent(DurationDist::gamma(2.0, 2.0), DurationDist::weibull(1.5, 1.1));
    CHECK(ind.is_independent());
    for (double u : {0.0, 0.3, 2.0, 10.0}) {
        CHECK(ind.second_given(u).cdf(0.9) == ind.second_given(0.0).cdf(0.9));
    }

    const auto cond = JointDurationDist::conditional(
        DurationDist::uniform(0.0, 2.0),
        {{0.5, DurationDist::exponential(1.0)}, {1.5, DurationDist::deterministic(0.5)}});
    CHECK_FALSE(cond.is_independent());
    CHECK(cond.bucket_index(0.2) == 0);
    CHECK(cond.bucket_index(1.9) == 1);
    // Mixture: half Exp(1), half a point mass at 0.5.
    CHECK(cond.second_marginal_cdf(1.0) == doctest::Approx(0.5 * (1.0 - std::exp(-1.0)) + 0.5).epsilon(1e-9));

    Rng rng(7);
    const int n = 40000;
    int first_below = 0, second_below = 0;
    for (int i = 0; i < n; ++i) {
        const auto [xi, eta] = cond.sample(rng);
        first_below += xi <= 0.7;
        second_below += eta <= 1.0;
    }
    const double p1 = 0.35, p2 = cond.second_marginal_cdf(1.0);
    CHECK(std::abs(first_below / double(n) - p1) < 3.0 * std::sqrt(p1 * (1 - p1) / n));
    CHECK(std::abs(second_below / double(n) - p2) < 3.0 * std::sqrt(p2 * (1 - p2) / n));
}

TEST_CASE("kernels: deterministic periods")
{
    const TimeGrid grid(5.0, 0.1);
    const auto h = JointDurationDist::independent(DurationDist::deterministic(1.0), DurationDist::deterministic(2.0));
    const KernelTable kt = tabulate_kernels(h, h, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.time(k);
        const double expected = (t >= 1.0 - 1e-9 && t < 3.0 - 1e-9) ? 1.0 : 0.0;
        CAPTURE(t);
        CHECK(kt.psi[k] == doctest::Approx(expected));
    }
    CHECK(kt.psi_left[grid.index_of(1.0)] == doctest::Approx(0.0));
    CHECK(kt.phi_left[grid.index_of(3.0)] == doctest::Approx(0.0));
    CHECK(kt.phi[grid.index_of(3.0)] == doctest::Approx(1.0));
}

TEST_CASE("kernels: uniform initial law with deterministic infectious period")
{
    const double xi = 2.0, eta = 0.5;
    const TimeGrid grid(4.0, 0.05);
    const auto h = JointDurationDist::independent(DurationDist::deterministic(xi), DurationDist::deterministic(eta));
    const auto h0 = JointDurationDist::independent(DurationDist::uniform(0.0, xi), DurationDist::deterministic(eta));
    const KernelTable kt = tabulate_kernels(h, h0, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.time(k);
        CAPTURE(t);
        const double general = (std::min(t, xi) - std::min(std::max(t - eta, 0.0), xi)) / xi;
        CHECK(kt.psi0[k] == doctest::Approx(general).epsilon(1e-9));
        if (t <= xi) {
            CHECK(kt.psi0[k] == doctest::Approx((t - std::max(t - eta, 0.0)) / xi).epsilon(1e-9));
        }
    }
}

TEST_CASE("kernels: exponential convolution")
{
    const TimeGrid grid(2.0, 0.001);
    const auto h = JointDurationDist::independent(DurationDist::exponential(1.0), DurationDist::exponential(1.0));
    const KernelTable kt = tabulate_kernels(h, h, grid);
    for (int i = 0; i < 3; ++i) {
        const double t = oracle::kExpExpPhiT[i];
        CHECK(kt.phi[grid.index_of(t)] == doctest::Approx(oracle::kExpExpPhi[i]).epsilon(1e-6));
    }
}

TEST_CASE("kernels: table invariants and brute-force agreement")
{
    const auto g = DurationDist::gamma(2.0, 2.0);
    const auto f = DurationDist::weibull(1.5, 1.1);
    const auto h = JointDurationDist::independent(g, f);
    const auto h0 = JointDurationDist::independent(equilibrium_dist(g), f);
    const TimeGrid grid(3.0, 0.05);
    const KernelTable kt = tabulate_kernels(h, h0, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.time(k);
        const double gt = g.cdf(t);
        CHECK(std::abs(kt.psi[k] + kt.phi[k] - gt) <= 1e-15);
        CHECK(kt.phi[k] >= 0.0);
        CHECK(kt.phi[k] <= gt + 1e-15);
        CHECK(gt <= 1.0);
        if (k > 0) {
            CHECK(kt.phi[k] >= kt.phi[k - 1] - 1e-15);
        }
    }
    // Midpoint double sum on a 10x finer grid: Phi(t) = int_0^t f(t - u) g(u) du.
    double max_err = 0.0;
    const double h_fine = grid.dt() / 10.0;
    for (std::size_t k = 0; k < grid.size(); k += 6) {
        const double t = grid.time(k);
        double brute = 0.0;
        for (double u = 0.5 * h_fine; u < t; u += h_fine) {
            brute += f.cdf(t - u) * g.density(u) * h_fine;
        }
        max_err = std::max(max_err, std::abs(brute - kt.phi[k]));
    }
    CHECK(max_err < grid.dt() * grid.dt());
}

TEST_CASE("kernels: equilibrium identity")
{
    // gamma^{-1} Psi0(t) + int_0^t Psi = int_0^t F^c when G0 = G_e.
    const auto g = DurationDist::gamma(2.0, 2.0);
    const auto f = DurationDist::weibull(1.5, 1.1);
    const TimeGrid grid(5.0, 0.005);
    const KernelTable kt = tabulate_kernels(JointDurationDist::independent(g, f),
                                            JointDurationDist::independent(equilibrium_dist(g), f), grid);
    double int_psi = 0.0, worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (k > 0) {
            int_psi += 0.5 * grid.dt() * (kt.psi[k - 1] + kt.psi[k]);
        }
        const double lhs = g.mean() * kt.psi0[k] + int_psi;
        worst = std::max(worst, std::abs(lhs - f.integrated_survival(grid.time(k))));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("kernels: grid checks")
{
    const auto h = JointDurationDist::independent(DurationDist::deterministic(0.3), DurationDist::deterministic(0.35));
    const double bad[] = {0.0, 0.1, 0.3};
    CHECK_THROWS_AS(tabulate_kernels(h, h, bad), ValidationError);
    const KernelTable coarse = tabulate_kernels(h, h, TimeGrid(1.0, 0.1));
    CHECK_FALSE(coarse.warnings.empty());
    const KernelTable fine = tabulate_kernels(h, h, TimeGrid(1.0, 0.05));
    CHECK(fine.warnings.empty());
}

TEST_CASE("life table")
{
    const auto h = JointDurationDist::independent(DurationDist::exponential(1.0), DurationDist::exponential(2.0));
    const LifeTable lt(h, 0.01, 400);
    for (long i : {0L, 10L, 100L, 399L}) {
        const double s = lt.single(Phase::First, i) + lt.single(Phase::Second, i) + lt.single(Phase::Done, i);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(lt.single(Phase::First, i) == doctest::Approx(std::exp(-0.01 * i)).epsilon(1e-9));
        CHECK(lt.pair(Phase::First, i, Phase::First, i) == doctest::Approx(lt.single(Phase::First, i)));
    }
    // Negative lag: not yet infected, no phase probability.
    CHECK(lt.single(Phase::Second, -3) == 0.0);
}
