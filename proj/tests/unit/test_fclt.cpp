#include "nmepi/errors.h"
#include "nmepi/fclt.h"
#include "nmepi/harness.h"
#include "oracle_values.h"
#include "test_util.h"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace nmepi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FluidSolution fluid_for(ModelKind kind, const TimeGrid& grid)
{
    const ContactRate lam(1.6);
    switch (kind) {
    case ModelKind::SIR:
        return solve_fluid(ModelSpec::sir(lam, DurationDist::gamma(2.0, 2.0), 0.1), grid);
    case ModelKind::SIS:
        return solve_fluid(ModelSpec::sis(lam, DurationDist::lognormal_with_mean(1.0, 0.5), 0.2), grid);
    case ModelKind::SEIR:
        return solve_fluid(ModelSpec::seir(lam,
                                           JointDurationDist::independent(DurationDist::gamma(2.0, 4.0),
                                                                          DurationDist::weibull(1.5, 1.1)),
                                           0.1, 0.1),
                           grid);
    case ModelKind::SIRS:
        return solve_fluid(ModelSpec::sirs(lam,
                                           JointDurationDist::independent(DurationDist::gamma(2.0, 2.0),
                                                                          DurationDist::uniform(0.2, 1.2)),
                                           0.15, 0.2),
                           grid);
    }
    return {};
}

const ModelKind kKinds[] = {ModelKind::SIR, ModelKind::SIS, ModelKind::SEIR, ModelKind::SIRS};

} // namespace

TEST_CASE("driver naming")
{
    for (ModelKind kind : kKinds) {
        for (Driver d : drivers_of(kind)) {
            CHECK(parse_driver(to_string(d)) == d);
        }
    }
    CHECK(drivers_of(ModelKind::SIR).size() == 5);
    CHECK(drivers_of(ModelKind::SEIR).size() == 11);
    CHECK_THROWS_AS(parse_driver("Q7"), ValidationError);
}

TEST_CASE("covariance examples")
{
    const TimeGrid grid(2.0, 0.01);
    const ModelSpec spec = ModelSpec::sir(ContactRate(1.2), DurationDist::exponential(1.0), 0.4,
                                          DurationDist::uniform(0.0, 2.0));
    const FluidSolution fluid = solve_fluid(spec, grid);
    const DriverCovariance cov(fluid);
    CHECK(cov(Driver::I0, 1.0, Driver::I0, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(cov(Driver::R0, 1.0, Driver::R0, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(cov(Driver::I0, 1.0, Driver::R0, 1.0) == doctest::Approx(-0.1).epsilon(1e-12));
    for (double t : {0.5, 1.0, 2.0}) {
        CHECK(cov(Driver::MA, t, Driver::MA, t) == doctest::Approx(fluid.A[grid.index_of(t)]).epsilon(1e-12));
    }
    // Different sources are independent.
    CHECK(cov(Driver::I0, 1.0, Driver::MA, 1.0) == 0.0);
    CHECK(cov(Driver::R0, 0.5, Driver::I1, 2.0) == 0.0);
    CHECK_THROWS_AS(cov(Driver::E1, 1.0, Driver::MA, 1.0), ValidationError);
    CHECK_THROWS_AS(cov(Driver::MA, 0.333, Driver::MA, 1.0), ValidationError);
}

TEST_CASE("Var(I1(1)) against the white-noise Monte Carlo fixture")
{
    const TimeGrid grid(1.0, 0.001);
    const FluidSolution fluid =
        solve_fluid(ModelSpec::sir(ContactRate(1.5), DurationDist::exponential(1.0), 0.05), grid);
    const double v = driver_covariance(fluid, Driver::I1, 1.0, Driver::I1, 1.0);
    CHECK(v == doctest::Approx(oracle::kVarI1At1MonteCarlo).epsilon(0.01));
    CHECK(v == doctest::Approx(oracle::kVarI1At1Quadrature).epsilon(1e-5));
}

TEST_CASE("white-noise cell variance")
{
    // SIS started at its endemic point: S = I = 1/2 for all t.
    const TimeGrid grid(4.0, 0.01);
    const FluidSolution fluid =
        solve_fluid(ModelSpec::sis(ContactRate(2.0), DurationDist::exponential(1.0), 0.5), grid);
    const DriverCovariance cov(fluid);
    const double lq = 2.0 * 0.25;
    const double a = 0.5, b = 1.5, c = 2.0, d = 3.5;
    const double exact = lq * (std::exp(-c) - std::exp(-d)) * (std::exp(b) - std::exp(a));
    CHECK(cov.white_noise_variance(a, b, -kInf, kInf, c, d) == doctest::Approx(exact).epsilon(1e-4));
    CHECK(cov.white_noise_variance(a, b, -kInf, kInf, c, c) == 0.0);
    CHECK(cov.white_noise_variance(a, b, -kInf, kInf, d, c) == 0.0);
    // Whole duration axis: lambda q (b - a).
    CHECK(cov.white_noise_variance(a, b, -kInf, kInf, -kInf, kInf) == doctest::Approx(lq * (b - a)).epsilon(1e-9));
}

TEST_CASE("covariance symmetry, Cauchy-Schwarz and PSD")
{
    const TimeGrid grid(2.0, 0.02);
    for (ModelKind kind : kKinds) {
        CAPTURE(to_string(kind));
        const FluidSolution fluid = fluid_for(kind, grid);
        const DriverCovariance cov(fluid);
        const auto drivers = drivers_of(kind);
        std::vector<double> probes;
        for (int i = 1; i <= 20; ++i) {
            probes.push_back(0.1 * i);
        }
        for (Driver x : drivers) {
            for (Driver y : drivers) {
                for (double t : probes) {
                    for (double t2 : probes) {
                        const double cxy = cov(x, t, y, t2);
                        REQUIRE(cxy == doctest::Approx(cov(y, t2, x, t)).epsilon(1e-12));
                        const double bound = std::sqrt(std::max(0.0, cov(x, t, x, t) * cov(y, t2, y, t2)));
                        REQUIRE(std::abs(cxy) <= bound * (1.0 + 1e-9) + 1e-14);
                    }
                }
            }
            for (double t : probes) {
                CHECK(cov(x, t, x, t) >= 0.0);
            }
        }
        const Eigen::MatrixXd m = cov.assemble(drivers, {0.4, 0.8, 1.2, 1.6, 2.0});
        CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
        CHECK(min_eig >= -1e-10 * m.diagonal().maxCoeff());
    }
}

TEST_CASE("white-noise additivity of the evaluated formulas")
{
    const TimeGrid grid(2.0, 0.01);
    SUBCASE("SIR")
    {
        const DriverCovariance cov(fluid_for(ModelKind::SIR, grid));
        for (double t : {0.3, 1.0, 2.0}) {
            for (double t2 : {0.5, 1.7}) {
                const double lhs = cov(Driver::MA, t, Driver::MA, t2);
                const double rhs = cov(Driver::I1, t, Driver::I1, t2) + cov(Driver::R1, t, Driver::R1, t2) +
                                   cov(Driver::I1, t, Driver::R1, t2) + cov(Driver::R1, t, Driver::I1, t2);
                CHECK(std::abs(lhs - rhs) < 1e-10);
            }
        }
    }
    SUBCASE("SEIR")
    {
        const DriverCovariance cov(fluid_for(ModelKind::SEIR, grid));
        auto sum_cov = [&](std::vector<Driver> xs, double t, std::vector<Driver> ys, double t2) {
            double s = 0.0;
            for (Driver x : xs) {
                for (Driver y : ys) {
                    s += cov(x, t, y, t2);
                }
            }
            return s;
        };
        for (double t : {0.3, 1.0, 2.0}) {
            CHECK(std::abs(cov(Driver::MA, t, Driver::MA, t) -
                           sum_cov({Driver::E1, Driver::L1}, t, {Driver::E1, Driver::L1}, t)) < 1e-10);
            CHECK(std::abs(cov(Driver::L1, t, Driver::L1, t) -
                           sum_cov({Driver::I1, Driver::R1}, t, {Driver::I1, Driver::R1}, t)) < 1e-10);
            CHECK(std::abs(cov(Driver::MA, t, Driver::L1, 1.5) -
                           sum_cov({Driver::E1, Driver::I1, Driver::R1}, t, {Driver::I1, Driver::R1}, 1.5)) < 1e-10);
        }
        // Initial blocks: L0 = I02 + R02 (initially exposed cohort).
        CHECK(std::abs(cov(Driver::L0, 1.0, Driver::L0, 1.0) -
                       sum_cov({Driver::I02, Driver::R02}, 1.0, {Driver::I02, Driver::R02}, 1.0)) < 1e-12);
        CHECK(cov(Driver::I01, 1.0, Driver::I02, 1.0) == 0.0);
        CHECK(cov(Driver::E0, 1.0, Driver::E1, 1.0) == 0.0);
    }
}

TEST_CASE("SEIR with an instantaneous latent period reproduces SIR covariances")
{
    const TimeGrid grid(2.0, 0.01);
    const auto f = DurationDist::gamma(2.0, 2.0);
    const FluidSolution sir = solve_fluid(ModelSpec::sir(ContactRate(1.4), f, 0.1), grid);
    const FluidSolution seir = solve_fluid(
        ModelSpec::seir(ContactRate(1.4), JointDurationDist::independent(DurationDist::deterministic(0.0), f), 0.0,
                        0.1),
        grid);
    const DriverCovariance a(sir), b(seir);
    const std::pair<Driver, Driver> map[] = {{Driver::MA, Driver::MA},
                                             {Driver::I0, Driver::I01},
                                             {Driver::R0, Driver::R01},
                                             {Driver::I1, Driver::I1},
                                             {Driver::R1, Driver::R1}};
    for (const auto& [x, xs] : map) {
        for (const auto& [y, ys] : map) {
            for (double t : {0.5, 1.0, 2.0}) {
                for (double t2 : {0.25, 1.5}) {
                    CHECK(std::abs(a(x, t, y, t2) - b(xs, t, ys, t2)) < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("sampled drivers: identities and empirical covariance")
{
    const TimeGrid fine(2.0, 0.01);
    const TimeGrid coarse(2.0, 0.2);
    const std::size_t paths = 5000;
    for (ModelKind kind : kKinds) {
        CAPTURE(to_string(kind));
        const FluidSolution fluid = fluid_for(kind, fine);
        const DriverCovariance cov(fluid);
        const DriverSampler sampler(cov, coarse);
        const auto drivers = drivers_of(kind);
        const std::vector<double> times{0.4, 1.0, 1.6, 2.0};
        Eigen::MatrixXd samples(paths, drivers.size() * times.size());
        double identity_gap = 0.0;
        for (std::size_t p = 0; p < paths; ++p) {
            Rng rng(make_stream(321, p));
            const DriverPaths dp = sampler.sample(rng);
            for (std::size_t di = 0; di < drivers.size(); ++di) {
                for (std::size_t ti = 0; ti < times.size(); ++ti) {
                    samples(Eigen::Index(p), Eigen::Index(di * times.size() + ti)) =
                        dp.paths.at(drivers[di])[coarse.index_of(times[ti])];
                }
            }
            for (std::size_t k = 0; k < coarse.size(); ++k) {
                auto at = [&](Driver d) { return dp.paths.at(d)[k]; };
                if (kind == ModelKind::SIR) {
                    identity_gap = std::max(identity_gap, std::abs(at(Driver::MA) - at(Driver::I1) - at(Driver::R1)));
                }
                if (kind == ModelKind::SEIR) {
                    identity_gap = std::max(identity_gap, std::abs(at(Driver::MA) - at(Driver::E1) - at(Driver::L1)));
                    identity_gap = std::max(identity_gap, std::abs(at(Driver::L1) - at(Driver::I1) - at(Driver::R1)));
                }
            }
        }
        CHECK(identity_gap < 1e-12);

        const SampleCovariance sc = sample_covariance(samples);
        const Eigen::MatrixXd analytic = cov.assemble(drivers, times);
        int outside = 0, compared = 0;
        for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
            for (Eigen::Index j = i; j < analytic.cols(); ++j) {
                if (analytic(i, j) == 0.0 && sc.se(i, j) == 0.0) {
                    continue;
                }
                ++compared;
                if (std::abs(sc.cov(i, j) - analytic(i, j)) > 3.0 * sc.se(i, j)) {
                    ++outside;
                    const std::size_t nt = times.size();
                    MESSAGE(to_string(drivers[std::size_t(i) / nt]) << "@" << times[std::size_t(i) % nt] << " x "
                                                                  << to_string(drivers[std::size_t(j) / nt]) << "@"
                                                                  << times[std::size_t(j) % nt]);
                }
            }
        }
        // Per driver: 10 probe pairs (t <= t'), each within 3 SE.
        for (std::size_t di = 0; di < drivers.size(); ++di) {
            for (std::size_t a = 0; a < times.size(); ++a) {
                for (std::size_t b = a; b < times.size(); ++b) {
                    const auto i = Eigen::Index(di * times.size() + a), j = Eigen::Index(di * times.size() + b);
                    CAPTURE(to_string(drivers[di]));
                    CHECK(std::abs(sc.cov(i, j) - analytic(i, j)) <= 3.0 * sc.se(i, j) + 1e-14);
                }
            }
        }
        // Cross-driver entries: at the 3-SE level about 0.3% fall outside by chance.
        CHECK(outside <= std::max(2, compared / 50));
        if (kind == ModelKind::SIR || kind == ModelKind::SEIR) {
            const double a2 = fluid.A[fine.index_of(2.0)];
            const double var_ma = sc.cov(Eigen::Index(3), Eigen::Index(3));
            CHECK(std::abs(var_ma - a2) < 0.05 * a2);
        }
    }
}

TEST_CASE("fluctuation solver: zero forcing and pure decay")
{
    const TimeGrid grid(3.0, 0.01);
    const auto f0 = DurationDist::gamma(2.0, 3.0);
    const FluidSolution fluid =
        solve_fluid(ModelSpec::sir(ContactRate(0.0), DurationDist::exponential(1.0), 0.2, f0), grid);
    DriverPaths zero{grid, {}};
    for (Driver d : drivers_of(ModelKind::SIR)) {
        zero.paths[d].assign(grid.size(), 0.0);
    }
    const FcltPath none = solve_fclt_path(zero, fluid, 0.0, 0.0, 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(none.S[k] == 0.0);
        CHECK(none.I[k] == 0.0);
        CHECK(none.R[k] == 0.0);
    }
    const FcltPath decay = solve_fclt_path(zero, fluid, 0.0, 1.0, 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.time(k);
        CHECK(decay.S[k] == doctest::Approx(-1.0));
        CHECK(decay.I[k] == doctest::Approx(f0.survival(t)).epsilon(1e-12));
        CHECK(decay.R[k] == doctest::Approx(f0.cdf(t)).epsilon(1e-12));
    }
    DriverPaths missing = zero;
    missing.paths.erase(Driver::R1);
    CHECK_THROWS_AS(solve_fclt_path(missing, fluid, 0.0, 0.0, 0.0), ValidationError);
}

TEST_CASE("sampled fluctuation paths conserve mass")
{
    const TimeGrid fine(2.0, 0.01);
    const TimeGrid coarse(2.0, 0.1);
    for (ModelKind kind : {ModelKind::SIR, ModelKind::SEIR, ModelKind::SIS, ModelKind::SIRS}) {
        CAPTURE(to_string(kind));
        const FluidSolution fluid = fluid_for(kind, fine);
        const DriverSampler sampler(DriverCovariance(fluid), coarse);
        FcltInitial init;
        init.infectious = {0.0, 0.5};
        init.exposed.variance = kind == ModelKind::SEIR ? 0.3 : 0.0;
        init.recovered.variance = kind == ModelKind::SIRS ? 0.2 : 0.0;
        for (int p = 0; p < 20; ++p) {
            Rng rng(make_stream(5, std::uint64_t(p)));
            const FcltPath path = sample_fclt_path(sampler, fluid, init, rng);
            for (std::size_t k = 0; k < coarse.size(); ++k) {
                CHECK(std::abs(path.S[k] + path.E[k] + path.I[k] + path.R[k]) < 1e-10);
            }
        }
    }
}

TEST_CASE("SIS SDE")
{
    const double mu = 1.0;
    SUBCASE("zero contact rate: decay plus Ornstein-Uhlenbeck noise")
    {
        const TimeGrid grid(2.0, 0.001);
        const FluidSolution fluid =
            solve_fluid(ModelSpec::sis(ContactRate(0.0), DurationDist::exponential(mu), 0.4), grid);
        const TimeGrid out(2.0, 0.5);
        const double v0 = 0.3;
        const std::size_t paths = 5000;
        std::vector<std::vector<double>> at(out.size(), std::vector<double>(paths));
        std::normal_distribution<double> z(0.0, 1.0);
        for (std::size_t p = 0; p < paths; ++p) {
            Rng rng(make_stream(8, p));
            const double x0 = std::sqrt(v0) * z(rng);
            const auto path = sis_sde_path(0.0, mu, fluid, x0, out, rng);
            for (std::size_t k = 0; k < out.size(); ++k) {
                at[k][p] = path[k];
            }
        }
        for (std::size_t k = 1; k < out.size(); ++k) {
            const double t = out.time(k);
            // int_0^t e^{-2 mu (t-s)} mu 0.4 e^{-mu s} ds = 0.4 (e^{-mu t} - e^{-2 mu t}).
            const double expected = v0 * std::exp(-2 * mu * t) + 0.4 * (std::exp(-mu * t) - std::exp(-2 * mu * t));
            CAPTURE(t);
            CHECK(testutil::variance(at[k]) == doctest::Approx(expected).epsilon(0.05));
        }
    }
    SUBCASE("drift only")
    {
        const TimeGrid grid(3.0, 0.01);
        const FluidSolution fluid =
            solve_fluid(ModelSpec::sis(ContactRate(2.0), DurationDist::exponential(mu), 0.5), grid);
        Rng rng(1);
        const auto path = sis_sde_path(2.0, mu, fluid, 1.0, grid, rng, false);
        double err = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            err = std::max(err, std::abs(path[k] - std::exp(-mu * grid.time(k))));
        }
        CHECK(err < grid.dt());
    }
}
