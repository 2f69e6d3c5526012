#include "nmepi/distributions.h"

#include "nmepi/errors.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

namespace nmepi {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double normal_cdf(double x)
{
    return 0.5 * boost::math::erfc(-x / std::numbers::sqrt2);
}

void require(bool ok, const std::string& message)
{
    if (!ok) {
        throw ValidationError(message);
    }
}

bool finite_nonneg(double x)
{
    return std::isfinite(x) && x >= 0.0;
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double empirical_cdf(const DurationDist::PiecewiseEmpirical& e, double t)
{
    if (t < e.t.front()) {
        return 0.0;
    }
    if (t >= e.t.back()) {
        return 1.0;
    }
    const auto it = std::upper_bound(e.t.begin(), e.t.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - e.t.begin()) - 1;
    const double w = (t - e.t[i]) / (e.t[i + 1] - e.t[i]);
    return e.cdf[i] + w * (e.cdf[i + 1] - e.cdf[i]);
}

} // namespace

DurationDist DurationDist::exponential(double rate)
{
    require(std::isfinite(rate) && rate > 0.0, "exponential rate must be positive");
    return DurationDist(Exponential{rate});
}

DurationDist DurationDist::deterministic(double value)
{
    require(finite_nonneg(value), "deterministic value must be finite and nonnegative");
    return DurationDist(Deterministic{value});
}

DurationDist DurationDist::uniform(double lo, double hi)
{
    require(finite_nonneg(lo) && std::isfinite(hi) && hi > lo, "uniform needs 0 <= lo < hi");
    return DurationDist(Uniform{lo, hi});
}

DurationDist DurationDist::gamma(double shape, double rate)
{
    require(std::isfinite(shape) && shape > 0.0 && std::isfinite(rate) && rate > 0.0,
            "gamma shape and rate must be positive");
    return DurationDist(Gamma{shape, rate});
}

DurationDist DurationDist::lognormal(double mu, double sigma)
{
    require(std::isfinite(mu) && std::isfinite(sigma) && sigma > 0.0, "lognormal sigma must be positive");
    return DurationDist(LogNormal{mu, sigma});
}

DurationDist DurationDist::lognormal_with_mean(double mean, double sigma)
{
    require(std::isfinite(mean) && mean > 0.0, "lognormal mean must be positive");
    return lognormal(std::log(mean) - 0.5 * sigma * sigma, sigma);
}

DurationDist DurationDist::weibull(double shape, double scale)
{
    require(std::isfinite(shape) && shape > 0.0 && std::isfinite(scale) && scale > 0.0,
            "weibull shape and scale must be positive");
    return DurationDist(Weibull{shape, scale});
}

DurationDist DurationDist::empirical(std::vector<double> t, std::vector<double> cdf)
{
    require(t.size() == cdf.size() && t.size() >= 2, "empirical law needs at least two (t, F) knots");
    require(finite_nonneg(t[0]), "empirical knots must be nonnegative");
    for (std::size_t i = 0; i < t.size(); ++i) {
        require(std::isfinite(t[i]) && cdf[i] >= 0.0 && cdf[i] <= 1.0, "empirical CDF values must lie in [0, 1]");
        if (i > 0) {
            require(t[i] > t[i - 1], "empirical knots must be strictly increasing");
            require(cdf[i] >= cdf[i - 1], "empirical CDF must be nondecreasing");
        }
    }
    require(cdf.back() == 1.0, "empirical CDF must end at 1");
    return DurationDist(PiecewiseEmpirical{std::move(t), std::move(cdf)});
}

DurationDist DurationDist::stationary_excess(const DurationDist& base)
{
    const double m = base.mean();
    require(std::isfinite(m) && m > 0.0, "equilibrium law needs a finite positive mean");
    return DurationDist(StationaryExcess{std::make_shared<const DurationDist>(base)});
}

DurationDist DurationDist::from_record(const std::string& family, std::span<const double> params)
{
    const std::string f = lower(family);
    auto count = [&](std::size_t k) {
        require(params.size() == k, "family '" + f + "' expects " + std::to_string(k) + " params, got " +
                                        std::to_string(params.size()));
    };
    if (f == "exponential") {
        count(1);
        return exponential(params[0]);
    }
    if (f == "deterministic") {
        count(1);
        return deterministic(params[0]);
    }
    if (f == "uniform") {
        count(2);
        return uniform(params[0], params[1]);
    }
    if (f == "gamma") {
        count(2);
        return gamma(params[0], params[1]);
    }
    if (f == "lognormal") {
        count(2);
        return lognormal(params[0], params[1]);
    }
    if (f == "weibull") {
        count(2);
        return weibull(params[0], params[1]);
    }
    if (f == "empirical") {
        require(params.size() % 2 == 0, "empirical params must be (t, F) pairs");
        std::vector<double> t, c;
        for (std::size_t i = 0; i < params.size(); i += 2) {
            t.push_back(params[i]);
            c.push_back(params[i + 1]);
        }
        return empirical(std::move(t), std::move(c));
    }
    throw ValidationError("unknown distribution family '" + family + "'");
}

double DurationDist::cdf(double t) const
{
    return std::visit(
        Overloaded{
            [t](const Exponential& d) { return t <= 0.0 ? 0.0 : -std::expm1(-d.rate * t); },
            [t](const Deterministic& d) { return t >= d.value ? 1.0 : 0.0; },
            [t](const Uniform& d) { return std::clamp((t - d.lo) / (d.hi - d.lo), 0.0, 1.0); },
            [t](const Gamma& d) { return t <= 0.0 ? 0.0 : boost::math::gamma_p(d.shape, d.rate * t); },
            [t](const LogNormal& d) { return t <= 0.0 ? 0.0 : normal_cdf((std::log(t) - d.mu) / d.sigma); },
            [t](const Weibull& d) { return t <= 0.0 ? 0.0 : -std::expm1(-std::pow(t / d.scale, d.shape)); },
            [t](const PiecewiseEmpirical& d) { return empirical_cdf(d, t); },
            [t](const StationaryExcess& d) {
                return t <= 0.0 ? 0.0 : std::min(1.0, d.base->integrated_survival(t) / d.base->mean());
            },
        },
        family_);
}

double DurationDist::cdf_left(double t) const
{
    double f = cdf(t);
    for (const Atom& a : atoms()) {
        if (a.at == t) {
            f -= a.mass;
        }
    }
    return std::max(0.0, f);
}

double DurationDist::density(double t) const
{
    if (t < 0.0) {
        return 0.0;
    }
    return std::visit(
        Overloaded{
            [t](const Exponential& d) { return d.rate * std::exp(-d.rate * t); },
            [](const Deterministic&) { return 0.0; },
            [t](const Uniform& d) { return (t >= d.lo && t <= d.hi) ? 1.0 / (d.hi - d.lo) : 0.0; },
            [t](const Gamma& d) {
                return t == 0.0 && d.shape < 1.0 ? std::numeric_limits<double>::infinity()
                                                 : d.rate * boost::math::gamma_p_derivative(d.shape, d.rate * t);
            },
            [t](const LogNormal& d) {
                if (t == 0.0) {
                    return 0.0;
                }
                const double z = (std::log(t) - d.mu) / d.sigma;
                return std::exp(-0.5 * z * z) / (t * d.sigma * std::sqrt(2.0 * std::numbers::pi));
            },
            [t](const Weibull& d) {
                const double x = t / d.scale;
                return d.shape / d.scale * std::pow(x, d.shape - 1.0) * std::exp(-std::pow(x, d.shape));
            },
            [t](const PiecewiseEmpirical& d) {
                if (t < d.t.front() || t >= d.t.back()) {
                    return 0.0;
                }
                const auto it = std::upper_bound(d.t.begin(), d.t.end(), t);
                const std::size_t i = static_cast<std::size_t>(it - d.t.begin()) - 1;
                return (d.cdf[i + 1] - d.cdf[i]) / (d.t[i + 1] - d.t[i]);
            },
            [t](const StationaryExcess& d) { return d.base->survival(t) / d.base->mean(); },
        },
        family_);
}

std::vector<Atom> DurationDist::atoms() const
{
    if (const auto* d = std::get_if<Deterministic>(&family_)) {
        return {Atom{d->value, 1.0}};
    }
    if (const auto* e = std::get_if<PiecewiseEmpirical>(&family_)) {
        if (e->cdf.front() > 0.0) {
            return {Atom{e->t.front(), e->cdf.front()}};
        }
    }
    return {};
}

bool DurationDist::is_zero() const
{
    const auto* d = std::get_if<Deterministic>(&family_);
    return d != nullptr && d->value == 0.0;
}

double DurationDist::mean() const
{
    return raw_moment(1);
}

double DurationDist::raw_moment(int k) const
{
    require(k >= 1, "moment order must be positive");
    const double j = k;
    return std::visit(
        Overloaded{
            [j](const Exponential& d) { return std::tgamma(j + 1.0) / std::pow(d.rate, j); },
            [j](const Deterministic& d) { return std::pow(d.value, j); },
            [j](const Uniform& d) {
                return (std::pow(d.hi, j + 1.0) - std::pow(d.lo, j + 1.0)) / ((j + 1.0) * (d.hi - d.lo));
            },
            [j](const Gamma& d) {
                double m = 1.0;
                for (int i = 0; i < static_cast<int>(j); ++i) {
                    m *= (d.shape + i) / d.rate;
                }
                return m;
            },
            [j](const LogNormal& d) { return std::exp(j * d.mu + 0.5 * j * j * d.sigma * d.sigma); },
            [j](const Weibull& d) { return std::pow(d.scale, j) * std::tgamma(1.0 + j / d.shape); },
            [j](const PiecewiseEmpirical& d) {
                double m = d.cdf.front() * std::pow(d.t.front(), j);
                for (std::size_t i = 0; i + 1 < d.t.size(); ++i) {
                    const double slope = (d.cdf[i + 1] - d.cdf[i]) / (d.t[i + 1] - d.t[i]);
                    m += slope * (std::pow(d.t[i + 1], j + 1.0) - std::pow(d.t[i], j + 1.0)) / (j + 1.0);
                }
                return m;
            },
            [k](const StationaryExcess& d) {
                return d.base->raw_moment(k + 1) / ((k + 1.0) * d.base->mean());
            },
        },
        family_);
}

double DurationDist::integrated_survival(double t) const
{
    if (t <= 0.0) {
        return 0.0;
    }
    return std::visit(
        Overloaded{
            [t](const Exponential& d) { return -std::expm1(-d.rate * t) / d.rate; },
            [t](const Deterministic& d) { return std::min(t, d.value); },
            [t](const Uniform& d) {
                if (t <= d.lo) {
                    return t;
                }
                if (t >= d.hi) {
                    return 0.5 * (d.lo + d.hi);
                }
                const double w = d.hi - d.lo;
                return d.lo + (w * w - (d.hi - t) * (d.hi - t)) / (2.0 * w);
            },
            [t](const Gamma& d) {
                const double x = d.rate * t;
                return d.shape / d.rate * boost::math::gamma_p(d.shape + 1.0, x) +
                       t * boost::math::gamma_q(d.shape, x);
            },
            [t](const LogNormal& d) {
                const double m = std::exp(d.mu + 0.5 * d.sigma * d.sigma);
                const double lt = std::log(t);
                return m * normal_cdf((lt - d.mu - d.sigma * d.sigma) / d.sigma) +
                       t * (1.0 - normal_cdf((lt - d.mu) / d.sigma));
            },
            [t](const Weibull& d) {
                const double a = 1.0 + 1.0 / d.shape;
                const double x = std::pow(t / d.scale, d.shape);
                return d.scale * std::tgamma(a) * boost::math::gamma_p(a, x) + t * std::exp(-x);
            },
            [t](const PiecewiseEmpirical& d) {
                double acc = std::min(t, d.t.front());
                for (std::size_t i = 0; i + 1 < d.t.size() && d.t[i] < t; ++i) {
                    const double b = std::min(t, d.t[i + 1]);
                    const double fb = empirical_cdf(d, b);
                    acc += 0.5 * ((1.0 - d.cdf[i]) + (1.0 - fb)) * (b - d.t[i]);
                }
                return acc;
            },
            [t](const StationaryExcess& d) {
                // integral_0^t F_e^c = t - (1/m) integral_0^t (t - u) F^c(u) du
                const DurationDist& b = *d.base;
                std::vector<double> cuts{0.0};
                for (const Atom& a : b.atoms()) {
                    if (a.at > 0.0 && a.at < t) {
                        cuts.push_back(a.at);
                    }
                }
                cuts.push_back(t);
                double acc = 0.0;
                auto f = [&](double u) { return (t - u) * b.survival(u); };
                for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                    acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 15,
                                                                                         1e-14);
                }
                return t - acc / b.mean();
            },
        },
        family_);
}

double DurationDist::quantile(double u) const
{
    if (u <= 0.0) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = std::max(1.0, mean());
    while (cdf(hi) < u) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) {
            return hi;
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) >= u) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

double DurationDist::sample(Rng& rng) const
{
    return std::visit(
        Overloaded{
            [&rng](const Exponential& d) { return std::exponential_distribution<double>(d.rate)(rng); },
            [](const Deterministic& d) { return d.value; },
            [&rng](const Uniform& d) { return std::uniform_real_distribution<double>(d.lo, d.hi)(rng); },
            [&rng](const Gamma& d) { return std::gamma_distribution<double>(d.shape, 1.0 / d.rate)(rng); },
            [&rng](const LogNormal& d) { return std::lognormal_distribution<double>(d.mu, d.sigma)(rng); },
            [&rng](const Weibull& d) { return std::weibull_distribution<double>(d.shape, d.scale)(rng); },
            [&rng](const PiecewiseEmpirical& d) {
                const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                if (u <= d.cdf.front()) {
                    return d.t.front();
                }
                const auto it = std::lower_bound(d.cdf.begin(), d.cdf.end(), u);
                const std::size_t i = static_cast<std::size_t>(it - d.cdf.begin());
                const double w = (u - d.cdf[i - 1]) / (d.cdf[i] - d.cdf[i - 1]);
                return d.t[i - 1] + w * (d.t[i] - d.t[i - 1]);
            },
            [this, &rng](const StationaryExcess& d) {
                // Excess = U * (length-biased draw) where a closed form exists.
                std::uniform_real_distribution<double> unif(0.0, 1.0);
                const auto& base = d.base->family();
                if (const auto* e = std::get_if<Exponential>(&base)) {
                    return std::exponential_distribution<double>(e->rate)(rng);
                }
                if (const auto* det = std::get_if<Deterministic>(&base)) {
                    return det->value * unif(rng);
                }
                if (const auto* g = std::get_if<Gamma>(&base)) {
                    const double x = std::gamma_distribution<double>(g->shape + 1.0, 1.0 / g->rate)(rng);
                    return unif(rng) * x;
                }
                if (const auto* ln = std::get_if<LogNormal>(&base)) {
                    const double x =
                        std::lognormal_distribution<double>(ln->mu + ln->sigma * ln->sigma, ln->sigma)(rng);
                    return unif(rng) * x;
                }
                if (const auto* un = std::get_if<Uniform>(&base)) {
                    const double v = unif(rng);
                    const double x = std::sqrt(un->lo * un->lo + v * (un->hi * un->hi - un->lo * un->lo));
                    return unif(rng) * x;
                }
                return quantile(unif(rng));
            },
        },
        family_);
}

std::string DurationDist::family_name() const
{
    return std::visit(Overloaded{
                          [](const Exponential&) { return std::string("exponential"); },
                          [](const Deterministic&) { return std::string("deterministic"); },
                          [](const Uniform&) { return std::string("uniform"); },
                          [](const Gamma&) { return std::string("gamma"); },
                          [](const LogNormal&) { return std::string("lognormal"); },
                          [](const Weibull&) { return std::string("weibull"); },
                          [](const PiecewiseEmpirical&) { return std::string("empirical"); },
                          [](const StationaryExcess&) { return std::string("equilibrium"); },
                      },
                      family_);
}

std::vector<double> DurationDist::params() const
{
    return std::visit(Overloaded{
                          [](const Exponential& d) { return std::vector<double>{d.rate}; },
                          [](const Deterministic& d) { return std::vector<double>{d.value}; },
                          [](const Uniform& d) { return std::vector<double>{d.lo, d.hi}; },
                          [](const Gamma& d) { return std::vector<double>{d.shape, d.rate}; },
                          [](const LogNormal& d) { return std::vector<double>{d.mu, d.sigma}; },
                          [](const Weibull& d) { return std::vector<double>{d.shape, d.scale}; },
                          [](const PiecewiseEmpirical& d) {
                              std::vector<double> p;
                              for (std::size_t i = 0; i < d.t.size(); ++i) {
                                  p.push_back(d.t[i]);
                                  p.push_back(d.cdf[i]);
                              }
                              return p;
                          },
                          [](const StationaryExcess&) { return std::vector<double>{}; },
                      },
                      family_);
}

DurationDist equilibrium_dist(const DurationDist& d)
{
    const double m = d.mean();
    if (!(std::isfinite(m) && m > 0.0)) {
        throw ValidationError("equilibrium law needs a finite positive mean, got " + std::to_string(m));
    }
    if (d.is_exponential()) {
        return d;
    }
    if (const auto* det = std::get_if<DurationDist::Deterministic>(&d.family())) {
        return DurationDist::uniform(0.0, det->value);
    }
    return DurationDist::stationary_excess(d);
}

JointDurationDist::JointDurationDist(DurationDist first, std::vector<Bucket> buckets, bool independent)
    : first_(std::move(first)), buckets_(std::move(buckets)), independent_(independent)
{
}

JointDurationDist JointDurationDist::independent(DurationDist first, DurationDist second)
{
    return JointDurationDist(std::move(first), {Bucket{0.0, std::move(second)}}, true);
}

JointDurationDist JointDurationDist::conditional(DurationDist first, std::vector<Bucket> buckets)
{
    require(!buckets.empty(), "conditional law needs at least one bucket");
    std::sort(buckets.begin(), buckets.end(), [](const Bucket& a, const Bucket& b) { return a.u < b.u; });
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        require(std::isfinite(buckets[i].u) && buckets[i].u >= 0.0, "bucket centres must be nonnegative");
        if (i > 0) {
            require(buckets[i].u > buckets[i - 1].u, "bucket centres must be distinct");
        }
    }
    const bool single = buckets.size() == 1;
    return JointDurationDist(std::move(first), std::move(buckets), single);
}

std::size_t JointDurationDist::bucket_index(double u) const
{
    if (buckets_.size() == 1) {
        return 0;
    }
    const auto it = std::lower_bound(buckets_.begin(), buckets_.end(), u,
                                     [](const Bucket& b, double x) { return b.u < x; });
    if (it == buckets_.begin()) {
        return 0;
    }
    if (it == buckets_.end()) {
        return buckets_.size() - 1;
    }
    const std::size_t hi = static_cast<std::size_t>(it - buckets_.begin());
    return (u - buckets_[hi - 1].u <= buckets_[hi].u - u) ? hi - 1 : hi;
}

const DurationDist& JointDurationDist::second_given(double u) const
{
    return buckets_[bucket_index(u)].dist;
}

double JointDurationDist::second_marginal_cdf(double v) const
{
    if (is_independent()) {
        return buckets_.front().dist.cdf(v);
    }
    const std::vector<Atom> atoms = first_.atoms();
    auto continuous_cdf = [&](double x) {
        if (!std::isfinite(x)) {
            double m = 1.0;
            for (const Atom& a : atoms) {
                m -= a.mass;
            }
            return m;
        }
        double c = first_.cdf(x);
        for (const Atom& a : atoms) {
            if (a.at <= x) {
                c -= a.mass;
            }
        }
        return c;
    };
    double acc = 0.0;
    for (const Atom& a : atoms) {
        acc += a.mass * second_given(a.at).cdf(v);
    }
    // F(v|u) is constant in u on each bucket cell, so the continuous part integrates exactly.
    double lo = 0.0;
    for (std::size_t b = 0; b < buckets_.size(); ++b) {
        const double hi = b + 1 < buckets_.size() ? 0.5 * (buckets_[b].u + buckets_[b + 1].u)
                                                  : std::numeric_limits<double>::infinity();
        acc += buckets_[b].dist.cdf(v) * (continuous_cdf(hi) - continuous_cdf(lo));
        lo = hi;
    }
    return acc;
}

std::pair<double, double> JointDurationDist::sample(Rng& rng) const
{
    const double xi = first_.sample(rng);
    const double eta = second_given(xi).sample(rng);
    return {xi, eta};
}

} // namespace nmepi
