#pragma once

#include "nmepi/rng.h"

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace nmepi {

/// Point mass of a duration law.
struct Atom {
    double at;
    double mass;
};

/// Law of a nonnegative duration.
///
/// Immutable after construction. Copies share any nested base law.
class DurationDist {
public:
    struct Exponential {
        double rate;
    };
    struct Deterministic {
        double value;
    };
    struct Uniform {
        double lo, hi;
    };
    struct Gamma {
        double shape, rate;
    };
    struct LogNormal {
        double mu, sigma;
    };
    struct Weibull {
        double shape, scale;
    };
    /// CDF linearly interpolated between knots; a positive value at the first knot is an atom there.
    struct PiecewiseEmpirical {
        std::vector<double> t, cdf;
    };
    /// Stationary-excess law of a base law, for bases without a closed-form transform.
    struct StationaryExcess {
        std::shared_ptr<const DurationDist> base;
    };
    using Family = std::variant<Exponential, Deterministic, Uniform, Gamma, LogNormal, Weibull,
                                PiecewiseEmpirical, StationaryExcess>;

    static DurationDist exponential(double rate);
    static DurationDist deterministic(double value);
    static DurationDist uniform(double lo, double hi);
    static DurationDist gamma(double shape, double rate);
    static DurationDist lognormal(double mu, double sigma);
    /// LogNormal with the given mean and log-scale sigma.
    static DurationDist lognormal_with_mean(double mean, double sigma);
    static DurationDist weibull(double shape, double scale);
    static DurationDist empirical(std::vector<double> t, std::vector<double> cdf);
    /// Stationary-excess law of base, evaluated through its integrated survival.
    static DurationDist stationary_excess(const DurationDist& base);

    /// Builds a law from a config record; empirical params are flattened (t0, F0, t1, F1, ...).
    static DurationDist from_record(const std::string& family, std::span<const double> params);

    double cdf(double t) const;
    /// lim_{s -> t-} F(s).
    double cdf_left(double t) const;
    double survival(double t) const { return 1.0 - cdf(t); }
    double survival_left(double t) const { return 1.0 - cdf_left(t); }
    /// Density of the absolutely continuous part.
    double density(double t) const;
    std::vector<Atom> atoms() const;
    bool has_atoms() const { return !atoms().empty(); }

    double mean() const;
    /// E[X^k] for k >= 1.
    double raw_moment(int k) const;
    /// Integral of the survival function over [0, t].
    double integrated_survival(double t) const;

    double sample(Rng& rng) const;
    /// Smallest x with F(x) >= u, by bisection.
    double quantile(double u) const;

    std::string family_name() const;
    std::vector<double> params() const;
    const Family& family() const { return family_; }

    bool is_exponential() const { return std::holds_alternative<Exponential>(family_); }
    bool is_deterministic() const { return std::holds_alternative<Deterministic>(family_); }
    /// True for the law concentrated at 0.
    bool is_zero() const;

private:
    explicit DurationDist(Family f) : family_(std::move(f)) {}
    Family family_;
};

/// Law with CDF F_e(t) = (1/mean) * integral of the survival function over [0, t].
/// Throws ValidationError when the mean is zero or not finite.
DurationDist equilibrium_dist(const DurationDist& d);

/// Joint law of (xi, eta): first-phase duration and second-phase duration.
class JointDurationDist {
public:
    struct Bucket {
        double u;
        DurationDist dist;
    };

    static JointDurationDist independent(DurationDist first, DurationDist second);
    /// Second-phase law depends on xi through the nearest bucket centre.
    static JointDurationDist conditional(DurationDist first, std::vector<Bucket> buckets);

    const DurationDist& first() const { return first_; }
    /// Law of eta given xi = u.
    const DurationDist& second_given(double u) const;
    bool is_independent() const { return buckets_.size() == 1 && independent_; }
    const std::vector<Bucket>& buckets() const { return buckets_; }
    /// Index of the bucket used for xi = u.
    std::size_t bucket_index(double u) const;

    /// Marginal CDF of eta: integral of F(v|u) dG(u).
    double second_marginal_cdf(double v) const;

    std::pair<double, double> sample(Rng& rng) const;

private:
    JointDurationDist(DurationDist first, std::vector<Bucket> buckets, bool independent);
    DurationDist first_;
    std::vector<Bucket> buckets_;
    bool independent_;
};

} // namespace nmepi
