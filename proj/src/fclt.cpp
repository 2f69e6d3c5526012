#include "nmepi/fclt.h"

#include "nmepi/errors.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace nmepi {

namespace {

constexpr unsigned kFirst = 1u, kSecond = 2u, kDone = 4u;
constexpr long kInf = LifeTable::kInfinity;
constexpr long kNegInf = -2;

const Phase kPhases[3] = {Phase::First, Phase::Second, Phase::Done};

long shift(long idx, long q)
{
    if (idx == kInf) {
        return kInf;
    }
    if (idx == kNegInf) {
        return kNegInf;
    }
    return idx - q;
}

/// Probability that the life course is in a phase of px at lag a and of py at lag b.
double phase_pair(const LifeTable& life, unsigned px, long a, unsigned py, long b, bool strict)
{
    double acc = 0.0;
    for (int x = 0; x < 3; ++x) {
        if (!(px & (1u << x))) {
            continue;
        }
        for (int y = 0; y < 3; ++y) {
            if (py & (1u << y)) {
                acc += life.pair(kPhases[x], a, kPhases[y], b, strict);
            }
        }
    }
    return acc;
}

double phase_single(const LifeTable& life, unsigned px, long a)
{
    double acc = 0.0;
    for (int x = 0; x < 3; ++x) {
        if (px & (1u << x)) {
            acc += life.single(kPhases[x], a);
        }
    }
    return acc;
}

/// Cholesky factor of a PSD block, dropping rows with zero variance and escalating jitter.
Eigen::MatrixXd factorize(const Eigen::MatrixXd& cov, const std::string& label)
{
    const Eigen::Index n = cov.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    const double maxdiag = n > 0 ? cov.diagonal().maxCoeff() : 0.0;
    if (!(maxdiag > 0.0)) {
        return out;
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (cov(i, i) > 1e-14 * maxdiag) {
            keep.push_back(i);
        }
    }
    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            sub(a, b) = cov(keep[a], keep[b]);
        }
    }
    for (double eps : {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8}) {
        Eigen::MatrixXd jittered = sub;
        jittered.diagonal().array() += eps * maxdiag;
        Eigen::LLT<Eigen::MatrixXd> llt(jittered);
        if (llt.info() == Eigen::Success) {
            const Eigen::MatrixXd l = llt.matrixL();
            for (Eigen::Index a = 0; a < m; ++a) {
                for (Eigen::Index b = 0; b < m; ++b) {
                    out(keep[a], keep[b]) = l(a, b);
                }
            }
            return out;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    std::ostringstream os;
    os << label << " covariance block is indefinite beyond the jitter budget; minimum eigenvalue " << min_eig;
    throw NumericalError(os.str(), min_eig);
}

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        r[k] = a[k] + b[k];
    }
    return r;
}

std::vector<double> negate(const std::vector<double>& a)
{
    std::vector<double> r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        r[k] = -a[k];
    }
    return r;
}

} // namespace

std::string to_string(Driver d)
{
    static const char* names[] = {"MA", "E0", "E1", "L0", "L1", "I0", "I1", "R0", "R1", "I01", "I02", "R01", "R02"};
    return names[static_cast<int>(d)];
}

Driver parse_driver(const std::string& name)
{
    std::string u = name;
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
    for (int i = 0; i <= static_cast<int>(Driver::R02); ++i) {
        if (to_string(static_cast<Driver>(i)) == u) {
            return static_cast<Driver>(i);
        }
    }
    throw ValidationError("unknown driver '" + name + "'");
}

std::vector<Driver> drivers_of(ModelKind kind)
{
    using D = Driver;
    switch (kind) {
    case ModelKind::SIR:
        return {D::MA, D::I0, D::R0, D::I1, D::R1};
    case ModelKind::SIS:
        return {D::MA, D::I0, D::I1};
    case ModelKind::SEIR:
        return {D::MA, D::E0, D::L0, D::I01, D::I02, D::R01, D::R02, D::E1, D::L1, D::I1, D::R1};
    case ModelKind::SIRS:
        return {D::MA, D::I0, D::I1, D::R01, D::R02, D::R1};
    }
    return {};
}

DriverCovariance::DriverCovariance(const FluidSolution& fluid) : fluid_(fluid), kind_(fluid.kind)
{
    if (!fluid_.spec) {
        throw ValidationError("driver covariances need a fluid solution that carries its model spec");
    }
    if (fluid_.rate.size() != fluid_.grid.size() || fluid_.rate_left.size() != fluid_.grid.size()) {
        throw ValidationError("fluid solution has no infection-rate path");
    }
    const ModelSpec& spec = *fluid_.spec;
    drivers_ = drivers_of(kind_);
    const double dt = fluid_.grid.dt();
    const std::size_t n = fluid_.grid.steps();
    new_ = LifeTable(spec.life, dt, n);
    second_ = LifeTable(JointDurationDist::independent(DurationDist::deterministic(0.0), spec.initial_second), dt, n);
    second_mass_ = spec.second_phase_fraction();
    if (spec.has_first_phase()) {
        first_ = LifeTable(spec.initial_first, dt, n);
        first_mass_ = spec.first_phase_fraction();
    }
}

bool DriverCovariance::has_driver(Driver d) const
{
    return std::find(drivers_.begin(), drivers_.end(), d) != drivers_.end();
}

Cohort DriverCovariance::cohort_of(Driver d) const
{
    if (!has_driver(d)) {
        throw ValidationError("driver " + to_string(d) + " is not defined for " + to_string(kind_));
    }
    switch (d) {
    case Driver::MA:
    case Driver::E1:
    case Driver::L1:
    case Driver::I1:
    case Driver::R1:
        return Cohort::New;
    case Driver::E0:
    case Driver::L0:
    case Driver::I02:
    case Driver::R02:
        return Cohort::InitialFirst;
    case Driver::I01:
    case Driver::R01:
        return Cohort::InitialSecond;
    case Driver::I0:
        return kind_ == ModelKind::SIRS ? Cohort::InitialFirst : Cohort::InitialSecond;
    case Driver::R0:
        return Cohort::InitialSecond;
    }
    return Cohort::New;
}

unsigned DriverCovariance::phases_of(Driver d) const
{
    const bool sirs = kind_ == ModelKind::SIRS;
    switch (d) {
    case Driver::MA:
        return kFirst | kSecond | kDone;
    case Driver::E1:
    case Driver::E0:
        return kFirst;
    case Driver::L1:
    case Driver::L0:
        return kSecond | kDone;
    case Driver::I1:
    case Driver::I0:
        return sirs ? kFirst : kSecond;
    case Driver::R1:
        return sirs ? kSecond : kDone;
    case Driver::I01:
    case Driver::I02:
        return kSecond;
    case Driver::R0:
    case Driver::R01:
    case Driver::R02:
        return sirs ? kSecond : kDone;
    }
    return 0;
}

const LifeTable& DriverCovariance::life(Cohort c) const
{
    switch (c) {
    case Cohort::New:
        return new_;
    case Cohort::InitialFirst:
        return first_;
    case Cohort::InitialSecond:
        return second_;
    }
    return new_;
}

double DriverCovariance::cohort_mass(Cohort c) const
{
    switch (c) {
    case Cohort::InitialFirst:
        return first_mass_;
    case Cohort::InitialSecond:
        return second_mass_;
    default:
        return 1.0;
    }
}

double DriverCovariance::new_cohort(unsigned px, std::size_t i, unsigned py, std::size_t j) const
{
    const long a = static_cast<long>(i), b = static_cast<long>(j);
    const long top = std::min(a, b);
    const double h = 0.5 * fluid_.grid.dt();
    double acc = 0.0;
    for (long q = 0; q < top; ++q) {
        const double left = phase_pair(new_, px, a - q, py, b - q, true);
        const double right = phase_pair(new_, px, a - q - 1, py, b - q - 1, false);
        acc += h * (left * fluid_.rate[q] + right * fluid_.rate_left[q + 1]);
    }
    return acc;
}

double DriverCovariance::initial_cohort(Cohort c, unsigned px, std::size_t i, unsigned py, std::size_t j) const
{
    const LifeTable& life = c == Cohort::InitialFirst ? first_ : second_;
    const double mass = cohort_mass(c);
    const long a = static_cast<long>(i), b = static_cast<long>(j);
    return mass * (phase_pair(life, px, a, py, b, false) - phase_single(life, px, a) * phase_single(life, py, b));
}

double DriverCovariance::at_nodes(Driver x, std::size_t i, Driver y, std::size_t j) const
{
    const Cohort cx = cohort_of(x);
    const Cohort cy = cohort_of(y);
    if (i >= fluid_.grid.size() || j >= fluid_.grid.size()) {
        throw ValidationError("covariance time index outside the fluid grid");
    }
    if (cx != cy) {
        return 0.0;
    }
    const unsigned px = phases_of(x), py = phases_of(y);
    if (cx == Cohort::New) {
        return new_cohort(px, i, py, j);
    }
    return initial_cohort(cx, px, i, py, j);
}

double DriverCovariance::operator()(Driver x, double t, Driver y, double t2) const
{
    return at_nodes(x, fluid_.grid.index_of(t), y, fluid_.grid.index_of(t2));
}

Eigen::MatrixXd DriverCovariance::assemble(const std::vector<Driver>& drivers, const std::vector<double>& times) const
{
    const auto d = static_cast<Eigen::Index>(drivers.size());
    const auto t = static_cast<Eigen::Index>(times.size());
    std::vector<std::size_t> idx;
    for (double s : times) {
        idx.push_back(fluid_.grid.index_of(s));
    }
    Eigen::MatrixXd m(d * t, d * t);
    for (Eigen::Index i = 0; i < d * t; ++i) {
        for (Eigen::Index j = i; j < d * t; ++j) {
            m(i, j) = at_nodes(drivers[i / t], idx[i % t], drivers[j / t], idx[j % t]);
            m(j, i) = m(i, j);
        }
    }
    return m;
}

double DriverCovariance::white_noise_variance(double a, double b, double c, double d, double e, double f) const
{
    const TimeGrid& g = fluid_.grid;
    auto node = [&](double t) -> long {
        if (t == std::numeric_limits<double>::infinity()) {
            return kInf;
        }
        if (t == -std::numeric_limits<double>::infinity()) {
            return kNegInf;
        }
        return static_cast<long>(g.index_of(t));
    };
    const long ia = std::max(0L, node(a) == kNegInf ? 0L : node(a));
    const long ib = node(b) == kInf ? static_cast<long>(g.steps()) : node(b);
    const long ic = node(c), id = node(d), ie = node(e), jf = node(f);
    const double h = 0.5 * g.dt();
    double acc = 0.0;
    for (long q = ia; q < ib; ++q) {
        const double left = new_.rectangle(shift(ic, q), shift(id, q), shift(ie, q), shift(jf, q), true);
        const double right =
            new_.rectangle(shift(ic, q + 1), shift(id, q + 1), shift(ie, q + 1), shift(jf, q + 1), false);
        acc += h * (left * fluid_.rate[q] + right * fluid_.rate_left[q + 1]);
    }
    return acc;
}

double driver_covariance(const FluidSolution& fluid, Driver x, double t, Driver y, double t2)
{
    return DriverCovariance(fluid)(x, t, y, t2);
}

DriverSampler::DriverSampler(const DriverCovariance& cov, const TimeGrid& grid) : kind_(cov.kind()), grid_(grid)
{
    const TimeGrid& fine = cov.grid();
    const long r = static_cast<long>(fine.refinement_of(grid));
    const long ks = static_cast<long>(grid.steps());
    const LifeTable& life = cov.life(Cohort::New);
    const bool single_phase = !cov.fluid().spec->has_first_phase();
    const double h = 0.5 * fine.dt();

    for (long k = 1; k <= ks; ++k) {
        const long m_hi = single_phase ? k : ks + 1;
        for (long m = k; m <= m_hi; ++m) {
            for (long p = m; p <= ks + 1; ++p) {
                double var = 0.0;
                for (long q = (k - 1) * r; q < k * r; ++q) {
                    auto rect = [&](long s, bool strict) {
                        const long x1 = (m - 1) * r - s;
                        const long x2 = m == ks + 1 ? kInf : m * r - s;
                        const long y1 = (p - 1) * r - s;
                        const long y2 = p == ks + 1 ? kInf : p * r - s;
                        if (single_phase) {
                            // xi = 0: the first-phase window is the infection cell itself.
                            return life.rectangle(kNegInf, kInf, y1, y2, strict);
                        }
                        return life.rectangle(x1, x2, y1, y2, strict);
                    };
                    var += h * (rect(q, true) * cov.rate(static_cast<std::size_t>(q)) +
                                rect(q + 1, false) * cov.rate_left(static_cast<std::size_t>(q + 1)));
                }
                if (var > 0.0) {
                    cells_.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(m),
                                      static_cast<std::uint32_t>(p), std::sqrt(var)});
                }
            }
        }
    }

    const long nodes = ks + 1;
    const double mass2 = cov.cohort_mass(Cohort::InitialSecond);
    if (mass2 > 0.0) {
        const LifeTable& l2 = cov.life(Cohort::InitialSecond);
        Eigen::MatrixXd c(nodes, nodes);
        for (long a = 0; a < nodes; ++a) {
            for (long b = 0; b < nodes; ++b) {
                const long ia = a * r, ib = b * r;
                c(a, b) = mass2 * (l2.pair(Phase::Second, ia, Phase::Second, ib) -
                                   l2.single(Phase::Second, ia) * l2.single(Phase::Second, ib));
            }
        }
        chol_second_ = factorize(c, "initial second-phase");
    } else {
        chol_second_ = Eigen::MatrixXd::Zero(nodes, nodes);
    }
    const double mass1 = cov.cohort_mass(Cohort::InitialFirst);
    if (!single_phase && mass1 > 0.0) {
        const LifeTable& l1 = cov.life(Cohort::InitialFirst);
        Eigen::MatrixXd c(2 * nodes, 2 * nodes);
        const Phase ph[2] = {Phase::First, Phase::Second};
        for (int x = 0; x < 2; ++x) {
            for (int y = 0; y < 2; ++y) {
                for (long a = 0; a < nodes; ++a) {
                    for (long b = 0; b < nodes; ++b) {
                        const long ia = a * r, ib = b * r;
                        c(x * nodes + a, y * nodes + b) =
                            mass1 * (l1.pair(ph[x], ia, ph[y], ib) - l1.single(ph[x], ia) * l1.single(ph[y], ib));
                    }
                }
            }
        }
        chol_first_ = factorize(c, "initial first-phase");
    } else {
        chol_first_ = Eigen::MatrixXd::Zero(2 * nodes, 2 * nodes);
    }
}

DriverPaths DriverSampler::sample(Rng& rng) const
{
    const std::size_t ks = grid_.steps();
    const std::size_t nodes = ks + 1;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> d0(ks + 2, 0.0), d1(ks + 2, 0.0), d2(ks + 2, 0.0);
    for (const Cell& c : cells_) {
        const double z = c.sd * normal(rng);
        d0[c.k] += z;
        d0[c.m] -= z;
        d1[c.m] += z;
        d1[c.p] -= z;
        d2[c.p] += z;
    }
    std::vector<double> e1(nodes), i1(nodes), r1(nodes);
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
        a0 += d0[j];
        a1 += d1[j];
        a2 += d2[j];
        e1[j] = a0;
        i1[j] = a1;
        r1[j] = a2;
    }
    const std::vector<double> l1 = add(i1, r1);
    const std::vector<double> ma = add(e1, l1);

    Eigen::VectorXd z2(static_cast<Eigen::Index>(nodes));
    for (auto& v : z2) {
        v = normal(rng);
    }
    const Eigen::VectorXd v2 = chol_second_ * z2;
    std::vector<double> s2(v2.data(), v2.data() + v2.size());

    DriverPaths out;
    out.grid = grid_;
    auto& p = out.paths;
    p[Driver::MA] = ma;
    switch (kind_) {
    case ModelKind::SIR:
        p[Driver::I1] = i1;
        p[Driver::R1] = r1;
        p[Driver::I0] = s2;
        p[Driver::R0] = negate(s2);
        break;
    case ModelKind::SIS:
        p[Driver::I1] = i1;
        p[Driver::I0] = s2;
        break;
    case ModelKind::SEIR:
    case ModelKind::SIRS: {
        Eigen::VectorXd z1(static_cast<Eigen::Index>(2 * nodes));
        for (auto& v : z1) {
            v = normal(rng);
        }
        const Eigen::VectorXd v1 = chol_first_ * z1;
        std::vector<double> f0(v1.data(), v1.data() + nodes);
        std::vector<double> f1(v1.data() + nodes, v1.data() + 2 * nodes);
        if (kind_ == ModelKind::SEIR) {
            const std::vector<double> fd = negate(add(f0, f1));
            p[Driver::E1] = e1;
            p[Driver::L1] = l1;
            p[Driver::I1] = i1;
            p[Driver::R1] = r1;
            p[Driver::I01] = s2;
            p[Driver::R01] = negate(s2);
            p[Driver::E0] = f0;
            p[Driver::I02] = f1;
            p[Driver::R02] = fd;
            p[Driver::L0] = add(f1, fd);
        } else {
            p[Driver::I1] = e1;
            p[Driver::R1] = i1;
            p[Driver::R01] = s2;
            p[Driver::I0] = f0;
            p[Driver::R02] = f1;
        }
        break;
    }
    }
    return out;
}

DriverPaths sample_drivers(const DriverCovariance& cov, const TimeGrid& grid, Rng& rng)
{
    return DriverSampler(cov, grid).sample(rng);
}

const std::vector<double>& FcltPath::column(Compartment c) const
{
    switch (c) {
    case Compartment::S:
        return S;
    case Compartment::E:
        return E;
    case Compartment::I:
        return I;
    case Compartment::R:
        return R;
    default:
        throw ValidationError("fluctuation paths carry S, E, I, R only");
    }
}

FcltPath solve_fclt_path(const DriverPaths& drivers, const FluidSolution& fluid, double e0, double i0, double r0)
{
    if (!fluid.spec) {
        throw ValidationError("fluctuation solve needs a fluid solution that carries its model spec");
    }
    const ModelSpec& spec = *fluid.spec;
    const TimeGrid& grid = drivers.grid;
    const std::size_t r = fluid.grid.refinement_of(grid);
    const std::size_t n = grid.size();
    auto driver = [&](Driver d) -> const std::vector<double>& {
        const auto it = drivers.paths.find(d);
        if (it == drivers.paths.end()) {
            throw ValidationError("missing driver path " + to_string(d) + " for " + to_string(spec.kind));
        }
        if (it->second.size() != n) {
            throw ValidationError("driver path " + to_string(d) + " does not match the grid");
        }
        return it->second;
    };
    const ModelKernels mk = build_model_kernels(spec, grid);
    const auto& f0c = mk.second_residual_survival;
    const auto& g0c = mk.first_residual_survival;
    std::vector<double> xs(n, 0.0), xe(n, 0.0), xi(n, 0.0), xr(n, 0.0);
    switch (spec.kind) {
    case ModelKind::SIR: {
        const auto &ma = driver(Driver::MA), &di0 = driver(Driver::I0), &di1 = driver(Driver::I1);
        const auto &dr0 = driver(Driver::R0), &dr1 = driver(Driver::R1);
        for (std::size_t k = 0; k < n; ++k) {
            xs[k] = -i0 - ma[k];
            xi[k] = i0 * f0c[k] + di0[k] + di1[k];
            xr[k] = i0 * (1.0 - f0c[k]) + dr0[k] + dr1[k];
        }
        break;
    }
    case ModelKind::SIS: {
        const auto &di0 = driver(Driver::I0), &di1 = driver(Driver::I1);
        for (std::size_t k = 0; k < n; ++k) {
            xi[k] = i0 * f0c[k] + di0[k] + di1[k];
            xs[k] = -xi[k];
        }
        break;
    }
    case ModelKind::SEIR: {
        const auto& ma = driver(Driver::MA);
        const auto &de0 = driver(Driver::E0), &de1 = driver(Driver::E1);
        const auto &di01 = driver(Driver::I01), &di02 = driver(Driver::I02), &di1 = driver(Driver::I1);
        const auto &dr01 = driver(Driver::R01), &dr02 = driver(Driver::R02), &dr1 = driver(Driver::R1);
        for (std::size_t k = 0; k < n; ++k) {
            xs[k] = -i0 - e0 - ma[k];
            xe[k] = e0 * g0c[k] + de0[k] + de1[k];
            xi[k] = i0 * f0c[k] + e0 * mk.psi0[k] + di01[k] + di02[k] + di1[k];
            xr[k] = i0 * (1.0 - f0c[k]) + e0 * mk.phi0[k] + dr01[k] + dr02[k] + dr1[k];
        }
        break;
    }
    case ModelKind::SIRS: {
        const auto &di0 = driver(Driver::I0), &di1 = driver(Driver::I1);
        const auto &dr01 = driver(Driver::R01), &dr02 = driver(Driver::R02), &dr1 = driver(Driver::R1);
        for (std::size_t k = 0; k < n; ++k) {
            xi[k] = i0 * g0c[k] + di0[k] + di1[k];
            xr[k] = r0 * f0c[k] + i0 * mk.psi0[k] + dr01[k] + dr02[k] + dr1[k];
            xs[k] = -xi[k] - xr[k];
        }
        break;
    }
    }
    std::vector<ConvolutionTerm> terms;
    std::vector<int> index;
    auto push = [&](int c, const std::vector<double>& x) {
        terms.push_back({x, {}, mk.kernel[c], mk.kernel_left[c]});
        index.push_back(c);
    };
    push(0, xs);
    if (spec.kind == ModelKind::SEIR) {
        push(1, xe);
    }
    push(2, xi);
    if (spec.kind != ModelKind::SIS) {
        push(3, xr);
    }
    const std::size_t i_pos = spec.kind == ModelKind::SEIR ? 2 : 1;
    auto rate = [&](std::size_t k, std::span<const double> v, bool left) {
        const double t = grid.time(k);
        const double lam = left ? spec.lambda.value_left(t) : spec.lambda.value(t);
        return lam * (v[0] * fluid.I[k * r] + fluid.S[k * r] * v[i_pos]);
    };
    const RateSolveResult raw = solve_rate_system(terms, grid.dt(), grid.steps(), rate);
    if (!raw.converged) {
        throw NumericalError("fluctuation solve did not converge at step " + std::to_string(raw.failed_step),
                             raw.max_residual);
    }
    FcltPath out;
    out.grid = grid;
    out.drivers = drivers.paths;
    out.e0 = e0;
    out.i0 = i0;
    out.r0 = r0;
    std::vector<double>* cols[4] = {&out.S, &out.E, &out.I, &out.R};
    for (auto* c : cols) {
        c->assign(n, 0.0);
    }
    for (std::size_t a = 0; a < index.size(); ++a) {
        *cols[index[a]] = raw.values[a];
    }
    return out;
}

FcltPath sample_fclt_path(const DriverSampler& sampler, const FluidSolution& fluid, const FcltInitial& init, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](const InitialFluctuation& f) {
        if (f.variance < 0.0) {
            throw ValidationError("initial fluctuation variance must be nonnegative");
        }
        return f.variance > 0.0 ? f.value + std::sqrt(f.variance) * normal(rng) : f.value;
    };
    const double e0 = draw(init.exposed);
    const double i0 = draw(init.infectious);
    const double r0 = draw(init.recovered);
    return solve_fclt_path(sampler.sample(rng), fluid, e0, i0, r0);
}

std::vector<double> sis_sde_path(double lambda, double mu, const FluidSolution& fluid, double ihat0,
                                 const TimeGrid& grid, Rng& rng, bool noise)
{
    if (!(lambda >= 0.0) || !(mu > 0.0)) {
        throw ValidationError("SIS fluctuation SDE needs lambda >= 0 and mu > 0");
    }
    const std::size_t r = fluid.grid.refinement_of(grid);
    const double hf = 0.5 * fluid.grid.dt();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(grid.size());
    out[0] = ihat0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double ib = fluid.I[k * r];
        double inf_var = 0.0, rec_var = 0.0;
        for (std::size_t q = k * r; q < (k + 1) * r; ++q) {
            const double a = fluid.I[q], b = fluid.I[q + 1];
            inf_var += hf * lambda * ((1.0 - a) * a + (1.0 - b) * b);
            rec_var += hf * mu * (a + b);
        }
        double next = out[k] + (lambda * (1.0 - 2.0 * ib) - mu) * out[k] * grid.dt();
        if (noise) {
            next += std::sqrt(inf_var) * normal(rng) - std::sqrt(rec_var) * normal(rng);
        }
        out[k + 1] = next;
    }
    return out;
}

} // namespace nmepi
