#include "nmepi/kernels.h"

#include "nmepi/errors.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nmepi {

namespace {

constexpr double kSnap = 1e-9;
constexpr std::size_t kMaxTableSize = 3000;

bool near(double a, double b)
{
    return std::abs(a - b) <= kSnap * std::max(1.0, std::abs(b));
}

/// A joint law evaluated on the lag lattice i * delta, i = 0..n.
struct LawLattice {
    struct AtomInfo {
        double at, mass;
        bool on_grid;
        long c;
        std::size_t bucket;
    };

    const JointDurationDist& h;
    double delta;
    long n;
    std::vector<std::size_t> bucket_of_node;
    std::vector<std::vector<double>> fv, fl;
    std::vector<double> dgc, g, gl;
    std::vector<AtomInfo> atoms;

    LawLattice(const JointDurationDist& law, double d, std::size_t size)
        : h(law), delta(d), n(static_cast<long>(size))
    {
        const auto& buckets = h.buckets();
        fv.assign(buckets.size(), std::vector<double>(size + 1));
        fl.assign(buckets.size(), std::vector<double>(size + 1));
        for (std::size_t b = 0; b < buckets.size(); ++b) {
            for (std::size_t i = 0; i <= size; ++i) {
                const CdfPair p = cdf_at_node(buckets[b].dist, static_cast<double>(i) * delta);
                fv[b][i] = p.value;
                fl[b][i] = p.left;
            }
        }
        bucket_of_node.resize(size + 1);
        for (std::size_t i = 0; i <= size; ++i) {
            bucket_of_node[i] = h.bucket_index(static_cast<double>(i) * delta);
        }
        for (const Atom& a : h.first().atoms()) {
            const double r = a.at / delta;
            const double c = std::round(r);
            const bool on = std::abs(r - c) <= kSnap * std::max(1.0, r);
            atoms.push_back({a.at, a.mass, on, on ? static_cast<long>(c) : static_cast<long>(std::ceil(r)),
                             h.bucket_index(a.at)});
        }
        g.resize(size + 1);
        gl.resize(size + 1);
        std::vector<double> gc(size + 1);
        for (std::size_t i = 0; i <= size; ++i) {
            const double t = static_cast<double>(i) * delta;
            const CdfPair p = cdf_at_node(h.first(), t);
            g[i] = p.value;
            gl[i] = p.left;
            double c = p.value;
            for (const AtomInfo& a : atoms) {
                if (a.c <= static_cast<long>(i)) {
                    c -= a.mass;
                }
            }
            gc[i] = c;
        }
        dgc.resize(size);
        for (std::size_t i = 0; i < size; ++i) {
            dgc[i] = std::max(0.0, gc[i + 1] - gc[i]);
        }
    }

    /// Contribution of cell (c delta, (c+1) delta] of the continuous part of G to J(., j delta).
    double cell(long c, long j) const
    {
        return 0.5 * (fl[bucket_of_node[c]][j - c] + fv[bucket_of_node[c + 1]][j - c - 1]) * dgc[c];
    }

    /// m_a * F(j delta - a | a) (or its left limit).
    double atom_term(const AtomInfo& a, long j, bool left) const
    {
        if (a.on_grid) {
            const long lag = j - a.c;
            if (lag < 0) {
                return 0.0;
            }
            return a.mass * (left ? fl[a.bucket][lag] : fv[a.bucket][lag]);
        }
        const CdfPair p = cdf_at_node(h.buckets()[a.bucket].dist, static_cast<double>(j) * delta - a.at);
        return a.mass * (left ? p.left : p.value);
    }

    /// Whether atom a counts in J(i, .) (xi <= i delta) or in the strict J_(i, .) (xi < i delta).
    static bool included(const AtomInfo& a, long i, bool strict)
    {
        if (a.on_grid) {
            return strict ? a.c < i : a.c <= i;
        }
        return a.c <= i;
    }

    bool has_continuous_part() const
    {
        return std::any_of(dgc.begin(), dgc.end(), [](double x) { return x > 0.0; });
    }
};

std::vector<double> all_atom_positions(const JointDurationDist& h)
{
    std::vector<double> at;
    for (const Atom& a : h.first().atoms()) {
        at.push_back(a.at);
    }
    for (const auto& b : h.buckets()) {
        for (const Atom& a : b.dist.atoms()) {
            at.push_back(a.at);
        }
    }
    return at;
}

void collect_warnings(const JointDurationDist& h, const TimeGrid& grid, const char* label,
                      std::vector<std::string>& out)
{
    std::vector<double> at = all_atom_positions(h);
    for (double a : at) {
        if (!grid.has_node(a) && a <= grid.horizon()) {
            std::ostringstream os;
            os << label << ": atom at " << a << " is not a grid node; kernel jumps are smeared over one step";
            out.push_back(os.str());
        }
    }
    std::sort(at.begin(), at.end());
    at.erase(std::unique(at.begin(), at.end()), at.end());
    for (std::size_t i = 1; i < at.size(); ++i) {
        if (grid.dt() > (at[i] - at[i - 1]) * (1.0 + 1e-9)) {
            std::ostringstream os;
            os << label << ": grid step " << grid.dt() << " exceeds the atom gap " << at[i] - at[i - 1];
            out.push_back(os.str());
            break;
        }
    }
}

} // namespace

CdfPair cdf_at_node(const DurationDist& d, double t)
{
    for (const Atom& a : d.atoms()) {
        if (near(t, a.at)) {
            const double v = d.cdf(a.at);
            return {v, std::max(0.0, v - a.mass)};
        }
    }
    return {d.cdf(t), d.cdf_left(t)};
}

JointDiagonal joint_cdf_diagonal(const JointDurationDist& h, const TimeGrid& grid)
{
    const LawLattice lat(h, grid.dt(), grid.steps());
    const long n = lat.n;
    JointDiagonal out;
    out.value.resize(grid.size());
    out.left.resize(grid.size());
    const bool continuous = lat.has_continuous_part();
    for (long k = 0; k <= n; ++k) {
        double cells = 0.0;
        if (continuous) {
            for (long c = 0; c < k; ++c) {
                cells += lat.cell(c, k);
            }
        }
        double a_val = 0.0, a_left = 0.0;
        for (const auto& a : lat.atoms) {
            if (LawLattice::included(a, k, false)) {
                a_val += lat.atom_term(a, k, false);
            }
            if (LawLattice::included(a, k, true)) {
                a_left += lat.atom_term(a, k, true);
            }
        }
        out.value[k] = std::clamp(cells + a_val, 0.0, 1.0);
        out.left[k] = std::clamp(cells + a_left, 0.0, 1.0);
    }
    return out;
}

KernelTable tabulate_kernels(const JointDurationDist& h, const JointDurationDist& h0, const TimeGrid& grid)
{
    KernelTable table;
    table.grid = grid;
    auto fill = [&](const JointDurationDist& law, std::vector<double>& phi, std::vector<double>& phi_left,
                    std::vector<double>& psi, std::vector<double>& psi_left) {
        const JointDiagonal diag = joint_cdf_diagonal(law, grid);
        phi = diag.value;
        phi_left = diag.left;
        psi.resize(grid.size());
        psi_left.resize(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const CdfPair g = cdf_at_node(law.first(), grid.time(k));
            phi[k] = std::min(phi[k], g.value);
            phi_left[k] = std::min(phi_left[k], g.left);
            if (k > 0) {
                phi[k] = std::max(phi[k], phi[k - 1]);
            }
            psi[k] = g.value - phi[k];
            psi_left[k] = g.left - phi_left[k];
        }
    };
    fill(h, table.phi, table.phi_left, table.psi, table.psi_left);
    fill(h0, table.phi0, table.phi0_left, table.psi0, table.psi0_left);
    collect_warnings(h, grid, "life law", table.warnings);
    collect_warnings(h0, grid, "initial law", table.warnings);
    return table;
}

KernelTable tabulate_kernels(const JointDurationDist& h, const JointDurationDist& h0, std::span<const double> times)
{
    return tabulate_kernels(h, h0, TimeGrid::from_times(times));
}

LifeTable::LifeTable(const JointDurationDist& h, double delta, std::size_t n) : delta_(delta), n_(n)
{
    if (h.first().is_zero()) {
        fast_ = true;
        const DurationDist& f = h.second_given(0.0);
        second_.resize(n + 1);
        second_left_.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            const CdfPair p = cdf_at_node(f, static_cast<double>(i) * delta);
            second_[i] = p.value;
            second_left_[i] = p.left;
        }
        return;
    }
    if (n > kMaxTableSize) {
        throw ValidationError("joint CDF table with " + std::to_string(n) +
                              " lags is too large; use a coarser fluid grid for covariances with a latent phase");
    }
    const LawLattice lat(h, delta, n);
    g_ = lat.g;
    g_left_ = lat.gl;
    const long m = static_cast<long>(n) + 1;
    table_.assign(static_cast<std::size_t>(m * m), 0.0);
    table_strict_.assign(static_cast<std::size_t>(m * m), 0.0);
    const bool continuous = lat.has_continuous_part();
    for (long j = 0; j < m; ++j) {
        std::vector<double> av(lat.atoms.size()), al(lat.atoms.size());
        for (std::size_t a = 0; a < lat.atoms.size(); ++a) {
            av[a] = lat.atom_term(lat.atoms[a], j, false);
            al[a] = lat.atom_term(lat.atoms[a], j, true);
        }
        double cells = 0.0;
        for (long i = 0; i <= j; ++i) {
            double a_val = 0.0, a_left = 0.0;
            for (std::size_t a = 0; a < lat.atoms.size(); ++a) {
                if (LawLattice::included(lat.atoms[a], i, false)) {
                    a_val += av[a];
                }
                if (LawLattice::included(lat.atoms[a], i, true)) {
                    a_left += al[a];
                }
            }
            table_[static_cast<std::size_t>(i * m + j)] = cells + a_val;
            table_strict_[static_cast<std::size_t>(i * m + j)] = cells + a_left;
            if (continuous && i < j) {
                cells += lat.cell(i, j);
            }
        }
    }
}

double LifeTable::lookup(const std::vector<double>& table, long i, long j) const
{
    const long m = static_cast<long>(n_) + 1;
    return table[static_cast<std::size_t>(i * m + j)];
}

double LifeTable::joint_impl(long i, long j, bool strict) const
{
    const bool inf_i = i == kInfinity;
    const bool inf_j = j == kInfinity;
    if ((!inf_i && i < 0) || (!inf_j && j < 0)) {
        return 0.0;
    }
    if (strict && ((!inf_i && i == 0) || (!inf_j && j == 0))) {
        return 0.0;
    }
    if (inf_i && inf_j) {
        return 1.0;
    }
    if ((!inf_i && i > static_cast<long>(n_)) || (!inf_j && j > static_cast<long>(n_))) {
        throw ValidationError("lag index beyond the tabulated range");
    }
    if (fast_) {
        if (inf_j) {
            return 1.0;
        }
        return strict ? second_left_[j] : second_[j];
    }
    if (inf_j) {
        return strict ? g_left_[i] : g_[i];
    }
    if (inf_i || i > j) {
        i = j;
    }
    return lookup(strict ? table_strict_ : table_, i, j);
}

double LifeTable::joint(long i, long j) const
{
    return joint_impl(i, j, false);
}

double LifeTable::joint_strict(long i, long j) const
{
    return joint_impl(i, j, true);
}

double LifeTable::first_cdf(long i) const
{
    if (i == kInfinity) {
        return 1.0;
    }
    if (i < 0) {
        return 0.0;
    }
    return fast_ ? 1.0 : g_[i];
}

double LifeTable::first_cdf_left(long i) const
{
    if (i == kInfinity) {
        return 1.0;
    }
    if (i <= 0) {
        return 0.0;
    }
    return fast_ ? 1.0 : g_left_[i];
}

double LifeTable::single(Phase a, long i, bool strict) const
{
    const double g = strict ? first_cdf_left(i) : first_cdf(i);
    const double j = strict ? joint_strict(i, i) : joint(i, i);
    switch (a) {
    case Phase::First:
        return 1.0 - g;
    case Phase::Second:
        return g - j;
    case Phase::Done:
        return j;
    }
    return 0.0;
}

double LifeTable::pair(Phase a, long i, Phase b, long j, bool strict) const
{
    if (i > j) {
        return pair(b, j, a, i, strict);
    }
    auto G = [&](long x) { return strict ? first_cdf_left(x) : first_cdf(x); };
    auto J = [&](long x, long y) { return strict ? joint_strict(x, y) : joint(x, y); };
    if (a == Phase::First) {
        switch (b) {
        case Phase::First:
            return 1.0 - G(j);
        case Phase::Second:
            return (G(j) - J(j, j)) - (G(i) - J(i, j));
        case Phase::Done:
            return J(j, j) - J(i, j);
        }
    }
    if (a == Phase::Second) {
        switch (b) {
        case Phase::First:
            return 0.0;
        case Phase::Second:
            return G(i) - J(i, j);
        case Phase::Done:
            return J(i, j) - J(i, i);
        }
    }
    return b == Phase::Done ? J(i, i) : 0.0;
}

double LifeTable::rectangle(long x1, long x2, long y1, long y2, bool strict) const
{
    auto J = [&](long x, long y) { return strict ? joint_strict(x, y) : joint(x, y); };
    const double r = J(x2, y2) - J(x1, y2) - J(x2, y1) + J(x1, y1);
    return std::max(0.0, r);
}

} // namespace nmepi
