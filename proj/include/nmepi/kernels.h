#pragma once

#include "nmepi/distributions.h"
#include "nmepi/grid.h"

#include <string>
#include <vector>

namespace nmepi {

/// CDF value and left limit at t; t is snapped onto an atom lying within rounding distance.
struct CdfPair {
    double value, left;
};
CdfPair cdf_at_node(const DurationDist& d, double t);

/// Convolution kernels of a joint law (xi, eta) tabulated on a uniform grid.
///
/// phi(t) = P(xi + eta <= t), psi(t) = P(xi <= t < xi + eta) = G(t) - phi(t).
/// The *_left vectors hold left limits at the nodes.
struct KernelTable {
    TimeGrid grid;
    std::vector<double> phi, psi, phi0, psi0;
    std::vector<double> phi_left, psi_left, phi0_left, psi0_left;
    std::vector<std::string> warnings;
};

/// Tabulates phi/psi for h and phi0/psi0 for h0 by product trapezoidal quadrature.
KernelTable tabulate_kernels(const JointDurationDist& h, const JointDurationDist& h0, const TimeGrid& grid);

/// Same, with grid given as explicit node times (rejected unless uniform).
KernelTable tabulate_kernels(const JointDurationDist& h, const JointDurationDist& h0, std::span<const double> times);

/// Diagonal of the joint CDF J(t, t) = P(xi + eta <= t) and its left limits at every node.
struct JointDiagonal {
    std::vector<double> value, left;
};
JointDiagonal joint_cdf_diagonal(const JointDurationDist& h, const TimeGrid& grid);

/// Life-course phase of an infected individual: first phase, second phase, done.
enum class Phase { First = 0, Second = 1, Done = 2 };

/// Joint CDF J(x, y) = P(xi <= x, xi + eta <= y) on a lag lattice x = i*delta, y = j*delta,
/// together with the strict version J_(x, y) = P(xi < x, xi + eta < y).
///
/// Indices below zero mean a negative lag; kInfinity means an unbounded lag.
class LifeTable {
public:
    static constexpr long kInfinity = -1000000000L;

    LifeTable() = default;
    LifeTable(const JointDurationDist& h, double delta, std::size_t n);

    double joint(long i, long j) const;
    double joint_strict(long i, long j) const;
    double first_cdf(long i) const;
    double first_cdf_left(long i) const;

    /// P(phase at lag i is a); with strict = true the lag is approached from below.
    double single(Phase a, long i, bool strict = false) const;
    /// P(phase at lag i is a, phase at lag j is b).
    double pair(Phase a, long i, Phase b, long j, bool strict = false) const;
    /// P(xi in (x1, x2], xi + eta in (y1, y2]) or the [x1, x2) x [y1, y2) version when strict.
    double rectangle(long x1, long x2, long y1, long y2, bool strict) const;

    std::size_t size() const { return n_; }
    double delta() const { return delta_; }

private:
    double lookup(const std::vector<double>& table, long i, long j) const;
    double joint_impl(long i, long j, bool strict) const;

    double delta_ = 1.0;
    std::size_t n_ = 0;
    bool fast_ = false;
    std::vector<double> second_, second_left_;
    std::vector<double> g_, g_left_;
    std::vector<double> table_, table_strict_;
};

} // namespace nmepi
