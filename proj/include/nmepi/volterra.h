#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nmepi {

/// One output of a scalar-rate convolution system:
///   X(t) = forcing(t) + integral_0^t kernel(t - s) f(s) ds.
/// Empty *_left vectors mean "same as the right value".
struct ConvolutionTerm {
    std::vector<double> forcing, forcing_left;
    std::vector<double> kernel, kernel_left;
};

/// Rate as a function of the step index and the current compartment values.
/// `left` asks for the left limit at t_k.
using RateFunction = std::function<double(std::size_t k, std::span<const double> values, bool left)>;

struct RateSolveOptions {
    double tolerance = 1e-12;
    int max_iterations = 20;
    /// Start the within-step iteration from linear extrapolation instead of the previous value.
    bool extrapolate_start = false;
};

struct RateSolveResult {
    std::vector<std::vector<double>> values, values_left;
    std::vector<double> rate, rate_left;
    int max_iterations = 0;
    double max_residual = 0.0;
    bool converged = true;
    std::size_t failed_step = 0;
};

/// Trapezoidal product integration with one-sided kernel limits; the unknown rate at each node
/// is found by fixed-point iteration. Never throws on non-convergence; check `converged`.
RateSolveResult solve_rate_system(std::span<const ConvolutionTerm> terms, double dt, std::size_t steps,
                                  const RateFunction& rate, const RateSolveOptions& options = {});

} // namespace nmepi
