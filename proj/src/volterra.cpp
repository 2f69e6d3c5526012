#include "nmepi/volterra.h"

#include "nmepi/errors.h"

#include <algorithm>
#include <cmath>

namespace nmepi {

namespace {

bool constant_kernel(const ConvolutionTerm& term, double& value)
{
    value = term.kernel.front();
    for (double v : term.kernel) {
        if (v != value) {
            return false;
        }
    }
    for (std::size_t i = 1; i < term.kernel_left.size(); ++i) {
        if (term.kernel_left[i] != value) {
            return false;
        }
    }
    return true;
}

} // namespace

RateSolveResult solve_rate_system(std::span<const ConvolutionTerm> terms, double dt, std::size_t steps,
                                  const RateFunction& rate, const RateSolveOptions& options)
{
    const std::size_t size = steps + 1;
    const std::size_t m = terms.size();
    for (const auto& t : terms) {
        if (t.forcing.size() != size || t.kernel.size() != size ||
            (!t.forcing_left.empty() && t.forcing_left.size() != size) ||
            (!t.kernel_left.empty() && t.kernel_left.size() != size)) {
            throw ValidationError("convolution system inputs must all have one value per grid node");
        }
    }
    RateSolveResult out;
    out.values.assign(m, std::vector<double>(size, 0.0));
    out.values_left.assign(m, std::vector<double>(size, 0.0));
    out.rate.assign(size, 0.0);
    out.rate_left.assign(size, 0.0);
    auto& f = out.rate;
    auto& fl = out.rate_left;

    std::vector<const double*> kv(m), kl(m), xv(m), xl(m);
    std::vector<char> is_const(m);
    std::vector<double> const_value(m), cumulative(m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
        const auto& t = terms[c];
        kv[c] = t.kernel.data();
        kl[c] = t.kernel_left.empty() ? t.kernel.data() : t.kernel_left.data();
        xv[c] = t.forcing.data();
        xl[c] = t.forcing_left.empty() ? t.forcing.data() : t.forcing_left.data();
        is_const[c] = constant_kernel(t, const_value[c]);
    }

    std::vector<double> cur(m), cur_left(m), known(m);
    for (std::size_t c = 0; c < m; ++c) {
        cur[c] = xv[c][0];
        out.values[c][0] = cur[c];
        out.values_left[c][0] = cur[c];
    }
    f[0] = rate(0, cur, false);
    fl[0] = f[0];

    const double h = 0.5 * dt;
    for (std::size_t k = 1; k < size; ++k) {
        for (std::size_t c = 0; c < m; ++c) {
            if (is_const[c]) {
                cumulative[c] += f[k - 1] + (k >= 2 ? fl[k - 1] : 0.0);
                known[c] = h * const_value[c] * cumulative[c];
                continue;
            }
            const double* a = kl[c];
            const double* b = kv[c];
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                acc += a[k - j] * f[j];
            }
            for (std::size_t j = 1; j < k; ++j) {
                acc += b[k - j] * fl[j];
            }
            known[c] = h * acc;
        }
        double y = f[k - 1];
        if (options.extrapolate_start && k >= 2) {
            y = 2.0 * f[k - 1] - f[k - 2];
        }
        bool converged = false;
        double diff = 0.0;
        int it = 0;
        while (it < options.max_iterations) {
            ++it;
            for (std::size_t c = 0; c < m; ++c) {
                cur_left[c] = xl[c][k] + known[c] + h * kv[c][0] * y;
            }
            const double y_new = rate(k, cur_left, true);
            diff = std::abs(y_new - y);
            y = y_new;
            if (diff <= options.tolerance * std::max(1.0, std::abs(y))) {
                converged = true;
                break;
            }
        }
        out.max_iterations = std::max(out.max_iterations, it);
        out.max_residual = std::max(out.max_residual, diff);
        if (!converged) {
            out.converged = false;
            out.failed_step = k;
            return out;
        }
        fl[k] = y;
        for (std::size_t c = 0; c < m; ++c) {
            cur_left[c] = xl[c][k] + known[c] + h * kv[c][0] * y;
            cur[c] = xv[c][k] + known[c] + h * kv[c][0] * y;
            out.values[c][k] = cur[c];
            out.values_left[c][k] = cur_left[c];
        }
        f[k] = rate(k, cur, false);
    }
    return out;
}

} // namespace nmepi
