#include "nmepi/fluid.h"

#include "nmepi/errors.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace nmepi {

namespace {

constexpr int kS = 0, kE = 1, kI = 2, kR = 3, kA = 4, kL = 5;

std::vector<int> active_compartments(ModelKind kind)
{
    switch (kind) {
    case ModelKind::SIR:
        return {kS, kI, kR, kA};
    case ModelKind::SIS:
        return {kS, kI, kA};
    case ModelKind::SEIR:
        return {kS, kE, kI, kR, kA, kL};
    case ModelKind::SIRS:
        return {kS, kI, kR, kA};
    }
    return {};
}

void fill_survival(const DurationDist& d, const TimeGrid& grid, std::vector<double>& value, std::vector<double>& left)
{
    value.resize(grid.size());
    left.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const CdfPair p = cdf_at_node(d, grid.time(k));
        value[k] = 1.0 - p.value;
        left[k] = 1.0 - p.left;
    }
}

std::vector<double> constant(std::size_t n, double c)
{
    return std::vector<double>(n, c);
}

/// Forcing of the fluid equations: initial cohorts propagated without new infections.
std::array<std::vector<double>, 6> fluid_forcing(const ModelSpec& spec, const ModelKernels& mk, bool left)
{
    const std::size_t n = mk.grid.size();
    const double p0 = spec.first_phase_fraction();
    const double p1 = spec.second_phase_fraction();
    const auto& f0c = left ? mk.second_residual_survival_left : mk.second_residual_survival;
    const auto& g0c = left ? mk.first_residual_survival_left : mk.first_residual_survival;
    const auto& g0 = left ? mk.first_residual_cdf_left : mk.first_residual_cdf;
    const auto& psi0 = left ? mk.psi0_left : mk.psi0;
    const auto& phi0 = left ? mk.phi0_left : mk.phi0;
    std::array<std::vector<double>, 6> x;
    for (auto& v : x) {
        v.assign(n, 0.0);
    }
    for (std::size_t k = 0; k < n; ++k) {
        switch (spec.kind) {
        case ModelKind::SIR:
            x[kS][k] = 1.0 - p1;
            x[kI][k] = p1 * f0c[k];
            x[kR][k] = p1 * (1.0 - f0c[k]);
            break;
        case ModelKind::SIS:
            x[kI][k] = p1 * f0c[k];
            x[kS][k] = 1.0 - x[kI][k];
            break;
        case ModelKind::SEIR:
            x[kS][k] = 1.0 - p0 - p1;
            x[kE][k] = p0 * g0c[k];
            x[kI][k] = p1 * f0c[k] + p0 * psi0[k];
            x[kR][k] = p1 * (1.0 - f0c[k]) + p0 * phi0[k];
            x[kL][k] = p0 * g0[k];
            break;
        case ModelKind::SIRS:
            x[kI][k] = p0 * g0c[k];
            x[kR][k] = p1 * f0c[k] + p0 * psi0[k];
            x[kS][k] = 1.0 - x[kI][k] - x[kR][k];
            break;
        }
    }
    return x;
}

FluidSolution solve_on_grid(const ModelSpec& spec, const ModelKernels& mk, const RateSolveOptions& options,
                            RateSolveResult& raw)
{
    const auto x = fluid_forcing(spec, mk, false);
    const auto xl = fluid_forcing(spec, mk, true);
    const std::vector<int> active = active_compartments(spec.kind);
    std::vector<ConvolutionTerm> terms;
    std::size_t s_pos = 0, i_pos = 0;
    for (std::size_t a = 0; a < active.size(); ++a) {
        const int c = active[a];
        terms.push_back({x[c], xl[c], mk.kernel[c], mk.kernel_left[c]});
        if (c == kS) {
            s_pos = a;
        }
        if (c == kI) {
            i_pos = a;
        }
    }
    const TimeGrid& grid = mk.grid;
    const ContactRate& lambda = spec.lambda;
    auto rate = [&](std::size_t k, std::span<const double> v, bool left) {
        const double t = grid.time(k);
        return (left ? lambda.value_left(t) : lambda.value(t)) * v[s_pos] * v[i_pos];
    };
    raw = solve_rate_system(terms, grid.dt(), grid.steps(), rate, options);
    FluidSolution sol;
    sol.grid = grid;
    sol.kind = spec.kind;
    std::array<std::vector<double>*, 6> cols{&sol.S, &sol.E, &sol.I, &sol.R, &sol.A, &sol.L};
    for (auto* c : cols) {
        c->assign(grid.size(), 0.0);
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
        *cols[active[a]] = raw.values[a];
    }
    sol.rate = raw.rate;
    sol.rate_left = raw.rate_left;
    return sol;
}

FluidSolution subsample(const FluidSolution& fine, std::size_t factor, const TimeGrid& coarse)
{
    FluidSolution out = fine;
    out.grid = coarse;
    auto pick = [&](const std::vector<double>& v) {
        std::vector<double> r(coarse.size());
        for (std::size_t k = 0; k < coarse.size(); ++k) {
            r[k] = v[k * factor];
        }
        return r;
    };
    out.S = pick(fine.S);
    out.E = pick(fine.E);
    out.I = pick(fine.I);
    out.R = pick(fine.R);
    out.A = pick(fine.A);
    out.L = pick(fine.L);
    out.rate = pick(fine.rate);
    out.rate_left = pick(fine.rate_left);
    return out;
}

FluidSolution solve_with_halving(const ModelSpec& spec, const TimeGrid& grid, const ModelKernels* given,
                                 const FluidOptions& options)
{
    spec.validate();
    double last_residual = 0.0;
    std::size_t failed_step = 0;
    for (int h = 0; h <= options.max_halvings; ++h) {
        const std::size_t factor = std::size_t(1) << h;
        const TimeGrid fine = grid.refined(factor);
        const ModelKernels mk = (h == 0 && given != nullptr) ? *given : build_model_kernels(spec, fine);
        RateSolveResult raw;
        FluidSolution sol = solve_on_grid(spec, mk, options.solver, raw);
        if (raw.converged) {
            FluidSolution out = h == 0 ? std::move(sol) : subsample(sol, factor, grid);
            out.spec = spec;
            out.spec_fingerprint = spec.fingerprint();
            out.diagnostics = {raw.max_iterations, raw.max_residual, h};
            return out;
        }
        last_residual = raw.max_residual;
        failed_step = raw.failed_step;
    }
    std::ostringstream os;
    os << "fluid solver did not converge after " << options.max_halvings << " step halvings (step " << failed_step
       << ", residual " << last_residual << ")";
    throw NumericalError(os.str(), last_residual);
}

} // namespace

const std::vector<double>& FluidSolution::column(Compartment c) const
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
    case Compartment::A:
        return A;
    case Compartment::L:
        return L;
    }
    return S;
}

ModelKernels build_model_kernels(const ModelSpec& spec, const TimeGrid& grid)
{
    if (spec.has_first_phase()) {
        return build_model_kernels(spec, tabulate_kernels(spec.life, spec.initial_first, grid));
    }
    KernelTable empty;
    empty.grid = grid;
    return build_model_kernels(spec, empty);
}

ModelKernels build_model_kernels(const ModelSpec& spec, const KernelTable& table)
{
    const TimeGrid& grid = table.grid;
    const std::size_t n = grid.size();
    ModelKernels mk;
    mk.grid = grid;
    mk.warnings = table.warnings;
    fill_survival(spec.initial_second, grid, mk.second_residual_survival, mk.second_residual_survival_left);
    fill_survival(spec.initial_first.first(), grid, mk.first_residual_survival, mk.first_residual_survival_left);
    mk.first_residual_cdf.resize(n);
    mk.first_residual_cdf_left.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        mk.first_residual_cdf[k] = 1.0 - mk.first_residual_survival[k];
        mk.first_residual_cdf_left[k] = 1.0 - mk.first_residual_survival_left[k];
    }
    if (spec.has_first_phase()) {
        if (table.phi.size() != n || table.psi0.size() != n) {
            throw ValidationError("kernel table does not match its grid");
        }
        mk.psi0 = table.psi0;
        mk.psi0_left = table.psi0_left;
        mk.phi0 = table.phi0;
        mk.phi0_left = table.phi0_left;
    } else {
        mk.psi0 = mk.psi0_left = mk.phi0 = mk.phi0_left = constant(n, 0.0);
    }
    std::vector<double> fc, fcl, gc, gcl;
    fill_survival(spec.life.second_given(0.0), grid, fc, fcl);
    fill_survival(spec.life.first(), grid, gc, gcl);
    for (int c = 0; c < 6; ++c) {
        mk.kernel[c] = constant(n, 0.0);
        mk.kernel_left[c] = constant(n, 0.0);
    }
    mk.kernel[kA] = mk.kernel_left[kA] = constant(n, 1.0);
    auto set = [&](int c, const std::vector<double>& v, const std::vector<double>& l, double sign) {
        for (std::size_t k = 0; k < n; ++k) {
            mk.kernel[c][k] = sign * v[k];
            mk.kernel_left[c][k] = sign * l[k];
        }
    };
    switch (spec.kind) {
    case ModelKind::SIR: {
        mk.kernel[kS] = mk.kernel_left[kS] = constant(n, -1.0);
        set(kI, fc, fcl, 1.0);
        std::vector<double> f(n), fl(n);
        for (std::size_t k = 0; k < n; ++k) {
            f[k] = 1.0 - fc[k];
            fl[k] = 1.0 - fcl[k];
        }
        set(kR, f, fl, 1.0);
        break;
    }
    case ModelKind::SIS:
        set(kS, fc, fcl, -1.0);
        set(kI, fc, fcl, 1.0);
        break;
    case ModelKind::SEIR: {
        mk.kernel[kS] = mk.kernel_left[kS] = constant(n, -1.0);
        set(kE, gc, gcl, 1.0);
        set(kI, table.psi, table.psi_left, 1.0);
        set(kR, table.phi, table.phi_left, 1.0);
        std::vector<double> g(n), gl(n);
        for (std::size_t k = 0; k < n; ++k) {
            g[k] = 1.0 - gc[k];
            gl[k] = 1.0 - gcl[k];
        }
        set(kL, g, gl, 1.0);
        break;
    }
    case ModelKind::SIRS: {
        set(kI, gc, gcl, 1.0);
        set(kR, table.psi, table.psi_left, 1.0);
        std::vector<double> s(n), sl(n);
        for (std::size_t k = 0; k < n; ++k) {
            s[k] = gc[k] + table.psi[k];
            sl[k] = gcl[k] + table.psi_left[k];
        }
        set(kS, s, sl, -1.0);
        break;
    }
    }
    return mk;
}

FluidSolution solve_fluid(const ModelSpec& spec, const TimeGrid& grid, const FluidOptions& options)
{
    return solve_with_halving(spec, grid, nullptr, options);
}

FluidSolution solve_fluid(const ModelSpec& spec, const KernelTable& kernels, const FluidOptions& options)
{
    const ModelKernels mk = build_model_kernels(spec, kernels);
    return solve_with_halving(spec, kernels.grid, &mk, options);
}

VolterraPair solve_linear_volterra_2d(double a, std::span<const double> x, std::span<const double> y,
                                      std::span<const double> z, std::span<const double> w, double c,
                                      std::span<const double> kernel, const TimeGrid& grid)
{
    const std::size_t n = grid.size();
    if (x.size() != n || y.size() != n || z.size() != n || w.size() != n || kernel.size() != n) {
        throw ValidationError("all Volterra inputs must have one value per grid node");
    }
    std::vector<ConvolutionTerm> terms(2);
    terms[0].forcing.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        terms[0].forcing[k] = a + x[k];
    }
    terms[0].kernel = constant(n, 1.0);
    terms[1].forcing.assign(y.begin(), y.end());
    terms[1].kernel.assign(kernel.begin(), kernel.end());
    auto rate = [&](std::size_t k, std::span<const double> v, bool) { return c * (v[0] * z[k] + w[k] * v[1]); };
    const RateSolveResult raw = solve_rate_system(terms, grid.dt(), grid.steps(), rate);
    if (!raw.converged) {
        throw NumericalError("linear Volterra iteration did not converge at step " + std::to_string(raw.failed_step),
                             raw.max_residual);
    }
    return {raw.values[0], raw.values[1], raw.max_residual};
}

FluidSolution solve_markovian_ode(ModelKind kind, const MarkovRates& rates, const InitialFractions& init,
                                  const TimeGrid& grid)
{
    if (!(rates.lambda >= 0.0) || !(rates.gamma > 0.0) || !(rates.mu > 0.0)) {
        throw ValidationError("Markovian rates need lambda >= 0 and positive gamma, mu");
    }
    const double lam = rates.lambda, gam = rates.gamma, mu = rates.mu;
    using State = std::array<double, 6>; // S, E, I, R, A, L
    auto field = [&](const State& y) {
        State d{};
        const double inf = lam * y[0] * y[2];
        d[4] = inf;
        switch (kind) {
        case ModelKind::SIR:
            d[0] = -inf;
            d[2] = inf - mu * y[2];
            d[3] = mu * y[2];
            break;
        case ModelKind::SIS:
            d[0] = -inf + mu * y[2];
            d[2] = inf - mu * y[2];
            break;
        case ModelKind::SEIR:
            d[0] = -inf;
            d[1] = inf - gam * y[1];
            d[2] = gam * y[1] - mu * y[2];
            d[3] = mu * y[2];
            d[5] = gam * y[1];
            break;
        case ModelKind::SIRS:
            d[0] = -inf + mu * y[3];
            d[2] = inf - gam * y[2];
            d[3] = gam * y[2] - mu * y[3];
            break;
        }
        return d;
    };
    State y{};
    y[1] = kind == ModelKind::SEIR ? init.exposed : 0.0;
    y[2] = init.infectious;
    y[3] = kind == ModelKind::SIRS ? init.recovered : 0.0;
    y[0] = 1.0 - y[1] - y[2] - y[3];
    if (y[0] < 0.0 || y[1] < 0.0 || y[2] < 0.0 || y[3] < 0.0) {
        throw ValidationError("initial fractions must be nonnegative and sum to at most 1");
    }
    FluidSolution sol;
    sol.grid = grid;
    sol.kind = kind;
    std::array<std::vector<double>*, 6> cols{&sol.S, &sol.E, &sol.I, &sol.R, &sol.A, &sol.L};
    for (auto* c : cols) {
        c->assign(grid.size(), 0.0);
    }
    sol.rate.assign(grid.size(), 0.0);
    const double h = grid.dt();
    auto store = [&](std::size_t k) {
        for (int c = 0; c < 6; ++c) {
            (*cols[c])[k] = y[c];
        }
        sol.rate[k] = lam * y[0] * y[2];
    };
    store(0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const State k1 = field(y);
        State tmp;
        for (int c = 0; c < 6; ++c) {
            tmp[c] = y[c] + 0.5 * h * k1[c];
        }
        const State k2 = field(tmp);
        for (int c = 0; c < 6; ++c) {
            tmp[c] = y[c] + 0.5 * h * k2[c];
        }
        const State k3 = field(tmp);
        for (int c = 0; c < 6; ++c) {
            tmp[c] = y[c] + h * k3[c];
        }
        const State k4 = field(tmp);
        for (int c = 0; c < 6; ++c) {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        store(k);
    }
    sol.rate_left = sol.rate;
    return sol;
}

FluidSolution solve_deterministic_delay(ModelKind kind, double lambda, double xi, double eta,
                                        const InitialFractions& init, const TimeGrid& grid)
{
    if (kind != ModelKind::SIRS) {
        throw ValidationError("the delay solver covers SIRS only");
    }
    if (!(xi > 0.0) || !(eta > 0.0) || !(lambda >= 0.0)) {
        throw ValidationError("delay solver needs xi, eta > 0 and lambda >= 0");
    }
    if (!grid.has_node(xi) || !grid.has_node(eta)) {
        throw ValidationError("grid step must divide both xi and eta");
    }
    const std::size_t p = grid.index_of(xi);
    const std::size_t q = grid.index_of(eta);
    const double i0 = init.infectious, r0 = init.recovered;
    if (i0 < 0.0 || r0 < 0.0 || i0 + r0 > 1.0) {
        throw ValidationError("initial fractions must be nonnegative and sum to at most 1");
    }
    const std::size_t n = grid.size();
    const double h = grid.dt();
    FluidSolution sol;
    sol.grid = grid;
    sol.kind = kind;
    for (auto* c : {&sol.S, &sol.E, &sol.I, &sol.R, &sol.A, &sol.L, &sol.rate}) {
        c->assign(n, 0.0);
    }
    std::vector<double>& cum = sol.A;
    auto psi0 = [&](double t) {
        const double len = std::min(t, xi) - std::max(t - eta, 0.0);
        return std::max(0.0, len) / xi;
    };
    auto window = [&](std::size_t k, std::size_t back_hi, std::size_t back_lo) {
        // C(t_k - back_hi) - C(t_k - back_lo) with C = 0 before time 0
        const double hi = k >= back_hi ? cum[k - back_hi] : 0.0;
        const double lo = k >= back_lo ? cum[k - back_lo] : 0.0;
        return hi - lo;
    };
    auto evaluate = [&](std::size_t k) {
        const double t = grid.time(k);
        const double ii = i0 * std::max(0.0, 1.0 - t / xi) + window(k, 0, p);
        const double rr = r0 * std::max(0.0, 1.0 - t / eta) + i0 * psi0(t) + window(k, p, p + q);
        sol.I[k] = ii;
        sol.R[k] = rr;
        sol.S[k] = 1.0 - ii - rr;
        return lambda * sol.S[k] * ii;
    };
    sol.rate[0] = evaluate(0);
    int max_it = 0;
    double max_res = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        double y = sol.rate[k - 1];
        bool converged = false;
        int it = 0;
        double diff = 0.0;
        while (it < 20) {
            ++it;
            cum[k] = cum[k - 1] + 0.5 * h * (sol.rate[k - 1] + y);
            const double y_new = evaluate(k);
            diff = std::abs(y_new - y);
            y = y_new;
            if (diff <= 1e-12 * std::max(1.0, std::abs(y))) {
                converged = true;
                break;
            }
        }
        max_it = std::max(max_it, it);
        max_res = std::max(max_res, diff);
        if (!converged) {
            throw NumericalError("delay solver did not converge at step " + std::to_string(k), diff);
        }
        cum[k] = cum[k - 1] + 0.5 * h * (sol.rate[k - 1] + y);
        sol.rate[k] = evaluate(k);
    }
    sol.rate_left = sol.rate;
    sol.diagnostics = {max_it, max_res, 0};
    return sol;
}

double sup_distance(const FluidSolution& a, const FluidSolution& b, std::span<const Compartment> compartments)
{
    if (!(a.grid == b.grid)) {
        throw ValidationError("solutions live on different grids");
    }
    double d = 0.0;
    for (Compartment c : compartments) {
        const auto& x = a.column(c);
        const auto& y = b.column(c);
        for (std::size_t k = 0; k < x.size(); ++k) {
            d = std::max(d, std::abs(x[k] - y[k]));
        }
    }
    return d;
}

} // namespace nmepi
