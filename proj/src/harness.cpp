#include "nmepi/harness.h"

#include "nmepi/errors.h"

#include <algorithm>
#include <cmath>

namespace nmepi {

namespace {

constexpr Compartment kAll[6] = {Compartment::S, Compartment::E, Compartment::I,
                                 Compartment::R, Compartment::A, Compartment::L};

} // namespace

const std::vector<double>& ScaledPath::column(Compartment c) const
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

std::vector<double>& ScaledPath::column(Compartment c)
{
    return const_cast<std::vector<double>&>(static_cast<const ScaledPath&>(*this).column(c));
}

ScaledPath fluid_scale(const CompartmentPath& path)
{
    if (path.n < 1) {
        throw ValidationError("path has no population size");
    }
    ScaledPath out;
    out.grid = path.grid;
    out.kind = path.kind;
    out.n = path.n;
    out.spec_fingerprint = path.spec_fingerprint;
    const double n = static_cast<double>(path.n);
    for (Compartment c : kAll) {
        const auto& src = path.column(c);
        auto& dst = out.column(c);
        dst.resize(src.size());
        for (std::size_t k = 0; k < src.size(); ++k) {
            dst[k] = static_cast<double>(src[k]) / n;
        }
    }
    return out;
}

ScaledPath diffusion_scale(const ScaledPath& scaled, const FluidSolution& fluid)
{
    if (fluid.spec_fingerprint != scaled.spec_fingerprint) {
        throw ValidationError("path and fluid solution come from different model specs");
    }
    if (fluid.kind != scaled.kind) {
        throw ValidationError("path and fluid solution have different model kinds");
    }
    const std::size_t r = fluid.grid.refinement_of(scaled.grid);
    ScaledPath out = scaled;
    const double root = std::sqrt(static_cast<double>(scaled.n));
    for (Compartment c : kAll) {
        auto& dst = out.column(c);
        const auto& bar = fluid.column(c);
        for (std::size_t k = 0; k < dst.size(); ++k) {
            dst[k] = root * (dst[k] - bar[k * r]);
        }
    }
    return out;
}

ScaledPath diffusion_scale(const CompartmentPath& path, const FluidSolution& fluid)
{
    return diffusion_scale(fluid_scale(path), fluid);
}

SampleCovariance sample_covariance(const Eigen::MatrixXd& samples)
{
    const Eigen::Index reps = samples.rows();
    if (reps < 2) {
        throw ValidationError("sample covariance needs at least 2 replications");
    }
    SampleCovariance out;
    out.mean = samples.colwise().mean().transpose();
    const Eigen::MatrixXd centred = samples.rowwise() - out.mean.transpose();
    const double nr = static_cast<double>(reps);
    out.cov = centred.transpose() * centred / (nr - 1.0);
    const Eigen::Index p = samples.cols();
    out.se.resize(p, p);
    for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = a; b < p; ++b) {
            const Eigen::ArrayXd prod = centred.col(a).array() * centred.col(b).array();
            const double m = prod.mean();
            const double var = (prod - m).square().sum() / (nr - 1.0);
            out.se(a, b) = out.se(b, a) = std::sqrt(var / nr);
        }
    }
    return out;
}

EnsembleStats empirical_cov(const std::vector<ScaledPath>& paths, const std::vector<Probe>& probes)
{
    if (paths.size() < 2) {
        throw ValidationError("ensemble statistics need at least 2 paths");
    }
    const TimeGrid& grid = paths.front().grid;
    for (const auto& p : paths) {
        if (!(p.grid == grid)) {
            throw ValidationError("ensemble paths live on different grids");
        }
    }
    EnsembleStats st;
    st.grid = grid;
    st.reps = paths.size();
    st.probes = probes;
    const double nr = static_cast<double>(paths.size());
    for (Compartment c : kAll) {
        std::vector<double> mean(grid.size(), 0.0), var(grid.size(), 0.0), se(grid.size(), 0.0);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            double m = 0.0;
            for (const auto& p : paths) {
                m += p.column(c)[k];
            }
            m /= nr;
            double v = 0.0;
            for (const auto& p : paths) {
                const double d = p.column(c)[k] - m;
                v += d * d;
            }
            v /= nr - 1.0;
            mean[k] = m;
            var[k] = v;
            se[k] = std::sqrt(v / nr);
        }
        st.mean[c] = std::move(mean);
        st.variance[c] = std::move(var);
        st.mean_se[c] = std::move(se);
    }
    if (!probes.empty()) {
        Eigen::MatrixXd samples(static_cast<Eigen::Index>(paths.size()), static_cast<Eigen::Index>(probes.size()));
        for (std::size_t q = 0; q < probes.size(); ++q) {
            const std::size_t k = grid.index_of(probes[q].t);
            for (std::size_t r = 0; r < paths.size(); ++r) {
                samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) =
                    paths[r].column(probes[q].compartment)[k];
            }
        }
        const SampleCovariance sc = sample_covariance(samples);
        st.covariance = sc.cov;
        st.covariance_se = sc.se;
    }
    return st;
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw ValidationError("log-log fit needs at least two (x, y) pairs");
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw ValidationError("log-log fit needs positive values");
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw ValidationError("log-log fit needs distinct x values");
    }
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

RateReport convergence_rate(const ModelSpec& spec, const std::vector<std::int64_t>& n_list, const TimeGrid& grid,
                            const RateOptions& options)
{
    if (n_list.size() < 3) {
        throw ValidationError("rate study needs at least three population sizes");
    }
    const auto [lo, hi] = std::minmax_element(n_list.begin(), n_list.end());
    if (*lo < 1) {
        throw ValidationError("population sizes must be positive");
    }
    if (static_cast<double>(*hi) < 100.0 * static_cast<double>(*lo)) {
        throw ValidationError("rate study population sizes must span at least two decades");
    }
    if (options.reps < 1) {
        throw ValidationError("rate study needs reps >= 1");
    }
    const FluidSolution fluid = solve_fluid(spec, grid, options.fluid);
    RateReport rep;
    rep.n_list = n_list;
    for (std::int64_t n : n_list) {
        std::vector<double> err(options.reps, 0.0);
        parallel_for(options.reps, options.threads, [&](std::size_t r) {
            const CompartmentPath path = simulate_replication(spec, n, grid, options.master_seed, r).path;
            double sup = 0.0;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                sup = std::max(sup, std::abs(static_cast<double>(path.I[k]) / static_cast<double>(n) - fluid.I[k]));
            }
            err[r] = sup;
        });
        double mean = 0.0;
        for (double e : err) {
            mean += e;
        }
        rep.errors.push_back(mean / static_cast<double>(options.reps));
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (rep.errors[i] > 0.0) {
            xs.push_back(static_cast<double>(n_list[i]));
            ys.push_back(rep.errors[i]);
        }
    }
    if (xs.size() >= 2 && xs.front() != xs.back()) {
        rep.fit = fit_loglog(xs, ys);
    } else {
        rep.note = "fewer than two distinct population sizes with positive error; no slope fitted";
    }
    return rep;
}

nlohmann::json to_json(const RateReport& report)
{
    nlohmann::json j;
    j["n"] = report.n_list;
    j["errors"] = report.errors;
    if (report.fit) {
        j["slope"] = report.fit->slope;
        j["intercept"] = report.fit->intercept;
        j["r2"] = report.fit->r2;
    } else {
        j["slope"] = nullptr;
    }
    if (!report.note.empty()) {
        j["note"] = report.note;
    }
    return j;
}

nlohmann::json to_json(const EnsembleStats& stats)
{
    nlohmann::json j;
    j["reps"] = stats.reps;
    nlohmann::json probes = nlohmann::json::array();
    for (const Probe& p : stats.probes) {
        probes.push_back({{"compartment", to_string(p.compartment)}, {"t", p.t}});
    }
    j["probes"] = probes;
    auto matrix = [](const Eigen::MatrixXd& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index a = 0; a < m.rows(); ++a) {
            std::vector<double> row(static_cast<std::size_t>(m.cols()));
            for (Eigen::Index b = 0; b < m.cols(); ++b) {
                row[static_cast<std::size_t>(b)] = m(a, b);
            }
            rows.push_back(row);
        }
        return rows;
    };
    j["covariance"] = matrix(stats.covariance);
    j["covariance_se"] = matrix(stats.covariance_se);
    return j;
}

std::map<Driver, std::vector<double>> reconstruct_drivers(const EventLog& log, const ModelSpec& spec,
                                                          const std::vector<double>& times)
{
    if (log.kind != ModelKind::SIR && log.kind != ModelKind::SIS) {
        throw ValidationError("driver reconstruction is implemented for SIR and SIS");
    }
    if (spec.kind != log.kind) {
        throw ValidationError("event log and spec have different model kinds");
    }
    if (!spec.lambda.is_constant()) {
        throw ValidationError("driver reconstruction needs a constant contact rate");
    }
    if (!std::is_sorted(times.begin(), times.end())) {
        throw ValidationError("reconstruction times must be sorted");
    }
    const double lambda = spec.lambda.values().front();
    const DurationDist& f = spec.life.second_given(0.0);
    const DurationDist& f0 = spec.initial_second;
    const double n = static_cast<double>(log.n);
    const double root = std::sqrt(n);

    enum : std::uint8_t { InitialCohort, NewCohort, Idle };
    std::vector<std::uint8_t> state(static_cast<std::size_t>(log.n), Idle);
    for (std::int64_t id : log.initial_second) {
        state[static_cast<std::size_t>(id)] = InitialCohort;
    }

    // Piecewise-constant S*I between consecutive events.
    struct Piece {
        double start, end, si;
    };
    std::vector<Piece> pieces;
    std::int64_t s = log.s0, i = log.i0;
    double last = 0.0;
    for (const Event& e : log.events) {
        if (e.t > last) {
            pieces.push_back({last, e.t, static_cast<double>(s) * static_cast<double>(i)});
            last = e.t;
        }
        if (e.transition == Transition::Infect) {
            --s;
            ++i;
        } else {
            --i;
            if (log.kind == ModelKind::SIS) {
                ++s;
            }
        }
    }
    const double t_max = times.empty() ? 0.0 : times.back();
    if (t_max > last) {
        pieces.push_back({last, t_max, static_cast<double>(s) * static_cast<double>(i)});
    }

    std::map<Driver, std::vector<double>> out;
    std::vector<double>& ma = out[Driver::MA];
    std::vector<double>& i1 = out[Driver::I1];
    std::vector<double>& i0 = out[Driver::I0];
    std::vector<double>* r1 = nullptr;
    std::vector<double>* r0 = nullptr;
    if (log.kind == ModelKind::SIR) {
        r1 = &out[Driver::R1];
        r0 = &out[Driver::R0];
    }

    std::size_t next_event = 0;
    std::int64_t infections = 0, new_recoveries = 0, initial_recoveries = 0;
    for (double t : times) {
        while (next_event < log.events.size() && log.events[next_event].t <= t) {
            const Event& e = log.events[next_event++];
            auto& st = state[static_cast<std::size_t>(e.agent)];
            if (e.transition == Transition::Infect) {
                ++infections;
                st = NewCohort;
            } else {
                if (st == InitialCohort) {
                    ++initial_recoveries;
                } else if (st == NewCohort) {
                    ++new_recoveries;
                }
                st = Idle;
            }
        }
        // Compensators: lambda int_0^t K(t - u) S(u) I(u) / n du for K = 1 and K = F^c.
        double comp_all = 0.0, comp_surv = 0.0;
        for (const Piece& p : pieces) {
            if (p.start >= t) {
                break;
            }
            const double end = std::min(p.end, t);
            const double w = lambda * p.si / n;
            comp_all += w * (end - p.start);
            comp_surv += w * (f.integrated_survival(t - p.start) - f.integrated_survival(t - end));
        }
        const double a = static_cast<double>(infections);
        const double nr = static_cast<double>(new_recoveries);
        ma.push_back((a - comp_all) / root);
        i1.push_back((a - nr - comp_surv) / root);
        const double init_i = static_cast<double>(log.i0 - initial_recoveries);
        const double i0v = (init_i - static_cast<double>(log.i0) * f0.survival(t)) / root;
        i0.push_back(i0v);
        if (r1) {
            r1->push_back((nr - (comp_all - comp_surv)) / root);
            r0->push_back(-i0v);
        }
    }
    return out;
}

} // namespace nmepi
