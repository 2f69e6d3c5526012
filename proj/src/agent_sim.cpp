#include "nmepi/agent_sim.h"

#include "nmepi/errors.h"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <queue>
#include <thread>

namespace nmepi {

namespace {

struct Scheduled {
    double t;
    Transition transition;
    std::int64_t agent;
    double eta; // second-phase length, carried by first-phase exits
    bool first_phase_end;
};

struct Later {
    bool operator()(const Scheduled& a, const Scheduled& b) const
    {
        if (a.t != b.t) {
            return a.t > b.t;
        }
        if (a.transition != b.transition) {
            return a.transition > b.transition;
        }
        return a.agent > b.agent;
    }
};

Transition first_exit(ModelKind kind)
{
    return kind == ModelKind::SEIR ? Transition::BecomeInfectious : Transition::Recover;
}

Transition second_exit(ModelKind kind)
{
    return (kind == ModelKind::SIR || kind == ModelKind::SEIR) ? Transition::Recover : Transition::BecomeSusceptible;
}

std::int64_t rounded(double fraction, std::int64_t n)
{
    return static_cast<std::int64_t>(std::llround(fraction * static_cast<double>(n)));
}

} // namespace

std::string to_string(Transition tr)
{
    switch (tr) {
    case Transition::BecomeSusceptible:
        return "BecomeSusceptible";
    case Transition::Recover:
        return "Recover";
    case Transition::BecomeInfectious:
        return "BecomeInfectious";
    case Transition::Infect:
        return "Infect";
    }
    return "?";
}

const std::vector<std::int64_t>& CompartmentPath::column(Compartment c) const
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

SimulationResult simulate(const ModelSpec& spec, std::int64_t n, const TimeGrid& grid, Rng& rng,
                          const SimulationOptions& options)
{
    spec.validate();
    if (n < 1) {
        throw ValidationError("population size n must be at least 1");
    }
    const ModelKind kind = spec.kind;
    const bool two_phase = spec.has_first_phase();
    const double horizon = grid.horizon();

    SimulationResult result;
    CompartmentPath& path = result.path;
    EventLog& log = result.log;
    path.grid = grid;
    path.kind = kind;
    path.n = n;
    path.spec_fingerprint = spec.fingerprint();
    for (auto* v : {&path.S, &path.E, &path.I, &path.R, &path.A, &path.L}) {
        v->assign(grid.size(), 0);
    }

    const std::int64_t first0 = rounded(spec.first_phase_fraction(), n);
    const std::int64_t second0 = rounded(spec.second_phase_fraction(), n);
    if (first0 + second0 > n) {
        throw ValidationError("rounded initial counts exceed the population size");
    }
    switch (kind) {
    case ModelKind::SEIR:
        path.rounding = {{Compartment::E, spec.init.exposed, first0}, {Compartment::I, spec.init.infectious, second0}};
        break;
    case ModelKind::SIRS:
        path.rounding = {{Compartment::I, spec.init.infectious, first0}, {Compartment::R, spec.init.recovered, second0}};
        break;
    default:
        path.rounding = {{Compartment::I, spec.init.infectious, second0}};
        break;
    }

    std::int64_t s = n - first0 - second0, p0 = first0, p1 = second0, done = 0, a_count = 0, l_count = 0;
    log.kind = kind;
    log.n = n;
    log.s0 = s;
    switch (kind) {
    case ModelKind::SEIR:
        log.e0 = first0;
        log.i0 = second0;
        break;
    case ModelKind::SIRS:
        log.i0 = first0;
        log.r0 = second0;
        break;
    default:
        log.i0 = second0;
        break;
    }

    std::priority_queue<Scheduled, std::vector<Scheduled>, Later> queue;
    const Transition exit1 = first_exit(kind);
    const Transition exit2 = second_exit(kind);
    std::int64_t id = 0;
    for (; id < first0; ++id) {
        const auto [xi, eta] = spec.initial_first.sample(rng);
        queue.push({xi, exit1, id, eta, true});
    }
    for (; id < first0 + second0; ++id) {
        log.initial_second.push_back(id);
        queue.push({spec.initial_second.sample(rng), exit2, id, 0.0, false});
    }
    std::vector<std::int64_t> susceptible;
    susceptible.reserve(static_cast<std::size_t>(n - id));
    for (std::int64_t k = n - 1; k >= id; --k) {
        susceptible.push_back(k);
    }

    std::size_t next_node = 0;
    auto record_until = [&](double te) {
        const double cut = std::isinf(te) ? te : te - 1e-12 * std::max(1.0, te);
        while (next_node < grid.size() && grid.time(next_node) < cut) {
            path.S[next_node] = s;
            switch (kind) {
            case ModelKind::SIR:
                path.I[next_node] = p1;
                path.R[next_node] = done;
                break;
            case ModelKind::SIS:
                path.I[next_node] = p1;
                break;
            case ModelKind::SEIR:
                path.E[next_node] = p0;
                path.I[next_node] = p1;
                path.R[next_node] = done;
                break;
            case ModelKind::SIRS:
                path.I[next_node] = p0;
                path.R[next_node] = p1;
                break;
            }
            path.A[next_node] = a_count;
            path.L[next_node] = l_count;
            ++next_node;
        }
    };
    auto log_event = [&](double t, std::int64_t agent, Transition tr) {
        if (options.record_events) {
            log.events.push_back({t, agent, tr});
        }
    };

    const double inv_n = 1.0 / static_cast<double>(n);
    const bool constant_rate = spec.lambda.is_constant();
    std::exponential_distribution<double> unit_exp(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double now = 0.0;

    for (;;) {
        const double next_scheduled = queue.empty() ? std::numeric_limits<double>::infinity() : queue.top().t;
        const std::int64_t infectious = kind == ModelKind::SIRS ? p0 : p1;
        bool infect = false;
        double t_inf = std::numeric_limits<double>::infinity();
        if (s > 0 && infectious > 0) {
            const double lam_max = constant_rate ? spec.lambda.values().front() : spec.lambda.max_on(now, horizon);
            const double rate_max = lam_max * static_cast<double>(s) * static_cast<double>(infectious) * inv_n;
            while (rate_max > 0.0) {
                const double cand = now + unit_exp(rng) / rate_max;
                if (cand >= next_scheduled || cand > horizon) {
                    break;
                }
                if (constant_rate || unif(rng) * lam_max <= spec.lambda.value(cand)) {
                    infect = true;
                    t_inf = cand;
                    break;
                }
                now = cand;
            }
        }
        if (infect) {
            record_until(t_inf);
            now = t_inf;
            const std::int64_t agent = susceptible.back();
            susceptible.pop_back();
            --s;
            ++a_count;
            log_event(now, agent, Transition::Infect);
            if (two_phase) {
                const auto [xi, eta] = spec.life.sample(rng);
                ++p0;
                queue.push({now + xi, exit1, agent, eta, true});
            } else {
                const double eta = spec.life.second_given(0.0).sample(rng);
                ++p1;
                queue.push({now + eta, exit2, agent, 0.0, false});
            }
            continue;
        }
        if (next_scheduled > horizon) {
            break;
        }
        const Scheduled ev = queue.top();
        queue.pop();
        record_until(ev.t);
        now = ev.t;
        log_event(now, ev.agent, ev.transition);
        if (ev.first_phase_end) {
            --p0;
            ++p1;
            if (kind == ModelKind::SEIR) {
                ++l_count;
            }
            queue.push({now + ev.eta, exit2, ev.agent, 0.0, false});
        } else {
            --p1;
            if (kind == ModelKind::SIR || kind == ModelKind::SEIR) {
                ++done;
            } else {
                ++s;
                susceptible.push_back(ev.agent);
            }
        }
    }
    record_until(std::numeric_limits<double>::infinity());
    return result;
}

SimulationResult simulate_replication(const ModelSpec& spec, std::int64_t n, const TimeGrid& grid,
                                      std::uint64_t master_seed, std::uint64_t r, const SimulationOptions& options)
{
    const std::uint64_t seed = stream_seed(master_seed, r);
    Rng rng(seed);
    SimulationResult out = simulate(spec, n, grid, rng, options);
    out.path.seed = seed;
    return out;
}

std::size_t ensemble_memory_estimate(std::size_t reps, const TimeGrid& grid)
{
    return reps * (grid.size() * 6 * sizeof(std::int64_t) + sizeof(CompartmentPath));
}

unsigned resolve_threads(unsigned requested)
{
    if (requested > 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
    if (workers <= 1) {
        for (std::size_t r = 0; r < count; ++r) {
            body(r);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= count) {
                return;
            }
            try {
                body(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(count);
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

std::vector<CompartmentPath> simulate_ensemble(const ModelSpec& spec, std::int64_t n, std::size_t reps,
                                               const TimeGrid& grid, std::uint64_t master_seed,
                                               const EnsembleOptions& options)
{
    if (reps < 1) {
        throw ValidationError("ensemble needs reps >= 1");
    }
    const std::size_t need = ensemble_memory_estimate(reps, grid);
    if (need > options.memory_budget_bytes) {
        throw ValidationError("ensemble needs about " + std::to_string(need >> 20) + " MiB, above the budget of " +
                              std::to_string(options.memory_budget_bytes >> 20) + " MiB");
    }
    std::vector<CompartmentPath> out(reps);
    parallel_for(reps, options.threads, [&](std::size_t r) {
        out[r] = simulate_replication(spec, n, grid, master_seed, r).path;
    });
    return out;
}

} // namespace nmepi
