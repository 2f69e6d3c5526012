#pragma once

#include "nmepi/grid.h"
#include "nmepi/model.h"
#include "nmepi/rng.h"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nmepi {

enum class Transition : std::uint8_t { BecomeSusceptible = 0, Recover = 1, BecomeInfectious = 2, Infect = 3 };
std::string to_string(Transition tr);

struct Event {
    double t;
    std::int64_t agent;
    Transition transition;
};

/// Events in processing order, plus the initial state needed to replay them.
struct EventLog {
    ModelKind kind = ModelKind::SIR;
    std::int64_t n = 0;
    std::int64_t s0 = 0, e0 = 0, i0 = 0, r0 = 0;
    /// Ids of agents that start in the second phase (I for SIR/SIS/SEIR, R for SIRS).
    std::vector<std::int64_t> initial_second;
    std::vector<Event> events;
};

/// Rounded initial count of one compartment.
struct InitialRounding {
    Compartment compartment;
    double fraction;
    std::int64_t count;
};

/// Counts sampled at grid times (right-continuous).
struct CompartmentPath {
    TimeGrid grid;
    ModelKind kind = ModelKind::SIR;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t spec_fingerprint = 0;
    std::vector<std::int64_t> S, E, I, R, A, L;
    std::vector<InitialRounding> rounding;

    const std::vector<std::int64_t>& column(Compartment c) const;
};

struct SimulationOptions {
    bool record_events = false;
};

struct SimulationResult {
    CompartmentPath path;
    EventLog log;
};

/// Exact event-driven simulation of the finite-population model.
SimulationResult simulate(const ModelSpec& spec, std::int64_t n, const TimeGrid& grid, Rng& rng,
                          const SimulationOptions& options = {});

/// Runs simulate with seed stream_seed(master_seed, r) and stores that seed in the path.
SimulationResult simulate_replication(const ModelSpec& spec, std::int64_t n, const TimeGrid& grid,
                                      std::uint64_t master_seed, std::uint64_t r,
                                      const SimulationOptions& options = {});

struct EnsembleOptions {
    unsigned threads = 0; // 0: hardware concurrency
    std::size_t memory_budget_bytes = std::size_t(2) << 30;
};

/// Bytes needed to hold reps paths on grid.
std::size_t ensemble_memory_estimate(std::size_t reps, const TimeGrid& grid);

/// Independent replications; output is identical for any thread count.
std::vector<CompartmentPath> simulate_ensemble(const ModelSpec& spec, std::int64_t n, std::size_t reps,
                                               const TimeGrid& grid, std::uint64_t master_seed,
                                               const EnsembleOptions& options = {});

/// Runs body(r) for r in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

/// Thread count after applying the 0 = hardware default rule.
unsigned resolve_threads(unsigned requested);

} // namespace nmepi
