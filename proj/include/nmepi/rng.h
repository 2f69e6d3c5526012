#pragma once

#include <cstdint>
#include <random>

namespace nmepi {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of replication r, derived from the master seed.
std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t r);

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t r)
{
    return Rng(stream_seed(master_seed, r));
}

} // namespace nmepi
