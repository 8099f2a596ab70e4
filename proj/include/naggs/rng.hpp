#pragma once

#include <cstdint>
#include <random>

namespace naggs {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to decorrelate (seed, stream) pairs before seeding.
std::uint64_t splitmix64(std::uint64_t x);

/// Independent generator for stream `stream_id` under master seed `seed`.
/// The mapping is a pure function of both arguments, so trajectory i always sees
/// the same random numbers regardless of how trajectories are scheduled.
Rng make_stream(std::uint64_t seed, std::uint64_t stream_id);

}  // namespace naggs
