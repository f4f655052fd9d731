#pragma once

#include <cstdint>
#include <random>

namespace fairsample {

using Rng = std::mt19937_64;

/// Execution policy for the data-parallel kernels. Both policies produce
/// bit-identical results: every parallel work item draws from its own
/// stream derived with mix_seed().
enum class Exec { Serial, Parallel };

/// SplitMix64 finalizer applied to (seed, stream). Used to split a run seed
/// into independent per-item streams (replica chains, gauge reads,
/// bootstrap trials) so results do not depend on thread scheduling.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(mix_seed(seed, stream));
}

} // namespace fairsample
