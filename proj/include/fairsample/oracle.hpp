#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fairsample/instance.hpp"
#include "fairsample/rng.hpp"
#include "fairsample/spin_config.hpp"

namespace fairsample {

/// Raised when an exact oracle cannot handle an instance of this size.
class OracleInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EnumerationStatus {
    Complete,  ///< configs holds every minimizer
    Overflow,  ///< count exceeded the cap; configs empty, count preserved
};

/// Minimum energy plus its minimizing configurations, sorted canonically.
/// exact == false marks heuristic provenance (ICA).
template <class E>
struct BasicGroundStateSet {
    E min_energy{};
    std::uint64_t count = 0;
    std::vector<SpinConfig> configs;
    bool exact = true;
    EnumerationStatus status = EnumerationStatus::Complete;
    /// Count saturated at 2^64 - 1.
    bool count_saturated = false;
};

using GroundStateSet = BasicGroundStateSet<std::int64_t>;
using NoisyGroundStateSet = BasicGroundStateSet<double>;

inline constexpr int kBruteForceMaxSites = 28;
inline constexpr int kFrontierMaxCells = 4;
inline constexpr std::size_t kDefaultEnumerationCap = std::size_t{1} << 20;

/// Exhaustive Gray-code scan of all 2^N configurations (N <= 28).
/// Exec::Parallel splits the scan over the high bits with OpenMP; both
/// policies return the same set.
GroundStateSet brute_force_enumerate(const Instance& instance, Exec exec = Exec::Parallel,
                                     std::size_t cap = kDefaultEnumerationCap);
/// Real-valued variant; energies within kEnergyTolerance of the minimum count
/// as degenerate.
NoisyGroundStateSet brute_force_enumerate(const NoisyInstance& instance, Exec exec = Exec::Parallel,
                                          std::size_t cap = kDefaultEnumerationCap);

struct GroundStateCount {
    std::int64_t min_energy = 0;
    std::uint64_t count = 0;
    bool saturated = false;
};

/// Row-by-row transfer DP over the Chimera lattice (c <= 4). The frontier is
/// the 4c left-side qubits of the last processed row; within a row the
/// right-side qubits are eliminated cell by cell.
GroundStateCount frontier_count(const Instance& instance);

/// frontier_count plus a traceback over the stored DP tables that
/// reconstructs every minimizer. count > cap yields status Overflow.
GroundStateSet frontier_enumerate(const Instance& instance, std::size_t cap = kDefaultEnumerationCap);

/// frontier_enumerate when c <= 4, else brute force when N <= 28, else
/// throws OracleInfeasible.
GroundStateSet exact_ground_states(const Instance& instance, std::size_t cap = kDefaultEnumerationCap);

/// True when the set is closed under global spin flip.
bool closed_under_flip(const GroundStateSet& set);

} // namespace fairsample
