#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fairsample/instance.hpp"

namespace fairsample {

/// Coupling values drawn for base instances.
inline constexpr std::array<int, 6> kSidonCouplings = {-7, -6, -5, 5, 6, 7};

/// Every active coupler gets a value uniform over kSidonCouplings.
Instance draw_couplings(const ChimeraGraph& graph, Rng& rng);

/// True when some sign assignment makes sum_j sigma_j m_j vanish, i.e. the
/// spin can see a zero local field in some configuration of its neighbors.
/// Exhaustive over the 2^deg sign patterns (deg <= 6 on Chimera).
bool admits_zero_field(std::span<const int> magnitudes);

/// Active qubits whose incident coupling magnitudes admit a zero field.
std::vector<int> free_spin_audit(const Instance& instance);

struct FreeSpinRepair {
    /// Repaired instance; empty when some qubit exhausted its budget and the
    /// caller should redraw from scratch.
    std::optional<Instance> instance;
    int repairs = 0;
    int failed_qubit = -1;
};

/// Local repair of free spins. Failing qubits are visited breadth-first in
/// index order; each visit redraws the magnitude of one uniformly chosen
/// incident coupler from {5, 6, 7} (sign kept) and re-queues the qubit and
/// its neighbors. A qubit repaired more than per_qubit_budget times, or an
/// isolated active qubit, aborts the attempt.
FreeSpinRepair eliminate_free_spins(Instance instance, Rng& rng, int per_qubit_budget = 100);

enum class CountProvenance { Exact, Heuristic, Uncounted };

struct DegeneracyVerdict {
    enum class Status { Accepted, Rejected, Uncounted };

    Status status = Status::Uncounted;
    std::uint64_t n_gs = 0;
    int k = 0;
    CountProvenance provenance = CountProvenance::Uncounted;

    bool accepted() const { return status == Status::Accepted; }
};

/// k >= 1 with n_gs == 3 * 2^k, if any.
std::optional<int> degeneracy_exponent(std::uint64_t n_gs);

/// Accepts exactly the degeneracies 6, 12, 24, 48, ... and records k.
DegeneracyVerdict filter_degeneracy(std::uint64_t n_gs, CountProvenance provenance);

struct GenerationOptions {
    int max_attempts = 10000;
    int k_max = 5;  ///< accepted degeneracies stop at 3 * 2^k_max
    int repair_budget = 100;
    /// Counting parameters past the exact oracle's reach (c > 4, N > 28).
    int heuristic_b = 14;
};

struct GenerationResult {
    std::optional<Instance> instance;  ///< empty when max_attempts ran out
    DegeneracyVerdict verdict;         ///< of the accepted instance
    std::int64_t min_energy = 0;
    int attempts = 0;       ///< draws, including restarts and rejections
    int restarts = 0;       ///< repair budget exhausted
    int rejections = 0;     ///< filter said no
    int repairs = 0;        ///< coupler redraws in the accepted attempt
};

/// Draw -> eliminate_free_spins -> count -> filter, attempt a drawing from
/// make_rng(seed, a). The count is exact when the oracle reaches the
/// graph, otherwise ICA-counted (provenance Heuristic). Accepted instances
/// carry instance.seed == seed.
GenerationResult generate_instance(const ChimeraGraph& graph, std::uint64_t seed,
                                   const GenerationOptions& options = {});

} // namespace fairsample
