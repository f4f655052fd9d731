#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace fairsample {

/// Location of a qubit inside a Chimera lattice.
///
/// A lattice of c x c unit cells; every cell is a complete bipartite K4,4
/// between its left side (side 0) and right side (side 1). Left-side qubits
/// carry the vertical inter-cell wires (cell (r, col) to (r + 1, col), same
/// position), right-side qubits carry the horizontal wires (cell (r, col) to
/// (r, col + 1), same position).
///
/// Linear index: 8 * (row * c + col) + 4 * side + position.
struct QubitCoord {
    int row = 0;
    int col = 0;
    int side = 0;
    int position = 0;

    auto operator<=>(const QubitCoord&) const = default;
};

/// Unordered qubit pair, stored with a < b.
struct Coupler {
    int a = 0;
    int b = 0;

    Coupler() = default;
    Coupler(int x, int y) : a(x < y ? x : y), b(x < y ? y : x) {}

    auto operator<=>(const Coupler&) const = default;
};

struct Defects {
    std::vector<int> qubits;
    std::vector<Coupler> couplers;

    bool empty() const { return qubits.empty() && couplers.empty(); }
    bool operator==(const Defects&) const = default;
};

int chimera_index(int c, const QubitCoord& coord);
QubitCoord chimera_coord(int c, int qubit);

/// True when (a, b) is a coupler of the defect-free lattice of size c.
bool is_chimera_coupler(int c, int a, int b);

/// All couplers of the defect-free lattice, sorted.
std::vector<Coupler> chimera_couplers(int c);

/// Immutable Chimera graph with inoperable qubits/couplers removed.
class ChimeraGraph {
public:
    ChimeraGraph() = default;

    int cells() const { return c_; }
    int num_sites() const { return 8 * c_ * c_; }
    int num_active() const { return static_cast<int>(active_.size()); }
    int num_couplers() const { return static_cast<int>(couplers_.size()); }

    bool is_active(int qubit) const;

    /// Active qubits in increasing index order. Position in this list is the
    /// qubit's "active index", the bit position used by SpinConfig.
    std::span<const int> active_qubits() const { return active_; }

    /// Active index of a qubit, or -1 when inactive / out of range.
    int active_index(int qubit) const;

    /// Active couplers, sorted lexicographically.
    std::span<const Coupler> couplers() const { return couplers_; }

    /// Position of a coupler in couplers(), or -1 when not active.
    int coupler_index(Coupler coupler) const;

    /// Active neighbors of an active qubit, sorted. Throws
    /// std::invalid_argument for inactive or out-of-range qubits.
    std::span<const int> neighbors(int qubit) const;

    int degree(int qubit) const { return static_cast<int>(neighbors(qubit).size()); }

    const Defects& defects() const { return defects_; }

    bool operator==(const ChimeraGraph& other) const;

    friend ChimeraGraph build_chimera(int c, const Defects& defects);

private:
    int c_ = 0;
    Defects defects_;
    std::vector<std::uint8_t> active_mask_;
    std::vector<int> active_;
    std::vector<int> active_pos_;
    std::vector<Coupler> couplers_;
    std::vector<int> nbr_offsets_;
    std::vector<int> nbrs_;
};

/// Builds and validates a lattice of size c. Defective qubits also remove
/// their incident couplers. Throws std::out_of_range naming the offending
/// index for out-of-range defects and std::invalid_argument for coupler
/// defects that are not Chimera couplers.
ChimeraGraph build_chimera(int c, const Defects& defects = {});

} // namespace fairsample
