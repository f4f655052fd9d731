#include "fairsample/chimera.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fairsample {

int chimera_index(int c, const QubitCoord& q) {
    return 8 * (q.row * c + q.col) + 4 * q.side + q.position;
}

QubitCoord chimera_coord(int c, int qubit) {
    const int cell = qubit / 8;
    const int local = qubit % 8;
    return {cell / c, cell % c, local / 4, local % 4};
}

bool is_chimera_coupler(int c, int a, int b) {
    const int n = 8 * c * c;
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) return false;
    const QubitCoord p = chimera_coord(c, a);
    const QubitCoord q = chimera_coord(c, b);
    if (p.row == q.row && p.col == q.col) return p.side != q.side;
    if (p.side != q.side || p.position != q.position) return false;
    if (p.side == 0) return p.col == q.col && std::abs(p.row - q.row) == 1;
    return p.row == q.row && std::abs(p.col - q.col) == 1;
}

std::vector<Coupler> chimera_couplers(int c) {
    std::vector<Coupler> out;
    out.reserve(16 * c * c + 8 * c * (c > 0 ? c - 1 : 0));
    for (int row = 0; row < c; ++row) {
        for (int col = 0; col < c; ++col) {
            for (int p = 0; p < 4; ++p) {
                const int left = chimera_index(c, {row, col, 0, p});
                const int right = chimera_index(c, {row, col, 1, p});
                for (int p2 = 0; p2 < 4; ++p2) {
                    out.emplace_back(left, chimera_index(c, {row, col, 1, p2}));
                }
                if (row + 1 < c) out.emplace_back(left, chimera_index(c, {row + 1, col, 0, p}));
                if (col + 1 < c) out.emplace_back(right, chimera_index(c, {row, col + 1, 1, p}));
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool ChimeraGraph::is_active(int qubit) const {
    return qubit >= 0 && qubit < num_sites() && active_mask_[static_cast<std::size_t>(qubit)] != 0;
}

int ChimeraGraph::active_index(int qubit) const {
    if (qubit < 0 || qubit >= num_sites()) return -1;
    return active_pos_[static_cast<std::size_t>(qubit)];
}

int ChimeraGraph::coupler_index(Coupler coupler) const {
    const auto it = std::lower_bound(couplers_.begin(), couplers_.end(), coupler);
    if (it == couplers_.end() || *it != coupler) return -1;
    return static_cast<int>(it - couplers_.begin());
}

std::span<const int> ChimeraGraph::neighbors(int qubit) const {
    if (!is_active(qubit)) {
        throw std::invalid_argument("qubit " + std::to_string(qubit) + " is not active");
    }
    const auto q = static_cast<std::size_t>(qubit);
    const auto begin = static_cast<std::size_t>(nbr_offsets_[q]);
    const auto end = static_cast<std::size_t>(nbr_offsets_[q + 1]);
    return std::span<const int>(nbrs_).subspan(begin, end - begin);
}

bool ChimeraGraph::operator==(const ChimeraGraph& other) const {
    return c_ == other.c_ && active_mask_ == other.active_mask_ && couplers_ == other.couplers_;
}

ChimeraGraph build_chimera(int c, const Defects& defects) {
    if (c < 1) throw std::invalid_argument("chimera size c must be >= 1, got " + std::to_string(c));
    ChimeraGraph g;
    g.c_ = c;
    const int n = 8 * c * c;

    g.active_mask_.assign(static_cast<std::size_t>(n), 1);
    for (int q : defects.qubits) {
        if (q < 0 || q >= n) {
            throw std::out_of_range("defective qubit index " + std::to_string(q) + " outside [0, " +
                                    std::to_string(n) + ")");
        }
        g.active_mask_[static_cast<std::size_t>(q)] = 0;
    }

    std::vector<Coupler> dead = defects.couplers;
    for (const Coupler& e : dead) {
        for (int q : {e.a, e.b}) {
            if (q < 0 || q >= n) {
                throw std::out_of_range("defective coupler endpoint " + std::to_string(q) +
                                        " outside [0, " + std::to_string(n) + ")");
            }
        }
        if (!is_chimera_coupler(c, e.a, e.b)) {
            throw std::invalid_argument("defective coupler (" + std::to_string(e.a) + ", " +
                                        std::to_string(e.b) + ") is not a Chimera coupler");
        }
    }
    std::sort(dead.begin(), dead.end());

    g.defects_.qubits = defects.qubits;
    std::sort(g.defects_.qubits.begin(), g.defects_.qubits.end());
    g.defects_.qubits.erase(std::unique(g.defects_.qubits.begin(), g.defects_.qubits.end()),
                            g.defects_.qubits.end());
    dead.erase(std::unique(dead.begin(), dead.end()), dead.end());
    g.defects_.couplers = dead;

    g.active_pos_.assign(static_cast<std::size_t>(n), -1);
    for (int q = 0; q < n; ++q) {
        if (g.active_mask_[static_cast<std::size_t>(q)]) {
            g.active_pos_[static_cast<std::size_t>(q)] = static_cast<int>(g.active_.size());
            g.active_.push_back(q);
        }
    }

    for (const Coupler& e : chimera_couplers(c)) {
        if (!g.active_mask_[static_cast<std::size_t>(e.a)] || !g.active_mask_[static_cast<std::size_t>(e.b)]) continue;
        if (std::binary_search(dead.begin(), dead.end(), e)) continue;
        g.couplers_.push_back(e);
    }

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const Coupler& e : g.couplers_) {
        adj[static_cast<std::size_t>(e.a)].push_back(e.b);
        adj[static_cast<std::size_t>(e.b)].push_back(e.a);
    }
    g.nbr_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int q = 0; q < n; ++q) {
        auto& list = adj[static_cast<std::size_t>(q)];
        std::sort(list.begin(), list.end());
        g.nbr_offsets_[static_cast<std::size_t>(q) + 1] =
            g.nbr_offsets_[static_cast<std::size_t>(q)] + static_cast<int>(list.size());
        g.nbrs_.insert(g.nbrs_.end(), list.begin(), list.end());
    }
    return g;
}

} // namespace fairsample
