// Exact ground-state counting and enumeration by a row transfer DP.
//
// Rows of cells are processed top to bottom. After row r the DP state is
// the 4c-bit "frontier" L_r: the left-side qubits of row r, which are the
// only ones coupled to row r + 1 (vertical wires). Frontier bit 4 * col + p
// is qubit (r, col, left, p); bit value 1 means spin +1. Inactive qubits
// are pinned to bit 0.
//
//   D_r(L_r) = min_{L_{r-1}} [D_{r-1}(L_{r-1}) + V_r(L_{r-1}, L_r)] + W_r(L_r)
//
// V_r is the vertical coupling energy; it is separable per bit, so the
// minimisation over L_{r-1} swaps old bits for new ones one at a time
// (4c stages). W_r(L) is the best energy of the row's right-side qubits
// given the row's left-side qubits: a chain over cells linked by the
// horizontal wires, solved cell by cell with a prefix table indexed by the
// left bits seen so far and the current cell's 4 right bits.
// Every table carries (energy, number of minimisers).

#include <algorithm>
#include <array>
#include <limits>
#include <string>

#include "fairsample/oracle.hpp"

namespace fairsample {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct Cell {
    std::int64_t e = kInf;
    std::uint64_t n = 0;
};

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b, bool& sat) {
    std::uint64_t r = 0;
    if (__builtin_add_overflow(a, b, &r)) {
        sat = true;
        return std::numeric_limits<std::uint64_t>::max();
    }
    return r;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b, bool& sat) {
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) {
        sat = true;
        return std::numeric_limits<std::uint64_t>::max();
    }
    return r;
}

inline void relax(Cell& dst, std::int64_t e, std::uint64_t n, bool& sat) {
    if (e < dst.e) {
        dst.e = e;
        dst.n = n;
    } else if (e == dst.e) {
        dst.n = sat_add(dst.n, n, sat);
    }
}

inline int spin_of(unsigned bits, int p) { return ((bits >> p) & 1U) ? 1 : -1; }

/// Per-row coupling tables.
struct RowTables {
    // intra[col][l * 16 + r]: energy of the cell's K4,4 for left bits l and
    // right bits r; kInf when a pinned (inactive) bit is set.
    std::vector<std::array<std::int64_t, 256>> intra;
    // horiz[col][rprev * 16 + r]: horizontal wires between cell col-1 and col.
    std::vector<std::array<std::int64_t, 256>> horiz;
    // vert[4 * col + p]: coupling to the same qubit position one row up.
    std::vector<std::int64_t> vert;
    // Pinned frontier bits of this row (inactive left-side qubits).
    std::uint32_t left_pinned = 0;
};

class FrontierDP {
public:
    explicit FrontierDP(const Instance& inst, bool keep_tables) : inst_(inst), keep_(keep_tables) {
        c_ = inst.graph.cells();
        if (c_ > kFrontierMaxCells) {
            throw OracleInfeasible("frontier DP limited to c <= " + std::to_string(kFrontierMaxCells) +
                                   ", instance has c = " + std::to_string(c_));
        }
        bits_ = 4 * c_;
        states_ = std::size_t{1} << bits_;
        for (int r = 0; r < c_; ++r) rows_.push_back(build_row(r));
    }

    GroundStateCount run() {
        std::vector<Cell> d;
        for (int r = 0; r < c_; ++r) {
            std::vector<Cell> w = row_chain(r);
            if (keep_) w_energy_.push_back(energies(w));
            if (r == 0) {
                d = std::move(w);
            } else {
                std::vector<Cell> s = vertical_stages(r, std::move(d));
                for (std::size_t x = 0; x < states_; ++x) {
                    if (s[x].e >= kInf || w[x].e >= kInf) {
                        s[x] = Cell{};
                        continue;
                    }
                    s[x].e += w[x].e;
                    s[x].n = sat_mul(s[x].n, w[x].n, saturated_);
                }
                d = std::move(s);
            }
            if (keep_) d_energy_.push_back(energies(d));
        }
        Cell best;
        for (const Cell& x : d) {
            if (x.e < kInf) relax(best, x.e, x.n, saturated_);
        }
        return {best.e, best.n, saturated_};
    }

    /// All minimisers; requires keep_tables and a prior run().
    std::vector<SpinConfig> trace(std::int64_t min_energy) {
        assignment_.assign(static_cast<std::size_t>(inst_.graph.num_sites()), 0);
        const int last = c_ - 1;
        for (std::size_t x = 0; x < states_; ++x) {
            if (d_energy_[static_cast<std::size_t>(last)][x] == min_energy) trace_row(last, static_cast<std::uint32_t>(x));
        }
        std::sort(found_.begin(), found_.end());
        return std::move(found_);
    }

private:
    std::int64_t coupling(int a, int b) const {
        const int e = inst_.graph.coupler_index(Coupler(a, b));
        return e < 0 ? 0 : inst_.couplings[static_cast<std::size_t>(e)];
    }

    int qubit(int row, int col, int side, int p) const { return chimera_index(c_, {row, col, side, p}); }

    RowTables build_row(int r) const {
        const ChimeraGraph& g = inst_.graph;
        RowTables t;
        t.intra.resize(static_cast<std::size_t>(c_));
        t.horiz.resize(static_cast<std::size_t>(c_));
        t.vert.assign(static_cast<std::size_t>(bits_), 0);
        for (int col = 0; col < c_; ++col) {
            unsigned lpin = 0;
            unsigned rpin = 0;
            for (int p = 0; p < 4; ++p) {
                if (!g.is_active(qubit(r, col, 0, p))) lpin |= 1U << p;
                if (!g.is_active(qubit(r, col, 1, p))) rpin |= 1U << p;
            }
            t.left_pinned |= lpin << (4 * col);

            std::array<std::array<std::int64_t, 4>, 4> j{};
            for (int p = 0; p < 4; ++p) {
                for (int q = 0; q < 4; ++q) j[p][q] = coupling(qubit(r, col, 0, p), qubit(r, col, 1, q));
            }
            for (unsigned l = 0; l < 16; ++l) {
                for (unsigned rr = 0; rr < 16; ++rr) {
                    std::int64_t e = 0;
                    if ((l & lpin) || (rr & rpin)) {
                        e = kInf;
                    } else {
                        for (int p = 0; p < 4; ++p) {
                            for (int q = 0; q < 4; ++q) e -= j[p][q] * spin_of(l, p) * spin_of(rr, q);
                        }
                    }
                    t.intra[static_cast<std::size_t>(col)][l * 16 + rr] = e;
                }
            }

            if (col > 0) {
                std::array<std::int64_t, 4> h{};
                for (int p = 0; p < 4; ++p) h[p] = coupling(qubit(r, col - 1, 1, p), qubit(r, col, 1, p));
                for (unsigned a = 0; a < 16; ++a) {
                    for (unsigned b = 0; b < 16; ++b) {
                        std::int64_t e = 0;
                        for (int p = 0; p < 4; ++p) e -= h[p] * spin_of(a, p) * spin_of(b, p);
                        t.horiz[static_cast<std::size_t>(col)][a * 16 + b] = e;
                    }
                }
            }
            if (r > 0) {
                for (int p = 0; p < 4; ++p) {
                    t.vert[static_cast<std::size_t>(4 * col + p)] = coupling(qubit(r - 1, col, 0, p), qubit(r, col, 0, p));
                }
            }
        }
        return t;
    }

    /// W_r(L) with counts, for every frontier L.
    std::vector<Cell> row_chain(int r) {
        const RowTables& t = rows_[static_cast<std::size_t>(r)];
        std::vector<Cell> g(256);
        for (std::size_t k = 0; k < 256; ++k) {
            const std::int64_t e = t.intra[0][k];
            if (e < kInf) g[k] = Cell{e, 1};
        }
        for (int col = 1; col < c_; ++col) {
            const auto& intra = t.intra[static_cast<std::size_t>(col)];
            const auto& horiz = t.horiz[static_cast<std::size_t>(col)];
            const std::size_t prefixes = std::size_t{1} << (4 * col);
            std::vector<Cell> next(prefixes * 256);
            for (std::size_t lp = 0; lp < prefixes; ++lp) {
                for (unsigned rprev = 0; rprev < 16; ++rprev) {
                    const Cell base = g[lp * 16 + rprev];
                    if (base.e >= kInf) continue;
                    for (unsigned l = 0; l < 16; ++l) {
                        Cell* out = &next[(lp + (std::size_t{l} << (4 * col))) * 16];
                        for (unsigned rr = 0; rr < 16; ++rr) {
                            const std::int64_t ei = intra[l * 16 + rr];
                            if (ei >= kInf) continue;
                            relax(out[rr], base.e + horiz[rprev * 16 + rr] + ei, base.n, saturated_);
                        }
                    }
                }
            }
            g = std::move(next);
        }
        std::vector<Cell> w(states_);
        for (std::size_t lf = 0; lf < states_; ++lf) {
            for (unsigned rr = 0; rr < 16; ++rr) {
                const Cell& x = g[lf * 16 + rr];
                if (x.e < kInf) relax(w[lf], x.e, x.n, saturated_);
            }
        }
        return w;
    }

    /// min over the previous frontier of D + V, one frontier bit at a time.
    std::vector<Cell> vertical_stages(int r, std::vector<Cell> s) {
        const RowTables& t = rows_[static_cast<std::size_t>(r)];
        std::vector<std::vector<std::int64_t>> stages;
        if (keep_) stages.push_back(energies(s));
        std::vector<Cell> next(states_);
        for (int bit = 0; bit < bits_; ++bit) {
            const std::size_t mask = std::size_t{1} << bit;
            const std::int64_t j = t.vert[static_cast<std::size_t>(bit)];
            const bool pinned = (t.left_pinned >> bit) & 1U;
            for (std::size_t x = 0; x < states_; ++x) {
                if (x & mask) continue;
                const Cell a0 = s[x];         // old bit = 0 (spin -1)
                const Cell a1 = s[x | mask];  // old bit = 1 (spin +1)
                Cell b0;
                Cell b1;
                // new bit 0 (spin -1): bond energy -J * s_old * (-1)
                if (a0.e < kInf) relax(b0, a0.e - j, a0.n, saturated_);
                if (a1.e < kInf) relax(b0, a1.e + j, a1.n, saturated_);
                if (!pinned) {
                    if (a0.e < kInf) relax(b1, a0.e + j, a0.n, saturated_);
                    if (a1.e < kInf) relax(b1, a1.e - j, a1.n, saturated_);
                }
                next[x] = b0;
                next[x | mask] = b1;
            }
            std::swap(s, next);
            if (keep_) stages.push_back(energies(s));
        }
        if (keep_) stages_.push_back(std::move(stages));
        return s;
    }

    static std::vector<std::int64_t> energies(const std::vector<Cell>& cells) {
        std::vector<std::int64_t> out(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) out[i] = cells[i].e;
        return out;
    }

    void set_left(int r, std::uint32_t frontier) {
        for (int col = 0; col < c_; ++col) {
            for (int p = 0; p < 4; ++p) {
                assignment_[static_cast<std::size_t>(qubit(r, col, 0, p))] =
                    static_cast<std::uint8_t>((frontier >> (4 * col + p)) & 1U);
            }
        }
    }

    void set_right(int r, int col, unsigned rr) {
        for (int p = 0; p < 4; ++p) {
            assignment_[static_cast<std::size_t>(qubit(r, col, 1, p))] = static_cast<std::uint8_t>((rr >> p) & 1U);
        }
    }

    void emit() {
        const auto active = inst_.graph.active_qubits();
        SpinConfig cfg(active.size());
        for (std::size_t i = 0; i < active.size(); ++i) {
            if (assignment_[static_cast<std::size_t>(active[i])]) cfg.set_spin(i, 1);
        }
        found_.push_back(std::move(cfg));
    }

    void trace_row(int r, std::uint32_t frontier) {
        set_left(r, frontier);
        const RowTables& t = rows_[static_cast<std::size_t>(r)];
        // Forward chain energies for this fixed frontier.
        std::vector<std::array<std::int64_t, 16>> f(static_cast<std::size_t>(c_));
        for (int col = 0; col < c_; ++col) {
            const unsigned l = (frontier >> (4 * col)) & 0xFU;
            const auto& intra = t.intra[static_cast<std::size_t>(col)];
            for (unsigned rr = 0; rr < 16; ++rr) {
                std::int64_t best = kInf;
                if (intra[l * 16 + rr] < kInf) {
                    if (col == 0) {
                        best = intra[l * 16 + rr];
                    } else {
                        for (unsigned rp = 0; rp < 16; ++rp) {
                            const std::int64_t prev = f[static_cast<std::size_t>(col - 1)][rp];
                            if (prev >= kInf) continue;
                            best = std::min(best, prev + t.horiz[static_cast<std::size_t>(col)][rp * 16 + rr] +
                                                      intra[l * 16 + rr]);
                        }
                    }
                }
                f[static_cast<std::size_t>(col)][rr] = best;
            }
        }
        const std::int64_t target = w_energy_[static_cast<std::size_t>(r)][frontier];
        for (unsigned rr = 0; rr < 16; ++rr) {
            if (f[static_cast<std::size_t>(c_ - 1)][rr] == target) trace_chain(r, frontier, c_ - 1, rr, f);
        }
    }

    void trace_chain(int r, std::uint32_t frontier, int col, unsigned rr,
                     const std::vector<std::array<std::int64_t, 16>>& f) {
        set_right(r, col, rr);
        if (col == 0) {
            trace_vertical(r, frontier);
            return;
        }
        const RowTables& t = rows_[static_cast<std::size_t>(r)];
        const unsigned l = (frontier >> (4 * col)) & 0xFU;
        const std::int64_t here = f[static_cast<std::size_t>(col)][rr];
        const std::int64_t ei = t.intra[static_cast<std::size_t>(col)][l * 16 + rr];
        for (unsigned rp = 0; rp < 16; ++rp) {
            const std::int64_t prev = f[static_cast<std::size_t>(col - 1)][rp];
            if (prev >= kInf) continue;
            if (prev + t.horiz[static_cast<std::size_t>(col)][rp * 16 + rr] + ei == here) {
                trace_chain(r, frontier, col - 1, rp, f);
            }
        }
    }

    void trace_vertical(int r, std::uint32_t frontier) {
        if (r == 0) {
            emit();
            return;
        }
        trace_stage(r, bits_, frontier);
    }

    void trace_stage(int r, int stage, std::uint32_t x) {
        const auto& stages = stages_[static_cast<std::size_t>(r - 1)];
        if (stage == 0) {
            // x is now the previous row's frontier. Deeper rows only write
            // their own qubits, so nothing below needs restoring.
            trace_row(r - 1, x);
            return;
        }
        const int bit = stage - 1;
        const std::int64_t j = rows_[static_cast<std::size_t>(r)].vert[static_cast<std::size_t>(bit)];
        const int new_spin = ((x >> bit) & 1U) ? 1 : -1;
        const std::int64_t here = stages[static_cast<std::size_t>(stage)][x];
        for (unsigned a = 0; a < 2; ++a) {
            const std::uint32_t y = (x & ~(std::uint32_t{1} << bit)) | (a << bit);
            const std::int64_t prev = stages[static_cast<std::size_t>(stage - 1)][y];
            if (prev >= kInf) continue;
            const int old_spin = a ? 1 : -1;
            if (prev - j * old_spin * new_spin == here) trace_stage(r, stage - 1, y);
        }
    }

    const Instance& inst_;
    bool keep_;
    int c_ = 0;
    int bits_ = 0;
    std::size_t states_ = 0;
    bool saturated_ = false;
    std::vector<RowTables> rows_;

    // Traceback storage (keep_ only). stages_[r - 1][k] is stage k of the
    // vertical minimisation into row r; stage 0 is D_{r-1}.
    std::vector<std::vector<std::vector<std::int64_t>>> stages_;
    std::vector<std::vector<std::int64_t>> w_energy_;
    std::vector<std::vector<std::int64_t>> d_energy_;

    std::vector<std::uint8_t> assignment_;
    std::vector<SpinConfig> found_;
};

} // namespace

GroundStateCount frontier_count(const Instance& instance) {
    FrontierDP dp(instance, false);
    return dp.run();
}

GroundStateSet frontier_enumerate(const Instance& instance, std::size_t cap) {
    FrontierDP dp(instance, true);
    const GroundStateCount count = dp.run();
    GroundStateSet out;
    out.min_energy = count.min_energy;
    out.count = count.count;
    out.count_saturated = count.saturated;
    out.exact = true;
    if (count.saturated || count.count > cap) {
        out.status = EnumerationStatus::Overflow;
        return out;
    }
    out.configs = dp.trace(count.min_energy);
    return out;
}

GroundStateSet exact_ground_states(const Instance& instance, std::size_t cap) {
    if (instance.graph.cells() <= kFrontierMaxCells) return frontier_enumerate(instance, cap);
    if (instance.graph.num_active() <= kBruteForceMaxSites) return brute_force_enumerate(instance, Exec::Parallel, cap);
    throw OracleInfeasible("no exact oracle for c = " + std::to_string(instance.graph.cells()) + " with " +
                           std::to_string(instance.graph.num_active()) + " active qubits");
}

} // namespace fairsample
