#pragma once

// Test-only oracles. These deliberately avoid the library's compiled
// adjacency and Gray-code paths so they can check them independently.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fairsample/chimera.hpp"
#include "fairsample/instance.hpp"
#include "fairsample/spin_config.hpp"

namespace fairsample::testing {

inline Instance uniform_instance(const ChimeraGraph& g, int j) {
    Instance inst;
    inst.graph = g;
    inst.couplings.assign(static_cast<std::size_t>(g.num_couplers()), j);
    return inst;
}

/// Dense N x N coupling matrix over active indices.
inline std::vector<std::vector<double>> dense_couplings(const ChimeraGraph& g, const std::vector<double>& values) {
    const auto n = static_cast<std::size_t>(g.num_active());
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    const auto couplers = g.couplers();
    for (std::size_t e = 0; e < couplers.size(); ++e) {
        const auto a = static_cast<std::size_t>(g.active_index(couplers[e].a));
        const auto b = static_cast<std::size_t>(g.active_index(couplers[e].b));
        m[a][b] = values[e];
        m[b][a] = values[e];
    }
    return m;
}

/// Naive double loop over all pairs i < j.
inline double naive_energy(const std::vector<std::vector<double>>& j, const std::vector<double>& h,
                           const SpinConfig& cfg) {
    double e = 0.0;
    for (std::size_t a = 0; a < j.size(); ++a) {
        for (std::size_t b = a + 1; b < j.size(); ++b) e -= j[a][b] * cfg.spin(a) * cfg.spin(b);
        if (!h.empty()) e -= h[a] * cfg.spin(a);
    }
    return e;
}

inline double naive_energy(const Instance& inst, const SpinConfig& cfg) {
    std::vector<double> v(inst.couplings.begin(), inst.couplings.end());
    return naive_energy(dense_couplings(inst.graph, v), {}, cfg);
}

struct NaiveGroundStates {
    std::int64_t min_energy = 0;
    std::vector<SpinConfig> configs;
};

/// Plain binary-counter enumeration with from-scratch energies (N <= ~20).
inline NaiveGroundStates naive_ground_states(const Instance& inst) {
    const auto n = static_cast<std::size_t>(inst.graph.num_active());
    std::vector<double> v(inst.couplings.begin(), inst.couplings.end());
    const auto j = dense_couplings(inst.graph, v);
    NaiveGroundStates out;
    bool first = true;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
        SpinConfig cfg(n);
        for (std::size_t i = 0; i < n; ++i) cfg.set_spin(i, ((x >> i) & 1U) ? 1 : -1);
        const auto e = static_cast<std::int64_t>(naive_energy(j, {}, cfg));
        if (first || e < out.min_energy) {
            out.min_energy = e;
            out.configs.clear();
            first = false;
        }
        if (e == out.min_energy) out.configs.push_back(cfg);
    }
    std::sort(out.configs.begin(), out.configs.end());
    return out;
}

/// c = 2 lattice trimmed to n_active qubits by removing the highest indices.
inline ChimeraGraph trimmed_c2(int n_active) {
    Defects d;
    for (int q = 31; q >= n_active; --q) d.qubits.push_back(q);
    return build_chimera(2, d);
}

} // namespace fairsample::testing
