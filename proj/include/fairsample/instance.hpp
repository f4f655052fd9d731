#pragma once

#include <cstdint>
#include <vector>

#include "fairsample/chimera.hpp"
#include "fairsample/rng.hpp"
#include "fairsample/spin_config.hpp"

namespace fairsample {

/// Field-free spin glass on a Chimera graph, H = -sum_{<ij>} J_ij S_i S_j.
/// couplings[e] belongs to graph.couplers()[e].
struct Instance {
    ChimeraGraph graph;
    std::vector<int> couplings;
    std::uint64_t seed = 0;

    bool operator==(const Instance&) const = default;
};

/// A base instance overlaid with Gaussian coupler noise and local fields.
/// Effective coupling J_e + coupler_noise[e]; effective field on active
/// index i is field_noise[i]. Energy is -sum J S S - sum h S.
struct NoisyInstance {
    Instance base;
    std::vector<double> coupler_noise;
    std::vector<double> field_noise;
    double sigma_j = 0.0;
    double sigma_h = 0.0;
    std::uint64_t seed = 0;

    double coupling(std::size_t e) const {
        return static_cast<double>(base.couplings[e]) + coupler_noise[e];
    }
    const ChimeraGraph& graph() const { return base.graph; }
};

/// Gauge signs epsilon_i, aligned with graph.active_qubits().
struct GaugeVector {
    std::vector<std::int8_t> signs;

    bool operator==(const GaugeVector&) const = default;
};

/// Throws std::invalid_argument unless couplings match the graph and every
/// |J| lies in {5, 6, 7}.
void validate_instance(const Instance& instance);

NoisyInstance apply_noise(const Instance& instance, double sigma_j, double sigma_h, Rng& rng);

/// Zero-noise overlay; its Hamiltonian equals the base one.
NoisyInstance without_noise(const Instance& instance);

GaugeVector identity_gauge(const ChimeraGraph& graph);
GaugeVector random_gauge(const ChimeraGraph& graph, Rng& rng);

/// J_ij -> eps_i eps_j J_ij. Throws std::invalid_argument on size mismatch.
Instance apply_gauge(const Instance& instance, const GaugeVector& gauge);
/// Also maps h_i -> eps_i h_i.
NoisyInstance apply_gauge(const NoisyInstance& instance, const GaugeVector& gauge);

/// s_i -> eps_i s_i. The map is an involution, so the same call takes base
/// configs into the gauged frame and back.
SpinConfig ungauge_config(const SpinConfig& config, const GaugeVector& gauge);

} // namespace fairsample
