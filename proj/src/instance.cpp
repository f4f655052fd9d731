#include "fairsample/instance.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace fairsample {

namespace {

void check_gauge(const ChimeraGraph& graph, const GaugeVector& gauge) {
    if (gauge.signs.size() != static_cast<std::size_t>(graph.num_active())) {
        throw std::invalid_argument("gauge has " + std::to_string(gauge.signs.size()) +
                                    " signs but graph has " + std::to_string(graph.num_active()) +
                                    " active qubits");
    }
    for (std::int8_t s : gauge.signs) {
        if (s != 1 && s != -1) throw std::invalid_argument("gauge signs must be +1 or -1");
    }
}

int gauge_sign(const ChimeraGraph& graph, const GaugeVector& gauge, int qubit) {
    return gauge.signs[static_cast<std::size_t>(graph.active_index(qubit))];
}

} // namespace

void validate_instance(const Instance& instance) {
    if (instance.couplings.size() != static_cast<std::size_t>(instance.graph.num_couplers())) {
        throw std::invalid_argument("instance has " + std::to_string(instance.couplings.size()) +
                                    " couplings for " + std::to_string(instance.graph.num_couplers()) +
                                    " active couplers");
    }
    for (std::size_t e = 0; e < instance.couplings.size(); ++e) {
        const int m = std::abs(instance.couplings[e]);
        if (m < 5 || m > 7) {
            const Coupler c = instance.graph.couplers()[e];
            throw std::invalid_argument("coupling " + std::to_string(instance.couplings[e]) + " on (" +
                                        std::to_string(c.a) + ", " + std::to_string(c.b) +
                                        ") outside {+-5, +-6, +-7}");
        }
    }
}

NoisyInstance apply_noise(const Instance& instance, double sigma_j, double sigma_h, Rng& rng) {
    if (!(sigma_j >= 0.0) || !(sigma_h >= 0.0)) {
        throw std::invalid_argument("noise standard deviations must be non-negative");
    }
    NoisyInstance out = without_noise(instance);
    out.sigma_j = sigma_j;
    out.sigma_h = sigma_h;
    std::normal_distribution<double> unit(0.0, 1.0);
    for (double& x : out.coupler_noise) x = sigma_j * unit(rng);
    for (double& x : out.field_noise) x = sigma_h * unit(rng);
    return out;
}

NoisyInstance without_noise(const Instance& instance) {
    NoisyInstance out;
    out.base = instance;
    out.coupler_noise.assign(instance.couplings.size(), 0.0);
    out.field_noise.assign(static_cast<std::size_t>(instance.graph.num_active()), 0.0);
    return out;
}

GaugeVector identity_gauge(const ChimeraGraph& graph) {
    return GaugeVector{std::vector<std::int8_t>(static_cast<std::size_t>(graph.num_active()), 1)};
}

GaugeVector random_gauge(const ChimeraGraph& graph, Rng& rng) {
    GaugeVector g = identity_gauge(graph);
    std::bernoulli_distribution coin(0.5);
    for (auto& s : g.signs) s = coin(rng) ? 1 : -1;
    return g;
}

Instance apply_gauge(const Instance& instance, const GaugeVector& gauge) {
    check_gauge(instance.graph, gauge);
    Instance out = instance;
    const auto couplers = instance.graph.couplers();
    for (std::size_t e = 0; e < couplers.size(); ++e) {
        out.couplings[e] *= gauge_sign(instance.graph, gauge, couplers[e].a) *
                            gauge_sign(instance.graph, gauge, couplers[e].b);
    }
    return out;
}

NoisyInstance apply_gauge(const NoisyInstance& instance, const GaugeVector& gauge) {
    NoisyInstance out = instance;
    out.base = apply_gauge(instance.base, gauge);
    const auto couplers = instance.graph().couplers();
    for (std::size_t e = 0; e < couplers.size(); ++e) {
        out.coupler_noise[e] *= gauge_sign(instance.graph(), gauge, couplers[e].a) *
                                gauge_sign(instance.graph(), gauge, couplers[e].b);
    }
    for (std::size_t i = 0; i < out.field_noise.size(); ++i) out.field_noise[i] *= gauge.signs[i];
    return out;
}

SpinConfig ungauge_config(const SpinConfig& config, const GaugeVector& gauge) {
    if (gauge.signs.size() != config.size()) {
        throw std::invalid_argument("gauge/config size mismatch");
    }
    SpinConfig out = config;
    for (std::size_t i = 0; i < config.size(); ++i) {
        if (gauge.signs[i] < 0) out.flip(i);
    }
    return out;
}

} // namespace fairsample
