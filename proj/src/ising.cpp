#include "fairsample/ising.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fairsample {

template <class T>
IsingModel<T>::IsingModel(const Instance& instance)
    requires std::is_integral_v<T>
{
    std::vector<T> couplings(instance.couplings.begin(), instance.couplings.end());
    build(instance.graph, couplings);
}

template <class T>
IsingModel<T>::IsingModel(const NoisyInstance& instance)
    requires std::is_floating_point_v<T>
{
    std::vector<T> couplings(instance.base.couplings.size());
    for (std::size_t e = 0; e < couplings.size(); ++e) couplings[e] = instance.coupling(e);
    build(instance.graph(), couplings);
    fields_ = instance.field_noise;
    for (double h : fields_) has_fields_ = has_fields_ || h != 0.0;
}

template <class T>
void IsingModel<T>::build(const ChimeraGraph& graph, const std::vector<T>& couplings) {
    if (couplings.size() != static_cast<std::size_t>(graph.num_couplers())) {
        throw std::invalid_argument("coupling count does not match graph");
    }
    const auto n = static_cast<std::size_t>(graph.num_active());
    std::vector<std::vector<Bond>> adj(n);
    const auto couplers = graph.couplers();
    for (std::size_t e = 0; e < couplers.size(); ++e) {
        const int a = graph.active_index(couplers[e].a);
        const int b = graph.active_index(couplers[e].b);
        adj[static_cast<std::size_t>(a)].push_back({b, couplings[e]});
        adj[static_cast<std::size_t>(b)].push_back({a, couplings[e]});
    }
    offsets_.assign(n + 1, 0);
    bonds_.clear();
    for (std::size_t i = 0; i < n; ++i) {
        bonds_.insert(bonds_.end(), adj[i].begin(), adj[i].end());
        offsets_[i + 1] = static_cast<int>(bonds_.size());
    }
    fields_.assign(n, T{0});
}

template <class T>
T IsingModel<T>::energy(std::span<const std::int8_t> spins) const {
    T e{0};
    for (int i = 0; i < size(); ++i) {
        const int si = spins[static_cast<std::size_t>(i)];
        T bond_sum{0};
        for (const Bond& b : bonds(i)) {
            if (b.site > i) bond_sum += b.coupling * spins[static_cast<std::size_t>(b.site)];
        }
        e -= si * (bond_sum + fields_[static_cast<std::size_t>(i)]);
    }
    return e;
}

template <class T>
T IsingModel<T>::energy_bound() const {
    T bound{0};
    for (int i = 0; i < size(); ++i) {
        for (const Bond& b : bonds(i)) {
            if (b.site > i) bound += b.coupling < 0 ? -b.coupling : b.coupling;
        }
        const T h = fields_[static_cast<std::size_t>(i)];
        bound += h < 0 ? -h : h;
    }
    return bound;
}

template <class T>
T IsingModel<T>::max_coupling() const {
    T m{0};
    for (const Bond& b : bonds_) m = std::max(m, b.coupling < 0 ? -b.coupling : b.coupling);
    return m;
}

template <class T>
T IsingModel<T>::max_flip_cost() const {
    T m{0};
    for (int i = 0; i < size(); ++i) {
        const T h = fields_[static_cast<std::size_t>(i)];
        T acc = h < 0 ? -h : h;
        for (const Bond& b : bonds(i)) acc += b.coupling < 0 ? -b.coupling : b.coupling;
        m = std::max(m, 2 * acc);
    }
    return m;
}

template class IsingModel<std::int64_t>;
template class IsingModel<double>;

namespace {

void check_config(const ChimeraGraph& graph, const SpinConfig& config) {
    if (config.size() != static_cast<std::size_t>(graph.num_active())) {
        throw std::invalid_argument("config has " + std::to_string(config.size()) +
                                    " spins but graph has " + std::to_string(graph.num_active()) +
                                    " active qubits");
    }
}

int active_spin(const ChimeraGraph& graph, const SpinConfig& config, int qubit) {
    return config.spin(static_cast<std::size_t>(graph.active_index(qubit)));
}

int checked_site(const ChimeraGraph& graph, int qubit) {
    if (!graph.is_active(qubit)) {
        throw std::invalid_argument("qubit " + std::to_string(qubit) + " is not active");
    }
    return graph.active_index(qubit);
}

} // namespace

// Both energy() overloads walk the coupler list directly rather than the
// compiled adjacency, so they double as an independent check on IsingModel.
std::int64_t energy(const Instance& instance, const SpinConfig& config) {
    check_config(instance.graph, config);
    std::int64_t e = 0;
    const auto couplers = instance.graph.couplers();
    for (std::size_t k = 0; k < couplers.size(); ++k) {
        e -= static_cast<std::int64_t>(instance.couplings[k]) * active_spin(instance.graph, config, couplers[k].a) *
             active_spin(instance.graph, config, couplers[k].b);
    }
    return e;
}

double energy(const NoisyInstance& instance, const SpinConfig& config) {
    check_config(instance.graph(), config);
    double e = 0.0;
    const auto couplers = instance.graph().couplers();
    for (std::size_t k = 0; k < couplers.size(); ++k) {
        e -= instance.coupling(k) * active_spin(instance.graph(), config, couplers[k].a) *
             active_spin(instance.graph(), config, couplers[k].b);
    }
    for (std::size_t i = 0; i < config.size(); ++i) e -= instance.field_noise[i] * config.spin(i);
    return e;
}

std::int64_t delta_energy(const Instance& instance, const SpinConfig& config, int qubit) {
    check_config(instance.graph, config);
    const int site = checked_site(instance.graph, qubit);
    std::int64_t field = 0;
    for (int nb : instance.graph.neighbors(qubit)) {
        const int e = instance.graph.coupler_index(Coupler(qubit, nb));
        field += static_cast<std::int64_t>(instance.couplings[static_cast<std::size_t>(e)]) *
                 active_spin(instance.graph, config, nb);
    }
    return 2 * config.spin(static_cast<std::size_t>(site)) * field;
}

double delta_energy(const NoisyInstance& instance, const SpinConfig& config, int qubit) {
    check_config(instance.graph(), config);
    const int site = checked_site(instance.graph(), qubit);
    double field = instance.field_noise[static_cast<std::size_t>(site)];
    for (int nb : instance.graph().neighbors(qubit)) {
        const int e = instance.graph().coupler_index(Coupler(qubit, nb));
        field += instance.coupling(static_cast<std::size_t>(e)) * active_spin(instance.graph(), config, nb);
    }
    return 2.0 * config.spin(static_cast<std::size_t>(site)) * field;
}

bool energies_equal(std::int64_t a, std::int64_t b) { return a == b; }

bool energies_equal(double a, double b) { return std::abs(a - b) <= kEnergyTolerance; }

} // namespace fairsample
