#pragma once

#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include "fairsample/instance.hpp"
#include "fairsample/spin_config.hpp"

namespace fairsample {

/// Energy comparison tolerance for real-valued (noisy) Hamiltonians.
inline constexpr double kEnergyTolerance = 1e-9;

/// Compiled adjacency form of a Hamiltonian in active-index space:
/// per-site neighbor/coupling arrays plus local fields, for O(deg) flips.
///
/// T = std::int64_t for base instances (all arithmetic exact),
/// T = double for noisy instances.
template <class T>
class IsingModel {
public:
    struct Bond {
        int site;
        T coupling;
    };

    IsingModel() = default;
    explicit IsingModel(const Instance& instance)
        requires std::is_integral_v<T>;
    explicit IsingModel(const NoisyInstance& instance)
        requires std::is_floating_point_v<T>;

    int size() const { return static_cast<int>(fields_.size()); }

    std::span<const Bond> bonds(int site) const {
        const auto i = static_cast<std::size_t>(site);
        return std::span<const Bond>(bonds_).subspan(static_cast<std::size_t>(offsets_[i]),
                                                     static_cast<std::size_t>(offsets_[i + 1] - offsets_[i]));
    }
    T field(int site) const { return fields_[static_cast<std::size_t>(site)]; }
    bool has_fields() const { return has_fields_; }

    /// sum_j J_ij s_j + h_i
    T local_field(std::span<const std::int8_t> spins, int site) const {
        T acc = fields_[static_cast<std::size_t>(site)];
        for (const Bond& b : bonds(site)) acc += b.coupling * spins[static_cast<std::size_t>(b.site)];
        return acc;
    }

    /// E(flipped) - E(spins) = 2 s_i (sum_j J_ij s_j + h_i)
    T delta(std::span<const std::int8_t> spins, int site) const {
        return 2 * spins[static_cast<std::size_t>(site)] * local_field(spins, site);
    }

    T energy(std::span<const std::int8_t> spins) const;

    /// sum |J| + sum |h|; -bound <= E <= bound.
    T energy_bound() const;

    /// max |J| over all bonds (0 for an empty model).
    T max_coupling() const;

    /// max_i 2 (sum_j |J_ij| + |h_i|), an upper bound on any flip cost.
    T max_flip_cost() const;

private:
    void build(const ChimeraGraph& graph, const std::vector<T>& couplings);

    std::vector<int> offsets_;
    std::vector<Bond> bonds_;
    std::vector<T> fields_;
    bool has_fields_ = false;
};

using BaseModel = IsingModel<std::int64_t>;
using NoisyModel = IsingModel<double>;

/// Exact integer energy of a base instance. Throws std::invalid_argument when
/// the config length does not match the graph.
std::int64_t energy(const Instance& instance, const SpinConfig& config);
double energy(const NoisyInstance& instance, const SpinConfig& config);

/// Energy change for flipping a qubit (graph index, not active index).
/// Throws std::invalid_argument for inactive qubits.
std::int64_t delta_energy(const Instance& instance, const SpinConfig& config, int qubit);
double delta_energy(const NoisyInstance& instance, const SpinConfig& config, int qubit);

bool energies_equal(std::int64_t a, std::int64_t b);
bool energies_equal(double a, double b);

} // namespace fairsample
