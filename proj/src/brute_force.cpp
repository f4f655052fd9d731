#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "fairsample/ising.hpp"
#include "fairsample/oracle.hpp"

namespace fairsample {

namespace {

template <class T>
struct ScanResult {
    T min_energy = std::numeric_limits<T>::max();
    std::uint64_t count = 0;
    std::vector<SpinConfig> configs;
};

template <class T>
bool below(T e, T ref) {
    if constexpr (std::is_floating_point_v<T>) {
        return e < ref - kEnergyTolerance;
    } else {
        return e < ref;
    }
}

template <class T>
bool matches(T e, T ref) {
    if constexpr (std::is_floating_point_v<T>) {
        return std::abs(e - ref) <= kEnergyTolerance;
    } else {
        return e == ref;
    }
}

/// Gray-code scan of the low `free_bits` sites with the remaining high sites
/// fixed by `prefix`.
template <class T>
ScanResult<T> scan_block(const IsingModel<T>& model, int free_bits, std::uint64_t prefix, std::size_t cap) {
    const int n = model.size();
    Spins spins(static_cast<std::size_t>(n), -1);
    for (int i = free_bits; i < n; ++i) {
        spins[static_cast<std::size_t>(i)] = ((prefix >> (i - free_bits)) & 1U) ? 1 : -1;
    }

    ScanResult<T> out;
    T e = model.energy(spins);
    const std::uint64_t steps = std::uint64_t{1} << free_bits;
    for (std::uint64_t t = 0;; ++t) {
        // Incremental energies are exact for integers; real-valued candidates
        // are re-evaluated from scratch before they are compared.
        T candidate = e;
        if constexpr (std::is_floating_point_v<T>) {
            if (out.count != 0 && e > out.min_energy + 1e-6) candidate = e;
            else candidate = model.energy(spins);
        }
        if (out.count == 0 || below(candidate, out.min_energy)) {
            out.min_energy = candidate;
            out.count = 1;
            out.configs.clear();
            out.configs.push_back(SpinConfig::from_spins(spins));
        } else if (matches(candidate, out.min_energy)) {
            ++out.count;
            if (out.configs.size() <= cap) out.configs.push_back(SpinConfig::from_spins(spins));
        }
        if (t + 1 == steps) break;
        const int site = std::countr_zero(t + 1);
        e += model.delta(spins, site);
        spins[static_cast<std::size_t>(site)] = static_cast<std::int8_t>(-spins[static_cast<std::size_t>(site)]);
    }
    return out;
}

template <class T>
BasicGroundStateSet<T> brute_force(const IsingModel<T>& model, Exec exec, std::size_t cap) {
    const int n = model.size();
    if (n > kBruteForceMaxSites) {
        throw OracleInfeasible("brute force limited to " + std::to_string(kBruteForceMaxSites) +
                               " sites, instance has " + std::to_string(n));
    }

    std::vector<ScanResult<T>> blocks;
    if (exec == Exec::Serial) {
        blocks.push_back(scan_block(model, n, 0, cap));
    } else {
        const int high = std::min(n, 6);
        const int low = n - high;
        const auto nblocks = static_cast<std::int64_t>(1) << high;
        blocks.resize(static_cast<std::size_t>(nblocks));
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t b = 0; b < nblocks; ++b) {
            blocks[static_cast<std::size_t>(b)] = scan_block(model, low, static_cast<std::uint64_t>(b), cap);
        }
    }

    BasicGroundStateSet<T> out;
    bool first = true;
    for (const auto& blk : blocks) {
        if (blk.count == 0) continue;
        if (first || below(blk.min_energy, out.min_energy)) out.min_energy = blk.min_energy;
        first = false;
    }
    for (auto& blk : blocks) {
        if (blk.count == 0 || !matches(blk.min_energy, out.min_energy)) continue;
        out.count += blk.count;
        out.configs.insert(out.configs.end(), std::make_move_iterator(blk.configs.begin()),
                           std::make_move_iterator(blk.configs.end()));
    }
    out.exact = true;
    if (out.count > cap) {
        out.status = EnumerationStatus::Overflow;
        out.configs.clear();
    } else {
        std::sort(out.configs.begin(), out.configs.end());
    }
    return out;
}

} // namespace

GroundStateSet brute_force_enumerate(const Instance& instance, Exec exec, std::size_t cap) {
    return brute_force(BaseModel(instance), exec, cap);
}

NoisyGroundStateSet brute_force_enumerate(const NoisyInstance& instance, Exec exec, std::size_t cap) {
    return brute_force(NoisyModel(instance), exec, cap);
}

bool closed_under_flip(const GroundStateSet& set) {
    for (const SpinConfig& c : set.configs) {
        if (!std::binary_search(set.configs.begin(), set.configs.end(), global_flip(c))) return false;
    }
    return true;
}

} // namespace fairsample
