#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairsample {

/// Unpacked ±1 spins in active-index order; the working representation of
/// the Monte Carlo kernels.
using Spins = std::vector<std::int8_t>;

/// Bit-packed ±1 assignment over the active qubits of a graph.
/// Bit i (active index i) set means S_i = +1.
///
/// Text form is "<n>:<hex>", the value sum_i bit_i 2^i written big-endian
/// with exactly ceil(n / 4) lowercase hex digits, e.g. "6:2d".
/// Ordering is by size, then by that integer value (the canonical order).
class SpinConfig {
public:
    SpinConfig() = default;
    /// n spins, all -1.
    explicit SpinConfig(std::size_t n);

    static SpinConfig from_spins(std::span<const std::int8_t> spins);
    static SpinConfig from_hex(std::string_view text);

    std::size_t size() const { return n_; }

    bool bit(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
    int spin(std::size_t i) const { return bit(i) ? 1 : -1; }
    void set_spin(std::size_t i, int s);
    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    Spins to_spins() const;
    std::string to_hex() const;
    std::span<const std::uint64_t> words() const { return words_; }

    friend bool operator==(const SpinConfig&, const SpinConfig&) = default;
    friend std::strong_ordering operator<=>(const SpinConfig& a, const SpinConfig& b);

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Inverts every spin.
SpinConfig global_flip(const SpinConfig& config);

} // namespace fairsample

template <>
struct std::hash<fairsample::SpinConfig> {
    std::size_t operator()(const fairsample::SpinConfig& c) const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL ^ c.size();
        for (std::uint64_t w : c.words()) {
            h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};
