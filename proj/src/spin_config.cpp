#include "fairsample/spin_config.hpp"

#include <charconv>
#include <stdexcept>

namespace fairsample {

namespace {

std::size_t word_count(std::size_t n) { return (n + 63) / 64; }

int hex_value(char ch) {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
    return -1;
}

} // namespace

SpinConfig::SpinConfig(std::size_t n) : n_(n), words_(word_count(n), 0) {}

SpinConfig SpinConfig::from_spins(std::span<const std::int8_t> spins) {
    SpinConfig c(spins.size());
    for (std::size_t i = 0; i < spins.size(); ++i) {
        if (spins[i] > 0) c.words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    }
    return c;
}

void SpinConfig::set_spin(std::size_t i, int s) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (s > 0) {
        words_[i >> 6] |= mask;
    } else {
        words_[i >> 6] &= ~mask;
    }
}

Spins SpinConfig::to_spins() const {
    Spins out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = bit(i) ? 1 : -1;
    return out;
}

std::string SpinConfig::to_hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    const std::size_t digits = (n_ + 3) / 4;
    std::string out = std::to_string(n_);
    out.push_back(':');
    for (std::size_t d = digits; d-- > 0;) {
        const std::size_t bitpos = 4 * d;
        const std::uint64_t nibble = (words_[bitpos >> 6] >> (bitpos & 63)) & 0xFU;
        out.push_back(kDigits[nibble]);
    }
    return out;
}

SpinConfig SpinConfig::from_hex(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("spin config '" + std::string(text) + "' lacks '<n>:' prefix");
    }
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + colon, n);
    if (ec != std::errc{} || ptr != text.data() + colon) {
        throw std::invalid_argument("bad spin count in '" + std::string(text) + "'");
    }
    const std::string_view hex = text.substr(colon + 1);
    const std::size_t digits = (n + 3) / 4;
    if (hex.size() != digits) {
        throw std::invalid_argument("spin config '" + std::string(text) + "' needs " +
                                    std::to_string(digits) + " hex digits");
    }
    SpinConfig c(n);
    for (std::size_t k = 0; k < digits; ++k) {
        const int v = hex_value(hex[k]);
        if (v < 0) throw std::invalid_argument("bad hex digit in '" + std::string(text) + "'");
        const std::size_t bitpos = 4 * (digits - 1 - k);
        c.words_[bitpos >> 6] |= static_cast<std::uint64_t>(v) << (bitpos & 63);
    }
    const std::size_t tail = n & 63;
    if (tail != 0 && !c.words_.empty() && (c.words_.back() >> tail) != 0) {
        throw std::invalid_argument("spin config '" + std::string(text) + "' sets bits beyond n");
    }
    return c;
}

std::strong_ordering operator<=>(const SpinConfig& a, const SpinConfig& b) {
    if (auto cmp = a.n_ <=> b.n_; cmp != 0) return cmp;
    for (std::size_t w = a.words_.size(); w-- > 0;) {
        if (auto cmp = a.words_[w] <=> b.words_[w]; cmp != 0) return cmp;
    }
    return std::strong_ordering::equal;
}

SpinConfig global_flip(const SpinConfig& config) {
    SpinConfig out = config;
    for (std::size_t i = 0; i < out.size(); ++i) out.flip(i);
    return out;
}

} // namespace fairsample
