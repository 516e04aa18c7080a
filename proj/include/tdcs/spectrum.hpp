#pragma once

// Spectrum marking vectors and transmitter/receiver sensing mismatch.

#include <tdcs/rng.hpp>
#include <tdcs/signal.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tdcs {

struct FrequencyBand {
    double low_hz = 0;
    double high_hz = 0;
};

// Binary availability vector S over N bins; 1 = bin usable by secondary users.
class SpectrumMark {
public:
    SpectrumMark() = default;

    explicit SpectrumMark(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
        if (bits_.empty()) throw DimensionError("SpectrumMark: N must be >= 1");
        for (std::size_t k = 0; k < bits_.size(); ++k) {
            if (bits_[k] > 1) throw ParameterError("SpectrumMark: bits must be 0 or 1");
            if (bits_[k]) available_.push_back(k);
        }
        if (available_.empty()) throw ParameterError("SpectrumMark: no available bins");
    }

    static SpectrumMark all_available(std::size_t n) { return SpectrumMark(std::vector<std::uint8_t>(n, 1)); }

    // Parses a "0110..." string.
    static SpectrumMark from_string(std::string_view s) {
        std::vector<std::uint8_t> bits;
        bits.reserve(s.size());
        for (char ch : s) {
            if (ch == '0' || ch == '1') {
                bits.push_back(static_cast<std::uint8_t>(ch - '0'));
            } else {
                throw ParameterError("SpectrumMark: expected only '0'/'1' characters");
            }
        }
        return SpectrumMark(std::move(bits));
    }

    std::size_t size() const noexcept { return bits_.size(); }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
    const std::vector<std::size_t>& available_set() const noexcept { return available_; }
    std::size_t n_available() const noexcept { return available_.size(); }
    double beta() const noexcept { return static_cast<double>(available_.size()) / static_cast<double>(bits_.size()); }
    bool is_available(std::size_t k) const { return bits_.at(k) != 0; }

    std::string to_string() const {
        std::string s;
        s.reserve(bits_.size());
        for (auto b : bits_) s.push_back(b ? '1' : '0');
        return s;
    }

    bool operator==(const SpectrumMark& o) const { return bits_ == o.bits_; }

private:
    std::vector<std::uint8_t> bits_;
    std::vector<std::size_t> available_;
};

/// Marks bin k (covering [k df, (k+1) df)) unavailable iff it overlaps any
/// unavailable band with positive measure. Bands touching a bin edge only at
/// a single point leave it available.
inline SpectrumMark mark_from_bands(double total_bandwidth_hz, std::span<const FrequencyBand> unavailable,
                                    std::size_t n) {
    if (n < 4) throw ParameterError("mark_from_bands: N must be >= 4");
    if (!(total_bandwidth_hz > 0)) throw ParameterError("mark_from_bands: bandwidth must be positive");
    for (const auto& b : unavailable) {
        if (b.low_hz < 0 || b.high_hz > total_bandwidth_hz || b.low_hz > b.high_hz)
            throw ParameterError("mark_from_bands: band outside [0, bandwidth]");
    }
    const double df = total_bandwidth_hz / static_cast<double>(n);
    std::vector<std::uint8_t> bits(n, 1);
    bool any = false;
    for (std::size_t k = 0; k < n; ++k) {
        const double lo = df * static_cast<double>(k);
        const double hi = df * static_cast<double>(k + 1);
        for (const auto& b : unavailable) {
            if (b.low_hz < hi && lo < b.high_hz) {
                bits[k] = 0;
                break;
            }
        }
        any = any || bits[k];
    }
    if (!any) throw ParameterError("mark_from_bands: all bins unavailable");
    return SpectrumMark(std::move(bits));
}

/// eta = |Omega_a & Omega_b| / sqrt(N_C^a N_C^b)
inline double correlation_coefficient(const SpectrumMark& a, const SpectrumMark& b) {
    if (a.size() != b.size()) throw DimensionError("correlation_coefficient: marks have different N");
    std::size_t shared = 0;
    for (std::size_t k = 0; k < a.size(); ++k) shared += (a.bits()[k] & b.bits()[k]);
    return static_cast<double>(shared) /
           std::sqrt(static_cast<double>(a.n_available()) * static_cast<double>(b.n_available()));
}

/// Receiver-side mark with the same N_C as tx and correlation coefficient
/// nearest to eta_target. Each swap moves one available bin onto an
/// unavailable one, lowering the overlap by exactly one bin.
inline SpectrumMark mismatch_mask(const SpectrumMark& tx, double eta_target, std::uint64_t seed) {
    if (!(eta_target > 0.0 && eta_target <= 1.0))
        throw ParameterError("mismatch_mask: eta_target must lie in (0, 1]");
    const std::size_t nc = tx.n_available();
    const std::size_t n_unavail = tx.size() - nc;
    auto swaps = static_cast<std::size_t>(std::llround((1.0 - eta_target) * static_cast<double>(nc)));
    swaps = std::min({swaps, nc, n_unavail});
    if (swaps == 0) return tx;

    std::vector<std::size_t> avail = tx.available_set();
    std::vector<std::size_t> unavail;
    unavail.reserve(n_unavail);
    for (std::size_t k = 0; k < tx.size(); ++k)
        if (!tx.bits()[k]) unavail.push_back(k);

    // Partial Fisher-Yates on both pools.
    rng::Engine eng(rng::derive_seed(seed, rng::Stream::mismatch));
    auto pick = [&eng](std::vector<std::size_t>& pool, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            const auto j = i + static_cast<std::size_t>(rng::uniform_below(eng, pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
    };
    pick(avail, swaps);
    pick(unavail, swaps);

    auto bits = tx.bits();
    for (std::size_t i = 0; i < swaps; ++i) {
        bits[avail[i]] = 0;
        bits[unavail[i]] = 1;
    }
    return SpectrumMark(std::move(bits));
}

} // namespace tdcs
