#pragma once

// FMW synthesis, Kronecker assembly, P-CCSK modulation and cyclic prefix.

#include <tdcs/fft.hpp>
#include <tdcs/rng.hpp>
#include <tdcs/seqcore.hpp>
#include <tdcs/spectrum.hpp>

#include <bit>

namespace tdcs {

/// Pseudorandom quantized phase sequence e^{j 2 pi q(k) / levels}, q(k) uniform.
inline PolyphaseSequence gen_phase_sequence(std::uint64_t seed, std::size_t n, unsigned phase_levels = 4) {
    if (n == 0) throw ParameterError("gen_phase_sequence: N must be >= 1");
    if (phase_levels < 2 || !std::has_single_bit(phase_levels))
        throw ParameterError("gen_phase_sequence: phase_levels must be a power of two >= 2");
    static constexpr Complex quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    rng::Engine eng(rng::derive_seed(seed, rng::Stream::fmw));
    std::vector<Complex> p(n);
    for (auto& e : p) {
        const auto q = rng::uniform_below(eng, phase_levels);
        if ((4 * q) % phase_levels == 0) {
            e = quarter[4 * q / phase_levels];
        } else {
            e = std::polar(1.0, 2.0 * kPi * static_cast<double>(q) / phase_levels);
        }
    }
    return PolyphaseSequence(std::move(p));
}

struct BasisFmw {
    ComplexSignal samples; ///< b(n), unit energy
    SpectrumMark mark;
    int user_id = 0;
    std::uint64_t phase_seed = 0;
};

/// b(n) = (lambda / N) sum_{k in Omega^C} e^{j m(k)} e^{j 2 pi k n / N}, lambda = sqrt(N / N_C).
///
/// The 1/N inverse-transform factor makes ||b||^2 = 1 exactly.
inline BasisFmw synth_fmw(const SpectrumMark& mark, const PolyphaseSequence& phases) {
    if (phases.size() != mark.size()) throw DimensionError("synth_fmw: phase sequence length must equal N");
    if (mark.n_available() == 0) throw ParameterError("synth_fmw: no available bins");
    const std::size_t n = mark.size();
    std::vector<Complex> spec(n, Complex{});
    for (auto k : mark.available_set()) spec[k] = phases[k];
    fft_plan(n).inverse(spec);
    const double lambda = std::sqrt(static_cast<double>(n) / static_cast<double>(mark.n_available()));
    for (auto& s : spec) s *= lambda;
    return BasisFmw{ComplexSignal(std::move(spec)), mark, 0, 0};
}

struct KroneckerFmwUser {
    ComplexSignal c; ///< length L*N, ||c||^2 = L
    BasisFmw basis;
    PolyphaseSequence time_seq;

    std::size_t n() const noexcept { return basis.samples.size(); }
    std::size_t l() const noexcept { return time_seq.size(); }
    std::size_t length() const noexcept { return c.size(); }
};

inline KroneckerFmwUser build_user_fmw(const SpectrumMark& mark, const PolyphaseSequence& time_seq,
                                       std::uint64_t user_seed, unsigned phase_levels = 4, int user_id = 0) {
    if (!is_perfect(time_seq)) throw ValidationError("build_user_fmw: time sequence does not have a perfect periodic ACF");
    auto basis = synth_fmw(mark, gen_phase_sequence(user_seed, mark.size(), phase_levels));
    basis.user_id = user_id;
    basis.phase_seed = user_seed;
    auto c = kronecker_synthesize(time_seq, basis.samples);
    return KroneckerFmwUser{std::move(c), std::move(basis), time_seq};
}

// Contiguous range of admissible shifts [start, start + width - 1] for one user.
struct ShiftWindow {
    std::size_t start = 0;
    std::size_t width = 0; ///< P-CCSK order M, a power of two

    std::size_t last() const noexcept { return start + width - 1; }
    std::size_t bits_per_symbol() const noexcept { return static_cast<std::size_t>(std::countr_zero(width)); }
    bool contains(std::size_t tau) const noexcept { return tau >= start && tau < start + width; }

    bool operator==(const ShiftWindow&) const = default;
};

inline void check_window_width(const ShiftWindow& w, const char* who) {
    if (w.width < 2 || !std::has_single_bit(w.width))
        throw ParameterError(std::string(who) + ": window width must be a power of two >= 2");
}

/// Natural binary, MSB first.
inline std::size_t bits_to_offset(std::span<const std::uint8_t> bits) {
    std::size_t v = 0;
    for (auto b : bits) v = (v << 1) | (b & 1u);
    return v;
}

inline BitVector offset_to_bits(std::size_t offset, std::size_t n_bits) {
    BitVector bits(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i) bits[n_bits - 1 - i] = static_cast<std::uint8_t>((offset >> i) & 1u);
    return bits;
}

/// <x>_s : y(n) = x((n + s) mod len)
inline std::vector<Complex> cyclic_shift_left(std::span<const Complex> x, std::size_t s) {
    const std::size_t n = x.size();
    std::vector<Complex> y(n);
    if (n == 0) return y;
    s %= n;
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(s), x.end(), y.begin());
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(s), y.begin() + static_cast<std::ptrdiff_t>(n - s));
    return y;
}

struct ModulatedBlock {
    ComplexSignal x;
    std::size_t shift = 0;
    BitVector bits;
};

/// P-CCSK: tau = window.start + value(bits), x = FMW shifted left by tau.
///
/// With circular = false the window must fit inside [0, len-1]; circular
/// windows wrap modulo the FMW length.
inline ModulatedBlock modulate(const ComplexSignal& fmw, std::span<const std::uint8_t> bits, const ShiftWindow& window,
                               bool circular = false) {
    check_window_width(window, "modulate");
    if (bits.size() != window.bits_per_symbol()) throw ParameterError("modulate: bit count must equal log2(M)");
    const std::size_t len = fmw.size();
    if (window.start >= len || (!circular && window.start + window.width > len))
        throw ParameterError("modulate: shift window exceeds [0, LN-1]");
    const std::size_t tau = (window.start + bits_to_offset(bits)) % len;
    return ModulatedBlock{ComplexSignal(cyclic_shift_left(fmw.span(), tau)), tau, BitVector(bits.begin(), bits.end())};
}

inline ModulatedBlock modulate(const KroneckerFmwUser& user, std::span<const std::uint8_t> bits,
                               const ShiftWindow& window, bool circular = false) {
    return modulate(user.c, bits, window, circular);
}

inline ComplexSignal add_cyclic_prefix(const ComplexSignal& x, std::size_t tg) {
    if (tg >= x.size()) throw ParameterError("add_cyclic_prefix: prefix must be shorter than the block");
    std::vector<Complex> y;
    y.reserve(x.size() + tg);
    y.insert(y.end(), x.end() - static_cast<std::ptrdiff_t>(tg), x.end());
    y.insert(y.end(), x.begin(), x.end());
    return ComplexSignal(std::move(y));
}

inline ComplexSignal remove_cyclic_prefix(const ComplexSignal& y, std::size_t tg) {
    if (tg >= y.size()) throw ParameterError("remove_cyclic_prefix: prefix must be shorter than the block");
    return ComplexSignal(std::vector<Complex>(y.begin() + static_cast<std::ptrdiff_t>(tg), y.end()));
}

} // namespace tdcs
