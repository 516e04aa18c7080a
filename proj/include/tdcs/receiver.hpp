#pragma once

// Correlation demodulation (windowed peak search), MRC-RAKE combining and
// one-tap MMSE frequency-domain equalization.

#include <tdcs/fft.hpp>
#include <tdcs/waveform.hpp>

#include <limits>
#include <memory>
#include <stdexcept>

namespace tdcs {

// FFT correlator against a fixed local reference; immutable and shareable
// across threads once built.
class Correlator {
public:
    explicit Correlator(const ComplexSignal& reference)
        : plan_(std::make_shared<const FftPlan>(reference.size())), ref_conj_(reference.begin(), reference.end()) {
        plan_->forward(ref_conj_);
        for (auto& v : ref_conj_) v = std::conj(v);
    }

    std::size_t size() const noexcept { return ref_conj_.size(); }

    /// phi_{r,c}(tau) for every tau in [0, LN-1].
    std::vector<Complex> correlate(std::span<const Complex> r) const {
        if (r.size() != ref_conj_.size()) throw DimensionError("Correlator: received block has the wrong length");
        std::vector<Complex> work(r.begin(), r.end());
        plan_->forward(work);
        for (std::size_t k = 0; k < work.size(); ++k) {
            const Complex a = work[k], b = ref_conj_[k];
            work[k] = {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
        }
        plan_->forward(work);
        const double scale = 1.0 / static_cast<double>(work.size());
        for (auto& v : work) v *= scale;
        return work;
    }

private:
    std::shared_ptr<const FftPlan> plan_;
    std::vector<Complex> ref_conj_; ///< conj(DFT(c))
};

struct DecisionStatistic {
    std::vector<double> values;  ///< |statistic| over the window, index k <-> tau = start + k
    std::size_t argmax_shift = 0;
    BitVector argmax_bits;
};

/// Natural-binary inverse of the modulator mapping.
inline BitVector symbol_to_bits(std::size_t tau_hat, const ShiftWindow& window) {
    if (!window.contains(tau_hat)) throw std::logic_error("symbol_to_bits: decided shift lies outside the window");
    return offset_to_bits(tau_hat - window.start, window.bits_per_symbol());
}

inline std::size_t bit_errors(std::span<const std::uint8_t> sent, std::span<const std::uint8_t> decoded) {
    if (sent.size() != decoded.size()) throw DimensionError("bit_errors: length mismatch");
    std::size_t e = 0;
    for (std::size_t i = 0; i < sent.size(); ++i) e += (sent[i] != decoded[i]);
    return e;
}

namespace detail {

inline void check_demod_window(const ShiftWindow& w, std::size_t len, const char* who) {
    check_window_width(w, who);
    if (w.start + w.width > len) throw ParameterError(std::string(who) + ": window outside [0, LN-1]");
}

// Strict '>' keeps the smallest shift on ties.
inline DecisionStatistic decide(std::vector<double> values, const ShiftWindow& w) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k] > values[best]) best = k;
    DecisionStatistic d;
    d.values = std::move(values);
    d.argmax_shift = w.start + best;
    d.argmax_bits = symbol_to_bits(d.argmax_shift, w);
    return d;
}

} // namespace detail

inline DecisionStatistic demodulate_window(const Correlator& corr, const ComplexSignal& r, const ShiftWindow& window) {
    detail::check_demod_window(window, corr.size(), "demodulate_window");
    const auto phi = corr.correlate(r.span());
    std::vector<double> values(window.width);
    for (std::size_t k = 0; k < window.width; ++k) values[k] = magnitude(phi[window.start + k]);
    return detail::decide(std::move(values), window);
}

inline DecisionStatistic demodulate_window(const ComplexSignal& r, const ComplexSignal& reference,
                                           const ShiftWindow& window) {
    return demodulate_window(Correlator(reference), r, window);
}

inline DecisionStatistic demodulate_window(const ComplexSignal& r, const KroneckerFmwUser& user,
                                           const ShiftWindow& window) {
    return demodulate_window(Correlator(user.c), r, window);
}

/// MRC-RAKE with known desired-link taps h[0..T]:
///   z(tau) = | sum_p conj(h_p) phi_{r,c}((tau - p) mod LN) |.
/// A causal delay of p samples moves the correlation peak from tau to tau - p.
inline DecisionStatistic rake_demodulate(const Correlator& corr, const ComplexSignal& r, const ShiftWindow& window,
                                         std::span<const Complex> taps, std::size_t plan_t_max) {
    detail::check_demod_window(window, corr.size(), "rake_demodulate");
    if (taps.empty()) throw ParameterError("rake_demodulate: need at least one tap");
    if (taps.size() - 1 > plan_t_max) throw ParameterError("rake_demodulate: channel order exceeds the plan guard");
    const std::size_t len = corr.size();
    const auto phi = corr.correlate(r.span());
    std::vector<double> values(window.width);
    for (std::size_t k = 0; k < window.width; ++k) {
        const std::size_t tau = window.start + k;
        Complex acc{};
        for (std::size_t p = 0; p < taps.size(); ++p) acc += std::conj(taps[p]) * phi[(tau + len - p % len) % len];
        values[k] = magnitude(acc);
    }
    return detail::decide(std::move(values), window);
}

inline DecisionStatistic rake_demodulate(const ComplexSignal& r, const ComplexSignal& reference,
                                         const ShiftWindow& window, std::span<const Complex> taps,
                                         std::size_t plan_t_max) {
    return rake_demodulate(Correlator(reference), r, window, taps, plan_t_max);
}

inline DecisionStatistic rake_demodulate(const ComplexSignal& r, const KroneckerFmwUser& user,
                                         const ShiftWindow& window, std::span<const Complex> taps,
                                         std::size_t plan_t_max) {
    return rake_demodulate(Correlator(user.c), r, window, taps, plan_t_max);
}

/// H(k) = DFT of the zero-padded taps.
inline std::vector<Complex> frequency_response(std::span<const Complex> taps, std::size_t n) {
    if (taps.size() > n) throw DimensionError("frequency_response: more taps than bins");
    std::vector<Complex> h(n, Complex{});
    std::copy(taps.begin(), taps.end(), h.begin());
    fft_plan(n).forward(h);
    return h;
}

/// Per-bin H*(k) / (|H(k)|^2 + 1/snr(k)); snr may be +inf (zero forcing).
inline ComplexSignal mmse_fde(const ComplexSignal& r, std::span<const Complex> freq_response,
                              std::span<const double> snr_per_bin) {
    const std::size_t n = r.size();
    if (freq_response.size() != n || snr_per_bin.size() != n)
        throw DimensionError("mmse_fde: response/snr length must equal block length");
    std::vector<Complex> y(r.begin(), r.end());
    const auto& plan = fft_plan(n);
    plan.forward(y);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(snr_per_bin[k] > 0)) throw ParameterError("mmse_fde: snr must be positive");
        const Complex h = freq_response[k];
        const double den = std::norm(h) + 1.0 / snr_per_bin[k];
        y[k] = den > 0 ? y[k] * std::conj(h) / den : Complex{};
    }
    plan.inverse(y);
    return ComplexSignal(std::move(y));
}

inline ComplexSignal mmse_fde(const ComplexSignal& r, std::span<const Complex> freq_response, double snr) {
    return mmse_fde(r, freq_response, std::vector<double>(r.size(), snr));
}

} // namespace tdcs
