#pragma once

// Polyphase sequences, periodic/aperiodic correlation and Kronecker
// time-frequency synthesis.
//
// Shift convention shared by every module:
//   phi_{u,v}(tau) = sum_n u(n) * conj(v((n + tau) mod N))
// i.e. v is cyclically shifted to the left by tau. Negative shifts are stored
// at the circular index N - |tau|.

#include <tdcs/fft.hpp>
#include <tdcs/signal.hpp>

#include <algorithm>
#include <numeric>
#include <ostream>

namespace tdcs {

enum class CorrelationKind { periodic, aperiodic };

enum class CorrelationMethod {
    automatic, ///< transform for long inputs, direct sum otherwise
    direct,    ///< O(N^2) modular-index sum
    transform, ///< FFT fast path
};

struct CorrelationProfile {
    std::vector<Complex> values; ///< indexed by shift 0..N-1
    CorrelationKind kind = CorrelationKind::periodic;

    std::size_t size() const noexcept { return values.size(); }
    const Complex& operator[](std::size_t tau) const { return values[tau]; }
};

namespace detail {

inline void require_same_length(std::span<const Complex> u, std::span<const Complex> v, const char* who) {
    if (u.size() != v.size()) throw DimensionError(std::string(who) + ": length mismatch");
    if (u.empty()) throw DimensionError(std::string(who) + ": empty input");
}

inline std::vector<Complex> periodic_direct(std::span<const Complex> u, std::span<const Complex> v) {
    const std::size_t n = u.size();
    std::vector<Complex> out(n);
    for (std::size_t tau = 0; tau < n; ++tau) {
        Complex acc{};
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t k = i + tau;
            if (k >= n) k -= n;
            acc += u[i] * std::conj(v[k]);
        }
        out[tau] = acc;
    }
    return out;
}

// phi(tau) = (1/N) DFT(U .* conj(V))(tau)
inline std::vector<Complex> periodic_transform(std::span<const Complex> u, std::span<const Complex> v) {
    const auto& plan = fft_plan(u.size());
    std::vector<Complex> uf(u.begin(), u.end());
    std::vector<Complex> vf(v.begin(), v.end());
    plan.forward(uf);
    plan.forward(vf);
    for (std::size_t k = 0; k < uf.size(); ++k) uf[k] *= std::conj(vf[k]);
    plan.forward(uf);
    const double scale = 1.0 / static_cast<double>(u.size());
    for (auto& x : uf) x *= scale;
    return uf;
}

} // namespace detail

inline CorrelationProfile periodic_xcorr(std::span<const Complex> u, std::span<const Complex> v,
                                         CorrelationMethod method = CorrelationMethod::automatic) {
    detail::require_same_length(u, v, "periodic_xcorr");
    if (method == CorrelationMethod::automatic)
        method = u.size() > 64 ? CorrelationMethod::transform : CorrelationMethod::direct;
    CorrelationProfile p;
    p.kind = CorrelationKind::periodic;
    p.values = method == CorrelationMethod::direct ? detail::periodic_direct(u, v)
                                                   : detail::periodic_transform(u, v);
    return p;
}

inline CorrelationProfile periodic_xcorr(const ComplexSignal& u, const ComplexSignal& v,
                                         CorrelationMethod method = CorrelationMethod::automatic) {
    return periodic_xcorr(u.span(), v.span(), method);
}

// psi_{u,v}(tau) = sum_{i=0}^{N-1-tau} u(i) conj(v(i+tau)), tau in [0, N-1].
inline CorrelationProfile aperiodic_xcorr(std::span<const Complex> u, std::span<const Complex> v) {
    detail::require_same_length(u, v, "aperiodic_xcorr");
    const std::size_t n = u.size();
    CorrelationProfile p;
    p.kind = CorrelationKind::aperiodic;
    p.values.resize(n);
    for (std::size_t tau = 0; tau < n; ++tau) {
        Complex acc{};
        for (std::size_t i = 0; i + tau < n; ++i) acc += u[i] * std::conj(v[i + tau]);
        p.values[tau] = acc;
    }
    return p;
}

inline CorrelationProfile aperiodic_xcorr(const ComplexSignal& u, const ComplexSignal& v) {
    return aperiodic_xcorr(u.span(), v.span());
}

/// Zadoff-Chu sequence of the given length and root.
///
/// Odd lengths use exp(-j pi r n (n+1) / N), even lengths exp(-j pi r n^2 / N);
/// both have an ideal periodic autocorrelation when gcd(r, N) = 1.
inline PolyphaseSequence gen_zadoff_chu(std::size_t length, long long root) {
    if (length < 2) throw ParameterError("gen_zadoff_chu: length must be >= 2");
    const auto n_ll = static_cast<long long>(length);
    long long r = root % n_ll;
    if (r < 0) r += n_ll;
    if (std::gcd(r, n_ll) != 1) throw ParameterError("gen_zadoff_chu: root must be coprime with length");
    std::vector<Complex> seq(length);
    const unsigned long long two_n = 2ull * length;
    for (std::size_t n = 0; n < length; ++n) {
        const unsigned long long q = (length % 2 == 1) ? n * (n + 1ull) : n * static_cast<unsigned long long>(n);
        // phase index modulo 2N keeps the argument exact for long sequences
        const unsigned long long idx = (static_cast<unsigned long long>(r) % two_n) * (q % two_n) % two_n;
        seq[n] = std::polar(1.0, -kPi * static_cast<double>(idx) / static_cast<double>(length));
    }
    return PolyphaseSequence(std::move(seq));
}

/// The length-16 quadriphase perfect sequence used as the default time sequence.
inline PolyphaseSequence builtin_quadriphase16() {
    constexpr Complex one{1.0, 0.0}, j{0.0, 1.0}, m1{-1.0, 0.0}, mj{0.0, -1.0};
    return PolyphaseSequence({one, one, one, one,
                              one, j, m1, mj,
                              one, m1, one, m1,
                              one, mj, m1, j});
}

/// True when |phi(0) - L| and every |phi(tau != 0)| are below rel_tol * L.
inline bool is_perfect(const PolyphaseSequence& a, double rel_tol = 1e-9) {
    const auto acf = periodic_xcorr(a.span(), a.span(), CorrelationMethod::direct);
    const double len = static_cast<double>(a.size());
    const double tol = rel_tol * len;
    if (std::abs(acf[0] - len) >= tol) return false;
    for (std::size_t tau = 1; tau < acf.size(); ++tau) {
        if (std::abs(acf[tau]) >= tol) return false;
    }
    return true;
}

/// c(lN + m) = a(l) b(m).
inline ComplexSignal kronecker_synthesize(const PolyphaseSequence& a, std::span<const Complex> b) {
    if (a.size() < 2) throw ParameterError("kronecker_synthesize: time sequence length L must be >= 2");
    if (b.empty()) throw DimensionError("kronecker_synthesize: basis must be non-empty");
    const std::size_t n = b.size();
    std::vector<Complex> c(a.size() * n);
    for (std::size_t l = 0; l < a.size(); ++l) {
        for (std::size_t m = 0; m < n; ++m) c[l * n + m] = a[l] * b[m];
    }
    return ComplexSignal(std::move(c));
}

inline ComplexSignal kronecker_synthesize(const PolyphaseSequence& a, const ComplexSignal& b) {
    return kronecker_synthesize(a, b.span());
}

struct ZeroZoneReport {
    std::size_t zero_count = 0;      ///< shifts with |phi| < tolerance (tau = 0 excluded for ACF)
    std::size_t required = 0;        ///< (L-2)N+1
    double max_sidelobe_in_zone = 0; ///< max |phi(tau)| over N <= tau <= LN-N
    double eq9_residual = 0;         ///< max over |tau| < N of |phi(tau) - L psi_{b_i,b_j}(tau)|
    double tolerance = 0;
    bool auto_correlation = false;
    bool success = false;
};

/// Checks the zero-correlation zone and the short-lag identity of two
/// Kronecker FMWs built from a common perfect time sequence of length L.
///
/// The basis waveforms are recovered from the first N samples; since |a(0)| = 1
/// their aperiodic correlation is unaffected by the unknown a(0) factor.
inline ZeroZoneReport zero_zone_verify(const ComplexSignal& ci, const ComplexSignal& cj,
                                       std::size_t n, std::size_t l) {
    if (n == 0 || l < 2) throw ParameterError("zero_zone_verify: need N >= 1 and L >= 2");
    if (ci.size() != n * l || cj.size() != n * l)
        throw DimensionError("zero_zone_verify: signals must have length L*N");
    const std::size_t len = n * l;

    ZeroZoneReport rep;
    rep.tolerance = 1e-9 * static_cast<double>(len);
    rep.required = (l - 2) * n + 1;
    rep.auto_correlation = ci == cj;

    const auto phi = periodic_xcorr(ci, cj, CorrelationMethod::direct);
    for (std::size_t tau = 0; tau < len; ++tau) {
        if (rep.auto_correlation && tau == 0) continue;
        if (std::abs(phi[tau]) < rep.tolerance) ++rep.zero_count;
    }
    for (std::size_t tau = n; tau + n <= len; ++tau)
        rep.max_sidelobe_in_zone = std::max(rep.max_sidelobe_in_zone, std::abs(phi[tau]));

    const auto bi = ci.span().first(n);
    const auto bj = cj.span().first(n);
    const auto psi_ij = aperiodic_xcorr(bi, bj);
    const auto psi_ji = aperiodic_xcorr(bj, bi);
    const double dl = static_cast<double>(l);
    for (std::size_t t = 0; t < n; ++t) {
        rep.eq9_residual = std::max(rep.eq9_residual, std::abs(phi[t] - dl * psi_ij[t]));
        if (t > 0) {
            // psi_{b_i,b_j}(-t) = conj(psi_{b_j,b_i}(t))
            rep.eq9_residual = std::max(rep.eq9_residual, std::abs(phi[len - t] - dl * std::conj(psi_ji[t])));
        }
    }
    rep.success = rep.zero_count >= rep.required;
    return rep;
}

/// Writes "index,real,imag" rows with a header line.
inline void write_complex_csv(std::ostream& os, std::span<const Complex> values) {
    const auto old_prec = os.precision(17);
    os << "index,real,imag\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        os << i << ',' << values[i].real() << ',' << values[i].imag() << '\n';
    os.precision(old_prec);
}

} // namespace tdcs
