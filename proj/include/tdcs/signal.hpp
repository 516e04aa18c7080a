#pragma once

#include <tdcs/error.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tdcs {

using Complex = std::complex<double>;
using BitVector = std::vector<std::uint8_t>;

inline constexpr double kPi = 3.14159265358979323846;

inline double energy(std::span<const Complex> x) {
    double e = 0.0;
    for (const auto& s : x) e += std::norm(s);
    return e;
}

/// y[n] += g * x[n] in real arithmetic.
inline void accumulate_scaled(Complex g, const Complex* x, Complex* y, std::size_t count) noexcept {
    const double gr = g.real(), gi = g.imag();
    auto* xd = reinterpret_cast<const double*>(x);
    auto* yd = reinterpret_cast<double*>(y);
    for (std::size_t n = 0; n < count; ++n) {
        const double xr = xd[2 * n], xi = xd[2 * n + 1];
        yd[2 * n] += gr * xr - gi * xi;
        yd[2 * n + 1] += gr * xi + gi * xr;
    }
}

/// |z| via sqrt(norm).
inline double magnitude(Complex z) noexcept { return std::sqrt(z.real() * z.real() + z.imag() * z.imag()); }

// Finite, non-empty complex sample vector.
class ComplexSignal {
public:
    ComplexSignal() = default;

    explicit ComplexSignal(std::vector<Complex> samples) : samples_(std::move(samples)) {
        if (samples_.empty()) throw DimensionError("ComplexSignal: length must be >= 1");
        for (const auto& s : samples_) {
            if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
                throw ParameterError("ComplexSignal: non-finite sample");
        }
    }

    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    const Complex& operator[](std::size_t i) const { return samples_[i]; }
    std::span<const Complex> span() const noexcept { return samples_; }
    const std::vector<Complex>& samples() const noexcept { return samples_; }
    double energy() const { return tdcs::energy(samples_); }

    auto begin() const noexcept { return samples_.begin(); }
    auto end() const noexcept { return samples_.end(); }

    bool operator==(const ComplexSignal&) const = default;

private:
    std::vector<Complex> samples_;
};

// Unit-modulus sequence (spreading codes, phase sequences).
class PolyphaseSequence {
public:
    static constexpr double kModulusTolerance = 1e-12;

    PolyphaseSequence() = default;

    explicit PolyphaseSequence(std::vector<Complex> elements) : elements_(std::move(elements)) {
        if (elements_.empty()) throw DimensionError("PolyphaseSequence: length must be >= 1");
        for (const auto& e : elements_) {
            if (!(std::abs(std::abs(e) - 1.0) <= kModulusTolerance))
                throw ParameterError("PolyphaseSequence: element is not unit modulus");
        }
    }

    std::size_t size() const noexcept { return elements_.size(); }
    const Complex& operator[](std::size_t i) const { return elements_[i]; }
    std::span<const Complex> span() const noexcept { return elements_; }
    const std::vector<Complex>& elements() const noexcept { return elements_; }
    ComplexSignal as_signal() const { return ComplexSignal(elements_); }

    bool operator==(const PolyphaseSequence&) const = default;

private:
    std::vector<Complex> elements_;
};

} // namespace tdcs
