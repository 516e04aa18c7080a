#pragma once

// Thin RAII wrapper over FFTW plans.
//
// Plans are created in place with FFTW_ESTIMATE | FFTW_UNALIGNED, so the
// chosen algorithm depends only on the size and a plan may be executed on
// any buffer of that size. Plan creation and destruction go through a global
// mutex (the FFTW planner is not re-entrant); execution is thread-safe.

#include <tdcs/signal.hpp>

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace tdcs {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
inline fftw_complex* as_fftw(std::span<Complex> data) { return reinterpret_cast<fftw_complex*>(data.data()); }
} // namespace detail

class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n) {
        if (n == 0) throw ParameterError("FftPlan: size must be >= 1");
        std::vector<Complex> scratch(n);
        const int size = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        std::lock_guard lock(detail::fftw_planner_mutex());
        fwd_ = fftw_plan_dft_1d(size, detail::as_fftw(scratch), detail::as_fftw(scratch), FFTW_FORWARD, flags);
        bwd_ = fftw_plan_dft_1d(size, detail::as_fftw(scratch), detail::as_fftw(scratch), FFTW_BACKWARD, flags);
        if (!fwd_ || !bwd_) throw std::runtime_error("FftPlan: FFTW could not create a plan");
    }

    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    ~FftPlan() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
    }

    std::size_t size() const noexcept { return n_; }

    // X(k) = sum_n x(n) e^{-j 2 pi k n / N}, in place.
    void forward(std::span<Complex> data) const {
        check(data);
        fftw_execute_dft(fwd_, detail::as_fftw(data), detail::as_fftw(data));
    }

    // x(n) = (1/N) sum_k X(k) e^{+j 2 pi k n / N}, in place.
    void inverse(std::span<Complex> data) const {
        check(data);
        fftw_execute_dft(bwd_, detail::as_fftw(data), detail::as_fftw(data));
        const double scale = 1.0 / static_cast<double>(n_);
        for (auto& v : data) v *= scale;
    }

private:
    void check(std::span<Complex> data) const {
        if (data.size() != n_) throw DimensionError("FftPlan: buffer length does not match plan size");
    }

    std::size_t n_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

// Per-thread plan cache.
inline const FftPlan& fft_plan(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::unique_ptr<FftPlan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FftPlan>(n);
    return *slot;
}

inline std::vector<Complex> dft(std::span<const Complex> x) {
    std::vector<Complex> out(x.begin(), x.end());
    fft_plan(out.size()).forward(out);
    return out;
}

inline std::vector<Complex> idft(std::span<const Complex> x) {
    std::vector<Complex> out(x.begin(), x.end());
    fft_plan(out.size()).inverse(out);
    return out;
}

} // namespace tdcs
