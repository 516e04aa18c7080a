#pragma once

// P-CCSK shift-window planning, MUI-free verification and capacity analytics.

#include <tdcs/waveform.hpp>

#include <cmath>
#include <optional>

namespace tdcs {

// Per-user shift windows on the circle Z_{LN}, with the guard G = N + T_max
// that every pair of admissible shifts must keep.
class ShiftPlan {
public:
    ShiftPlan(std::vector<ShiftWindow> windows, std::size_t n, std::size_t l, std::size_t t_max)
        : windows_(std::move(windows)), n_(n), l_(l), t_max_(t_max) {
        if (n_ == 0 || l_ == 0) throw ParameterError("ShiftPlan: N and L must be positive");
        if (windows_.empty()) throw ParameterError("ShiftPlan: at least one window required");
        for (const auto& w : windows_) {
            check_window_width(w, "ShiftPlan");
            if (w.width != windows_.front().width) throw ParameterError("ShiftPlan: window widths must be equal");
            if (w.start + w.width > circular_length()) throw ParameterError("ShiftPlan: window exceeds [0, LN-1]");
        }
    }

    const std::vector<ShiftWindow>& windows() const noexcept { return windows_; }
    const ShiftWindow& window(std::size_t user) const { return windows_.at(user); }
    std::size_t users() const noexcept { return windows_.size(); }
    std::size_t n() const noexcept { return n_; }
    std::size_t l() const noexcept { return l_; }
    std::size_t m() const noexcept { return windows_.front().width; }
    std::size_t t_max() const noexcept { return t_max_; }
    std::size_t circular_length() const noexcept { return n_ * l_; }
    std::size_t guard() const noexcept { return n_ + t_max_; }

private:
    std::vector<ShiftWindow> windows_;
    std::size_t n_, l_, t_max_;
};

/// U_max = floor(LN / (N + T_max + M)); T_max = 0 is the single-path capacity.
inline std::size_t u_max(std::size_t l, std::size_t n, std::size_t m, std::size_t t_max = 0) {
    if (l == 0 || n == 0 || m == 0) throw ParameterError("u_max: arguments must be positive");
    return (l * n) / (n + t_max + m);
}

struct MuiViolation {
    std::size_t victim = 0;     ///< user i (0-based)
    std::size_t interferer = 0; ///< user j (0-based)
    std::size_t victim_shift = 0;
    std::size_t interferer_shift = 0;
};

struct MuiCheck {
    bool mui_free = true;
    std::vector<MuiViolation> violations; ///< first offending shift pair per ordered (i, j)

    explicit operator bool() const noexcept { return mui_free; }
};

/// tau_i must avoid every open interval (tau_j - G, tau_j + G) on Z_{LN}.
///
/// The union over tau_j in window j is the integer arc
/// [s_j - G + 1, s_j + M - 1 + G - 1], tested in O(1) per tau_i.
inline MuiCheck verify_mui_free(const ShiftPlan& plan) {
    MuiCheck out;
    const std::size_t len = plan.circular_length();
    const std::size_t g = plan.guard();
    const std::size_t m = plan.m();
    const std::size_t arc = m + 2 * g - 2; // number of forbidden residues (may exceed len)
    for (std::size_t i = 0; i < plan.users(); ++i) {
        for (std::size_t j = 0; j < plan.users(); ++j) {
            if (i == j) continue;
            const auto& wi = plan.window(i);
            const auto& wj = plan.window(j);
            const std::size_t arc_start = (wj.start + len - (g - 1) % len) % len;
            for (std::size_t tau_i = wi.start; tau_i <= wi.last(); ++tau_i) {
                const std::size_t off = (tau_i + len - arc_start) % len;
                if (arc >= len || off < arc) {
                    // report the nearest interferer shift
                    std::size_t best = wj.start;
                    std::size_t best_d = len;
                    for (std::size_t tau_j = wj.start; tau_j <= wj.last(); ++tau_j) {
                        const std::size_t fwd = (tau_i + len - tau_j) % len;
                        const std::size_t d = std::min(fwd, len - fwd);
                        if (d < best_d) {
                            best_d = d;
                            best = tau_j;
                        }
                    }
                    out.mui_free = false;
                    out.violations.push_back({i, j, tau_i, best});
                    break;
                }
            }
        }
    }
    return out;
}

/// Window layout of the multiuser example: user i (1-based) occupies
/// [i G + (i-1) M, i (G + M) - 1] with G = N + T_max.
inline ShiftPlan plan_shifts(std::size_t users, std::size_t n, std::size_t l, std::size_t m, std::size_t t_max = 0) {
    if (users == 0) throw ParameterError("plan_shifts: U must be >= 1");
    if (n == 0 || l == 0) throw ParameterError("plan_shifts: N and L must be positive");
    if (m < 2 || !std::has_single_bit(m)) throw ParameterError("plan_shifts: M must be a power of two >= 2");
    const std::size_t cap = u_max(l, n, m, t_max);
    if (users > cap) {
        throw CapacityError("plan_shifts: " + std::to_string(users) + " users do not fit (N=" + std::to_string(n) +
                                ", L=" + std::to_string(l) + ", M=" + std::to_string(m) +
                                ", T_max=" + std::to_string(t_max) + ")",
                            cap);
    }
    const std::size_t g = n + t_max;
    std::vector<ShiftWindow> windows;
    windows.reserve(users);
    for (std::size_t i = 1; i <= users; ++i) windows.push_back({i * g + (i - 1) * m, m});
    ShiftPlan plan(std::move(windows), n, l, t_max);
    if (!verify_mui_free(plan)) throw CapacityError("plan_shifts: layout violates the guard condition", cap);
    return plan;
}

/// M_max = largest power of two <= LN/U - N - T_max (needs at least 2).
inline std::size_t m_max(std::size_t l, std::size_t n, std::size_t users, std::size_t t_max = 0) {
    if (l == 0 || n == 0 || users == 0) throw ParameterError("m_max: arguments must be positive");
    const std::size_t len = l * n;
    const std::size_t g = n + t_max;
    // U * M <= LN - U * G  <=>  M <= LN / U - G
    if (len <= users * g || (len - users * g) / users < 2) {
        throw CapacityError("m_max: LN/U - N must exceed 1 for " + std::to_string(users) + " users",
                            u_max(l, n, 2, t_max));
    }
    return std::bit_floor((len - users * g) / users);
}

struct Throughput {
    std::size_t m_max = 0;
    double per_user = 0;  ///< eta_max, bps/Hz
    double aggregate = 0; ///< eta_Agg, bps/Hz
};

/// eta_max = log2(M_max) / (beta L N), eta_Agg = U eta_max.
inline Throughput throughput(std::size_t users, std::size_t l, std::size_t n, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw ParameterError("throughput: beta must lie in (0, 1]");
    Throughput t;
    t.m_max = m_max(l, n, users);
    t.per_user = static_cast<double>(std::countr_zero(t.m_max)) / (beta * static_cast<double>(l * n));
    t.aggregate = static_cast<double>(users) * t.per_user;
    return t;
}

} // namespace tdcs
