#pragma once

// Self-check suite run by `tdcs_sim verify`. Every check is small enough to
// finish in well under a second.

#include <tdcs/simharness.hpp>

#include <array>
#include <sstream>

namespace tdcs {

struct InvariantResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace invariants {

inline InvariantResult perfect_sequences() {
    std::ostringstream d;
    bool ok = is_perfect(builtin_quadriphase16());
    d << "quadriphase16 " << (ok ? "ok" : "FAIL");
    for (std::size_t len : {7u, 8u, 9u, 16u, 31u, 64u}) {
        const bool p = is_perfect(gen_zadoff_chu(len, 1));
        ok = ok && p;
        d << ", ZC(" << len << ") " << (p ? "ok" : "FAIL");
    }
    return {"perfect periodic ACF of time sequences", ok, d.str()};
}

inline InvariantResult correlation_paths_agree() {
    rng::Engine eng(11);
    double worst = 0;
    for (std::size_t n : {16u, 64u, 100u}) {
        std::vector<Complex> u(n), v(n);
        for (std::size_t k = 0; k < n; ++k) {
            u[k] = std::polar(1.0, rng::uniform_phase(eng));
            v[k] = std::polar(1.0, rng::uniform_phase(eng));
        }
        const auto a = periodic_xcorr(u, v, CorrelationMethod::direct);
        const auto b = periodic_xcorr(u, v, CorrelationMethod::transform);
        for (std::size_t t = 0; t < n; ++t) worst = std::max(worst, std::abs(a[t] - b[t]));
    }
    std::ostringstream d;
    d << "max |direct - transform| = " << worst;
    return {"direct and FFT correlation agree", worst < 1e-9, d.str()};
}

inline InvariantResult kronecker_zero_zone() {
    const std::size_t n = 64, l = 16;
    const std::vector<FrequencyBand> bands{{2.5e6, 3.75e6}, {6.25e6, 7.5e6}};
    const auto mark = mark_from_bands(10e6, bands, n);
    const auto a = builtin_quadriphase16();
    const auto u1 = build_user_fmw(mark, a, 101);
    const auto u2 = build_user_fmw(mark, a, 202);
    const auto ccf = zero_zone_verify(u1.c, u2.c, n, l);
    const auto acf = zero_zone_verify(u1.c, u1.c, n, l);
    std::ostringstream d;
    d << "CCF zeros " << ccf.zero_count << "/" << ccf.required << ", ACF zeros " << acf.zero_count << "/"
      << acf.required << ", residual " << std::max(ccf.eq9_residual, acf.eq9_residual);
    return {"Kronecker zero zone N=64 L=16", ccf.success && acf.success, d.str()};
}

inline InvariantResult fmw_energy_and_nulling() {
    const auto mark = mark_from_bands(10e6, std::vector<FrequencyBand>{{2.5e6, 3.75e6}, {6.25e6, 7.5e6}}, 64);
    const auto u = build_user_fmw(mark, builtin_quadriphase16(), 5);
    double leak = 0;
    const auto spec = dft(u.basis.samples.span());
    for (std::size_t k = 0; k < mark.size(); ++k)
        if (!mark.is_available(k)) leak = std::max(leak, std::abs(spec[k]));
    const double eb = u.basis.samples.energy();
    const double ec = u.c.energy();
    std::ostringstream d;
    d << "||b||^2 = " << eb << ", ||c||^2 = " << ec << ", max |B(k)| on occupied bins = " << leak;
    const bool ok = std::abs(eb - 1.0) < 1e-9 && std::abs(ec - 16.0) < 1e-9 && leak < 1e-9;
    return {"FMW energy normalization and spectral nulls", ok, d.str()};
}

inline InvariantResult capacity_table() {
    static constexpr std::array<std::size_t, 4> ls{8, 9, 12, 16};
    static constexpr std::array<std::size_t, 12> expected{6, 4, 2, 7, 4, 3, 9, 6, 4, 12, 8, 5};
    const std::array<double, 3> ratios{0.25, 1.0, 2.0};
    bool ok = true;
    std::ostringstream d;
    std::size_t cell = 0;
    for (auto l : ls) {
        for (double r : ratios) {
            const std::size_t n = 64;
            const auto m = static_cast<std::size_t>(r * n);
            const auto u = u_max(l, n, m);
            if (u != expected[cell]) {
                ok = false;
                d << "L=" << l << " M/N=" << r << ": " << u << " != " << expected[cell] << "; ";
            }
            try {
                plan_shifts(u, n, l, m);
            } catch (const CapacityError&) {
                ok = false;
                d << "plan at U_max failed for L=" << l << "; ";
            }
            try {
                plan_shifts(u + 1, n, l, m);
                ok = false;
                d << "plan at U_max+1 succeeded for L=" << l << "; ";
            } catch (const CapacityError&) {
            }
            ++cell;
        }
    }
    if (ok) d << "12/12 cells, tight at U_max";
    return {"multiuser capacity table", ok, d.str()};
}

inline InvariantResult planned_layouts_are_mui_free() {
    std::size_t plans = 0;
    bool ok = true;
    for (std::size_t n : {8u, 16u, 64u})
        for (std::size_t l : {4u, 8u, 16u})
            for (std::size_t m : {2u, 4u, 8u, 64u})
                for (std::size_t t : {0u, 2u, 5u}) {
                    if (n + t + m > l * n) continue;
                    const auto cap = u_max(l, n, m, t);
                    for (std::size_t u = 1; u <= cap; ++u) {
                        ok = ok && static_cast<bool>(verify_mui_free(plan_shifts(u, n, l, m, t)));
                        ++plans;
                    }
                }
    return {"every planned layout passes the guard check", ok, std::to_string(plans) + " layouts"};
}

inline InvariantResult guard_violation_detected() {
    // Two windows whose nearest shifts are N - 1 apart.
    const std::size_t n = 16, l = 8, m = 4;
    ShiftPlan bad({{n, m}, {n + m - 1 + n - 1, m}}, n, l, 0);
    const auto chk = verify_mui_free(bad);
    const bool ok = !chk.mui_free && !chk.violations.empty();
    return {"guard violation is reported", ok, std::to_string(chk.violations.size()) + " violating pairs"};
}

inline InvariantResult noiseless_multiuser_is_exact() {
    // N=8, L=8, M=4, U=3 single path, all 64 message combinations, strong interferers.
    const std::size_t n = 8, l = 8, m = 4, users = 3;
    const auto a = gen_zadoff_chu(l, 1);
    const auto mark = SpectrumMark::from_string("11011110");
    const auto plan = plan_shifts(users, n, l, m);
    std::vector<KroneckerFmwUser> fmw;
    std::vector<Correlator> rx;
    for (std::size_t j = 0; j < users; ++j) {
        fmw.push_back(build_user_fmw(mark, a, 1000 + j));
        rx.emplace_back(fmw.back().c);
    }
    const auto gains = gains_from_nf(users, 20.0, 3);
    std::size_t errors = 0, trials = 0;
    for (std::size_t msg = 0; msg < 64; ++msg) {
        std::vector<ModulatedBlock> blocks;
        for (std::size_t j = 0; j < users; ++j)
            blocks.push_back(modulate(fmw[j], offset_to_bits((msg >> (2 * j)) & 3u, 2), plan.window(j)));
        for (std::size_t i = 0; i < users; ++i) {
            const auto r = apply_single_path(blocks, gains, NoiseSpec::noiseless(), i, 0);
            const auto dec = demodulate_window(rx[i], r, plan.window(i));
            errors += bit_errors(blocks[i].bits, dec.argmax_bits);
            ++trials;
        }
    }
    return {"noiseless MUI-free decoding is exact (NF = 20 dB)", errors == 0,
            std::to_string(errors) + " bit errors in " + std::to_string(trials) + " decisions"};
}

inline InvariantResult noiseless_rake_is_exact() {
    const std::size_t n = 8, l = 8, m = 4, users = 2, t_max = 2, cp = 4;
    const auto a = gen_zadoff_chu(l, 1);
    const auto mark = SpectrumMark::all_available(n);
    const auto plan = plan_shifts(users, n, l, m, t_max);
    std::vector<KroneckerFmwUser> fmw;
    for (std::size_t j = 0; j < users; ++j) fmw.push_back(build_user_fmw(mark, a, 77 + j));
    const MultipathProfile prof{{0, 1, 2}, {0, -3, -6}, {0.5, 0.3, 0.2}};
    rng::SplitMix64 eng(9);
    std::size_t errors = 0;
    for (std::size_t msg = 0; msg < 16; ++msg) {
        std::vector<ModulatedBlock> blocks;
        std::vector<ComplexSignal> pref;
        for (std::size_t j = 0; j < users; ++j) {
            blocks.push_back(modulate(fmw[j], offset_to_bits((msg >> (2 * j)) & 3u, 2), plan.window(j)));
            pref.push_back(add_cyclic_prefix(blocks.back().x, cp));
        }
        std::vector<std::vector<Complex>> taps{prof.draw(eng), prof.draw(eng, 10.0)};
        const auto y = apply_multipath(pref, taps, NoiseSpec::noiseless(), cp, 0, 0);
        const auto dec = rake_demodulate(remove_cyclic_prefix(y, cp), fmw[0], plan.window(0), taps[0], t_max);
        errors += bit_errors(blocks[0].bits, dec.argmax_bits);
    }
    return {"noiseless RAKE decoding is exact over multipath", errors == 0, std::to_string(errors) + " bit errors"};
}

inline InvariantResult cyclic_prefix_makes_channel_circular() {
    const auto x = gen_zadoff_chu(32, 3).as_signal();
    const std::vector<Complex> h{{0.8, 0.1}, {0.0, 0.0}, {-0.3, 0.4}};
    const ComplexSignal pref = add_cyclic_prefix(x, 4);
    const std::vector<ComplexSignal> tx{pref};
    const std::vector<std::vector<Complex>> taps{h};
    const auto y = remove_cyclic_prefix(apply_multipath(tx, taps, NoiseSpec::noiseless(), 4, 0, 0), 4);
    double worst = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        Complex ref{};
        for (std::size_t p = 0; p < h.size(); ++p) ref += h[p] * x[(k + x.size() - p) % x.size()];
        worst = std::max(worst, std::abs(ref - y[k]));
    }
    std::ostringstream d;
    d << "max deviation from circular convolution " << worst;
    return {"cyclic prefix turns FIR into circular convolution", worst < 1e-12, d.str()};
}

inline InvariantResult modulation_round_trip() {
    const auto c = build_user_fmw(SpectrumMark::all_available(16), gen_zadoff_chu(8, 1), 4).c;
    const ShiftWindow w{24, 32};
    const Correlator corr(c);
    std::size_t bad = 0;
    for (std::size_t v = 0; v < w.width; ++v) {
        const auto bits = offset_to_bits(v, w.bits_per_symbol());
        const auto blk = modulate(c, bits, w);
        if (blk.shift != w.start + v || demodulate_window(corr, blk.x, w).argmax_bits != bits) ++bad;
    }
    return {"P-CCSK modulate/demodulate round trip", bad == 0, std::to_string(bad) + " of 32 messages wrong"};
}

inline InvariantResult thread_count_independence() {
    ScenarioConfig cfg;
    cfg.id = "verify_determinism";
    cfg.n = 16;
    cfg.l = 8;
    cfg.m = 8;
    cfg.users = 3;
    cfg.nf_db = {6};
    cfg.ebn0_db = {0, 3};
    cfg.min_bit_errors = 200;
    cfg.max_symbols = 4000;
    cfg.chunk_symbols = 250;
    const auto rs = resolve_scenario(cfg);
    std::ostringstream one, three;
    write_ber_csv(one, run_resolved(rs, {1, {}}));
    write_ber_csv(three, run_resolved(rs, {3, {}}));
    return {"BER records independent of worker count", one.str() == three.str(), "1 vs 3 workers"};
}

} // namespace invariants

inline std::vector<InvariantResult> run_invariant_suite() {
    using namespace invariants;
    std::vector<InvariantResult (*)()> checks{
        perfect_sequences,         correlation_paths_agree,      kronecker_zero_zone,
        fmw_energy_and_nulling,    capacity_table,               planned_layouts_are_mui_free,
        guard_violation_detected,  noiseless_multiuser_is_exact, noiseless_rake_is_exact,
        cyclic_prefix_makes_channel_circular, modulation_round_trip, thread_count_independence,
    };
    std::vector<InvariantResult> out;
    for (auto* check : checks) {
        try {
            out.push_back(check());
        } catch (const std::exception& e) {
            out.push_back({"(check threw)", false, e.what()});
        }
    }
    return out;
}

} // namespace tdcs
