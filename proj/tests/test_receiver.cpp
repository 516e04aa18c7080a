#include "oracles.hpp"

#include <tdcs/allocation.hpp>
#include <tdcs/channel.hpp>
#include <tdcs/receiver.hpp>

#include <gtest/gtest.h>

using namespace tdcs;
using oracle::cd;

namespace {

KroneckerFmwUser user(std::uint64_t seed) {
    const auto mark = mark_from_bands(10e6, std::vector<FrequencyBand>{{2.5e6, 3.75e6}, {6.25e6, 7.5e6}}, 64);
    return build_user_fmw(mark, builtin_quadriphase16(), seed);
}

} // namespace

TEST(Correlator, MatchesPeriodicOracle) {
    const auto r = oracle::random_gaussian(48, 1), c = oracle::random_unit(48, 2);
    const Correlator corr{ComplexSignal(c)};
    const auto phi = corr.correlate(r);
    for (std::size_t t = 0; t < 48; ++t) EXPECT_LT(std::abs(phi[t] - oracle::periodic(r, c, t)), 1e-10) << t;
    EXPECT_THROW(corr.correlate(std::vector<cd>(47)), DimensionError);
}

TEST(Demodulate, NoiselessIsExactForEveryShift) {
    const auto u = user(3);
    const ShiftWindow w{64, 64};
    const Correlator corr(u.c);
    for (std::size_t v = 0; v < 64; ++v) {
        const auto bits = offset_to_bits(v, 6);
        const auto blk = modulate(u, bits, w);
        const auto d = demodulate_window(corr, blk.x, w);
        EXPECT_EQ(d.argmax_shift, 64 + v);
        EXPECT_EQ(d.argmax_bits, bits);
        EXPECT_NEAR(d.values[v], 16.0, 1e-9);
    }
}

TEST(Demodulate, SmallestShiftWinsTies) {
    const ComplexSignal r(std::vector<cd>(8, 0.0));
    const ComplexSignal c(std::vector<cd>{1, 0, 0, 0, 0, 0, 0, 0});
    const auto d = demodulate_window(r, c, ShiftWindow{2, 4});
    EXPECT_EQ(d.argmax_shift, 2u);
    EXPECT_EQ(d.argmax_bits, (BitVector{0, 0}));
}

TEST(Demodulate, WindowChecks) {
    const auto u = user(1);
    EXPECT_THROW(demodulate_window(u.c, u, ShiftWindow{1000, 64}), ParameterError);
    EXPECT_THROW(demodulate_window(u.c, u, ShiftWindow{0, 6}), ParameterError);
}

TEST(SymbolToBits, Inverse) {
    EXPECT_EQ(symbol_to_bits(13, ShiftWindow{8, 8}), (BitVector{1, 0, 1}));
    EXPECT_THROW(symbol_to_bits(16, ShiftWindow{8, 8}), std::logic_error);
}

TEST(BitErrors, Hamming) {
    EXPECT_EQ(bit_errors(BitVector{1, 0, 1, 1}, BitVector{1, 1, 1, 0}), 2u);
    EXPECT_THROW(bit_errors(BitVector{1}, BitVector{1, 0}), DimensionError);
}

TEST(Rake, NoiselessMultiuserMultipath) {
    const std::size_t cp = 16, t_max = 5;
    const auto plan = plan_shifts(4, 64, 16, 64, t_max);
    std::vector<KroneckerFmwUser> users;
    for (std::uint64_t j = 0; j < 4; ++j) users.push_back(user(100 + j));
    const auto prof = cost207_ra6(0.1e-6);
    std::size_t errors = 0;
    for (std::size_t trial = 0; trial < 30; ++trial) {
        std::vector<ModulatedBlock> blocks;
        std::vector<ComplexSignal> tx;
        std::vector<std::vector<Complex>> taps;
        rng::Engine bits_eng(trial);
        for (std::size_t j = 0; j < 4; ++j) {
            BitVector b(6);
            for (auto& x : b) x = bits_eng() & 1u;
            blocks.push_back(modulate(users[j], b, plan.window(j)));
            tx.push_back(add_cyclic_prefix(blocks.back().x, cp));
            rng::SplitMix64 eng(rng::derive_seed(trial, j));
            taps.push_back(prof.draw(eng, j == 0 ? 1.0 : 10.0));
        }
        const auto r = remove_cyclic_prefix(apply_multipath(tx, taps, NoiseSpec::noiseless(), cp, 0, 0), cp);
        const auto d = rake_demodulate(r, users[0], plan.window(0), taps[0], t_max);
        errors += bit_errors(blocks[0].bits, d.argmax_bits);
    }
    EXPECT_EQ(errors, 0u);
}

TEST(Rake, SingleTapReducesToCorrelator) {
    const auto u = user(8);
    const ShiftWindow w{0, 128};
    const auto blk = modulate(u, offset_to_bits(77, 7), w);
    const std::vector<Complex> tap{{0.0, 2.0}};
    const auto a = rake_demodulate(blk.x, u, w, tap, 0);
    const auto b = demodulate_window(blk.x, u, w);
    EXPECT_EQ(a.argmax_shift, 77u);
    for (std::size_t k = 0; k < 128; ++k) EXPECT_NEAR(a.values[k], 2.0 * b.values[k], 1e-9);
    const std::vector<Complex> long_taps(4, 1.0);
    EXPECT_THROW(rake_demodulate(blk.x, u, w, long_taps, 2), ParameterError);
}

TEST(Rake, DelayedPeakIsCombined) {
    // A pure delay of p samples moves the correlation peak to tau - p.
    const auto u = user(2);
    const ShiftWindow w{64, 64};
    const auto blk = modulate(u, offset_to_bits(10, 6), w);
    const std::vector<Complex> taps{0.0, 0.0, 0.0, 1.0};
    const auto xc = add_cyclic_prefix(blk.x, 8);
    const std::vector<ComplexSignal> tx{xc};
    const std::vector<std::vector<Complex>> tv{taps};
    const auto r = remove_cyclic_prefix(apply_multipath(tx, tv, NoiseSpec::noiseless(), 8, 0, 0), 8);
    const auto phi = Correlator(u.c).correlate(r.span());
    EXPECT_NEAR(std::abs(phi[74 - 3]), 16.0, 1e-9);
    EXPECT_EQ(rake_demodulate(r, u, w, taps, 5).argmax_shift, 74u);
}

TEST(FrequencyResponse, MatchesDft) {
    const auto h = oracle::random_gaussian(5, 4);
    const auto hf = frequency_response(h, 16);
    std::vector<cd> padded(16, 0.0);
    std::copy(h.begin(), h.end(), padded.begin());
    const auto ref = oracle::dft(padded);
    for (std::size_t k = 0; k < 16; ++k) EXPECT_LT(std::abs(hf[k] - ref[k]), 1e-12);
    EXPECT_THROW(frequency_response(h, 4), DimensionError);
}

TEST(MmseFde, ZeroForcingInvertsChannel) {
    const std::size_t len = 64;
    const auto x = oracle::random_gaussian(len, 20);
    const std::vector<cd> h{1.0, {0.3, 0.2}, {-0.1, 0.05}};
    std::vector<cd> y(len, 0.0);
    for (std::size_t n = 0; n < len; ++n)
        for (std::size_t p = 0; p < h.size(); ++p) y[n] += h[p] * x[(n + len - p) % len];
    const auto eq = mmse_fde(ComplexSignal(y), frequency_response(h, len), std::numeric_limits<double>::infinity());
    for (std::size_t n = 0; n < len; ++n) EXPECT_LT(std::abs(eq[n] - x[n]), 1e-10);
}

TEST(MmseFde, FiniteSnrShrinksTowardZero) {
    const std::vector<cd> y(8, 1.0);
    const std::vector<cd> hf(8, 1.0);
    const auto eq = mmse_fde(ComplexSignal(y), hf, 1.0);
    for (std::size_t n = 0; n < 8; ++n) EXPECT_NEAR(std::abs(eq[n]), 0.5, 1e-12);
    EXPECT_THROW(mmse_fde(ComplexSignal(y), hf, 0.0), ParameterError);
    EXPECT_THROW(mmse_fde(ComplexSignal(y), std::vector<cd>(4, 1.0), 1.0), DimensionError);
}
