#include "oracles.hpp"

#include <tdcs/seqcore.hpp>
#include <tdcs/spectrum.hpp>
#include <tdcs/waveform.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace tdcs;
using oracle::cd;

namespace {

ComplexSignal sig(std::vector<cd> v) { return ComplexSignal(std::move(v)); }

const std::vector<cd> kQuadriphase16{{1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1},
                                     {1, 0}, {-1, 0}, {1, 0}, {-1, 0}, {1, 0}, {0, -1}, {-1, 0}, {0, 1}};

} // namespace

TEST(PeriodicXcorr, ImpulseAutocorrelation) {
    const auto p = periodic_xcorr(sig({1, 0, 0, 0}), sig({1, 0, 0, 0}));
    ASSERT_EQ(p.size(), 4u);
    EXPECT_EQ(p.kind, CorrelationKind::periodic);
    EXPECT_EQ(p[0], cd(1, 0));
    for (std::size_t t = 1; t < 4; ++t) EXPECT_EQ(p[t], cd(0, 0));
}

TEST(PeriodicXcorr, QuadriphaseSequenceIsPerfect) {
    const auto p = periodic_xcorr(sig(kQuadriphase16), sig(kQuadriphase16), CorrelationMethod::direct);
    EXPECT_EQ(p[0], cd(16, 0));
    for (std::size_t t = 1; t < 16; ++t) EXPECT_EQ(p[t], cd(0, 0)) << "tau " << t;
}

TEST(PeriodicXcorr, MatchesModularSumOracle) {
    const auto u = oracle::random_unit(13, 1), v = oracle::random_unit(13, 2);
    const auto p = periodic_xcorr(sig(u), sig(v), CorrelationMethod::direct);
    for (std::size_t t = 0; t < 13; ++t) EXPECT_LT(std::abs(p[t] - oracle::periodic(u, v, t)), 1e-12);
}

TEST(PeriodicXcorr, FastPathAgreesWithDirectSum) {
    double worst = 0;
    for (std::uint32_t s = 0; s < 100; ++s) {
        const auto u = oracle::random_unit(64, 2 * s + 10), v = oracle::random_unit(64, 2 * s + 11);
        const auto a = periodic_xcorr(sig(u), sig(v), CorrelationMethod::direct);
        const auto b = periodic_xcorr(sig(u), sig(v), CorrelationMethod::transform);
        for (std::size_t t = 0; t < 64; ++t) worst = std::max(worst, std::abs(a[t] - b[t]));
    }
    EXPECT_LT(worst, 1e-9 * 64);
}

TEST(PeriodicXcorr, FastPathHandlesNonPowerOfTwo) {
    const auto u = oracle::random_unit(100, 3), v = oracle::random_unit(100, 4);
    const auto b = periodic_xcorr(sig(u), sig(v), CorrelationMethod::transform);
    for (std::size_t t = 0; t < 100; ++t) EXPECT_LT(std::abs(b[t] - oracle::periodic(u, v, t)), 1e-9 * 100);
}

TEST(PeriodicXcorr, ConjugateSymmetry) {
    const auto u = oracle::random_unit(32, 5), v = oracle::random_unit(32, 6);
    for (auto method : {CorrelationMethod::direct, CorrelationMethod::transform}) {
        const auto uv = periodic_xcorr(sig(u), sig(v), method);
        const auto vu = periodic_xcorr(sig(v), sig(u), method);
        const double tol = 1e-12;
        for (std::size_t t = 0; t < 32; ++t) EXPECT_LE(std::abs(uv[t] - std::conj(vu[(32 - t) % 32])), tol);
    }
}

TEST(PeriodicXcorr, LengthMismatchIsDimensionError) {
    EXPECT_THROW(periodic_xcorr(sig({1, 0}), sig({1, 0, 0})), DimensionError);
}

TEST(AperiodicXcorr, HandSum) {
    const auto p = aperiodic_xcorr(sig({1, 1}), sig({1, 1}));
    EXPECT_EQ(p.kind, CorrelationKind::aperiodic);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0], cd(2, 0));
    EXPECT_EQ(p[1], cd(1, 0));
}

TEST(AperiodicXcorr, TailIsSingleTerm) {
    const auto u = oracle::random_unit(9, 7);
    const auto p = aperiodic_xcorr(sig(u), sig(u));
    EXPECT_LT(std::abs(p[8] - u[0] * std::conj(u[8])), 1e-15);
    EXPECT_LT(std::abs(p[0] - cd(9, 0)), 1e-12);
}

TEST(AperiodicXcorr, MatchesNaiveLoop) {
    const auto u = oracle::random_gaussian(8, 8), v = oracle::random_gaussian(8, 9);
    const auto p = aperiodic_xcorr(sig(u), sig(v));
    for (std::size_t t = 0; t < 8; ++t) EXPECT_EQ(p[t], oracle::aperiodic(u, v, t));
    EXPECT_THROW(aperiodic_xcorr(sig({1, 0}), sig({1})), DimensionError);
}

TEST(ZadoffChu, PerfectAcfLength9Root2) {
    const auto z = gen_zadoff_chu(9, 2);
    const std::vector<cd> v(z.elements());
    EXPECT_LT(std::abs(oracle::periodic(v, v, 0) - cd(9, 0)), 1e-9);
    for (std::size_t t = 1; t < 9; ++t) EXPECT_LT(std::abs(oracle::periodic(v, v, t)), 1e-9);
}

TEST(ZadoffChu, LengthTwo) {
    const auto z = gen_zadoff_chu(2, 1);
    ASSERT_EQ(z.size(), 2u);
    const std::vector<cd> v(z.elements());
    for (auto x : v) EXPECT_NEAR(std::abs(x), 1.0, 1e-15);
    EXPECT_LT(std::abs(oracle::periodic(v, v, 1)), 1e-12);
}

TEST(ZadoffChu, NonCoprimeRootRejected) {
    EXPECT_THROW(gen_zadoff_chu(9, 3), ParameterError);
    EXPECT_THROW(gen_zadoff_chu(16, 4), ParameterError);
    EXPECT_THROW(gen_zadoff_chu(1, 1), ParameterError);
}

TEST(ZadoffChu, PerfectForEveryCoprimeRoot) {
    for (std::size_t len : {2u, 3u, 5u, 8u, 12u, 16u, 25u}) {
        for (std::size_t r = 1; r < len; ++r) {
            if (oracle::gcd(r, len) != 1) continue;
            const std::vector<cd> v(gen_zadoff_chu(len, static_cast<long long>(r)).elements());
            for (std::size_t t = 1; t < len; ++t)
                EXPECT_LT(std::abs(oracle::periodic(v, v, t)), 1e-9 * len) << "len " << len << " root " << r;
        }
    }
}

TEST(Quadriphase16, ExactElements) {
    const auto a = builtin_quadriphase16();
    ASSERT_EQ(a.size(), 16u);
    EXPECT_EQ(a[0], cd(1, 0));
    EXPECT_EQ(a[5], cd(0, 1));
    for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(a[i], kQuadriphase16[i]) << i;
    EXPECT_TRUE(is_perfect(a));
}

TEST(Kronecker, DirectSubstitution) {
    const auto c = kronecker_synthesize(PolyphaseSequence({{1, 0}, {1, 0}}), sig({1, 0}));
    EXPECT_EQ(c.samples(), (std::vector<cd>{1, 0, 1, 0}));
}

TEST(Kronecker, IndexIdentityAndEnergy) {
    const auto a = gen_zadoff_chu(7, 3);
    const auto b = oracle::random_gaussian(5, 12);
    const auto c = kronecker_synthesize(a, sig(b));
    ASSERT_EQ(c.size(), 35u);
    for (std::size_t l = 0; l < 7; ++l)
        for (std::size_t m = 0; m < 5; ++m) EXPECT_EQ(c[l * 5 + m], a[l] * b[m]);
    EXPECT_NEAR(c.energy(), 7 * oracle::energy(b), 1e-9);
}

TEST(Kronecker, UnitEnergyBasisGivesEnergyL) {
    const auto b = synth_fmw(SpectrumMark::all_available(64), gen_phase_sequence(3, 64)).samples;
    EXPECT_NEAR(kronecker_synthesize(builtin_quadriphase16(), b).energy(), 16.0, 1e-9);
}

TEST(Kronecker, RejectsShortTimeSequence) {
    EXPECT_THROW(kronecker_synthesize(PolyphaseSequence(std::vector<cd>{cd(1, 0)}), sig({1, 0})), ParameterError);
}

TEST(ZeroZone, TwoUsersN64L16) {
    const auto mark = mark_from_bands(10e6, std::vector<FrequencyBand>{{2.5e6, 3.75e6}, {6.25e6, 7.5e6}}, 64);
    const auto a = builtin_quadriphase16();
    const auto ci = build_user_fmw(mark, a, 1).c;
    const auto cj = build_user_fmw(mark, a, 2).c;
    const auto rep = zero_zone_verify(ci, cj, 64, 16);
    EXPECT_EQ(rep.required, 897u);
    EXPECT_GE(rep.zero_count, 897u);
    EXPECT_TRUE(rep.success);
    EXPECT_LT(rep.max_sidelobe_in_zone, 1e-9 * 1024);
    EXPECT_LT(rep.eq9_residual, 1e-9 * 1024);
    EXPECT_FALSE(rep.auto_correlation);
}

TEST(ZeroZone, AutocorrelationPeakAndZone) {
    const auto b = oracle::random_unit(16, 21);
    const auto a = gen_zadoff_chu(8, 1);
    const auto c = kronecker_synthesize(a, sig(b));
    const std::vector<cd> cv(c.samples());
    EXPECT_NEAR(std::abs(oracle::periodic(cv, cv, 0)), oracle::energy(cv), 1e-9);
    for (std::size_t t = 16; t <= 128 - 16; ++t) EXPECT_LT(std::abs(oracle::periodic(cv, cv, t)), 1e-9 * 128);
    const auto rep = zero_zone_verify(c, c, 16, 8);
    EXPECT_TRUE(rep.auto_correlation);
    EXPECT_GE(rep.zero_count, rep.required);
}

TEST(ZeroZone, ShortLagIdentityAgainstAperiodicOracle) {
    // phi_{c_i,c_j}(t) = L psi_{b_i,b_j}(t) for 0 <= t < N, and
    // phi_{c_i,c_j}(LN - t) = L conj(psi_{b_j,b_i}(t)).
    const std::size_t n = 12, l = 7;
    const auto a = gen_zadoff_chu(l, 2);
    const auto bi = oracle::random_gaussian(n, 31), bj = oracle::random_gaussian(n, 32);
    const std::vector<cd> ci(kronecker_synthesize(a, sig(bi)).samples()), cj(kronecker_synthesize(a, sig(bj)).samples());
    for (std::size_t t = 0; t < n; ++t) {
        EXPECT_LT(std::abs(oracle::periodic(ci, cj, t) - double(l) * oracle::aperiodic(bi, bj, t)), 1e-9 * n * l);
        if (t > 0) {
            EXPECT_LT(std::abs(oracle::periodic(ci, cj, n * l - t) - double(l) * std::conj(oracle::aperiodic(bj, bi, t))),
                      1e-9 * n * l);
        }
    }
    const auto rep = zero_zone_verify(sig(ci), sig(cj), n, l);
    EXPECT_LT(rep.eq9_residual, 1e-9 * n * l);
}

TEST(ZeroZone, MarkIndependent) {
    const auto a = builtin_quadriphase16();
    for (const char* m : {"1111000011110000111100001111000011110000111100001111000011110000",
                          "1000000000000000000000000000000000000000000000000000000000000001"}) {
        const auto mark = SpectrumMark::from_string(m);
        const auto rep = zero_zone_verify(build_user_fmw(mark, a, 5).c, build_user_fmw(mark, a, 6).c, 64, 16);
        EXPECT_TRUE(rep.success) << m;
    }
}

TEST(ZeroZone, WrongLengthIsDimensionError) {
    EXPECT_THROW(zero_zone_verify(sig(std::vector<cd>(10, 1.0)), sig(std::vector<cd>(10, 1.0)), 4, 4), DimensionError);
}

TEST(ComplexCsv, HeaderAndRows) {
    std::ostringstream os;
    write_complex_csv(os, sig({{1, 2}, {-0.5, 0}}).span());
    EXPECT_EQ(os.str(), "index,real,imag\n0,1,2\n1,-0.5,0\n");
}
