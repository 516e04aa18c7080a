#pragma once

// Synchronous multiuser channels: near-far single-path gains, multipath FIR
// fading and AWGN.

#include <tdcs/rng.hpp>
#include <tdcs/waveform.hpp>

#include <array>
#include <cmath>

namespace tdcs {

enum class PhaseModel {
    fixed,    ///< one phase per link for the whole run
    uniform,  ///< fresh uniform phase per block
    rayleigh, ///< fresh circular Gaussian gain per block, mean power set by NF
};

inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }

// gamma_{i,j}: receiver i, transmitter j.
class GainMatrix {
public:
    GainMatrix(std::size_t users, double nf_db) : users_(users), nf_db_(nf_db), g_(users * users, Complex{1.0, 0.0}) {}

    std::size_t users() const noexcept { return users_; }
    double nf_db() const noexcept { return nf_db_; }
    Complex& operator()(std::size_t i, std::size_t j) { return g_.at(i * users_ + j); }
    const Complex& operator()(std::size_t i, std::size_t j) const { return g_.at(i * users_ + j); }

private:
    std::size_t users_;
    double nf_db_;
    std::vector<Complex> g_;
};

/// Single link gain, drawn from its own stream so that it does not depend on
/// the total user count.
inline Complex link_gain(std::size_t i, std::size_t j, double nf_db, std::uint64_t seed, PhaseModel model) {
    const double power = i == j ? 1.0 : db_to_power(nf_db);
    rng::SplitMix64 eng(rng::derive_seed(seed, rng::Stream::channel, i, j));
    if (model == PhaseModel::rayleigh) {
        boost::random::normal_distribution<double> nd(0.0, 1.0);
        const double re = nd(eng);
        const double im = nd(eng);
        return std::sqrt(power / 2.0) * Complex{re, im};
    }
    if (i == j) return {1.0, 0.0};
    return std::polar(std::sqrt(power), rng::uniform_phase(eng));
}

/// gamma_{i,i} = 1, gamma_{i,j} = 10^{NF/20} e^{j theta_{i,j}} with theta uniform per pair.
inline GainMatrix gains_from_nf(std::size_t users, double nf_db, std::uint64_t seed,
                                PhaseModel model = PhaseModel::uniform) {
    if (users == 0) throw ParameterError("gains_from_nf: U must be >= 1");
    GainMatrix g(users, nf_db);
    for (std::size_t i = 0; i < users; ++i)
        for (std::size_t j = 0; j < users; ++j) g(i, j) = link_gain(i, j, nf_db, seed, model);
    return g;
}

struct NoiseSpec {
    double n0 = 0; ///< per complex sample, E|n|^2

    /// n0 = E_s / (log2(M) 10^{EbN0/10})
    static NoiseSpec from_ebn0(double ebn0_db, std::size_t m, double symbol_energy) {
        if (m < 2 || !std::has_single_bit(m)) throw ParameterError("NoiseSpec: M must be a power of two >= 2");
        if (!(symbol_energy > 0)) throw ParameterError("NoiseSpec: symbol energy must be positive");
        const double bits = static_cast<double>(std::countr_zero(m));
        return NoiseSpec{symbol_energy / (bits * db_to_power(ebn0_db))};
    }

    static NoiseSpec noiseless() { return NoiseSpec{0.0}; }
};

/// r_i = sum_j gamma_{i,j} x_j + n_i
inline ComplexSignal apply_single_path(std::span<const ModulatedBlock> blocks, const GainMatrix& gains,
                                       NoiseSpec noise, std::size_t receiver, rng::ComplexGaussian& gauss) {
    if (blocks.empty()) throw DimensionError("apply_single_path: no transmitted blocks");
    if (blocks.size() != gains.users()) throw DimensionError("apply_single_path: block count must equal U");
    if (receiver >= gains.users()) throw ParameterError("apply_single_path: receiver index out of range");
    const std::size_t len = blocks.front().x.size();
    std::vector<Complex> r(len, Complex{});
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        const auto& x = blocks[j].x;
        if (x.size() != len) throw DimensionError("apply_single_path: blocks differ in length");
        accumulate_scaled(gains(receiver, j), x.samples().data(), r.data(), len);
    }
    if (noise.n0 > 0) {
        for (auto& s : r) s += gauss(noise.n0);
    }
    return ComplexSignal(std::move(r));
}

inline ComplexSignal apply_single_path(std::span<const ModulatedBlock> blocks, const GainMatrix& gains,
                                       NoiseSpec noise, std::size_t receiver, std::uint64_t seed) {
    rng::ComplexGaussian gauss(rng::derive_seed(seed, rng::Stream::noise, receiver));
    return apply_single_path(blocks, gains, noise, receiver, gauss);
}

// Tap-delay power profile; taps are independent Rayleigh per draw.
struct MultipathProfile {
    std::vector<std::size_t> delays; ///< in samples
    std::vector<double> power_db;    ///< relative average power per tap
    std::vector<double> power;       ///< linear, normalized to unit sum

    std::size_t t_max() const { return delays.empty() ? 0 : *std::max_element(delays.begin(), delays.end()); }

    /// Dense FIR h[0..T_max] with E sum |h_p|^2 = total_power.
    template <class Urbg>
    std::vector<Complex> draw(Urbg& eng, double total_power = 1.0) const {
        std::vector<Complex> h(t_max() + 1, Complex{});
        boost::random::normal_distribution<double> nd(0.0, 1.0);
        for (std::size_t p = 0; p < delays.size(); ++p) {
            const double sigma = std::sqrt(total_power * power[p] / 2.0);
            const double re = nd(eng);
            const double im = nd(eng);
            h[delays[p]] += sigma * Complex{re, im};
        }
        return h;
    }
};

/// COST 207 rural-area six-tap profile: delays 0..0.5 us in 0.1 us steps,
/// powers 0, -4, ..., -20 dB.
inline MultipathProfile cost207_ra6(double sample_period_s) {
    if (!(sample_period_s > 0)) throw ParameterError("cost207_ra6: sample period must be positive");
    static constexpr std::array<double, 6> delay_s = {0.0, 0.1e-6, 0.2e-6, 0.3e-6, 0.4e-6, 0.5e-6};
    static constexpr std::array<double, 6> pdb = {0.0, -4.0, -8.0, -12.0, -16.0, -20.0};
    MultipathProfile prof;
    double total = 0;
    for (std::size_t p = 0; p < delay_s.size(); ++p) {
        const double d = delay_s[p] / sample_period_s;
        const double r = std::round(d);
        if (std::abs(d - r) > 1e-6) throw ParameterError("cost207_ra6: tap delays are not on the sample grid");
        prof.delays.push_back(static_cast<std::size_t>(r));
        prof.power_db.push_back(pdb[p]);
        prof.power.push_back(db_to_power(pdb[p]));
        total += prof.power.back();
    }
    for (auto& p : prof.power) p /= total;
    return prof;
}

/// Linear FIR convolution of each prefixed block with its link taps, summed
/// over transmitters, plus AWGN. The output keeps the prefixed block length;
/// the tail spilling into the next block is dropped. After prefix removal
/// this equals sum_j sum_p h_p x_j((n - p) mod LN) + n.
inline ComplexSignal apply_multipath(std::span<const ComplexSignal> prefixed, std::span<const std::vector<Complex>> taps,
                                     NoiseSpec noise, std::size_t cp_len, rng::ComplexGaussian& gauss) {
    if (prefixed.empty()) throw DimensionError("apply_multipath: no transmitted blocks");
    if (prefixed.size() != taps.size()) throw DimensionError("apply_multipath: need one tap vector per transmitter");
    const std::size_t len = prefixed.front().size();
    std::vector<Complex> y(len, Complex{});
    for (std::size_t j = 0; j < prefixed.size(); ++j) {
        const auto& x = prefixed[j];
        const auto& h = taps[j];
        if (x.size() != len) throw DimensionError("apply_multipath: blocks differ in length");
        if (h.empty()) throw ParameterError("apply_multipath: empty tap vector");
        if (h.size() - 1 > cp_len) throw ParameterError("apply_multipath: cyclic prefix shorter than channel order");
        for (std::size_t p = 0; p < h.size(); ++p) {
            if (h[p] == Complex{}) continue;
            accumulate_scaled(h[p], x.samples().data(), y.data() + p, len - p);
        }
    }
    if (noise.n0 > 0) {
        for (auto& s : y) s += gauss(noise.n0);
    }
    return ComplexSignal(std::move(y));
}

inline ComplexSignal apply_multipath(std::span<const ComplexSignal> prefixed, std::span<const std::vector<Complex>> taps,
                                     NoiseSpec noise, std::size_t cp_len, std::size_t receiver, std::uint64_t seed) {
    rng::ComplexGaussian gauss(rng::derive_seed(seed, rng::Stream::noise, receiver));
    return apply_multipath(prefixed, taps, noise, cp_len, gauss);
}

} // namespace tdcs
