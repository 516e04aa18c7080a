#pragma once

// Monte Carlo BER engine.
//
// Each (NF, Eb/N0) point is simulated in fixed-size chunks. Chunk k draws
// all of its randomness from streams seeded by
//   derive_seed(seed, bits(Eb/N0), k)
// further split by purpose and user/link index. Chunks are evaluated in
// parallel waves and merged strictly in index order; the stopping rule is
// checked after every merge, so the records do not depend on the number of
// worker threads. NF is deliberately not part of the key: sweeps over NF or
// U reuse the same bits, noise and fading for the victim link.

#include <tdcs/allocation.hpp>
#include <tdcs/channel.hpp>
#include <tdcs/receiver.hpp>
#include <tdcs/scenario.hpp>
#include <tdcs/seqcore.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <ostream>
#include <thread>

namespace tdcs {

/// Everything derived from a config before the first block is simulated.
struct ResolvedScenario {
    ScenarioConfig cfg;
    SpectrumMark tx_mark = SpectrumMark::all_available(1);
    std::optional<SpectrumMark> rx_mark; ///< set when eta < 1 changes the mark
    std::size_t length = 0;              ///< circular block length (L*N)
    std::size_t m = 0;
    std::size_t t_max = 0;
    std::size_t cp = 0;
    std::vector<ShiftWindow> windows;
    std::vector<ComplexSignal> tx;            ///< per-user transmitted FMW
    std::vector<std::size_t> victims;         ///< receivers whose decisions are counted
    std::vector<Correlator> rx;               ///< one per victim
    std::optional<MultipathProfile> profile;
    double symbol_energy = 0;
    std::size_t n_available = 0; ///< N_C of the transmitted mark

    std::size_t bits_per_symbol() const noexcept { return static_cast<std::size_t>(std::countr_zero(m)); }
};

namespace detail {

inline PolyphaseSequence time_sequence_for(const ScenarioConfig& cfg) {
    switch (cfg.time_sequence) {
    case TimeSequenceKind::quadriphase16:
        if (cfg.l != 16) throw ValidationError("scenario: quadriphase16 needs L = 16");
        return builtin_quadriphase16();
    case TimeSequenceKind::zadoff_chu: return gen_zadoff_chu(cfg.l, 1);
    case TimeSequenceKind::automatic: break;
    }
    return cfg.l == 16 ? builtin_quadriphase16() : gen_zadoff_chu(cfg.l, 1);
}

inline SpectrumMark mark_for(const ScenarioConfig& cfg, std::size_t bins) {
    if (cfg.mark) {
        auto mark = SpectrumMark::from_string(*cfg.mark);
        if (mark.size() != bins)
            throw ValidationError("scenario: mark has " + std::to_string(mark.size()) + " bins, expected " +
                                  std::to_string(bins));
        return mark;
    }
    // mark_from_bands only uses ratios, so MHz edges can be passed as they are
    return mark_from_bands(cfg.bandwidth_mhz, cfg.na_bands_mhz, bins);
}

inline std::uint64_t user_fmw_seed(const ScenarioConfig& cfg, std::size_t user) {
    return rng::derive_seed(cfg.effective_fmw_seed(), rng::Stream::fmw, user);
}

} // namespace detail

/// Builds marks, FMWs, windows and receivers. Infeasible plans raise
/// CapacityError, inconsistent configs ValidationError.
inline ResolvedScenario resolve_scenario(const ScenarioConfig& cfg) {
    validate_scenario(cfg);
    ResolvedScenario rs;
    rs.cfg = cfg;
    rs.length = cfg.block_length();
    if (cfg.channel == ChannelKind::multipath) {
        rs.profile = cost207_ra6(cfg.sample_period_s());
        rs.t_max = rs.profile->t_max();
        rs.cp = cfg.cyclic_prefix.value_or(rs.length / 4);
        if (rs.cp < rs.t_max) throw ValidationError("scenario: cyclic_prefix shorter than the channel order");
        if (rs.cp >= rs.length) throw ValidationError("scenario: cyclic_prefix must be shorter than the block");
    }
    const bool mui_free = cfg.system == SystemKind::mui_free_tdcs;
    const std::size_t bins = mui_free ? cfg.n : rs.length;
    rs.tx_mark = detail::mark_for(cfg, bins);
    rs.n_available = rs.tx_mark.n_available();
    if (cfg.eta && *cfg.eta < 1.0) {
        rs.rx_mark = mismatch_mask(rs.tx_mark, *cfg.eta, cfg.effective_fmw_seed());
    }

    // Windows.
    if (mui_free) {
        if (cfg.order == OrderMode::full_range) {
            if (!std::has_single_bit(rs.length)) throw ValidationError("scenario: full_range needs L*N a power of two");
            rs.m = rs.length;
            rs.windows = {ShiftWindow{0, rs.m}};
        } else {
            rs.m = cfg.order == OrderMode::full_load ? m_max(cfg.l, cfg.n, cfg.users, rs.t_max) : cfg.m;
            rs.windows = plan_shifts(cfg.users, cfg.n, cfg.l, rs.m, rs.t_max).windows();
        }
    } else {
        rs.m = cfg.order == OrderMode::fixed ? cfg.m : rs.length;
        if (!std::has_single_bit(rs.m) || rs.m > rs.length)
            throw ValidationError("scenario: traditional shift range must be a power of two <= L*N");
        rs.windows.assign(cfg.users, ShiftWindow{0, rs.m});
    }

    // Transmit FMWs and receiver references.
    const auto a = mui_free ? std::optional<PolyphaseSequence>(detail::time_sequence_for(cfg)) : std::nullopt;
    auto make_fmw = [&](const SpectrumMark& mark, std::size_t user) {
        const auto seed = detail::user_fmw_seed(cfg, user);
        if (mui_free) return build_user_fmw(mark, *a, seed, cfg.phase_levels, static_cast<int>(user)).c;
        return synth_fmw(mark, gen_phase_sequence(seed, bins, cfg.phase_levels)).samples;
    };
    for (std::size_t j = 0; j < cfg.users; ++j) rs.tx.push_back(make_fmw(rs.tx_mark, j));
    rs.symbol_energy = rs.tx.front().energy();

    if (cfg.victims == VictimMode::first) {
        rs.victims = {0};
    } else {
        for (std::size_t i = 0; i < cfg.users; ++i) rs.victims.push_back(i);
    }
    for (auto i : rs.victims) rs.rx.emplace_back(rs.rx_mark ? make_fmw(*rs.rx_mark, i) : rs.tx[i]);
    return rs;
}

struct UserTally {
    std::uint64_t bits = 0;
    std::uint64_t errors = 0;
};

struct BerRecord {
    std::string scenario_id;
    SystemKind system = SystemKind::mui_free_tdcs;
    std::size_t users = 1;
    std::size_t m = 0;
    double nf_db = 0;
    double ebn0_db = 0;
    std::uint64_t symbols = 0;   ///< blocks per victim
    std::uint64_t bits_sent = 0; ///< summed over victims
    std::uint64_t bit_errors = 0;
    double ber = 0;
    double ci_halfwidth = 0;
    bool hit_symbol_cap = false;          ///< stopped on max_symbols before min_bit_errors
    std::vector<UserTally> per_user;      ///< indexed by user; non-victims stay zero
};

/// max(1.96 sqrt(p (1 - p) / n), 1.96 / n)
inline double ci_halfwidth(std::uint64_t errors, std::uint64_t bits) {
    if (bits == 0) return 1.0;
    const double n = static_cast<double>(bits);
    const double p = static_cast<double>(errors) / n;
    return std::max(1.96 * std::sqrt(p * (1.0 - p) / n), 1.96 / n);
}

struct ChunkResult {
    std::uint64_t symbols = 0;
    std::vector<UserTally> per_user;
};

/// Simulates `count` blocks of chunk `chunk` at one operating point.
inline ChunkResult simulate_chunk(const ResolvedScenario& rs, double nf_db, double ebn0_db, std::uint64_t chunk,
                                  std::uint64_t count) {
    using rng::Stream;
    const auto& cfg = rs.cfg;
    const std::size_t U = cfg.users;
    const std::size_t len = rs.length;
    const std::size_t k = rs.bits_per_symbol();
    const bool multipath = cfg.channel == ChannelKind::multipath;
    const bool mui_free = cfg.system == SystemKind::mui_free_tdcs;
    const std::uint64_t chunk_seed = rng::derive_seed(cfg.seed, rng::tag_of(ebn0_db), chunk);
    const NoiseSpec noise = cfg.noiseless ? NoiseSpec::noiseless() : NoiseSpec::from_ebn0(ebn0_db, rs.m, rs.symbol_energy);
    const double snr_bin = noise.n0 > 0 ? rs.symbol_energy / (static_cast<double>(rs.n_available) * noise.n0)
                                        : std::numeric_limits<double>::infinity();

    std::vector<rng::Engine> bit_src;
    bit_src.reserve(U);
    for (std::size_t j = 0; j < U; ++j) bit_src.emplace_back(rng::derive_seed(chunk_seed, Stream::bits, j));
    std::vector<rng::ComplexGaussian> noise_src;
    noise_src.reserve(rs.victims.size());
    for (auto i : rs.victims) noise_src.emplace_back(rng::derive_seed(chunk_seed, Stream::noise, i));
    const std::uint64_t fixed_link_seed = rng::derive_seed(cfg.seed, Stream::channel);

    ChunkResult out;
    out.per_user.assign(U, UserTally{});
    std::vector<ModulatedBlock> blocks;
    blocks.reserve(U);
    std::vector<ComplexSignal> prefixed;
    std::vector<std::vector<Complex>> taps(U);
    BitVector bits(k);
    GainMatrix gains(U, nf_db);

    for (std::uint64_t s = 0; s < count; ++s) {
        const std::uint64_t block = chunk * cfg.chunk_symbols + s;
        blocks.clear();
        for (std::size_t j = 0; j < U; ++j) {
            std::uint64_t word = 0;
            for (std::size_t b = 0; b < k; ++b) {
                if (b % 64 == 0) word = bit_src[j]();
                bits[b] = static_cast<std::uint8_t>((word >> (63 - b % 64)) & 1u);
            }
            blocks.push_back(modulate(rs.tx[j], bits, rs.windows[j]));
        }
        if (multipath) {
            prefixed.clear();
            for (const auto& b : blocks) prefixed.push_back(add_cyclic_prefix(b.x, rs.cp));
        }
        for (std::size_t v = 0; v < rs.victims.size(); ++v) {
            const std::size_t i = rs.victims[v];
            DecisionStatistic d;
            if (!multipath) {
                const std::uint64_t link_seed = cfg.phase_model == PhaseModel::fixed
                                                    ? fixed_link_seed
                                                    : rng::derive_seed(chunk_seed, Stream::channel, block);
                for (std::size_t j = 0; j < U; ++j) gains(i, j) = link_gain(i, j, nf_db, link_seed, cfg.phase_model);
                const auto r = apply_single_path(blocks, gains, noise, i, noise_src[v]);
                d = demodulate_window(rs.rx[v], r, rs.windows[i]);
            } else {
                for (std::size_t j = 0; j < U; ++j) {
                    rng::SplitMix64 eng(rng::derive_seed(chunk_seed, Stream::channel, block, i, j));
                    taps[j] = rs.profile->draw(eng, i == j ? 1.0 : db_to_power(nf_db));
                }
                const auto y = apply_multipath(prefixed, taps, noise, rs.cp, noise_src[v]);
                const auto r = remove_cyclic_prefix(y, rs.cp);
                if (mui_free) {
                    d = rake_demodulate(rs.rx[v], r, rs.windows[i], taps[i], rs.t_max);
                } else {
                    const auto h = frequency_response(taps[i], len);
                    d = demodulate_window(rs.rx[v], mmse_fde(r, h, snr_bin), rs.windows[i]);
                }
            }
            out.per_user[i].bits += k;
            out.per_user[i].errors += bit_errors(blocks[i].bits, d.argmax_bits);
        }
        ++out.symbols;
    }
    return out;
}

struct RunOptions {
    unsigned threads = 1;
    /// Called after each finished operating point (for progress output).
    std::function<void(const BerRecord&)> on_point;
};

/// Runs one (NF, Eb/N0) point until the stopping rule is met.
inline BerRecord run_point(const ResolvedScenario& rs, double nf_db, double ebn0_db, unsigned threads) {
    const auto& cfg = rs.cfg;
    const unsigned workers = std::max(1u, threads);
    const std::uint64_t n_chunks = (cfg.max_symbols + cfg.chunk_symbols - 1) / cfg.chunk_symbols;

    BerRecord rec;
    rec.scenario_id = cfg.id;
    rec.system = cfg.system;
    rec.users = cfg.users;
    rec.m = rs.m;
    rec.nf_db = nf_db;
    rec.ebn0_db = ebn0_db;
    rec.per_user.assign(cfg.users, UserTally{});

    auto chunk_size = [&](std::uint64_t c) {
        return std::min(cfg.chunk_symbols, cfg.max_symbols - c * cfg.chunk_symbols);
    };

    bool done = false;
    std::uint64_t next = 0;
    while (!done && next < n_chunks) {
        const std::uint64_t wave = std::min<std::uint64_t>(workers, n_chunks - next);
        std::vector<ChunkResult> results(wave);
        if (wave == 1) {
            results[0] = simulate_chunk(rs, nf_db, ebn0_db, next, chunk_size(next));
        } else {
            std::vector<std::exception_ptr> errors(wave);
            std::vector<std::thread> pool;
            pool.reserve(wave);
            for (std::uint64_t w = 0; w < wave; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        results[w] = simulate_chunk(rs, nf_db, ebn0_db, next + w, chunk_size(next + w));
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& t : pool) t.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        for (const auto& r : results) {
            rec.symbols += r.symbols;
            for (std::size_t u = 0; u < r.per_user.size(); ++u) {
                rec.per_user[u].bits += r.per_user[u].bits;
                rec.per_user[u].errors += r.per_user[u].errors;
                rec.bits_sent += r.per_user[u].bits;
                rec.bit_errors += r.per_user[u].errors;
            }
            if (rec.bit_errors >= cfg.min_bit_errors || rec.symbols >= cfg.max_symbols) {
                done = true;
                break;
            }
        }
        next += wave;
    }
    rec.hit_symbol_cap = rec.bit_errors < cfg.min_bit_errors;
    rec.ber = rec.bits_sent ? static_cast<double>(rec.bit_errors) / static_cast<double>(rec.bits_sent) : 0.0;
    rec.ci_halfwidth = ci_halfwidth(rec.bit_errors, rec.bits_sent);
    return rec;
}

/// One record per (NF, Eb/N0), NF-major.
inline std::vector<BerRecord> run_resolved(const ResolvedScenario& rs, const RunOptions& opt = {}) {
    std::vector<BerRecord> out;
    for (double nf : rs.cfg.nf_db) {
        for (double eb : rs.cfg.ebn0_db) {
            out.push_back(run_point(rs, nf, eb, opt.threads));
            if (opt.on_point) opt.on_point(out.back());
        }
    }
    return out;
}

inline std::vector<BerRecord> run_ber_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
    return run_resolved(resolve_scenario(cfg), opt);
}

/// Full-range CCSK over pseudorandom length-LN basis FMWs; multipath runs
/// equalize with MMSE-FDE before correlating.
inline std::vector<BerRecord> run_traditional_baseline(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
    if (cfg.system != SystemKind::traditional_tdcs)
        throw ValidationError("run_traditional_baseline: scenario system must be traditional_tdcs");
    return run_ber_scenario(cfg, opt);
}

/// Receiver references are built from mismatch_mask(tx mark, eta); the
/// transmitters keep the sensed mark.
inline std::vector<BerRecord> run_mismatch_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
    if (!cfg.eta) throw ValidationError("run_mismatch_scenario: scenario must set eta");
    return run_ber_scenario(cfg, opt);
}

// ---------------------------------------------------------------- emission

inline constexpr const char* kBerCsvHeader = "scenario_id,system,U,NF_db,ebn0_db,bits,errors,ber,ci_halfwidth";

namespace detail {
inline std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}
} // namespace detail

inline void write_ber_csv(std::ostream& os, std::span<const BerRecord> records) {
    os << kBerCsvHeader << '\n';
    for (const auto& r : records) {
        os << r.scenario_id << ',' << to_string(r.system) << ',' << r.users << ',' << detail::fmt("%.6g", r.nf_db) << ','
           << detail::fmt("%.6g", r.ebn0_db) << ',' << r.bits_sent << ',' << r.bit_errors << ','
           << detail::fmt("%.9e", r.ber) << ',' << detail::fmt("%.9e", r.ci_halfwidth) << '\n';
    }
}

/// Parses a CSV produced by write_ber_csv (per-user data is not stored).
inline std::vector<BerRecord> read_ber_csv(std::istream& in, const std::string& source = "<csv>") {
    std::vector<BerRecord> out;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) return out;
    ++line_no;
    if (detail::trim(line) != kBerCsvHeader) throw ValidationError(source, line_no, "unexpected CSV header");
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 9) throw ValidationError(source, line_no, "expected 9 fields");
        try {
            BerRecord r;
            r.scenario_id = f[0];
            if (f[1] == "mui_free_tdcs") r.system = SystemKind::mui_free_tdcs;
            else if (f[1] == "traditional_tdcs") r.system = SystemKind::traditional_tdcs;
            else throw ParameterError("unknown system '" + f[1] + "'");
            r.users = detail::parse_number<std::size_t>(f[2]);
            r.nf_db = detail::parse_number<double>(f[3]);
            r.ebn0_db = detail::parse_number<double>(f[4]);
            r.bits_sent = detail::parse_number<std::uint64_t>(f[5]);
            r.bit_errors = detail::parse_number<std::uint64_t>(f[6]);
            r.ber = detail::parse_number<double>(f[7]);
            r.ci_halfwidth = detail::parse_number<double>(f[8]);
            out.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw ValidationError(source, line_no, e.what());
        }
    }
    return out;
}

inline void write_run_report(std::ostream& os, const ResolvedScenario& rs, std::span<const BerRecord> records,
                             unsigned threads) {
    const auto& cfg = rs.cfg;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    os << "BER run report: " << cfg.id << '\n';
    os << "config hash      : " << hash << '\n';
    os << "root seed        : " << cfg.seed << '\n';
    os << "fmw seed         : " << cfg.effective_fmw_seed() << '\n';
    os << "system           : " << to_string(cfg.system) << '\n';
    os << "N, L, LN         : " << cfg.n << ", " << cfg.l << ", " << rs.length << '\n';
    os << "users            : " << cfg.users << " (victims: " << to_string(cfg.victims) << ")\n";
    os << "P-CCSK order M   : " << rs.m << " (" << rs.bits_per_symbol() << " bits/symbol)\n";
    os << "windows          :";
    for (const auto& w : rs.windows) os << " [" << w.start << ',' << w.last() << ']';
    os << '\n';
    os << "tx mark          : " << rs.tx_mark.to_string() << " (N_C = " << rs.n_available << ")\n";
    if (rs.rx_mark) {
        os << "rx mark          : " << rs.rx_mark->to_string()
           << detail::fmt(" (eta = %.6f)", correlation_coefficient(rs.tx_mark, *rs.rx_mark)) << '\n';
    }
    os << "channel          : " << to_string(cfg.channel);
    if (cfg.channel == ChannelKind::multipath) {
        os << " (" << cfg.multipath_profile << ", T_max = " << rs.t_max << ", CP = " << rs.cp << ")";
    } else {
        os << " (phase model " << to_string(cfg.phase_model) << ")";
    }
    os << '\n';
    os << "noise            : " << (cfg.noiseless ? "off" : "AWGN, n0 = Es / (log2(M) Eb/N0)") << '\n';
    os << "stopping rule    : >= " << cfg.min_bit_errors << " bit errors or " << cfg.max_symbols
       << " symbols per point (chunks of " << cfg.chunk_symbols << ")\n";
    os << "worker threads   : " << threads << " (results do not depend on this)\n\n";
    os << "    NF_db  ebn0_db      symbols        errors           ber     ci_half  cap\n";
    for (const auto& r : records) {
        os << detail::fmt("%9.2f", r.nf_db) << detail::fmt("%9.2f", r.ebn0_db) << ' ';
        char line[128];
        std::snprintf(line, sizeof line, "%12llu  %12llu  %12.4e  %10.3e  %s", static_cast<unsigned long long>(r.symbols),
                      static_cast<unsigned long long>(r.bit_errors), r.ber, r.ci_halfwidth,
                      r.hit_symbol_cap ? "yes" : "no");
        os << line << '\n';
        if (r.per_user.size() > 1) {
            for (std::size_t u = 0; u < r.per_user.size(); ++u) {
                const auto& t = r.per_user[u];
                if (t.bits == 0) continue;
                os << "                      user " << (u + 1) << ": " << t.errors << " / " << t.bits << " bits\n";
            }
        }
    }
}

struct EmittedFiles {
    std::filesystem::path csv;
    std::filesystem::path report;
};

/// Writes <dir>/<id>.csv and <dir>/<id>.report.txt.
inline EmittedFiles emit_results(const std::filesystem::path& dir, const ResolvedScenario& rs,
                                 std::span<const BerRecord> records, unsigned threads) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    EmittedFiles files{dir / (rs.cfg.id + ".csv"), dir / (rs.cfg.id + ".report.txt")};
    std::ofstream csv(files.csv);
    if (!csv) throw IoError("cannot write '" + files.csv.string() + "'");
    write_ber_csv(csv, records);
    std::ofstream rep(files.report);
    if (!rep) throw IoError("cannot write '" + files.report.string() + "'");
    write_run_report(rep, rs, records, threads);
    csv.flush();
    rep.flush();
    if (!csv || !rep) throw IoError("write failed in '" + dir.string() + "'");
    return files;
}

/// Eb/N0 at which the BER curve crosses `target`, by linear interpolation of
/// log10(BER) against Eb/N0 between the bracketing grid points. Records must
/// share one NF and be sorted by Eb/N0; nullopt when the curve never crosses
/// or the bracketing point below the target has zero errors.
inline std::optional<double> required_ebn0(std::span<const BerRecord> records, double target) {
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        const auto& a = records[i];
        const auto& b = records[i + 1];
        if (a.ber >= target && b.ber < target) {
            if (b.ber <= 0.0) return std::nullopt;
            if (a.ber == target) return a.ebn0_db;
            const double la = std::log10(a.ber), lb = std::log10(b.ber), lt = std::log10(target);
            return a.ebn0_db + (lt - la) / (lb - la) * (b.ebn0_db - a.ebn0_db);
        }
    }
    return std::nullopt;
}

} // namespace tdcs
