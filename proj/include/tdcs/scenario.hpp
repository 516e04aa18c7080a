#pragma once

// Scenario files: line-oriented "key = value" text.
//
//   # comment
//   id            = fig5_mui_free_u4
//   system        = mui_free_tdcs | traditional_tdcs
//   N             = 64              spectrum bins of the basis FMW
//   L             = 16              time-sequence length (block length L*N)
//   time_sequence = auto | quadriphase16 | zadoff_chu
//   M             = 64 | full_load | full_range
//   U             = 4
//   bandwidth_mhz = 10
//   na_bands_mhz  = 2.5-3.75, 6.25-7.5 | none
//   mark          = 0/1 string (overrides the bands; length N, or L*N for traditional)
//   channel       = single_path | multipath
//   phase_model   = uniform | fixed | rayleigh
//   multipath_profile = cost207_ra6
//   sample_period_us  = 0.1
//   cyclic_prefix = 256             default L*N/4
//   nf_db         = 0, 2, 4         list
//   ebn0_db       = 0, 2, 4, 6, 8   list
//   eta           = 0.958           receiver sensing mismatch (optional)
//   seed          = 1               Monte Carlo root seed
//   fmw_seed      = 7               FMW / mismatch seed (defaults to seed)
//   phase_levels  = 4
//   min_bit_errors = 100
//   max_symbols   = 2000000
//   chunk_symbols = 1000
//   noiseless     = false
//   victims       = first | all

#include <tdcs/allocation.hpp>
#include <tdcs/channel.hpp>
#include <tdcs/error.hpp>
#include <tdcs/spectrum.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <sstream>

namespace tdcs {

enum class SystemKind { mui_free_tdcs, traditional_tdcs };
enum class ChannelKind { single_path, multipath };
enum class VictimMode { first, all };
enum class OrderMode { fixed, full_load, full_range };
enum class TimeSequenceKind { automatic, quadriphase16, zadoff_chu };

inline const char* to_string(SystemKind s) { return s == SystemKind::mui_free_tdcs ? "mui_free_tdcs" : "traditional_tdcs"; }
inline const char* to_string(ChannelKind c) { return c == ChannelKind::single_path ? "single_path" : "multipath"; }
inline const char* to_string(VictimMode v) { return v == VictimMode::first ? "first" : "all"; }
inline const char* to_string(PhaseModel p) {
    switch (p) {
    case PhaseModel::fixed: return "fixed";
    case PhaseModel::uniform: return "uniform";
    case PhaseModel::rayleigh: return "rayleigh";
    }
    return "uniform";
}
inline const char* to_string(TimeSequenceKind t) {
    switch (t) {
    case TimeSequenceKind::automatic: return "auto";
    case TimeSequenceKind::quadriphase16: return "quadriphase16";
    case TimeSequenceKind::zadoff_chu: return "zadoff_chu";
    }
    return "auto";
}

struct ScenarioConfig {
    std::string id = "scenario";
    SystemKind system = SystemKind::mui_free_tdcs;
    std::size_t n = 64;
    std::size_t l = 16;
    TimeSequenceKind time_sequence = TimeSequenceKind::automatic;
    OrderMode order = OrderMode::fixed;
    std::size_t m = 64;
    std::size_t users = 1;
    double bandwidth_mhz = 10.0;
    std::vector<FrequencyBand> na_bands_mhz; ///< band edges in MHz
    std::optional<std::string> mark;
    ChannelKind channel = ChannelKind::single_path;
    PhaseModel phase_model = PhaseModel::uniform;
    std::string multipath_profile = "cost207_ra6";
    double sample_period_us = 0.1;
    std::optional<std::size_t> cyclic_prefix;
    std::vector<double> nf_db{0.0};
    std::vector<double> ebn0_db{0.0};
    std::optional<double> eta;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> fmw_seed;
    unsigned phase_levels = 4;
    std::uint64_t min_bit_errors = 100;
    std::uint64_t max_symbols = 2'000'000;
    std::uint64_t chunk_symbols = 1000;
    bool noiseless = false;
    VictimMode victims = VictimMode::first;

    std::uint64_t effective_fmw_seed() const noexcept { return fmw_seed.value_or(seed); }
    std::size_t block_length() const noexcept { return n * l; }
    double sample_period_s() const noexcept { return sample_period_us * 1e-6; }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

template <class T>
T parse_number(const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) throw ParameterError("not a valid number: '" + text + "'");
    return value;
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParameterError("expected true/false, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split(v, ',')) {
        if (item.empty()) throw ParameterError("empty list element");
        out.push_back(parse_number<double>(item));
    }
    return out;
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace detail

/// Applies one key/value pair; throws ParameterError on bad values and
/// ValidationError on unknown keys.
inline void apply_scenario_key(ScenarioConfig& cfg, const std::string& key, const std::string& v) {
    using detail::parse_number;
    if (key == "id") {
        if (v.empty()) throw ParameterError("id must be non-empty");
        cfg.id = v;
    } else if (key == "system") {
        if (v == "mui_free_tdcs") cfg.system = SystemKind::mui_free_tdcs;
        else if (v == "traditional_tdcs") cfg.system = SystemKind::traditional_tdcs;
        else throw ParameterError("unknown system '" + v + "'");
    } else if (key == "N") {
        cfg.n = parse_number<std::size_t>(v);
    } else if (key == "L") {
        cfg.l = parse_number<std::size_t>(v);
    } else if (key == "time_sequence") {
        if (v == "auto") cfg.time_sequence = TimeSequenceKind::automatic;
        else if (v == "quadriphase16") cfg.time_sequence = TimeSequenceKind::quadriphase16;
        else if (v == "zadoff_chu") cfg.time_sequence = TimeSequenceKind::zadoff_chu;
        else throw ParameterError("unknown time_sequence '" + v + "'");
    } else if (key == "M") {
        if (v == "full_load" || v == "full") {
            cfg.order = OrderMode::full_load;
        } else if (v == "full_range") {
            cfg.order = OrderMode::full_range;
        } else {
            cfg.order = OrderMode::fixed;
            cfg.m = parse_number<std::size_t>(v);
        }
    } else if (key == "U") {
        cfg.users = parse_number<std::size_t>(v);
    } else if (key == "bandwidth_mhz") {
        cfg.bandwidth_mhz = parse_number<double>(v);
    } else if (key == "na_bands_mhz") {
        cfg.na_bands_mhz.clear();
        if (v != "none" && !v.empty()) {
            for (const auto& item : detail::split(v, ',')) {
                const auto parts = detail::split(item, '-');
                if (parts.size() != 2) throw ParameterError("band must look like 'low-high': '" + item + "'");
                cfg.na_bands_mhz.push_back({parse_number<double>(parts[0]), parse_number<double>(parts[1])});
            }
        }
    } else if (key == "mark") {
        SpectrumMark::from_string(v); // validate early
        cfg.mark = v;
    } else if (key == "channel") {
        if (v == "single_path") cfg.channel = ChannelKind::single_path;
        else if (v == "multipath") cfg.channel = ChannelKind::multipath;
        else throw ParameterError("unknown channel '" + v + "'");
    } else if (key == "phase_model") {
        if (v == "uniform") cfg.phase_model = PhaseModel::uniform;
        else if (v == "fixed") cfg.phase_model = PhaseModel::fixed;
        else if (v == "rayleigh") cfg.phase_model = PhaseModel::rayleigh;
        else throw ParameterError("unknown phase_model '" + v + "'");
    } else if (key == "multipath_profile") {
        if (v != "cost207_ra6") throw ParameterError("unknown multipath_profile '" + v + "'");
        cfg.multipath_profile = v;
    } else if (key == "sample_period_us") {
        cfg.sample_period_us = parse_number<double>(v);
    } else if (key == "cyclic_prefix") {
        cfg.cyclic_prefix = parse_number<std::size_t>(v);
    } else if (key == "nf_db") {
        cfg.nf_db = detail::parse_list(v);
    } else if (key == "ebn0_db") {
        cfg.ebn0_db = detail::parse_list(v);
    } else if (key == "eta") {
        if (v == "none") cfg.eta.reset();
        else cfg.eta = parse_number<double>(v);
    } else if (key == "seed") {
        cfg.seed = parse_number<std::uint64_t>(v);
    } else if (key == "fmw_seed") {
        cfg.fmw_seed = parse_number<std::uint64_t>(v);
    } else if (key == "phase_levels") {
        cfg.phase_levels = parse_number<unsigned>(v);
    } else if (key == "min_bit_errors") {
        cfg.min_bit_errors = parse_number<std::uint64_t>(v);
    } else if (key == "max_symbols") {
        cfg.max_symbols = parse_number<std::uint64_t>(v);
    } else if (key == "chunk_symbols") {
        cfg.chunk_symbols = parse_number<std::uint64_t>(v);
    } else if (key == "noiseless") {
        cfg.noiseless = detail::parse_bool(v);
    } else if (key == "victims") {
        if (v == "first") cfg.victims = VictimMode::first;
        else if (v == "all") cfg.victims = VictimMode::all;
        else throw ParameterError("unknown victims mode '" + v + "'");
    } else {
        throw ValidationError("unknown key '" + key + "'");
    }
}

/// Structural checks that do not need FMW construction.
inline void validate_scenario(const ScenarioConfig& cfg) {
    auto fail = [](const std::string& m) { throw ValidationError("scenario: " + m); };
    if (cfg.n < 4) fail("N must be >= 4");
    if (cfg.l < 2) fail("L must be >= 2");
    if (cfg.users == 0) fail("U must be >= 1");
    if (cfg.ebn0_db.empty()) fail("ebn0_db must list at least one point");
    if (cfg.nf_db.empty()) fail("nf_db must list at least one point");
    if (cfg.min_bit_errors == 0 && cfg.max_symbols == 0) fail("stopping rule is empty");
    if (cfg.max_symbols == 0) fail("max_symbols must be >= 1");
    if (cfg.chunk_symbols == 0) fail("chunk_symbols must be >= 1");
    if (cfg.order == OrderMode::fixed && (cfg.m < 2 || !std::has_single_bit(cfg.m)))
        fail("M must be a power of two >= 2");
    if (cfg.order == OrderMode::full_range && cfg.system == SystemKind::mui_free_tdcs && cfg.users != 1)
        fail("full_range shift keying is only defined for a single MUI-free user");
    if (cfg.eta && !(*cfg.eta > 0.0 && *cfg.eta <= 1.0)) fail("eta must lie in (0, 1]");
    if (cfg.phase_levels < 2 || !std::has_single_bit(cfg.phase_levels)) fail("phase_levels must be a power of two >= 2");
}

inline ScenarioConfig parse_scenario(std::istream& in, const std::string& source = "<scenario>") {
    ScenarioConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ValidationError(source, line_no, "expected 'key = value'");
        const auto key = detail::trim(std::string_view(text).substr(0, eq));
        const auto value = detail::trim(std::string_view(text).substr(eq + 1));
        if (key.empty()) throw ValidationError(source, line_no, "missing key");
        if (seen.count(key)) throw ValidationError(source, line_no, "duplicate key '" + key + "'");
        seen[key] = line_no;
        try {
            apply_scenario_key(cfg, key, value);
        } catch (const ValidationError& e) {
            throw ValidationError(source, line_no, e.what());
        } catch (const std::invalid_argument& e) {
            throw ValidationError(source, line_no, key + ": " + e.what());
        }
    }
    try {
        validate_scenario(cfg);
    } catch (const ValidationError& e) {
        throw ValidationError(source, line_no, e.what());
    }
    return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    return parse_scenario(in, path);
}

/// Canonical key = value serialization (fixed key order); parse_scenario
/// of this text yields an equivalent config.
inline std::string serialize_scenario(const ScenarioConfig& cfg) {
    std::ostringstream os;
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + detail::format_double(v[i]);
        return s;
    };
    os << "id = " << cfg.id << '\n';
    os << "system = " << to_string(cfg.system) << '\n';
    os << "N = " << cfg.n << '\n';
    os << "L = " << cfg.l << '\n';
    os << "time_sequence = " << to_string(cfg.time_sequence) << '\n';
    switch (cfg.order) {
    case OrderMode::fixed: os << "M = " << cfg.m << '\n'; break;
    case OrderMode::full_load: os << "M = full_load\n"; break;
    case OrderMode::full_range: os << "M = full_range\n"; break;
    }
    os << "U = " << cfg.users << '\n';
    os << "bandwidth_mhz = " << detail::format_double(cfg.bandwidth_mhz) << '\n';
    os << "na_bands_mhz = ";
    if (cfg.na_bands_mhz.empty()) os << "none";
    for (std::size_t i = 0; i < cfg.na_bands_mhz.size(); ++i) {
        os << (i ? ", " : "") << detail::format_double(cfg.na_bands_mhz[i].low_hz) << '-'
           << detail::format_double(cfg.na_bands_mhz[i].high_hz);
    }
    os << '\n';
    if (cfg.mark) os << "mark = " << *cfg.mark << '\n';
    os << "channel = " << to_string(cfg.channel) << '\n';
    os << "phase_model = " << to_string(cfg.phase_model) << '\n';
    os << "multipath_profile = " << cfg.multipath_profile << '\n';
    os << "sample_period_us = " << detail::format_double(cfg.sample_period_us) << '\n';
    if (cfg.cyclic_prefix) os << "cyclic_prefix = " << *cfg.cyclic_prefix << '\n';
    os << "nf_db = " << list(cfg.nf_db) << '\n';
    os << "ebn0_db = " << list(cfg.ebn0_db) << '\n';
    if (cfg.eta) os << "eta = " << detail::format_double(*cfg.eta) << '\n';
    os << "seed = " << cfg.seed << '\n';
    if (cfg.fmw_seed) os << "fmw_seed = " << *cfg.fmw_seed << '\n';
    os << "phase_levels = " << cfg.phase_levels << '\n';
    os << "min_bit_errors = " << cfg.min_bit_errors << '\n';
    os << "max_symbols = " << cfg.max_symbols << '\n';
    os << "chunk_symbols = " << cfg.chunk_symbols << '\n';
    os << "noiseless = " << (cfg.noiseless ? "true" : "false") << '\n';
    os << "victims = " << to_string(cfg.victims) << '\n';
    return os.str();
}

/// FNV-1a over the canonical serialization.
inline std::uint64_t config_hash(const ScenarioConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : serialize_scenario(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace tdcs
