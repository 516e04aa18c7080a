// tdcs_sim: command-line front end for sequence design, capacity analysis,
// shift planning, self-verification and BER simulation.
//
// Exit status: 0 success, 2 usage, 3 validation, 4 runtime.

#include <tdcs/invariants.hpp>
#include <tdcs/tdcs.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace tdcs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitRuntime = 4;

constexpr const char* kOutEnv = "TDCS_OUT_DIR";

struct Common {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = 0;
    bool verbose = false;

    fs::path out_dir() const {
        if (!out.empty()) return out;
        if (const char* env = std::getenv(kOutEnv); env && *env) return env;
        return "results";
    }
    unsigned worker_count() const { return threads ? threads : std::max(1u, std::thread::hardware_concurrency()); }
};

void add_common(CLI::App* sub, Common& c, bool needs_config) {
    auto* cfg = sub->add_option("--config", c.config, "Scenario file (key = value)");
    if (needs_config) cfg->required()->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, std::string("Output directory (default: $") + kOutEnv + " or ./results)");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&c](std::uint64_t s) { c.seed = s, c.seed_set = true; }, "Override the root seed");
    sub->add_option("--threads", c.threads, "Worker threads (default: hardware concurrency)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", c.verbose, "Progress and extra diagnostics on stderr");
}

std::ofstream open_out(const fs::path& path) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream os(path);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    return os;
}

void write_profile_csv(const fs::path& path, const CorrelationProfile& p) {
    auto os = open_out(path);
    os << "tau,real,imag,abs\n";
    char buf[128];
    for (std::size_t t = 0; t < p.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", t, p[t].real(), p[t].imag(), std::abs(p[t]));
        os << buf;
    }
}

// ------------------------------------------------------------------ design

int cmd_design(const Common& c) {
    auto cfg = load_scenario(c.config);
    if (c.seed_set) cfg.seed = c.seed;
    if (cfg.system != SystemKind::mui_free_tdcs) throw ValidationError(c.config + ": design needs system = mui_free_tdcs");
    const auto rs = resolve_scenario(cfg);
    const auto dir = c.out_dir();
    for (std::size_t j = 0; j < rs.tx.size(); ++j) {
        auto os = open_out(dir / ("fmw_user" + std::to_string(j + 1) + ".csv"));
        write_complex_csv(os, rs.tx[j].span());
    }
    auto summary = open_out(dir / "design_summary.txt");
    auto both = [&](const std::string& line) {
        std::cout << line << '\n';
        summary << line << '\n';
    };
    both("N = " + std::to_string(cfg.n) + ", L = " + std::to_string(cfg.l) + ", users = " + std::to_string(cfg.users));
    both("mark = " + rs.tx_mark.to_string() + " (N_C = " + std::to_string(rs.n_available) + ")");
    char buf[256];
    for (std::size_t i = 0; i < rs.tx.size(); ++i) {
        for (std::size_t j = i; j < rs.tx.size(); ++j) {
            if (i != 0 && i != j) continue; // ACF of every user, CCF against user 1
            const auto prof = periodic_xcorr(rs.tx[i], rs.tx[j]);
            const auto name = i == j ? "acf_user" + std::to_string(i + 1)
                                     : "ccf_user" + std::to_string(i + 1) + "_user" + std::to_string(j + 1);
            write_profile_csv(dir / (name + ".csv"), prof);
            const auto rep = zero_zone_verify(rs.tx[i], rs.tx[j], cfg.n, cfg.l);
            std::snprintf(buf, sizeof buf,
                          "%-16s zero shifts %4zu (need %zu)  max in-zone %.3e  near-lag residual %.3e  peak %.6f  %s",
                          name.c_str(), rep.zero_count, rep.required, rep.max_sidelobe_in_zone, rep.eq9_residual,
                          std::abs(prof[0]), rep.success ? "ok" : "FAIL");
            both(buf);
        }
    }
    if (c.verbose) std::cerr << "design files written to " << dir << '\n';
    return kExitOk;
}

// --------------------------------------------------------- capacity / rate

struct CapacityArgs {
    std::size_t n = 64;
    std::vector<std::size_t> l{8, 9, 12, 16};
    std::vector<double> ratios{0.25, 1.0, 2.0};
    std::size_t t_max = 0;
};

int cmd_capacity(const Common& c, const CapacityArgs& a) {
    auto os = open_out(c.out_dir() / "capacity.csv");
    os << "L,N,M,U_max\n";
    std::cout << "     L     N     M  U_max\n";
    for (auto l : a.l) {
        for (double r : a.ratios) {
            const double mf = r * static_cast<double>(a.n);
            const auto m = static_cast<std::size_t>(std::llround(mf));
            std::string cell = "infeasible";
            if (std::abs(mf - static_cast<double>(m)) < 1e-9 && m >= 2 && std::has_single_bit(m) &&
                a.n + a.t_max + m <= l * a.n) {
                cell = std::to_string(u_max(l, a.n, m, a.t_max));
            }
            os << l << ',' << a.n << ',' << m << ',' << cell << '\n';
            std::printf("%6zu%6zu%6zu  %s\n", l, a.n, m, cell.c_str());
        }
    }
    return kExitOk;
}

struct ThroughputArgs {
    std::vector<std::size_t> n{64, 128};
    std::vector<std::size_t> l{8, 16};
    double beta = 0.75;
};

int cmd_throughput(const Common& c, const ThroughputArgs& a) {
    auto os = open_out(c.out_dir() / "throughput.csv");
    os << "L,N,M,U,eta_agg\n";
    for (auto l : a.l) {
        for (auto n : a.n) {
            double best = 0;
            std::size_t best_u = 0;
            for (std::size_t u = 1;; ++u) {
                Throughput t;
                try {
                    t = throughput(u, l, n, a.beta);
                } catch (const CapacityError&) {
                    break;
                }
                char buf[96];
                std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%.9g\n", l, n, t.m_max, u, t.aggregate);
                os << buf;
                if (t.aggregate > best) best = t.aggregate, best_u = u;
            }
            std::printf("L=%-3zu N=%-4zu max eta_agg = %.6f bps/Hz at U = %zu\n", l, n, best, best_u);
        }
    }
    return kExitOk;
}

// -------------------------------------------------------------------- plan

struct PlanArgs {
    std::size_t users = 0, n = 64, l = 16, m = 64, t_max = 0;
    bool full_load = false;
};

int cmd_plan(const Common& c, PlanArgs a) {
    if (!c.config.empty()) {
        const auto cfg = load_scenario(c.config);
        a.users = cfg.users, a.n = cfg.n, a.l = cfg.l, a.m = cfg.m;
        a.full_load = cfg.order == OrderMode::full_load;
        a.t_max = cfg.channel == ChannelKind::multipath ? cost207_ra6(cfg.sample_period_s()).t_max() : 0;
    }
    if (a.users == 0) throw ValidationError("plan: --users (or --config) is required");
    if (a.full_load) a.m = m_max(a.l, a.n, a.users, a.t_max);
    const auto plan = plan_shifts(a.users, a.n, a.l, a.m, a.t_max);
    const auto chk = verify_mui_free(plan);
    auto os = open_out(c.out_dir() / "plan.csv");
    os << "user,start,end\n";
    std::printf("LN = %zu, M = %zu, guard = %zu, U_max = %zu\n", plan.circular_length(), plan.m(), plan.guard(),
                u_max(a.l, a.n, plan.m(), a.t_max));
    for (std::size_t i = 0; i < plan.users(); ++i) {
        const auto& w = plan.window(i);
        os << i + 1 << ',' << w.start << ',' << w.last() << '\n';
        std::printf("user %2zu: [%zu, %zu]\n", i + 1, w.start, w.last());
    }
    std::printf("MUI-free: %s\n", chk.mui_free ? "yes" : "no");
    return chk.mui_free ? kExitOk : kExitRuntime;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const Common& c) {
    const auto results = run_invariant_suite();
    std::size_t passed = 0;
    for (const auto& r : results) {
        passed += r.passed;
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
        if (c.verbose || !r.passed) std::cout << ": " << r.detail;
        std::cout << '\n';
    }
    std::cout << passed << " passed, " << results.size() - passed << " failed\n";
    return passed == results.size() ? kExitOk : kExitRuntime;
}

// --------------------------------------------------------------------- ber

struct BerArgs {
    std::uint64_t max_symbols = 0;
    std::uint64_t min_errors = 0;
};

int cmd_ber(const Common& c, const BerArgs& a) {
    auto cfg = load_scenario(c.config);
    if (c.seed_set) cfg.seed = c.seed;
    if (a.max_symbols) cfg.max_symbols = a.max_symbols;
    if (a.min_errors) cfg.min_bit_errors = a.min_errors;
    const auto rs = resolve_scenario(cfg);
    RunOptions opt;
    opt.threads = c.worker_count();
    if (c.verbose) {
        opt.on_point = [](const BerRecord& r) {
            std::fprintf(stderr, "  NF %6.2f dB  Eb/N0 %6.2f dB  BER %.4e  (%llu errors / %llu symbols)\n", r.nf_db,
                         r.ebn0_db, r.ber, static_cast<unsigned long long>(r.bit_errors),
                         static_cast<unsigned long long>(r.symbols));
        };
    }
    const auto records = run_resolved(rs, opt);
    const auto files = emit_results(c.out_dir(), rs, records, opt.threads);
    write_ber_csv(std::cout, records);
    if (c.verbose) std::cerr << "wrote " << files.csv << " and " << files.report << '\n';
    return kExitOk;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
    std::vector<std::string> inputs;
    std::vector<double> targets{1e-4, 1e-3};
    std::string reference;
};

int cmd_report(const Common& c, const ReportArgs& a) {
    // Curves keyed by (scenario, NF); each sorted by Eb/N0.
    std::map<std::pair<std::string, double>, std::vector<BerRecord>> curves;
    for (const auto& path : a.inputs) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open '" + path + "'");
        for (auto& r : read_ber_csv(in, path)) curves[{r.scenario_id, r.nf_db}].push_back(std::move(r));
    }
    for (auto& [key, v] : curves)
        std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.ebn0_db < y.ebn0_db; });

    auto os = open_out(c.out_dir() / "required_ebn0.csv");
    os << "scenario_id,NF_db,target_ber,required_ebn0_db,loss_db\n";
    for (double target : a.targets) {
        std::optional<double> ref;
        if (!a.reference.empty()) {
            for (const auto& [key, v] : curves)
                if (key.first == a.reference) ref = required_ebn0(v, target);
            if (!ref) std::cerr << "warning: reference '" << a.reference << "' does not cross BER " << target << '\n';
        }
        std::printf("target BER %.1e\n", target);
        for (const auto& [key, v] : curves) {
            const auto req = required_ebn0(v, target);
            char buf[160];
            if (req) {
                const double loss = ref ? *req - *ref : 0.0;
                std::snprintf(buf, sizeof buf, "%s,%.6g,%.3g,%.4f,%s\n", key.first.c_str(), key.second, target, *req,
                              ref ? std::to_string(loss).c_str() : "");
                std::printf("  %-28s NF %5.1f dB  required Eb/N0 %7.3f dB", key.first.c_str(), key.second, *req);
                if (ref) std::printf("  loss %+.3f dB", loss);
                std::printf("\n");
            } else {
                std::snprintf(buf, sizeof buf, "%s,%.6g,%.3g,,\n", key.first.c_str(), key.second, target);
                std::printf("  %-28s NF %5.1f dB  not reached on the grid\n", key.first.c_str(), key.second);
            }
            os << buf;
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for MUI-free transform domain communication networks"};
    app.require_subcommand(1);
    app.footer(std::string("Environment: ") + kOutEnv +
               " sets the default output directory.\nExit status: 0 success, 2 usage, 3 validation, 4 runtime.");

    Common common;
    CapacityArgs cap;
    ThroughputArgs thr;
    PlanArgs plan;
    BerArgs ber;
    ReportArgs rep;

    auto* design = app.add_subcommand("design", "Build Kronecker FMWs and write ACF/CCF profiles");
    add_common(design, common, true);

    auto* capacity = app.add_subcommand("capacity", "Multiuser capacity table (U_max per L and M/N)");
    add_common(capacity, common, false);
    capacity->add_option("--n", cap.n, "Basis length N");
    capacity->add_option("--l", cap.l, "Time-sequence lengths L")->delimiter(',');
    capacity->add_option("--ratios", cap.ratios, "M/N ratios")->delimiter(',');
    capacity->add_option("--tmax", cap.t_max, "Channel order T_max");

    auto* throughput_cmd = app.add_subcommand("throughput", "Aggregated throughput against user count");
    add_common(throughput_cmd, common, false);
    throughput_cmd->add_option("--n", thr.n, "Basis lengths N")->delimiter(',');
    throughput_cmd->add_option("--l", thr.l, "Time-sequence lengths L")->delimiter(',');
    throughput_cmd->add_option("--beta", thr.beta, "Fraction of available bins")->check(CLI::Range(1e-9, 1.0));

    auto* plan_cmd = app.add_subcommand("plan", "Allocate MUI-free shift windows");
    add_common(plan_cmd, common, false);
    plan_cmd->add_option("--users", plan.users, "Number of users U");
    plan_cmd->add_option("--n", plan.n, "Basis length N");
    plan_cmd->add_option("--l", plan.l, "Time-sequence length L");
    plan_cmd->add_option("--m", plan.m, "P-CCSK order M");
    plan_cmd->add_option("--tmax", plan.t_max, "Channel order T_max");
    plan_cmd->add_flag("--full-load", plan.full_load, "Use the largest feasible M");

    auto* verify = app.add_subcommand("verify", "Run the invariant self-check suite");
    add_common(verify, common, false);

    auto* ber_cmd = app.add_subcommand("ber", "Monte Carlo BER simulation of a scenario file");
    add_common(ber_cmd, common, true);
    ber_cmd->add_option("--max-symbols", ber.max_symbols, "Override the per-point symbol cap");
    ber_cmd->add_option("--min-errors", ber.min_errors, "Override the per-point error target");

    auto* report = app.add_subcommand("report", "Required Eb/N0 from BER CSV files");
    add_common(report, common, false);
    report->add_option("--in", rep.inputs, "BER CSV files")->required()->check(CLI::ExistingFile);
    report->add_option("--target", rep.targets, "Target BERs")->delimiter(',');
    report->add_option("--reference", rep.reference, "Scenario id used as the zero-loss reference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*design) return cmd_design(common);
        if (*capacity) return cmd_capacity(common, cap);
        if (*throughput_cmd) return cmd_throughput(common, thr);
        if (*plan_cmd) return cmd_plan(common, plan);
        if (*verify) return cmd_verify(common);
        if (*ber_cmd) return cmd_ber(common, ber);
        if (*report) return cmd_report(common, rep);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return kExitValidation;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
