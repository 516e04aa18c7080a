#include <tdcs/simharness.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace tdcs;

namespace {

ScenarioConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in, "test.cfg");
}

ScenarioConfig small_config() {
    return parse("id = small\nN = 16\nL = 8\nM = 8\nU = 3\nmark = 1101111111110111\nnf_db = 10\n"
                 "ebn0_db = 0, 4\nseed = 5\nmin_bit_errors = 60\nmax_symbols = 3000\nchunk_symbols = 200\n");
}

std::string csv_of(const std::vector<BerRecord>& r) {
    std::ostringstream os;
    write_ber_csv(os, r);
    return os.str();
}

} // namespace

TEST(ScenarioParser, DefaultsAndComments) {
    const auto c = parse("# comment only\n\nid = x   # trailing\nU = 2\n");
    EXPECT_EQ(c.id, "x");
    EXPECT_EQ(c.users, 2u);
    EXPECT_EQ(c.n, 64u);
    EXPECT_EQ(c.l, 16u);
    EXPECT_EQ(c.order, OrderMode::fixed);
    EXPECT_EQ(c.effective_fmw_seed(), c.seed);
}

TEST(ScenarioParser, AllKeys) {
    const auto c = parse("id = all\nsystem = traditional_tdcs\nN = 32\nL = 9\ntime_sequence = zadoff_chu\nM = full_range\n"
                         "U = 3\nbandwidth_mhz = 20\nna_bands_mhz = 1-2, 5-6.5\nchannel = multipath\n"
                         "phase_model = rayleigh\nmultipath_profile = cost207_ra6\nsample_period_us = 0.05\n"
                         "cyclic_prefix = 40\nnf_db = 0, 8\nebn0_db = 1,2,3\neta = 0.9\nseed = 42\nfmw_seed = 3\n"
                         "phase_levels = 8\nmin_bit_errors = 7\nmax_symbols = 99\nchunk_symbols = 11\n"
                         "noiseless = true\nvictims = all\n");
    EXPECT_EQ(c.system, SystemKind::traditional_tdcs);
    EXPECT_EQ(c.n, 32u);
    EXPECT_EQ(c.l, 9u);
    EXPECT_EQ(c.time_sequence, TimeSequenceKind::zadoff_chu);
    EXPECT_EQ(c.order, OrderMode::full_range);
    EXPECT_DOUBLE_EQ(c.bandwidth_mhz, 20.0);
    ASSERT_EQ(c.na_bands_mhz.size(), 2u);
    EXPECT_DOUBLE_EQ(c.na_bands_mhz[1].high_hz, 6.5);
    EXPECT_EQ(c.channel, ChannelKind::multipath);
    EXPECT_EQ(c.phase_model, PhaseModel::rayleigh);
    EXPECT_DOUBLE_EQ(c.sample_period_s(), 0.05e-6);
    EXPECT_EQ(c.cyclic_prefix, 40u);
    EXPECT_EQ(c.nf_db, (std::vector<double>{0, 8}));
    EXPECT_EQ(c.ebn0_db, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(c.eta, 0.9);
    EXPECT_EQ(c.effective_fmw_seed(), 3u);
    EXPECT_EQ(c.phase_levels, 8u);
    EXPECT_EQ(c.chunk_symbols, 11u);
    EXPECT_TRUE(c.noiseless);
    EXPECT_EQ(c.victims, VictimMode::all);
}

TEST(ScenarioParser, ErrorsCarryLineNumbers) {
    const std::pair<const char*, std::size_t> bad[] = {
        {"id = a\nbogus = 1\n", 2},      {"U = 2\nU = 3\n", 2},           {"N = 64\nno equals sign\n", 2},
        {"M = 6\n", 1},                  {"U = -1\n", 1},                 {"eta = 1.5\n", 1},
        {"nf_db = 1, x\n", 1},           {"system = fancy\n", 1},         {"U = 2\nM = full_range\n", 2},
        {"na_bands_mhz = 1-2-3\n", 1},   {"mark = 0102\n", 1},            {"= 3\n", 1},
    };
    for (const auto& [text, line] : bad) {
        try {
            parse(text);
            ADD_FAILURE() << "accepted: " << text;
        } catch (const ValidationError& e) {
            EXPECT_EQ(e.source(), "test.cfg");
            EXPECT_EQ(e.line(), line) << text;
        }
    }
}

TEST(ScenarioParser, MissingFileIsIoError) {
    EXPECT_THROW(load_scenario("/nonexistent/dir/x.cfg"), IoError);
}

TEST(ScenarioSerialize, RoundTrip) {
    auto c = small_config();
    c.eta = 0.875;
    c.na_bands_mhz = {{1.0, 2.5}};
    c.sample_period_us = 0.1;
    c.mark.reset();
    c.fmw_seed = 77;
    c.channel = ChannelKind::multipath;
    c.cyclic_prefix = 12;
    const auto text = serialize_scenario(c);
    const auto back = parse(text);
    EXPECT_EQ(serialize_scenario(back), text);
    EXPECT_EQ(config_hash(back), config_hash(c));
    auto d = c;
    d.seed += 1;
    EXPECT_NE(config_hash(d), config_hash(c));
}

TEST(Resolve, MuiFreeLayout) {
    const auto rs = resolve_scenario(small_config());
    EXPECT_EQ(rs.length, 128u);
    EXPECT_EQ(rs.m, 8u);
    ASSERT_EQ(rs.windows.size(), 3u);
    EXPECT_EQ(rs.windows[1], (ShiftWindow{40, 8}));
    EXPECT_NEAR(rs.symbol_energy, 8.0, 1e-9);
    EXPECT_EQ(rs.n_available, 14u);
    EXPECT_EQ(rs.victims, (std::vector<std::size_t>{0}));
}

TEST(Resolve, FullLoadAndTraditional) {
    auto c = small_config();
    c.order = OrderMode::full_load;
    EXPECT_EQ(resolve_scenario(c).m, 16u); // (128 - 48) / 3 = 26 -> 16
    c.users = 9;
    EXPECT_THROW(resolve_scenario(c), CapacityError);
    c = small_config();
    c.users = 6;
    EXPECT_THROW(resolve_scenario(c), CapacityError);
    c.system = SystemKind::traditional_tdcs;
    c.mark.reset();
    c.order = OrderMode::full_range;
    const auto rs = resolve_scenario(c);
    EXPECT_EQ(rs.m, 128u);
    for (const auto& w : rs.windows) EXPECT_EQ(w, (ShiftWindow{0, 128}));
    EXPECT_NEAR(rs.symbol_energy, 1.0, 1e-9);
}

TEST(Resolve, MultipathNeedsPrefix) {
    auto c = small_config();
    c.channel = ChannelKind::multipath;
    c.cyclic_prefix = 3;
    EXPECT_THROW(resolve_scenario(c), ValidationError);
    c.cyclic_prefix.reset();
    const auto rs = resolve_scenario(c);
    EXPECT_EQ(rs.cp, 32u);
    EXPECT_EQ(rs.t_max, 5u);
    EXPECT_EQ(rs.windows[0].start, 21u);
}

TEST(Resolve, MismatchBuildsReceiverMark) {
    auto c = small_config();
    c.eta = 13.0 / 14.0;
    const auto rs = resolve_scenario(c);
    ASSERT_TRUE(rs.rx_mark.has_value());
    EXPECT_NEAR(correlation_coefficient(rs.tx_mark, *rs.rx_mark), 13.0 / 14.0, 1e-12);
    c.eta = 1.0;
    EXPECT_FALSE(resolve_scenario(c).rx_mark.has_value());
}

TEST(RunBer, NoiselessMuiFreeIsErrorFree) {
    auto c = small_config();
    c.noiseless = true;
    c.max_symbols = 500;
    c.victims = VictimMode::all;
    for (const auto& r : run_ber_scenario(c)) {
        EXPECT_EQ(r.bit_errors, 0u);
        EXPECT_EQ(r.bits_sent, 500u * 3 * 3);
        EXPECT_TRUE(r.hit_symbol_cap);
    }
}

TEST(RunBer, NoiselessTraditionalSingleUserIsErrorFree) {
    auto c = small_config();
    c.system = SystemKind::traditional_tdcs;
    c.order = OrderMode::full_range;
    c.users = 1;
    c.mark.reset();
    c.noiseless = true;
    c.max_symbols = 300;
    for (const auto& r : run_traditional_baseline(c)) EXPECT_EQ(r.bit_errors, 0u);
    EXPECT_THROW(run_traditional_baseline(small_config()), ValidationError);
}

TEST(RunBer, StoppingRuleAndBerDefinition) {
    const auto recs = run_ber_scenario(small_config());
    ASSERT_EQ(recs.size(), 2u);
    for (const auto& r : recs) {
        EXPECT_TRUE(r.bit_errors >= 60 || r.symbols == 3000);
        EXPECT_EQ(r.hit_symbol_cap, r.bit_errors < 60);
        EXPECT_DOUBLE_EQ(r.ber, double(r.bit_errors) / double(r.bits_sent));
        EXPECT_DOUBLE_EQ(r.ci_halfwidth, ci_halfwidth(r.bit_errors, r.bits_sent));
        EXPECT_EQ(r.bits_sent, r.symbols * 3);
        EXPECT_EQ(r.symbols % 200, 0u);
    }
    EXPECT_GT(recs[0].ber, recs[1].ber);
}

TEST(RunBer, DeterministicAndThreadIndependent) {
    auto c = small_config();
    c.victims = VictimMode::all;
    const auto a = csv_of(run_ber_scenario(c, {1, {}}));
    EXPECT_EQ(a, csv_of(run_ber_scenario(c, {1, {}})));
    EXPECT_EQ(a, csv_of(run_ber_scenario(c, {3, {}})));
    EXPECT_EQ(a, csv_of(run_ber_scenario(c, {8, {}})));
    c.seed += 1;
    EXPECT_NE(a, csv_of(run_ber_scenario(c)));
}

TEST(RunBer, MuiFreeVictimUnaffectedByInterferers) {
    // Common random numbers: the victim's noise and bits do not depend on U,
    // and MUI-free interferers add nothing at the decision statistic.
    auto c1 = small_config();
    c1.users = 1;
    auto c3 = small_config();
    const auto r1 = run_ber_scenario(c1);
    const auto r3 = run_ber_scenario(c3);
    for (std::size_t k = 0; k < r1.size(); ++k) EXPECT_EQ(r1[k].bit_errors, r3[k].bit_errors);
}

TEST(RunBer, EtaOneMatchesPerfectSensing) {
    auto c = small_config();
    const auto perfect = run_ber_scenario(c);
    c.eta = 1.0;
    const auto same = run_mismatch_scenario(c);
    for (std::size_t k = 0; k < perfect.size(); ++k) EXPECT_EQ(perfect[k].bit_errors, same[k].bit_errors);
    EXPECT_THROW(run_mismatch_scenario(small_config()), ValidationError);
}

TEST(RunBer, OnPointCallback) {
    auto c = small_config();
    c.max_symbols = 200;
    int calls = 0;
    run_ber_scenario(c, {1, [&](const BerRecord&) { ++calls; }});
    EXPECT_EQ(calls, 2);
}

TEST(CiHalfwidth, Formula) {
    EXPECT_NEAR(ci_halfwidth(100, 10000), 1.96 * std::sqrt(0.01 * 0.99 / 10000), 1e-15);
    EXPECT_NEAR(ci_halfwidth(0, 1000), 1.96 / 1000, 1e-15);
}

TEST(Emit, HeaderOnlyForEmptyRecords) {
    EXPECT_EQ(csv_of({}), std::string(kBerCsvHeader) + "\n");
}

TEST(Emit, OneRecordRoundTrips) {
    BerRecord r;
    r.scenario_id = "rt";
    r.system = SystemKind::traditional_tdcs;
    r.users = 4;
    r.nf_db = 10;
    r.ebn0_db = 4.5;
    r.bits_sent = 123456;
    r.bit_errors = 789;
    r.ber = 789.0 / 123456.0;
    r.ci_halfwidth = ci_halfwidth(789, 123456);
    const auto text = csv_of({r});
    std::istringstream in(text);
    const auto back = read_ber_csv(in);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].scenario_id, "rt");
    EXPECT_EQ(back[0].system, SystemKind::traditional_tdcs);
    EXPECT_EQ(back[0].users, 4u);
    EXPECT_EQ(back[0].bits_sent, 123456u);
    EXPECT_EQ(back[0].bit_errors, 789u);
    EXPECT_DOUBLE_EQ(back[0].ebn0_db, 4.5);
    EXPECT_NEAR(back[0].ber, r.ber, 1e-9 * r.ber);
    EXPECT_EQ(csv_of(back), text);
}

TEST(Emit, RejectsBadCsv) {
    std::istringstream wrong_header("a,b,c\n");
    EXPECT_THROW(read_ber_csv(wrong_header), ValidationError);
    std::istringstream short_row(std::string(kBerCsvHeader) + "\nx,mui_free_tdcs,1\n");
    EXPECT_THROW(read_ber_csv(short_row), ValidationError);
}

TEST(Emit, WritesCsvAndReport) {
    auto c = small_config();
    c.max_symbols = 400;
    const auto rs = resolve_scenario(c);
    const auto recs = run_resolved(rs);
    const auto dir = std::filesystem::temp_directory_path() / "tdcs_emit_test";
    std::filesystem::remove_all(dir);
    const auto files = emit_results(dir, rs, recs, 2);
    std::ifstream csv(files.csv);
    EXPECT_EQ(read_ber_csv(csv).size(), 2u);
    std::ifstream rep(files.report);
    const std::string report((std::istreambuf_iterator<char>(rep)), {});
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(c)));
    EXPECT_NE(report.find(hash), std::string::npos);
    EXPECT_NE(report.find("root seed        : 5"), std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST(Emit, UnwritableDestinationIsIoError) {
    const auto rs = resolve_scenario(small_config());
    const auto blocker = std::filesystem::temp_directory_path() / "tdcs_emit_blocker";
    std::ofstream(blocker) << "x";
    EXPECT_THROW(emit_results(blocker / "sub", rs, {}, 1), IoError);
    std::filesystem::remove(blocker);
}

TEST(RequiredEbn0, LogLinearInterpolation) {
    std::vector<BerRecord> r(3);
    r[0].ebn0_db = 4, r[0].ber = 1e-3;
    r[1].ebn0_db = 5, r[1].ber = 1e-5;
    r[2].ebn0_db = 6, r[2].ber = 0;
    EXPECT_NEAR(*required_ebn0(r, 1e-4), 4.5, 1e-12);
    EXPECT_NEAR(*required_ebn0(r, 1e-3), 4.0, 1e-12);
    EXPECT_FALSE(required_ebn0(r, 1e-6).has_value());
    EXPECT_FALSE(required_ebn0(r, 1e-2).has_value());
}
