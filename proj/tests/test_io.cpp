// test_io - CSV tables and JSON run configuration
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vdimer/config.hpp"
#include "vdimer/csv_io.hpp"
#include "vdimer/errors.hpp"

#include <cstring>
#include <fstream>
#include <random>

using namespace vdimer;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "vdimer_test_io";
    fs::create_directories(dir);
    return dir / name;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string s;
    std::getline(in, s);
    return s;
}

}  // namespace

TEST_CASE("17 significant digits") {
    CHECK(format17(0.1) == "0.10000000000000001");
    CHECK(format17(1.0) == "1");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int k = 0; k < 1000; ++k) {
        const double x = u(rng) * std::pow(10.0, k % 40 - 20);
        CHECK(same_bits(std::stod(format17(x)), x));
    }
}

TEST_CASE("chi curve round trip") {
    std::vector<ChiStats> rows;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 7; ++k) {
        ChiStats c;
        c.tau = 100.0 * k;
        for (int i = 0; i < 4; ++i) {
            c.mean(i) = u(rng);
            c.std(i) = 0.01 * u(rng);
        }
        rows.push_back(c);
    }
    const fs::path p = scratch("chi_curve.csv");
    write_chi_curve(p, rows);
    CHECK(first_line(p) == kChiHeader);
    const auto back = read_chi_curve(p);
    REQUIRE(back.size() == rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(same_bits(back[k].tau, rows[k].tau));
        for (int i = 0; i < 4; ++i) {
            CHECK(same_bits(back[k].mean(i), rows[k].mean(i)));
            CHECK(same_bits(back[k].std(i), rows[k].std(i)));
        }
    }
}

TEST_CASE("witness, r sweep and conditioning round trips") {
    const std::vector<WitnessRow> w{{100.0, 200.0, 0.0123456789012345678, 1.0 / 3.0}, {0.0, 200.0, 0.0, -0.0}};
    write_witness(scratch("witness.csv"), w);
    CHECK(first_line(scratch("witness.csv")) == kWitnessHeader);
    const auto wb = read_witness(scratch("witness.csv"));
    REQUIRE(wb.size() == 2u);
    CHECK(same_bits(wb[0].wb_sim, w[0].wb_sim));
    CHECK(same_bits(wb[0].wb_theory, w[0].wb_theory));

    const std::vector<RSweepPoint> r{{-162.0, 0.14086956521739132, 0.25}, {-40.0, 1.0 / 29.0, 1e-17}};
    write_rsweep(scratch("rsweep.csv"), r);
    CHECK(first_line(scratch("rsweep.csv")) == kRSweepHeader);
    const auto rb = read_rsweep(scratch("rsweep.csv"));
    REQUIRE(rb.size() == 2u);
    CHECK(same_bits(rb[1].r, r[1].r));
    CHECK(same_bits(rb[1].sigma, r[1].sigma));

    const std::vector<ConditioningRow> c{{"magic_angle", 655.7, 2.38e-6}, {"selective", 1e300, 0.0}};
    write_conditioning(scratch("conditioning.csv"), c);
    CHECK(first_line(scratch("conditioning.csv")) == kConditioningHeader);
    const auto cb = read_conditioning(scratch("conditioning.csv"));
    REQUIRE(cb.size() == 2u);
    CHECK(cb[0].pair_set == "magic_angle");
    CHECK(same_bits(cb[1].kappa, 1e300));
}

TEST_CASE("readers reject a foreign header") {
    {
        std::ofstream out(scratch("bad.csv"));
        out << "tau,chi\n0,1\n";
    }
    CHECK_THROWS_AS(read_chi_curve(scratch("bad.csv")), DomainError);
    CHECK_THROWS_AS(read_witness(scratch("bad.csv")), DomainError);
    CHECK_THROWS_AS(read_rsweep(scratch("bad.csv")), DomainError);
    CHECK_THROWS_AS(read_conditioning(scratch("missing.csv")), std::exception);
}

TEST_CASE("default configuration") {
    const RunConfig c = parse_config(json::object());
    CHECK(c.preset == "apc");
    CHECK(c.dimer.J == -162.0);
    CHECK(c.n_phon == 3);
    CHECK(c.sigma_t_fs == 103.0);
    CHECK(c.dt_fs == 0.0);
    CHECK(c.tau_grid.values() == std::vector<double>{0, 100, 200, 300, 400, 500, 600});
    CHECK(c.rsweep_grid.values().size() == 13u);
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_AS(parse_config(json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"dimer", {{"eps_c", 1.0}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"pulse", {{"sigma", 100.0}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"plan", {{"dt", 0.1}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"protocol", {{"tau_grid", {{"begin", 0}}}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"r_sweep", {{"J", {1.0}}}}}), ConfigError);
}

TEST_CASE("wrong types and values are rejected") {
    CHECK_THROWS_AS(parse_config(json{{"n_phon", "three"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"n_phon", -1}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"preset", "lh2"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"plan", {{"frame", "diagonal"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"plan", {{"dt_fs", "fast"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"pulse", {{"depletion", 0.5}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"dimer", {{"mu_a", {1.0, 0.0}}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"dimer", {{"statistics", "boson"}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"protocol", {{"tau_grid", {{"step_fs", 0.0}}}}}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
}

TEST_CASE("automatic step and overrides") {
    const RunConfig c = parse_config(json{{"plan", {{"dt_fs", "auto"}, {"frame", "lab"}}},
                                          {"dimer", {{"J", -81.0}, {"statistics", "paulion"}}},
                                          {"protocol", {{"seed", 99}, {"N_orientations", 10}}}});
    CHECK(c.dt_fs == 0.0);
    CHECK(c.frame == Frame::lab);
    CHECK(c.dimer.J == -81.0);
    CHECK(c.dimer.eps_a == 15300.0);
    CHECK(c.dimer.statistics == ExcitonStatistics::paulion);
    CHECK(c.seed == 99u);
    CHECK(c.n_orientations == 10u);
    const ProtocolSettings s = c.protocol_settings();
    CHECK(s.params.J == -81.0);
    CHECK(s.plan.frame == Frame::lab);
}

TEST_CASE("configuration survives serialization") {
    const RunConfig c = parse_config(json{{"n_phon", 2},
                                          {"pulse", {{"sigma_t_fs", 80.0}, {"eta_cm", 12.5}}},
                                          {"chi_theory", {{"measure", "eigenstate"}}},
                                          {"pump_probe", {{"label", "-+"}, {"tau_fs", 1200.0}}},
                                          {"output", "runs/a"}});
    const json j = to_json(c);
    const RunConfig d = parse_config(j);
    CHECK(to_json(d) == j);
    CHECK(d.n_phon == 2);
    CHECK(d.eta_cm.value() == 12.5);
    CHECK(d.measure == BranchMeasure::eigenstate);
    CHECK(d.pair_label == "-+");
    CHECK(d.output == fs::path("runs/a"));

    const fs::path p = scratch("config.json");
    {
        std::ofstream out(p);
        out << j.dump(2);
    }
    CHECK(to_json(load_config(p)) == j);
    {
        std::ofstream out(p);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_config(p), ConfigError);
}

TEST_CASE("a blank preset starts from neutral parameters") {
    const RunConfig c = parse_config(json{{"preset", "none"}, {"dimer", {{"eps_a", 15000.0}, {"eps_b", 15100.0}}}});
    CHECK(c.dimer.g_a == 0.0);
    CHECK(c.dimer.J == 0.0);
    CHECK(c.dimer.eps_b == 15100.0);
    CHECK_THROWS_AS(parse_config(json{{"preset", "none"}}), ConfigError);
}
