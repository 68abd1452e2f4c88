#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "arl/harness.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace arl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("arl_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "arlsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("arrival patterns") {
    CHECK(arrival_pattern(80, 0, 8) == std::vector<int>(8, 10));
    for (long m : {80L, 400L, 800L, 1200L, 1600L, 3200L}) {
        for (double beta : {0.0, 1.5, 2.0, -1.5, -2.0}) {
            CAPTURE(m);
            CAPTURE(beta);
            const auto n = arrival_pattern(m, beta, 8);
            REQUIRE(n.size() == 8);
            CHECK(std::accumulate(n.begin(), n.end(), 0L) == m);
            CHECK(*std::min_element(n.begin(), n.end()) >= 1);
            if (beta > 0) CHECK(std::is_sorted(n.begin(), n.end()));
            if (beta < 0) CHECK(std::is_sorted(n.rbegin(), n.rend()));
        }
    }
    CHECK(arrival_pattern(400, 1.5, 8) == std::vector<int>{1, 1, 1, 1, 4, 16, 69, 307});
    CHECK_THROWS_AS(arrival_pattern(7, 0, 8), ConfigError);
}

TEST_CASE("battery") {
    const auto battery = generate_battery();
    CHECK(battery.size() == 1080);
    CHECK(BatterySpec{}.size() == 1080);
    std::set<std::string> labels;
    for (const auto& inst : battery) {
        labels.insert(inst.label);
        CHECK(inst.num_candidates() == 4);
        CHECK(inst.horizon() == 8);
        const auto star = price_star_set(inst);
        CHECK(star.size() >= 1);
        CHECK(star.size() <= 4);
        const double lo = inst.truth().form == DemandForm::Linear ? 4.0 : 12.0;
        const double hi = inst.truth().form == DemandForm::Linear ? 10.0 : 30.0;
        CHECK(inst.grid[0] == doctest::Approx(lo));
        CHECK(inst.grid[4] == doctest::Approx(hi));
    }
    CHECK(labels.size() == 1080);
    CHECK(instance_label("L1", 15, 400, 1.5) == "L1-s15-M400-b+1.5");
    CHECK(instance_label("E2", 5, 80, 0) == "E2-s5-M80-b0");

    const auto again = generate_battery();
    for (std::size_t i = 0; i < battery.size(); i += 97) {
        CHECK(instance_to_json(battery[i]) == instance_to_json(again[i]));
    }
}

TEST_CASE("informativeness") {
    const auto same = test::linear_instance({{325, 19}, {325, 19}}, {10});
    for (auto v : classify_informativeness(same)) CHECK(v == Informativeness::Uninformative);
    CHECK(instance_informativeness(same) == Informativeness::Uninformative);

    const auto apart = test::linear_instance({{325, 19}, {300, 19}, {280, 19}}, {10});
    CHECK(instance_informativeness(apart) == Informativeness::Informative);

    const auto l2 = make_instance(find_family("L2"), 15, 800, 0);
    const auto labels = classify_informativeness(l2);
    CHECK(labels[l2.grid.index_of(10.0)] == Informativeness::PartiallyInformative);
    CHECK(instance_informativeness(l2) == Informativeness::PartiallyInformative);
    CHECK(instance_informativeness(make_instance(find_family("L1"), 15, 800, 0)) ==
          Informativeness::Informative);
    CHECK(instance_informativeness(make_instance(find_family("E1"), 15, 800, 0)) ==
          Informativeness::Informative);
}

TEST_CASE("revenue dispersion") {
    const auto inst = test::linear_instance({{325, 19}, {300, 21}}, {10});
    CHECK(revenue_dispersion(inst, ci_price(inst)) == 0.0);
    // r(4) = 996 against 1389.75.
    CHECK(revenue_dispersion(inst, 0) == doctest::Approx((1 - 996 / 1389.75) * 100));

    // Truth 2 - 0 p on {1, 2}: r(1) is half of r(2).
    Instance half = inst;
    half.grid = PriceGrid::from_prices({1.0, 2.0});
    half.candidates = {{DemandForm::Linear, 2, 0}, {DemandForm::Linear, 3, 1}};
    CHECK(revenue_dispersion(half, 1) == 0.0);
    CHECK(revenue_dispersion(half, 0) == doctest::Approx(50.0));
}

TEST_CASE("family calibration") {
    for (const auto& f : standard_families()) {
        const auto rep = check_family_calibration(f);
        CAPTURE(rep.detail);
        CHECK(rep.passed);
        CHECK(f.candidates.size() == 4);
        if (f.name == "L1") {
            for (double d : rep.dispersions) {
                CHECK(d >= 5);
                CHECK(d <= 18);
            }
        }
        if (f.name == "L3") {
            for (double d : rep.dispersions) {
                CHECK(d >= 17);
                CHECK(d <= 45);
            }
        }
    }
    const auto& l2 = find_family("L2");
    CHECK(std::find(l2.candidates.begin(), l2.candidates.end(),
                    DemandModel{DemandForm::Linear, 325, 19}) != l2.candidates.end());
    CHECK_THROWS_AS(find_family("Q9"), ConfigError);
}

TEST_CASE("ucb weight cross-validation") {
    const auto inst = make_instance(find_family("L1"), 15, 800, 1.5);
    const auto single = cross_validate_ucb_lambda(inst, {3.0}, 20, 1);
    CHECK(single.lambda == 3.0);

    const auto a = cross_validate_ucb_lambda(inst, default_ucb_lambdas(), 40, 77);
    const auto b = cross_validate_ucb_lambda(inst, default_ucb_lambdas(), 40, 77, 3);
    CHECK(a.lambda == b.lambda);
    CHECK(a.mean_ci_r == b.mean_ci_r);
    CHECK(default_ucb_lambdas().size() == 13);

    // Noiseless demand and flat arrivals: greedy play is optimal and every small lambda ties.
    const auto quiet =
        test::linear_instance({{325, 19}, {288, 20}, {300, 15}}, std::vector<int>(8, 100), 1e-9);
    const auto q = cross_validate_ucb_lambda(quiet, default_ucb_lambdas(), 20, 5);
    CHECK(q.lambda == 1e-6);
}

TEST_CASE("instance json round trip") {
    const auto inst = make_instance(find_family("E3"), 60, 1600, -2);
    const auto back = instance_from_json(instance_to_json(inst));
    CHECK(back.label == inst.label);
    CHECK(back.candidates == inst.candidates);
    CHECK(back.arrivals == inst.arrivals);
    CHECK(back.noise.sigma == inst.noise.sigma);
    for (std::size_t i = 0; i < inst.grid.size(); ++i) CHECK(back.grid[i] == inst.grid[i]);
    CHECK(instance_to_json(back) == instance_to_json(inst));

    CHECK_THROWS_AS(instance_from_json("{"), ConfigError);
    CHECK_THROWS_AS(instance_from_json(R"({"form":"linear"})"), ConfigError);
}

TEST_CASE("metrics csv") {
    MetricReport r;
    r.instance_label = "L1-s15-M800-b0";
    r.policy = {PolicyKind::ARLPlus};
    r.n_trajectories = 10;
    r.master_seed = 42;
    r.ci_r = 1.5;
    std::istringstream in(metrics_csv_header() + "\n" + metrics_csv_row(r) + "\n");
    const auto table = read_csv(in);
    CHECK(table.header == metrics_columns());
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0][1] == "arl_plus");
    CHECK(table.rows[0][4] == "1.5");
    CHECK(metrics_csv_header() ==
          "instance_label,policy,n_trajectories,master_seed,ci_r,ci_r_star,expected_gap_pct,"
          "gap_se,rvar_pct,arl_r,regret,regret_bound,assessment_error");
}

TEST_CASE("quantiles") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> v(static_cast<std::size_t>(rep + 1));
        for (auto& x : v) x = u(gen);
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        const auto s = summarize(v);
        auto oracle = [&](double q) {
            const double pos = q * static_cast<double>(sorted.size() - 1);
            const auto lo = static_cast<std::size_t>(pos);
            const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
            return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
        };
        CHECK(s.min == sorted.front());
        CHECK(s.max == sorted.back());
        CHECK(s.median == doctest::Approx(oracle(0.5)));
        CHECK(s.q1 == doctest::Approx(oracle(0.25)));
        CHECK(s.q3 == doctest::Approx(oracle(0.75)));
    }
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
}

TEST_CASE("command line") {
    const auto dir = scratch_dir("cli");
    const std::string inst_dir = (dir / "instances").string();

    CHECK(cli({"generate", "--out", inst_dir, "--families", "L1,L2"}) == kExitOk);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(inst_dir)) ++files;
    CHECK(files == 360);

    const std::string one = inst_dir + "/L1-s15-M800-b0.json";
    const std::string partial = inst_dir + "/L2-s15-M800-b0.json";
    REQUIRE(fs::exists(one));

    SUBCASE("run is reproducible") {
        const std::string a = (dir / "a").string(), b = (dir / "b").string();
        CHECK(cli({"run", "--instances", one, "--seed", "5", "--trajectories", "40", "--out", a}) == kExitOk);
        CHECK(cli({"run", "--instances", one, "--seed", "5", "--trajectories", "40", "--out", b}) == kExitOk);
        CHECK(slurp(fs::path(a) / "metrics.csv") == slurp(fs::path(b) / "metrics.csv"));
        CHECK(cli({"run", "--instances", one, "--seed", "5", "--trajectories", "40", "--format",
                   "json", "--policies", "arl,ucb:2", "--out", a}) == kExitOk);
        CHECK(fs::exists(fs::path(a) / "metrics.json"));

        CHECK(cli({"report", "--metrics", a + "/metrics.csv", "--out", a}) == kExitOk);
        std::ifstream in(fs::path(a) / "summary.csv");
        const auto table = read_csv(in);
        CHECK(table.header.front() == "group");
        CHECK(!table.rows.empty());
    }
    SUBCASE("exit codes") {
        CHECK(cli({"run", "--instances", one, "--trajectories", "10", "--out", (dir / "x").string()}) ==
              kExitConfigError);
        CHECK(cli({"run", "--instances", (dir / "missing*.json").string(), "--seed", "1"}) ==
              kExitConfigError);
        CHECK(cli({"run", "--instances", one, "--seed", "1", "--policies", "nope"}) == kExitConfigError);
        CHECK(cli({"verify", "--instances", partial, "--seed", "1", "--trajectories", "20"}) ==
              kExitAssumptionViolation);
        CHECK(cli({"verify", "--instances", one, "--seed", "1", "--trajectories", "20",
                   "--threshold", "full:15,0,0.0001"}) == kExitAssumptionViolation);
        CHECK(cli({"bogus"}) == kExitConfigError);
    }
    SUBCASE("report matches a sort oracle") {
        const fs::path csv = dir / "synthetic.csv";
        std::vector<double> gaps{4, 1, 3, 2, 8};
        {
            std::ofstream out(csv);
            out << metrics_csv_header() << "\n";
            for (std::size_t i = 0; i < gaps.size(); ++i) {
                out << "L1-s" << i << "-M80-b0,arl,10,1,1,1," << gaps[i] << ",0,0,0,0,0,0\n";
            }
        }
        CHECK(cli({"report", "--metrics", csv.string(), "--out", dir.string()}) == kExitOk);
        std::ifstream in(dir / "summary.csv");
        const auto table = read_csv(in);
        bool found = false;
        for (const auto& row : table.rows) {
            if (row[0] == "all" && row[1] == "arl" && row[2] == "expected_gap_pct") {
                found = true;
                CHECK(std::stod(row[4]) == 1);
                CHECK(std::stod(row[5]) == 2);
                CHECK(std::stod(row[6]) == 3);
                CHECK(std::stod(row[7]) == 4);
                CHECK(std::stod(row[8]) == 8);
                CHECK(std::stod(row[9]) == doctest::Approx(3.6));
            }
        }
        CHECK(found);
    }
}
