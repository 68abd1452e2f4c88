#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "arl/ambiguity.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace arl;

namespace {

/// Tracker that has seen a single period with the given per-candidate xi
/// values, N arrivals and a realized total of 100 N.
AmbiguityTracker tracker_with_xi(const std::vector<double>& xi, int n, long total_traffic,
                                 int horizon, ThresholdMode mode = SimplifiedThreshold{}) {
    AmbiguityTracker tr(xi.size(), total_traffic, horizon, mode);
    const double realized = 100.0 * n;
    std::vector<double> means;
    for (double x : xi) means.push_back((realized + x * n) / n);
    tr.update(means, n, realized);
    return tr;
}

}  // namespace

TEST_CASE("tracker recursion hand case") {
    AmbiguityTracker tr(1, 10, 2);
    const double means[] = {5.0};
    tr.update(means, 2, 4.0 + 3.0);
    CHECK(tr.chi(0) == doctest::Approx(3.0));
    CHECK(tr.xi(0) == doctest::Approx(1.5));
    CHECK(tr.cum_arrivals() == 2);
    CHECK(tr.period() == 2);
}

TEST_CASE("tracker leaves a perfectly matched candidate unchanged") {
    AmbiguityTracker tr(2, 100, 4);
    const double m1[] = {10.0, 12.0};
    tr.update(m1, 5, 48.0);
    const double chi1 = tr.chi(1);
    const double m2[] = {11.0, 9.0};
    tr.update(m2, 4, 36.0);
    CHECK(tr.chi(1) == doctest::Approx(chi1));
}

TEST_CASE("tracker rejects malformed updates") {
    AmbiguityTracker tr(3, 100, 4);
    const double two[] = {1.0, 2.0};
    CHECK_THROWS(tr.update(two, 5, 10.0));
    const double three[] = {1.0, 2.0, 3.0};
    CHECK_THROWS(tr.update(three, 0, 10.0));
    CHECK_THROWS_AS(tr.xi(0), std::logic_error);
}

TEST_CASE("xi incremental equals batch recomputation") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> mean(0.0, 300.0);
    std::uniform_real_distribution<double> noise(-50.0, 50.0);
    std::uniform_int_distribution<int> arrivals(1, 400);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t k = 4;
        AmbiguityTracker tr(k, 3200, 8);
        std::vector<double> batch(k, 0.0);
        long cum = 0;
        for (int t = 0; t < 8; ++t) {
            std::vector<double> means(k);
            for (auto& m : means) m = mean(gen);
            const int n = arrivals(gen);
            const double total = means[0] * n + noise(gen) * std::sqrt(static_cast<double>(n));
            tr.update(means, n, total);
            cum += n;
            for (std::size_t j = 0; j < k; ++j) batch[j] += means[j] * n - total;
            for (std::size_t j = 0; j < k; ++j) {
                const double ref = std::abs(batch[j]) / static_cast<double>(cum);
                const double rel = std::abs(tr.xi(j) - ref) / std::max(ref, 1e-300);
                if (ref > 0) worst = std::max(worst, rel);
                CHECK(tr.xi(j) >= 0.0);
            }
        }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("psi") {
    CHECK(psi(2, 1, 0) == doctest::Approx(0.5));
    CHECK(psi(4, 1, 2) == doctest::Approx(0.5));
    CHECK(psi(1e-8, 1, 1) < 1e-8);
}

TEST_CASE("full threshold") {
    // v = 1, b = 0 and 2 M T Psi = e give sqrt(2 * 1)/sqrt(2) = 1.
    const double c = 2.0 * std::sqrt(std::exp(1.0)) * (1 + 1e-12);
    CHECK(phi_full(2, 1, 1, 1.0, 0.0, c) == doctest::Approx(1.0).epsilon(1e-9));

    const double log_term = std::log(2.0 * 800 * 8 * psi(33, 15, 0));
    CHECK(phi_full(100, 800, 8, 15, 0, 33) ==
          doctest::Approx(std::sqrt(2.0 * 225 * log_term) / 10.0));

    CHECK_THROWS_AS(phi_full(10, 10, 2, 15, 0, 0.01), AssumptionViolation);
    CHECK_THROWS_AS(phi_full(0, 800, 8, 15, 0, 33), std::logic_error);

    double prev = std::numeric_limits<double>::infinity();
    for (long n = 1; n <= 3200; ++n) {
        const double phi = phi_full(n, 3200, 8, 15, 3, 33);
        CHECK(phi < prev);
        prev = phi;
    }
}

TEST_CASE("simplified threshold") {
    CHECK(phi_simplified(100, 400) == doctest::Approx(1.19829).epsilon(1e-5));
    CHECK(phi_simplified(400, 400) == doctest::Approx(phi_simplified(100, 400) / 2));
    double prev = std::numeric_limits<double>::infinity();
    for (long n = 1; n <= 3200; ++n) {
        const double phi = phi_simplified(n, 3200);
        CHECK(phi < prev);
        prev = phi;
    }
    CHECK_THROWS_AS(phi_simplified(0, 400), std::logic_error);
}

TEST_CASE("build_set hand cases") {
    SUBCASE("first period is the full set") {
        AmbiguityTracker tr(4, 800, 8);
        CHECK(build_set(tr) == CandidateSet::full(4));
    }
    SUBCASE("threshold near one eliminates the distant candidate") {
        auto tr = tracker_with_xi({0.1, 5.0}, 144, 400, 8);
        REQUIRE(tr.threshold() == doctest::Approx(1.0).epsilon(0.01));
        CHECK(build_set(tr) == CandidateSet::singleton(0));
    }
    SUBCASE("no elimination when every xi is within the threshold") {
        auto tr = tracker_with_xi({0.1, 0.2, 0.5}, 144, 400, 8);
        CHECK(build_set(tr) == CandidateSet::full(3));
    }
    SUBCASE("the best estimate survives even above the threshold") {
        auto tr = tracker_with_xi({7.0, 5.0, 9.0}, 144, 400, 8);
        CHECK(build_set(tr) == CandidateSet::singleton(1));
    }
    SUBCASE("argmin ties go to the lowest index") {
        auto tr = tracker_with_xi({6.0, 5.0, 5.0}, 144, 400, 8);
        CHECK(tr.best_estimate() == 1);
        CHECK(build_set(tr) == CandidateSet::singleton(1));
    }
}

TEST_CASE("identification period scan") {
    const std::vector<int> flat(8, 10);  // M = 80, T = 8
    // Psi = 0.25: required data log(320)/0.25 = 23.07, first reached with 30 at t = 4.
    CHECK(identification_period(flat, 1.0, 0.0, std::sqrt(2.0)) == 4);
    CHECK(arrivals_before_identification(flat, 1.0, 0.0, std::sqrt(2.0)) == 30);
    // Psi = 0.003: required data exceeds M.
    CHECK(identification_period(flat, 1.0, 0.0, std::sqrt(0.024)) == 9);
    CHECK(arrivals_before_identification(flat, 1.0, 0.0, std::sqrt(0.024)) == 80);
    // Psi = 2: required data below N_1.
    CHECK(identification_period(flat, 1.0, 0.0, 4.0) == 2);
    CHECK_THROWS_AS(identification_period(flat, 1.0, 0.0, 1e-3), AssumptionViolation);
}

TEST_CASE("separation constants") {
    SUBCASE("constant gap") {
        const auto inst = test::linear_instance({{325, 19}, {320, 19}}, {10, 10});
        const auto sc = separation_constants(inst);
        CHECK(sc.c == doctest::Approx(5.0));
        CHECK(sc.mean_distance[1] == doctest::Approx(5.0));
        CHECK(sc.revenue_distance[1] == doctest::Approx(20.0));
        CHECK(sc.K1 == doctest::Approx(393.75));
    }
    SUBCASE("single candidate") {
        const auto inst = test::linear_instance({{325, 19}}, {10, 10});
        const auto sc = separation_constants(inst);
        CHECK(std::isinf(sc.c));
        CHECK(sc.K0 == 0.0);
        CHECK(sc.order.empty());
    }
    SUBCASE("sign change is reported") {
        // Crosses the truth between 4 and 5.5.
        const auto inst = test::linear_instance({{325, 19}, {345, 23}}, {10, 10});
        const auto report = analyze_separation(inst);
        CHECK_FALSE(report.separable());
        CHECK_THROWS_AS(separation_constants(inst), SeparabilityViolation);
    }
    SUBCASE("meeting at a grid price is reported") {
        const auto inst = test::linear_instance({{310, 13}, {630, 45}}, {10, 10});
        const auto report = analyze_separation(inst);
        REQUIRE(report.issues.size() == 1);
        CHECK(inst.grid[report.issues[0].price_index] == 10.0);
        CHECK(report.issues[0].gap == 0.0);
    }
    SUBCASE("K0 and ordering") {
        const auto inst = test::linear_instance({{325, 19}, {300, 21}, {330, 19}, {280, 19}}, {10});
        const auto sc = separation_constants(inst);
        CHECK(sc.c == doctest::Approx(5.0));
        CHECK(sc.order == std::vector<std::size_t>{2, 1, 3});
        double k0 = 0;
        for (std::size_t k = 1; k < 4; ++k) {
            for (double p : inst.grid.prices()) {
                k0 = std::max(k0, std::abs(inst.truth().revenue_rate(p) -
                                           inst.candidates[k].revenue_rate(p)));
            }
        }
        CHECK(sc.K0 == doctest::Approx(k0));
    }
}

TEST_CASE("bounding sets") {
    const auto inst = test::linear_instance({{325, 19}, {300, 21}, {330, 19}, {280, 19}},
                                            std::vector<int>(8, 100));
    const auto sc = separation_constants(inst);

    SUBCASE("nested and collapsing with enough data") {
        const auto sets = bounding_sets(inst.arrivals, sc, 4, 1.0, 0.0);
        REQUIRE(sets.size() == 8);
        CHECK(sets[0] == CandidateSet::full(4));
        for (std::size_t t = 1; t < sets.size(); ++t) {
            CHECK(sets[t].subset_of(sets[t - 1]));
            CHECK(sets[t].contains(0));
        }
        CHECK(sets.back() == CandidateSet::singleton(0));
        // Closest rival needs log(2 M T Psi(5)) / Psi(5) = 3.4 arrivals: gone at t = 2.
        CHECK(sets[1] == CandidateSet::singleton(0));
    }
    SUBCASE("no data threshold reached") {
        const auto close = test::linear_instance({{325, 19}, {330, 19}}, std::vector<int>(8, 10));
        // Needs 207 arrivals against M = 80.
        const auto sets = bounding_sets(close.arrivals, separation_constants(close), 2, 15.0, 0.0);
        for (const auto& s : sets) CHECK(s == CandidateSet::full(2));
    }
    SUBCASE("partial elimination keeps the closest rival") {
        // Required data at v = 15: 373 for the closest rival, 8.6 and 4.6 for the others.
        const auto sets = bounding_sets(inst.arrivals, sc, 4, 15.0, 0.0);
        for (std::size_t t = 1; t < sets.size(); ++t) {
            CHECK(sets[t].subset_of(sets[t - 1]));
        }
        CandidateSet keep_one = CandidateSet::singleton(0);
        keep_one.insert(2);
        CHECK(sets[1] == keep_one);
        CHECK(sets[3] == keep_one);
        CHECK(sets[4] == CandidateSet::singleton(0));
    }
    SUBCASE("revenue basis") {
        const auto sets = bounding_sets(inst.arrivals, sc, 4, 15.0, 0.0, DistanceBasis::Revenue);
        for (std::size_t t = 1; t < sets.size(); ++t) CHECK(sets[t].contains(0));
        CHECK(sets.back() == CandidateSet::singleton(0));
    }
}

TEST_CASE("candidate set bitmask") {
    auto s = CandidateSet::full(4);
    CHECK(s.size() == 4);
    s.erase(2);
    CHECK_FALSE(s.contains(2));
    CHECK(s.indices() == std::vector<std::size_t>{0, 1, 3});
    CHECK(CandidateSet::singleton(1).subset_of(s));
    CHECK(CandidateSet::full(64).size() == 64);
}
