#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "arl/ambiguity.hpp"
#include "arl/harness.hpp"

namespace arl {

// ---------------------------------------------------------------------------
// Arrival patterns
// ---------------------------------------------------------------------------

namespace {

long pattern_total(double alpha, double beta, int horizon, std::vector<int>* out = nullptr) {
    long total = 0;
    for (int t = 0; t < horizon; ++t) {
        const double n = std::ceil(alpha * std::exp(beta * t));
        const long ni = static_cast<long>(std::max(1.0, n));
        if (out) (*out)[static_cast<std::size_t>(t)] = static_cast<int>(ni);
        total += ni;
    }
    return total;
}

}  // namespace

std::vector<int> arrival_pattern(long total_traffic, double beta, int horizon) {
    if (horizon < 1) throw ConfigError("horizon must be positive");
    if (total_traffic < horizon) {
        throw ConfigError("total traffic " + std::to_string(total_traffic) +
                          " is smaller than the horizon " + std::to_string(horizon));
    }
    if (!std::isfinite(beta)) throw ConfigError("beta must be finite");

    // The total is a nondecreasing step function of alpha; bisect for the
    // largest alpha that still fits.
    double lo = 0.0;
    double hi = static_cast<double>(total_traffic);
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (pattern_total(mid, beta, horizon) <= total_traffic) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    std::vector<int> n(static_cast<std::size_t>(horizon));
    const long used = pattern_total(lo, beta, horizon, &n);

    std::size_t largest = 0;
    for (std::size_t t = 1; t < n.size(); ++t) {
        if (n[t] >= n[largest]) largest = t;
    }
    n[largest] += static_cast<int>(total_traffic - used);
    return n;
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

namespace {

const std::vector<double> kDiscounts{0, 15, 30, 45, 60};

ModelFamily linear_family(std::string name, std::vector<std::pair<double, double>> thetas) {
    ModelFamily f{std::move(name), DemandForm::Linear, 10.0, kDiscounts, {}};
    for (auto [a, b] : thetas) f.candidates.push_back({DemandForm::Linear, a, b});
    return f;
}

ModelFamily exponential_family(std::string name, std::vector<std::pair<double, double>> thetas) {
    ModelFamily f{std::move(name), DemandForm::Exponential, 30.0, kDiscounts, {}};
    for (auto [a, b] : thetas) f.candidates.push_back({DemandForm::Exponential, a, b});
    return f;
}

std::vector<ModelFamily> build_families() {
    return {
        // Non-crossing lines; rivals peak at 5.5 and 10.
        linear_family("L1", {{288, 20}, {270, 14}, {280, 25}, {300, 15}}),
        exponential_family("E1", {{5.7, 0.07}, {4.6, 0.04}, {5.45, 0.03125}, {5.5, 0.04}}),
        // Three curves through (10, 180); the fourth is separated there.
        linear_family("L2", {{310, 13}, {325, 19}, {630, 45}, {1080, 90}}),
        // Three curves through (30, exp(3.7)).
        exponential_family("E2", {{4.075, 0.0125}, {4.3, 0.04}, {5.5, 0.06}, {6.4, 0.09}}),
        // Truth and two rivals meet at 5.5.
        linear_family("L3", {{299, 25}, {216.5, 10}, {238.5, 14}, {90, 5}}),
        // Truth and two rivals meet at 21.
        exponential_family("E3", {{5.3, 0.05}, {4.88, 0.03}, {5.93, 0.08}, {4.6, 0.04}}),
    };
}

struct CalibrationTarget {
    Informativeness informativeness;
    // Range for every non-true dispersion, or for the two class averages.
    bool split = false;
    double lo = 0.0, hi = 100.0;
    double conservative_lo = 0.0, conservative_hi = 100.0;
    double other_lo = 0.0, other_hi = 100.0;
};

CalibrationTarget target_for(const std::string& name) {
    using I = Informativeness;
    if (name == "L1") return {I::Informative, false, 5, 18};
    if (name == "E1") return {I::Informative, false, 10, 35};
    if (name == "L2") return {I::PartiallyInformative, true, 0, 100, 3, 9, 14, 26};
    if (name == "E2") return {I::PartiallyInformative, true, 0, 100, 5, 15, 37, 57};
    if (name == "L3") return {I::PartiallyInformative, false, 17, 45};
    if (name == "E3") return {I::PartiallyInformative, false, 0, 25};
    throw ConfigError("no calibration target for family '" + name + "'");
}

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

}  // namespace

const std::vector<ModelFamily>& standard_families() {
    static const std::vector<ModelFamily> families = build_families();
    return families;
}

const ModelFamily& find_family(const std::string& name) {
    for (const auto& f : standard_families()) {
        if (f.name == name) return f;
    }
    throw ConfigError("unknown model family '" + name + "'");
}

std::string instance_label(const std::string& family, double sigma, long total_traffic,
                           double beta) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s-s%g-M%ld-b%+g", family.c_str(), sigma, total_traffic, beta);
    if (beta == 0.0) std::snprintf(buf, sizeof buf, "%s-s%g-M%ld-b0", family.c_str(), sigma, total_traffic);
    return buf;
}

Instance make_instance(const ModelFamily& family, double sigma, long total_traffic, double beta,
                       int horizon) {
    Instance inst;
    inst.label = instance_label(family.name, sigma, total_traffic, beta);
    inst.grid = PriceGrid::from_discounts(family.full_price, family.discounts);
    inst.candidates = family.candidates;
    inst.true_index = 0;
    inst.arrivals = arrival_pattern(total_traffic, beta, horizon);
    inst.noise = NoiseSpec{sigma, -100.0, 100.0};
    inst.validate();
    return inst;
}

std::vector<Instance> generate_battery(const BatterySpec& spec) {
    std::vector<Instance> out;
    out.reserve(spec.size());
    for (const auto& name : spec.families) {
        const ModelFamily& family = find_family(name);
        const CalibrationReport cal = check_family_calibration(family);
        if (!cal.passed) throw ConfigError("family " + name + " fails calibration: " + cal.detail);
        for (double sigma : spec.sigmas) {
            for (long m : spec.traffics) {
                for (double beta : spec.betas) {
                    out.push_back(make_instance(family, sigma, m, beta, spec.horizon));
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

std::string to_string(Informativeness value) {
    switch (value) {
        case Informativeness::Informative: return "informative";
        case Informativeness::PartiallyInformative: return "partially_informative";
        case Informativeness::Uninformative: return "uninformative";
    }
    return "unknown";
}

std::vector<Informativeness> classify_informativeness(const Instance& instance, double tol) {
    const std::size_t n = instance.num_candidates();
    std::vector<Informativeness> out;
    out.reserve(instance.grid.size());
    for (double p : instance.grid.prices()) {
        std::size_t pairs = 0;
        std::size_t separated = 0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                ++pairs;
                const double gap = std::abs(instance.candidates[a].mean_demand(p) -
                                            instance.candidates[b].mean_demand(p));
                if (gap > tol) ++separated;
            }
        }
        if (separated == pairs) {
            out.push_back(Informativeness::Informative);
        } else if (separated == 0) {
            out.push_back(Informativeness::Uninformative);
        } else {
            out.push_back(Informativeness::PartiallyInformative);
        }
    }
    return out;
}

Informativeness instance_informativeness(const Instance& instance, double tol) {
    const auto labels = classify_informativeness(instance, tol);
    auto all = [&](Informativeness v) {
        return std::all_of(labels.begin(), labels.end(), [&](Informativeness x) { return x == v; });
    };
    if (all(Informativeness::Informative)) return Informativeness::Informative;
    if (all(Informativeness::Uninformative)) return Informativeness::Uninformative;
    return Informativeness::PartiallyInformative;
}

double revenue_dispersion(const Instance& instance, std::size_t price) {
    const DemandModel& truth = instance.truth();
    const double best = truth.revenue_rate(instance.grid[greedy_price(instance, instance.true_index)]);
    return (1.0 - truth.revenue_rate(instance.grid[price]) / best) * 100.0;
}

bool is_conservative(const Instance& instance, std::size_t k) {
    const DemandModel& truth = instance.truth();
    for (double p : instance.grid.prices()) {
        if (instance.candidates.at(k).revenue_rate(p) > truth.revenue_rate(p)) return false;
    }
    return true;
}

CalibrationReport check_family_calibration(const ModelFamily& family) {
    CalibrationReport rep;
    rep.family = family.name;
    std::ostringstream why;

    CalibrationTarget target;
    try {
        target = target_for(family.name);
    } catch (const ConfigError& e) {
        rep.detail = e.what();
        return rep;
    }

    const double expected_full = family.form == DemandForm::Linear ? 10.0 : 30.0;
    if (family.candidates.size() != 4) why << "needs 4 candidates; ";
    if (family.full_price != expected_full) why << "full price must be " << expected_full << "; ";
    if (family.discounts != kDiscounts) why << "discounts must be {0,15,30,45,60}; ";
    for (const auto& m : family.candidates) {
        if (m.form != family.form) why << "mixed demand forms; ";
    }
    if (!why.str().empty()) {
        rep.detail = why.str();
        return rep;
    }

    // Any sigma and arrival pattern give the same dispersion structure.
    const Instance inst = make_instance(family, 15.0, 800, 0.0);
    rep.informativeness = instance_informativeness(inst);
    if (rep.informativeness != target.informativeness) {
        why << "informativeness is " << to_string(rep.informativeness) << ", expected "
            << to_string(target.informativeness) << "; ";
    }

    double cons_sum = 0, other_sum = 0;
    int cons_n = 0, other_n = 0;
    for (std::size_t k = 1; k < inst.num_candidates(); ++k) {
        const double d = revenue_dispersion(inst, greedy_price(inst, k));
        rep.dispersions.push_back(d);
        if (!target.split && (d < target.lo || d > target.hi)) {
            why << "candidate " << k << " dispersion " << format_number(d) << " outside ["
                << target.lo << "," << target.hi << "]; ";
        }
        if (is_conservative(inst, k)) {
            cons_sum += d;
            ++cons_n;
        } else {
            other_sum += d;
            ++other_n;
        }
    }
    rep.conservative_average = cons_n ? cons_sum / cons_n : 0.0;
    rep.other_average = other_n ? other_sum / other_n : 0.0;
    if (target.split) {
        if (cons_n == 0 || other_n == 0) why << "needs conservative and other candidates; ";
        if (rep.conservative_average < target.conservative_lo ||
            rep.conservative_average > target.conservative_hi) {
            why << "conservative average " << format_number(rep.conservative_average)
                << " outside [" << target.conservative_lo << "," << target.conservative_hi << "]; ";
        }
        if (rep.other_average < target.other_lo || rep.other_average > target.other_hi) {
            why << "other average " << format_number(rep.other_average) << " outside ["
                << target.other_lo << "," << target.other_hi << "]; ";
        }
    }
    if (family.name == "L2") {
        // Optima at discounts {0, 15, 30, 45}, three curves meeting at full
        // price, and the published candidate (325, 19).
        std::vector<double> optima;
        for (std::size_t k = 0; k < inst.num_candidates(); ++k) {
            optima.push_back(inst.grid.discounts()[greedy_price(inst, k)]);
        }
        std::sort(optima.begin(), optima.end());
        if (optima != std::vector<double>{0, 15, 30, 45}) why << "optima must sit at discounts 0/15/30/45; ";
        const DemandModel published{DemandForm::Linear, 325, 19};
        if (std::find(inst.candidates.begin(), inst.candidates.end(), published) == inst.candidates.end()) {
            why << "must contain (325,19); ";
        }
        const std::size_t full = inst.grid.size() - 1;
        if (classify_informativeness(inst)[full] != Informativeness::PartiallyInformative) {
            why << "full price must be partially informative; ";
        }
    }
    rep.detail = why.str();
    rep.passed = rep.detail.empty();
    return rep;
}

// ---------------------------------------------------------------------------
// UCB cross-validation
// ---------------------------------------------------------------------------

std::vector<double> default_ucb_lambdas() {
    std::vector<double> out;
    for (int e = -6; e <= 6; ++e) out.push_back(std::pow(10.0, e));
    return out;
}

CrossValidationResult cross_validate_ucb_lambda(const Instance& instance,
                                                const std::vector<double>& lambdas,
                                                std::size_t n_cv, std::uint64_t seed,
                                                unsigned threads) {
    if (lambdas.empty()) throw ConfigError("cross-validation needs at least one lambda");
    if (n_cv < 2) throw ConfigError("cross-validation needs at least two trajectories");
    SimulationOptions opts;
    opts.threads = threads;

    CrossValidationResult res;
    double best_value = -std::numeric_limits<double>::infinity();
    res.lambda = lambdas.front();
    for (double lambda : lambdas) {
        const auto runs = simulate_samples(instance, {PolicyKind::UCB, lambda}, n_cv, seed, opts,
                                           kCrossValidationRole);
        double sum = 0.0;
        for (const auto& s : runs) sum += s.expected_revenue;
        const double mean = sum / static_cast<double>(n_cv);
        res.mean_ci_r.push_back(mean);
        if (mean > best_value || (mean == best_value && lambda < res.lambda)) {
            best_value = mean;
            res.lambda = lambda;
        }
    }
    return res;
}

}  // namespace arl
