#include "arl/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace arl {

namespace {
constexpr double kGapRoundoff = 1e-12;
}  // namespace

std::vector<std::size_t> CandidateSet::indices() const {
    std::vector<std::size_t> out;
    out.reserve(size());
    for (std::uint64_t m = mask_; m != 0; m &= m - 1) {
        out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

double psi(double c, double v, double b) {
    const double gaussian = c * c / (8.0 * v * v);
    if (b <= 0.0) return gaussian;
    return std::min(gaussian, c / (4.0 * b));
}

double concentration_log(long total_traffic, int horizon, double psi_value) {
    const double arg = 2.0 * static_cast<double>(total_traffic) * horizon * psi_value;
    if (!(arg >= std::exp(1.0))) {
        std::ostringstream msg;
        msg << "2 M T Psi(c) = " << arg << " is below e (M=" << total_traffic
            << ", T=" << horizon << ", Psi=" << psi_value << ")";
        throw AssumptionViolation(msg.str());
    }
    return std::log(arg);
}

double phi_full(long cum_arrivals, long total_traffic, int horizon, double v, double b, double c) {
    if (cum_arrivals < 1) throw std::logic_error("threshold undefined before any arrivals");
    const double log_term = concentration_log(total_traffic, horizon, psi(c, v, b));
    const double n = static_cast<double>(cum_arrivals);
    const double gaussian = std::sqrt(2.0 * v * v * log_term) / std::sqrt(n);
    const double exponential = 2.0 * b * log_term / n;
    return std::max(gaussian, exponential);
}

double phi_simplified(long cum_arrivals, long total_traffic) {
    if (cum_arrivals < 1) throw std::logic_error("threshold undefined before any arrivals");
    return 2.0 * std::log(static_cast<double>(total_traffic)) /
           std::sqrt(static_cast<double>(cum_arrivals));
}

std::string describe(const ThresholdMode& mode) {
    if (std::holds_alternative<SimplifiedThreshold>(mode)) return "simplified";
    const auto& f = std::get<FullThreshold>(mode);
    std::ostringstream out;
    out << "full(v=" << f.v << ",b=" << f.b << ",c=" << f.c << ")";
    return out.str();
}

// ---------------------------------------------------------------------------
// Tracker
// ---------------------------------------------------------------------------

AmbiguityTracker::AmbiguityTracker(std::size_t num_candidates, long total_traffic, int horizon,
                                   ThresholdMode mode)
    : chi_(num_candidates, 0.0),
      total_traffic_(total_traffic),
      horizon_(horizon),
      mode_(mode) {
    if (num_candidates == 0 || num_candidates > kMaxCandidates) {
        throw ConfigError("tracker needs between 1 and 64 candidates");
    }
    if (const auto* full = std::get_if<FullThreshold>(&mode_)) {
        // Fail at construction rather than at the first period.
        concentration_log(total_traffic_, horizon_, psi(full->c, full->v, full->b));
    }
}

void AmbiguityTracker::update(std::span<const double> model_means, int arrivals,
                              double realized_total) {
    if (model_means.size() != chi_.size()) {
        throw std::invalid_argument("model_means size does not match the candidate count");
    }
    if (arrivals < 1) throw std::invalid_argument("arrivals must be at least one");
    for (std::size_t k = 0; k < chi_.size(); ++k) {
        chi_[k] += model_means[k] * arrivals - realized_total;
    }
    cum_arrivals_ += arrivals;
    ++period_;
}

double AmbiguityTracker::xi(std::size_t k) const {
    if (cum_arrivals_ == 0) throw std::logic_error("xi undefined before any arrivals");
    return std::abs(chi_.at(k)) / static_cast<double>(cum_arrivals_);
}

double AmbiguityTracker::threshold() const {
    if (const auto* full = std::get_if<FullThreshold>(&mode_)) {
        return phi_full(cum_arrivals_, total_traffic_, horizon_, full->v, full->b, full->c);
    }
    return phi_simplified(cum_arrivals_, total_traffic_);
}

std::size_t AmbiguityTracker::best_estimate() const {
    std::size_t best = 0;
    double best_xi = xi(0);
    for (std::size_t k = 1; k < chi_.size(); ++k) {
        const double x = xi(k);
        if (x < best_xi) {
            best = k;
            best_xi = x;
        }
    }
    return best;
}

CandidateSet build_set(const AmbiguityTracker& tracker) {
    const std::size_t n = tracker.num_candidates();
    if (tracker.cum_arrivals() == 0) return CandidateSet::full(n);
    const double phi = tracker.threshold();
    CandidateSet set;
    for (std::size_t k = 0; k < n; ++k) {
        if (tracker.xi(k) <= phi) set.insert(k);
    }
    set.insert(tracker.best_estimate());
    return set;
}

// ---------------------------------------------------------------------------
// Separation constants
// ---------------------------------------------------------------------------

SeparationReport analyze_separation(const Instance& instance) {
    const auto& grid = instance.grid;
    const std::size_t n = instance.num_candidates();
    const std::size_t truth = instance.true_index;
    const DemandModel& true_model = instance.truth();

    SeparationReport report;
    SeparationConstants& sc = report.constants;
    sc.true_index = truth;
    sc.revenue_distance.assign(n, 0.0);
    sc.mean_distance.assign(n, 0.0);

    for (std::size_t k = 0; k < n; ++k) {
        if (k == truth) continue;
        const DemandModel& model = instance.candidates[k];
        double rev_min = std::numeric_limits<double>::infinity();
        double mean_min = std::numeric_limits<double>::infinity();
        int positive = 0;
        int negative = 0;
        std::vector<double> gaps(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double p = grid[i];
            const double mu0 = true_model.mean_demand(p);
            gaps[i] = mu0 - model.mean_demand(p);
            // Curves meeting at a grid price differ only by rounding there.
            if (std::abs(gaps[i]) <= kGapRoundoff * std::max(1.0, std::abs(mu0))) gaps[i] = 0.0;
            if (gaps[i] > 0.0) ++positive;
            if (gaps[i] < 0.0) ++negative;
            rev_min = std::min(rev_min, std::abs(true_model.revenue_rate(p) - model.revenue_rate(p)));
            mean_min = std::min(mean_min, std::abs(gaps[i]));
            sc.K0 = std::max(sc.K0, std::abs(true_model.revenue_rate(p) - model.revenue_rate(p)));
        }
        sc.revenue_distance[k] = rev_min;
        sc.mean_distance[k] = mean_min;

        // The majority sign is the intended branch; zero gaps and minority-sign
        // prices are reported.
        const bool keep_positive = positive >= negative;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const bool ok = keep_positive ? gaps[i] > 0.0 : gaps[i] < 0.0;
            if (!ok) {
                report.issues.push_back({k, i, gaps[i]});
            } else {
                sc.c = std::min(sc.c, std::abs(gaps[i]));
            }
        }
    }

    double r_max = -std::numeric_limits<double>::infinity();
    double r_min = std::numeric_limits<double>::infinity();
    for (double p : grid.prices()) {
        const double r = true_model.revenue_rate(p);
        r_max = std::max(r_max, r);
        r_min = std::min(r_min, r);
    }
    sc.K1 = r_max - r_min;

    for (std::size_t k = 0; k < n; ++k) {
        if (k != truth) sc.order.push_back(k);
    }
    std::stable_sort(sc.order.begin(), sc.order.end(), [&](std::size_t a, std::size_t b) {
        return sc.revenue_distance[a] < sc.revenue_distance[b];
    });
    return report;
}

SeparationConstants separation_constants(const Instance& instance) {
    SeparationReport report = analyze_separation(instance);
    if (!report.separable()) {
        std::ostringstream msg;
        msg << instance.label << ": mean-demand separability fails at";
        for (const auto& issue : report.issues) {
            msg << " (candidate " << issue.candidate << ", price "
                << instance.grid[issue.price_index] << ", gap " << issue.gap << ")";
        }
        throw SeparabilityViolation(msg.str());
    }
    return report.constants;
}

// ---------------------------------------------------------------------------
// Identification period and bounding sets
// ---------------------------------------------------------------------------

namespace {

long sum_arrivals(std::span<const int> arrivals) {
    return std::accumulate(arrivals.begin(), arrivals.end(), 0L);
}

}  // namespace

int identification_period(std::span<const int> arrivals, double v, double b, double c) {
    const long total = sum_arrivals(arrivals);
    const int horizon = static_cast<int>(arrivals.size());
    const double ps = psi(c, v, b);
    const double required = concentration_log(total, horizon, ps) / ps;
    long cum = 0;
    for (int t = 2; t <= horizon; ++t) {
        cum += arrivals[static_cast<std::size_t>(t - 2)];
        if (static_cast<double>(cum) >= required) return t;
    }
    return horizon + 1;
}

long arrivals_before_identification(std::span<const int> arrivals, double v, double b, double c) {
    const int t_tilde = identification_period(arrivals, v, b, c);
    long cum = 0;
    for (int j = 1; j < t_tilde && j <= static_cast<int>(arrivals.size()); ++j) {
        cum += arrivals[static_cast<std::size_t>(j - 1)];
    }
    return cum;
}

std::vector<CandidateSet> bounding_sets(std::span<const int> arrivals,
                                        const SeparationConstants& separation,
                                        std::size_t num_candidates, double v, double b,
                                        DistanceBasis basis) {
    const long total = sum_arrivals(arrivals);
    const int horizon = static_cast<int>(arrivals.size());
    const double log_term = concentration_log(total, horizon, psi(separation.c, v, b));

    const auto& distance = basis == DistanceBasis::MeanDemand ? separation.mean_distance
                                                              : separation.revenue_distance;
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < num_candidates; ++k) {
        if (k != separation.true_index) order.push_back(k);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c2) { return distance[a] < distance[c2]; });

    std::vector<CandidateSet> sets;
    sets.reserve(arrivals.size());
    sets.push_back(CandidateSet::full(num_candidates));
    long cum = 0;
    for (int t = 2; t <= horizon; ++t) {
        cum += arrivals[static_cast<std::size_t>(t - 2)];
        std::size_t i_star = order.size();  // sentinel: undefined
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (static_cast<double>(cum) >= log_term / psi(distance[order[i]], v, b)) {
                i_star = i;
                break;
            }
        }
        if (i_star == order.size()) {
            sets.push_back(sets.back());
            continue;
        }
        CandidateSet set = CandidateSet::singleton(separation.true_index);
        for (std::size_t i = 0; i < i_star; ++i) set.insert(order[i]);
        sets.push_back(set);
    }
    return sets;
}

}  // namespace arl
