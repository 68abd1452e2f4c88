#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "arl/demand.hpp"

namespace arl {

/// A parameter combination breaks the concentration-threshold requirement
/// 2 M T Psi(c) >= e, or a guarantee checker was asked to run outside its
/// hypotheses.
class AssumptionViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Some non-true candidate's mean-demand gap to the truth changes sign or
/// vanishes on the grid.
class SeparabilityViolation : public AssumptionViolation {
public:
    using AssumptionViolation::AssumptionViolation;
};

/// Subset of candidate indices, stored as a bitmask (at most kMaxCandidates).
class CandidateSet {
public:
    constexpr CandidateSet() = default;
    constexpr explicit CandidateSet(std::uint64_t mask) : mask_(mask) {}

    static constexpr CandidateSet full(std::size_t n) {
        return CandidateSet(n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
    }
    static constexpr CandidateSet singleton(std::size_t k) { return CandidateSet(std::uint64_t{1} << k); }

    constexpr bool contains(std::size_t k) const { return (mask_ >> k) & 1U; }
    constexpr void insert(std::size_t k) { mask_ |= (std::uint64_t{1} << k); }
    constexpr void erase(std::size_t k) { mask_ &= ~(std::uint64_t{1} << k); }
    constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask_)); }
    constexpr bool empty() const { return mask_ == 0; }
    constexpr std::uint64_t mask() const { return mask_; }
    constexpr bool subset_of(CandidateSet other) const { return (mask_ & ~other.mask_) == 0; }

    std::vector<std::size_t> indices() const;

    friend constexpr bool operator==(CandidateSet, CandidateSet) = default;

private:
    std::uint64_t mask_ = 0;
};

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

/// Psi(c) = min{c^2 / (8 v^2), c / (4 b)}; the second term is dropped when b = 0.
double psi(double c, double v, double b);

/// log(2 M T Psi(c)); throws AssumptionViolation when 2 M T Psi(c) < e.
double concentration_log(long total_traffic, int horizon, double psi_value);

/// Threshold in its general form. Requires cum_arrivals >= 1.
double phi_full(long cum_arrivals, long total_traffic, int horizon, double v, double b, double c);

/// 2 log(M) / sqrt(cum_arrivals), valid when b = 0.
double phi_simplified(long cum_arrivals, long total_traffic);

struct FullThreshold {
    double v = 1.0;
    double b = 0.0;
    double c = 1.0;
};
struct SimplifiedThreshold {};

using ThresholdMode = std::variant<SimplifiedThreshold, FullThreshold>;

std::string describe(const ThresholdMode& mode);

// ---------------------------------------------------------------------------
// Tracker
// ---------------------------------------------------------------------------

/// Running first-moment statistics for every candidate along one trajectory.
///
/// chi(k) accumulates  mu(p_j; theta_k) N_j - sum_i d_ji  over past periods
/// and xi(k) = |chi(k)| / sum_j N_j measures how far the empirical average
/// is from candidate k's mean. period() is the upcoming period t (starts at 1).
class AmbiguityTracker {
public:
    AmbiguityTracker(std::size_t num_candidates, long total_traffic, int horizon,
                     ThresholdMode mode = SimplifiedThreshold{});

    /// Folds in one observed period: the candidates' means at the price played,
    /// the number of arrivals, and the realized total demand.
    void update(std::span<const double> model_means, int arrivals, double realized_total);

    std::size_t num_candidates() const noexcept { return chi_.size(); }
    int period() const noexcept { return period_; }
    long cum_arrivals() const noexcept { return cum_arrivals_; }
    long total_traffic() const noexcept { return total_traffic_; }
    int horizon() const noexcept { return horizon_; }
    const ThresholdMode& mode() const noexcept { return mode_; }

    double chi(std::size_t k) const { return chi_.at(k); }
    /// Throws std::logic_error before any data has been observed.
    double xi(std::size_t k) const;
    /// Current elimination threshold; requires cum_arrivals() > 0.
    double threshold() const;
    /// argmin_k xi(k), lowest index on ties. Requires cum_arrivals() > 0.
    std::size_t best_estimate() const;

private:
    std::vector<double> chi_;
    long cum_arrivals_ = 0;
    int period_ = 1;
    long total_traffic_;
    int horizon_;
    ThresholdMode mode_;
};

/// The self-adapting ambiguity set: all candidates at t = 1, afterwards the
/// candidates within the threshold plus the best estimate.
CandidateSet build_set(const AmbiguityTracker& tracker);

// ---------------------------------------------------------------------------
// Separation constants and identification
// ---------------------------------------------------------------------------

struct SeparationConstants {
    std::size_t true_index = 0;
    /// Mean-demand separability: min over grid prices and non-true candidates of
    /// |mu(p; truth) - mu(p; theta)|. +inf when there are no rivals.
    double c = std::numeric_limits<double>::infinity();
    /// Per-candidate min over prices of |r(p; truth) - r(p; theta_k)|.
    /// Zero at the true index.
    std::vector<double> revenue_distance;
    /// Per-candidate min over prices of |mu(p; truth) - mu(p; theta_k)|.
    std::vector<double> mean_distance;
    /// Non-true candidates sorted by ascending revenue_distance (stable).
    std::vector<std::size_t> order;
    /// Max misidentification revenue gap |r(p; truth) - r(p; theta)|.
    double K0 = 0.0;
    /// Max true-revenue gap between two prices.
    double K1 = 0.0;
};

struct SeparabilityIssue {
    std::size_t candidate;
    std::size_t price_index;
    double gap;  // mu(p; truth) - mu(p; theta)
};

struct SeparationReport {
    SeparationConstants constants;
    /// Prices where some candidate's gap is zero or has the minority sign.
    std::vector<SeparabilityIssue> issues;
    bool separable() const noexcept { return issues.empty(); }
};

/// Computes the separation constants. Never throws on non-separable
/// instances; the issues list names the offending (candidate, price) pairs and
/// c is then the min over the remaining positive gaps.
SeparationReport analyze_separation(const Instance& instance);

/// As analyze_separation, but throws SeparabilityViolation when the instance
/// is not separable.
SeparationConstants separation_constants(const Instance& instance);

/// Demand identification period: first t in 2..T whose prior cumulative
/// arrivals reach log(2 M T Psi(c)) / Psi(c); T + 1 when none does.
int identification_period(std::span<const int> arrivals, double v, double b, double c);

/// Arrivals in periods before the identification period.
long arrivals_before_identification(std::span<const int> arrivals, double v, double b, double c);

enum class DistanceBasis { MeanDemand, Revenue };

/// Bounding sets for every period 1..T (index t-1). Candidates are dropped in
/// descending distance order as cumulative arrivals reach
/// log(2 M T Psi(c)) / Psi(distance).
std::vector<CandidateSet> bounding_sets(std::span<const int> arrivals,
                                        const SeparationConstants& separation,
                                        std::size_t num_candidates, double v, double b,
                                        DistanceBasis basis = DistanceBasis::MeanDemand);

}  // namespace arl
