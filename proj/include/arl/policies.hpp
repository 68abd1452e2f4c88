#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arl/ambiguity.hpp"
#include "arl/demand.hpp"
#include "arl/random.hpp"

namespace arl {

enum class PolicyKind { CI, SR, FTL, ARL, ARLPlus, UCB };

/// Policy kind plus its parameters. Only UCB has one: the exploration weight.
struct PolicySpec {
    PolicyKind kind = PolicyKind::ARL;
    double ucb_lambda = 0.0;

    friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

/// "ci", "sr", "ftl", "arl", "arl_plus", "ucb".
std::string to_string(PolicyKind kind);
/// Kind name, with "ucb:<lambda>" carrying the exploration weight.
std::string to_string(const PolicySpec& spec);
PolicyKind parse_policy_kind(const std::string& name);
/// Accepts "arl", "ucb:0.5", ... ; a bare "ucb" gets lambda = 0.
PolicySpec parse_policy(const std::string& text);

// ---------------------------------------------------------------------------
// Price rules. Prices are referred to by their grid index; every argmax
// resolves ties to the lowest price and every argmin to the lowest index.
// ---------------------------------------------------------------------------

/// argmax_p r(p; theta_k).
std::size_t greedy_price(const Instance& instance, std::size_t model, int period = 1);

/// argmax_p min_{k in set} r(p; theta_k).
std::size_t maxmin_price(const Instance& instance, CandidateSet set, int period = 1);

std::size_t ci_price(const Instance& instance, int period = 1);
std::size_t sr_price(const Instance& instance, int period = 1);
std::size_t arl_price(const Instance& instance, const AmbiguityTracker& tracker, int period);

/// FTL: greedy price of the best estimate (or of the prior draw at t = 1).
std::size_t ftl_price(const Instance& instance, const AmbiguityTracker& tracker,
                      std::size_t prior_draw, int period);

/// True when some member of `set` has a mean-demand gap above `tol` against
/// every other member at grid price `price`.
bool has_separated_member(const Instance& instance, CandidateSet set, std::size_t price,
                          double tol);

/// ARL+ price for a given ambiguity set: falls back from the robust price to
/// less conservative max-min prices while the conservative price cannot
/// discriminate between the members of `set`.
std::size_t arl_plus_price(const Instance& instance, CandidateSet set, int period,
                           double intersect_tol = 1e-9);

/// Set of revenue-maximizing prices over all candidates, ascending.
std::vector<std::size_t> price_star_set(const Instance& instance);

// ---------------------------------------------------------------------------
// Per-period objectives
// ---------------------------------------------------------------------------

enum class ObjectiveKind { ARL, SR, FTL, CI };

struct ObjectiveContext {
    CandidateSet ambiguity;  // ARL-O
    std::size_t estimate = 0;  // FTL-O
};

/// N_t r(p; .) evaluated by the rule named by `kind`.
double objective(ObjectiveKind kind, const Instance& instance, int period, std::size_t price,
                 const ObjectiveContext& context = {});

// ---------------------------------------------------------------------------
// UCB
// ---------------------------------------------------------------------------

/// Per-trajectory UCB bookkeeping over the price set P*.
class UcbState {
public:
    UcbState() = default;
    /// Draws the forced-exploration order uniformly at random.
    UcbState(std::vector<std::size_t> arms, RandomStream& rng);

    bool initialized() const noexcept { return !arms_.empty(); }
    const std::vector<std::size_t>& arms() const noexcept { return arms_; }
    const std::vector<std::size_t>& exploration_order() const noexcept { return order_; }

    /// Price for period t (1-based).
    std::size_t select(int period, double lambda) const;
    /// UCB index of arm a (position in arms()) at period t.
    double index(std::size_t arm, int period, double lambda) const;
    /// Revenue p * (period total demand) is credited to the arm played.
    void record(std::size_t price, double price_value, int arrivals, double demand_total);

    long count(std::size_t arm) const { return counts_.at(arm); }
    double revenue_sum(std::size_t arm) const { return revenue_sums_.at(arm); }
    /// Mean revenue per period the arm was played (the quantity the index uses).
    double mean_period_revenue(std::size_t arm) const;
    /// Mean revenue per customer served at the arm (diagnostic only).
    double mean_customer_revenue(std::size_t arm) const;

private:
    std::size_t arm_of(std::size_t price) const;

    std::vector<std::size_t> arms_;
    std::vector<std::size_t> order_;
    std::vector<long> counts_;
    std::vector<long> customers_;
    std::vector<double> revenue_sums_;
};

// ---------------------------------------------------------------------------
// Stateful policy
// ---------------------------------------------------------------------------

struct PolicyOptions {
    ThresholdMode threshold = SimplifiedThreshold{};
    double intersect_tol = 1e-9;
};

/// A pricing rule plus the per-trajectory state it consumes. Every policy
/// carries an ambiguity tracker so that risk-sensitive assessments can be
/// computed for any rule along its own trajectory. Randomness (FTL prior,
/// UCB exploration order) is drawn from `rng` on construction.
class PricingPolicy {
public:
    PricingPolicy(const Instance& instance, PolicySpec spec, PolicyOptions options,
                  RandomStream& rng);

    const PolicySpec& spec() const noexcept { return spec_; }
    const AmbiguityTracker& tracker() const noexcept { return tracker_; }
    const UcbState& ucb() const noexcept { return ucb_; }
    std::optional<std::size_t> ftl_prior() const noexcept { return ftl_prior_; }

    /// Price index for the tracker's current period.
    std::size_t choose_price() const;
    /// Records the outcome of the current period and advances to the next.
    void observe(std::size_t price, int arrivals, double demand_total);

private:
    const Instance* instance_;
    PolicySpec spec_;
    PolicyOptions options_;
    AmbiguityTracker tracker_;
    UcbState ucb_;
    std::optional<std::size_t> ftl_prior_;
    std::vector<double> means_scratch_;
};

}  // namespace arl
