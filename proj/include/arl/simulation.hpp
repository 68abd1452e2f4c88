#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "arl/ambiguity.hpp"
#include "arl/demand.hpp"
#include "arl/policies.hpp"
#include "arl/random.hpp"

namespace arl {

struct SimulationOptions {
    ThresholdMode threshold = SimplifiedThreshold{};
    double intersect_tol = 1e-9;
    /// Worker threads for Monte-Carlo loops. Results do not depend on it.
    unsigned threads = 1;

    PolicyOptions policy_options() const { return {threshold, intersect_tol}; }
};

struct PeriodRecord {
    std::size_t price_index = 0;
    double price = 0.0;
    int arrivals = 0;
    double demand_total = 0.0;
    /// price * demand_total
    double revenue = 0.0;
    /// N_t r(p_t; truth): revenue at the realized price without demand noise.
    double expected_revenue = 0.0;
    /// N_t p_t min over the period's ambiguity set of mu(p_t; theta).
    double arl_objective = 0.0;
    CandidateSet ambiguity;
};

struct Trajectory {
    PolicySpec policy;
    std::uint64_t stream_id = 0;
    std::vector<PeriodRecord> periods;

    double realized_revenue() const;
    double expected_revenue() const;
    double arl_revenue() const;
};

/// Simulates periods 1..T under the true model. Deterministic given `rng`.
Trajectory run_trajectory(const Instance& instance, const PolicySpec& policy,
                          const SimulationOptions& options, RandomStream& rng);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. fn must only write
/// to slot i of caller-owned storage.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Sum over periods of N_t max_p r(p; truth).
double ci_r_star(const Instance& instance);

/// Lower empirical 5% order statistic (index ceil(0.05 n), 1-based, ascending).
double value_at_risk95(std::vector<double> samples);

/// (1 - VaR95 / ci_r_star) * 100. Needs at least 20 samples.
double rvar(std::vector<double> samples, double ci_r_star);

/// Guarantee constants with the truncated-normal SD as v and b = 0.
/// Throws SeparabilityViolation on non-separable instances.
FullThreshold oracle_full_threshold(const Instance& instance);

/// 2 K1 times the arrivals before the identification period (oracle
/// constants). Falls back to 2 K1 M on instances outside the guarantee's
/// hypotheses.
double regret_bound(const Instance& instance);

struct MetricReport {
    std::string instance_label;
    PolicySpec policy;
    std::size_t n_trajectories = 0;
    std::uint64_t master_seed = 0;

    double ci_r = 0.0;
    double ci_r_star = 0.0;
    double expected_gap_pct = 0.0;
    double gap_se = 0.0;
    /// RVaR on N_t r(p_t; truth); randomness enters only through prices.
    double rvar_pct = 0.0;
    /// RVaR on realized (noisy) revenue.
    double rvar_noisy_pct = 0.0;
    double arl_r = 0.0;
    double regret = 0.0;
    double regret_bound = 0.0;
    double assessment_error = 0.0;

    double realized_revenue = 0.0;
    /// Mean realized revenue of the paired CI runs.
    double ci_realized_revenue = 0.0;

    struct StandardErrors {
        double ci_r = 0.0;
        double arl_r = 0.0;
        double realized_revenue = 0.0;
        double ci_realized_revenue = 0.0;
    } se;
};

/// Simulates n trajectories of `policy` and n paired CI trajectories.
/// Trajectory i of the policy uses stream (master_seed, i, 0); its CI partner
/// uses (master_seed, i, 1).
MetricReport estimate_metrics(const Instance& instance, const PolicySpec& policy, std::size_t n,
                              std::uint64_t master_seed, const SimulationOptions& options = {});

/// Per-trajectory samples behind a MetricReport, for callers that need
/// distributions (e.g. prices played) rather than summaries.
struct TrajectorySample {
    double expected_revenue = 0.0;
    double realized_revenue = 0.0;
    double arl_revenue = 0.0;
    std::vector<std::size_t> prices;
    std::vector<CandidateSet> sets;
};

std::vector<TrajectorySample> simulate_samples(const Instance& instance, const PolicySpec& policy,
                                               std::size_t n, std::uint64_t master_seed,
                                               const SimulationOptions& options = {},
                                               std::uint64_t role = 0);

// ---------------------------------------------------------------------------
// Empirical checks of the ambiguity-set guarantees
// ---------------------------------------------------------------------------

struct FrequencyReport {
    std::size_t n_trajectories = 0;
    std::size_t successes = 0;
    double frequency = 0.0;
    /// 1 - 1 / (M T Psi(c))
    double bound = 0.0;
    double binomial_se = 0.0;
    int identification_period = 0;
    bool passed = false;
};

/// Frequency of {U_t = {truth} for all t >= identification period} along
/// trajectories of `policy` run with the full threshold. Pass iff the
/// frequency is at least bound - 3 binomial SE.
FrequencyReport check_identification(const Instance& instance, const PolicySpec& policy, std::size_t n,
                               std::uint64_t master_seed, const FullThreshold& constants,
                               unsigned threads = 1);

/// Frequency of {U_t within the bounding set at every t}.
FrequencyReport check_bounding_sets(const Instance& instance, const PolicySpec& policy, std::size_t n,
                               std::uint64_t master_seed, const FullThreshold& constants,
                               unsigned threads = 1,
                               DistanceBasis basis = DistanceBasis::MeanDemand);

struct RegretReport {
    std::size_t n_trajectories = 0;
    int identification_period = 0;
    double bound = 0.0;  // 2 K1 sum_{j < t~} N_j
    double regret = 0.0;
    double regret_se = 0.0;
    double ftl_arl_deviation = 0.0;  // |CI-R(FTL) - CI-R(ARL)|
    double deviation_se = 0.0;
    bool regret_passed = false;
    bool deviation_passed = false;
    bool passed() const noexcept { return regret_passed && deviation_passed; }
};

RegretReport check_regret_bound(const Instance& instance, std::size_t n, std::uint64_t master_seed,
                                const FullThreshold& constants, unsigned threads = 1);

struct FullAmbiguityReport {
    std::size_t n_trajectories = 0;
    /// Paired trajectories where both ARL's and FTL's sets stayed equal to the
    /// full candidate set in every period.
    std::size_t n_condition = 0;
    double arl_r_arl = 0.0;
    double arl_r_ftl = 0.0;
    double difference_se = 0.0;
    bool condition_held = false;
    bool passed = false;
};

FullAmbiguityReport check_full_ambiguity(const Instance& instance, std::size_t n, std::uint64_t master_seed,
                                 const SimulationOptions& options = {});

struct PricePartition {
    std::vector<std::size_t> improving;   // r(p; truth) >= r(p_arl; truth)
    std::vector<std::size_t> diminishing; // r(p; truth) <  r(p_arl; truth)
};

PricePartition partition_prices(const Instance& instance, int period, std::size_t arl_price);

}  // namespace arl
