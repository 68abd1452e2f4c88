#include "arl/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace arl {

namespace {

constexpr std::uint64_t kRolePolicy = 0;
constexpr std::uint64_t kRoleCiPartner = 1;
constexpr std::uint64_t kRoleFtlPartner = 2;

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

// Index-ordered two-pass reduction; identical for any scheduling.
MeanSe mean_se(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n == 0) return {};
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(n);
    if (n == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

template <class F>
auto collect(std::size_t n, unsigned threads, F&& make) {
    using T = decltype(make(std::size_t{0}));
    std::vector<T> out(n);
    parallel_for(n, threads, [&](std::size_t i) { out[i] = make(i); });
    return out;
}

TrajectorySample summarize(const Trajectory& tr) {
    TrajectorySample s;
    s.prices.reserve(tr.periods.size());
    s.sets.reserve(tr.periods.size());
    for (const auto& rec : tr.periods) {
        s.expected_revenue += rec.expected_revenue;
        s.realized_revenue += rec.revenue;
        s.arl_revenue += rec.arl_objective;
        s.prices.push_back(rec.price_index);
        s.sets.push_back(rec.ambiguity);
    }
    return s;
}

void require_identification_hypotheses(const Instance& instance, const FullThreshold& constants) {
    separation_constants(instance);  // throws SeparabilityViolation
    concentration_log(instance.total_traffic(), instance.horizon(),
                      psi(constants.c, constants.v, constants.b));
}

FrequencyReport frequency_report(std::size_t n, std::size_t successes, double bound) {
    FrequencyReport r;
    r.n_trajectories = n;
    r.successes = successes;
    r.frequency = n ? static_cast<double>(successes) / static_cast<double>(n) : 0.0;
    r.bound = bound;
    r.binomial_se = n ? std::sqrt(std::max(0.0, bound * (1.0 - bound)) / static_cast<double>(n)) : 0.0;
    r.passed = r.frequency >= bound - 3.0 * r.binomial_se;
    return r;
}

double guarantee_probability(const Instance& instance, const FullThreshold& k) {
    const double mt = static_cast<double>(instance.total_traffic()) * instance.horizon();
    return 1.0 - 1.0 / (mt * psi(k.c, k.v, k.b));
}

}  // namespace

double Trajectory::realized_revenue() const {
    double s = 0.0;
    for (const auto& p : periods) s += p.revenue;
    return s;
}

double Trajectory::expected_revenue() const {
    double s = 0.0;
    for (const auto& p : periods) s += p.expected_revenue;
    return s;
}

double Trajectory::arl_revenue() const {
    double s = 0.0;
    for (const auto& p : periods) s += p.arl_objective;
    return s;
}

Trajectory run_trajectory(const Instance& instance, const PolicySpec& policy,
                          const SimulationOptions& options, RandomStream& rng) {
    Trajectory tr;
    tr.policy = policy;
    tr.stream_id = rng.id();
    tr.periods.reserve(instance.arrivals.size());

    PricingPolicy pi(instance, policy, options.policy_options(), rng);
    const DemandModel& truth = instance.truth();
    for (int t = 1; t <= instance.horizon(); ++t) {
        PeriodRecord rec;
        rec.ambiguity = build_set(pi.tracker());
        rec.price_index = pi.choose_price();
        rec.price = instance.grid[rec.price_index];
        rec.arrivals = instance.arrivals_at(t);
        rec.demand_total =
            sample_period_demand(truth, rec.price, instance.noise, rec.arrivals, rng).total;
        rec.revenue = rec.price * rec.demand_total;
        rec.expected_revenue = rec.arrivals * truth.revenue_rate(rec.price, t);
        rec.arl_objective =
            objective(ObjectiveKind::ARL, instance, t, rec.price_index, {rec.ambiguity, 0});
        pi.observe(rec.price_index, rec.arrivals, rec.demand_total);
        tr.periods.push_back(rec);
    }
    return tr;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(std::max(1U, threads), std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double ci_r_star(const Instance& instance) {
    const DemandModel& truth = instance.truth();
    double total = 0.0;
    for (int t = 1; t <= instance.horizon(); ++t) {
        const std::size_t best = ci_price(instance, t);
        total += instance.arrivals_at(t) * truth.revenue_rate(instance.grid[best], t);
    }
    return total;
}

double value_at_risk95(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("VaR of an empty sample");
    const std::size_t n = samples.size();
    std::size_t k = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     samples.end());
    return samples[k - 1];
}

double rvar(std::vector<double> samples, double ci_r_star_value) {
    if (samples.size() < 20) throw std::invalid_argument("RVaR needs at least 20 samples");
    if (!(ci_r_star_value > 0.0)) throw std::invalid_argument("RVaR needs a positive CI-R*");
    return (1.0 - value_at_risk95(std::move(samples)) / ci_r_star_value) * 100.0;
}

FullThreshold oracle_full_threshold(const Instance& instance) {
    const SeparationConstants sc = separation_constants(instance);
    return FullThreshold{instance.noise.truncated_sd(), 0.0, sc.c};
}

double regret_bound(const Instance& instance) {
    const SeparationReport report = analyze_separation(instance);
    const double k1 = report.constants.K1;
    const double c = report.constants.c;
    const double m = static_cast<double>(instance.total_traffic());
    if (!report.separable() || !std::isfinite(c)) return 2.0 * k1 * m;
    try {
        const long before = arrivals_before_identification(instance.arrivals,
                                                           instance.noise.truncated_sd(), 0.0, c);
        return 2.0 * k1 * static_cast<double>(before);
    } catch (const AssumptionViolation&) {
        return 2.0 * k1 * m;
    }
}

std::vector<TrajectorySample> simulate_samples(const Instance& instance, const PolicySpec& policy,
                                               std::size_t n, std::uint64_t master_seed,
                                               const SimulationOptions& options,
                                               std::uint64_t role) {
    return collect(n, options.threads, [&](std::size_t i) {
        RandomStream rng(derive_stream_id(master_seed, i, role));
        return summarize(run_trajectory(instance, policy, options, rng));
    });
}

MetricReport estimate_metrics(const Instance& instance, const PolicySpec& policy, std::size_t n,
                              std::uint64_t master_seed, const SimulationOptions& options) {
    if (n < 2) throw std::invalid_argument("estimate_metrics needs at least two trajectories");
    const auto runs = simulate_samples(instance, policy, n, master_seed, options, kRolePolicy);
    const PolicySpec ci{PolicyKind::CI, 0.0};
    const auto partners = simulate_samples(instance, ci, n, master_seed, options, kRoleCiPartner);

    std::vector<double> expected(n), realized(n), arl(n), ci_realized(n);
    for (std::size_t i = 0; i < n; ++i) {
        expected[i] = runs[i].expected_revenue;
        realized[i] = runs[i].realized_revenue;
        arl[i] = runs[i].arl_revenue;
        ci_realized[i] = partners[i].realized_revenue;
    }

    MetricReport rep;
    rep.instance_label = instance.label;
    rep.policy = policy;
    rep.n_trajectories = n;
    rep.master_seed = master_seed;
    rep.ci_r_star = ci_r_star(instance);

    const MeanSe ci_r = mean_se(expected);
    const MeanSe arl_r = mean_se(arl);
    const MeanSe real = mean_se(realized);
    const MeanSe ci_real = mean_se(ci_realized);

    rep.ci_r = ci_r.mean;
    rep.expected_gap_pct = (1.0 - ci_r.mean / rep.ci_r_star) * 100.0;
    rep.gap_se = 100.0 * ci_r.se / rep.ci_r_star;
    if (n >= 20) {
        rep.rvar_pct = rvar(expected, rep.ci_r_star);
        rep.rvar_noisy_pct = rvar(realized, rep.ci_r_star);
    } else {
        rep.rvar_pct = std::numeric_limits<double>::quiet_NaN();
        rep.rvar_noisy_pct = std::numeric_limits<double>::quiet_NaN();
    }
    rep.arl_r = arl_r.mean;
    rep.regret = rep.ci_r_star - ci_r.mean;
    rep.regret_bound = regret_bound(instance);
    rep.assessment_error = std::abs(ci_r.mean - arl_r.mean);
    rep.realized_revenue = real.mean;
    rep.ci_realized_revenue = ci_real.mean;
    rep.se = {ci_r.se, arl_r.se, real.se, ci_real.se};
    return rep;
}

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

FrequencyReport check_identification(const Instance& instance, const PolicySpec& policy, std::size_t n,
                               std::uint64_t master_seed, const FullThreshold& constants,
                               unsigned threads) {
    require_identification_hypotheses(instance, constants);
    const int t_tilde =
        identification_period(instance.arrivals, constants.v, constants.b, constants.c);
    const CandidateSet target = CandidateSet::singleton(instance.true_index);

    SimulationOptions opts;
    opts.threshold = constants;
    opts.threads = threads;
    const auto runs = simulate_samples(instance, policy, n, master_seed, opts, kRolePolicy);

    std::size_t ok = 0;
    for (const auto& s : runs) {
        bool all = true;
        for (int t = t_tilde; t <= instance.horizon(); ++t) {
            if (s.sets[static_cast<std::size_t>(t - 1)] != target) {
                all = false;
                break;
            }
        }
        ok += all ? 1 : 0;
    }
    FrequencyReport r = frequency_report(n, ok, guarantee_probability(instance, constants));
    r.identification_period = t_tilde;
    return r;
}

FrequencyReport check_bounding_sets(const Instance& instance, const PolicySpec& policy, std::size_t n,
                               std::uint64_t master_seed, const FullThreshold& constants,
                               unsigned threads, DistanceBasis basis) {
    require_identification_hypotheses(instance, constants);
    const SeparationConstants sc = separation_constants(instance);
    const auto bounds = bounding_sets(instance.arrivals, sc, instance.num_candidates(),
                                      constants.v, constants.b, basis);

    SimulationOptions opts;
    opts.threshold = constants;
    opts.threads = threads;
    const auto runs = simulate_samples(instance, policy, n, master_seed, opts, kRolePolicy);

    std::size_t ok = 0;
    for (const auto& s : runs) {
        bool all = true;
        for (std::size_t t = 0; t < s.sets.size(); ++t) {
            if (!s.sets[t].subset_of(bounds[t])) {
                all = false;
                break;
            }
        }
        ok += all ? 1 : 0;
    }
    FrequencyReport r = frequency_report(n, ok, guarantee_probability(instance, constants));
    r.identification_period =
        identification_period(instance.arrivals, constants.v, constants.b, constants.c);
    return r;
}

RegretReport check_regret_bound(const Instance& instance, std::size_t n, std::uint64_t master_seed,
                                const FullThreshold& constants, unsigned threads) {
    require_identification_hypotheses(instance, constants);
    const SeparationConstants sc = separation_constants(instance);

    SimulationOptions opts;
    opts.threshold = constants;
    opts.threads = threads;
    const auto arl = simulate_samples(instance, {PolicyKind::ARL, 0.0}, n, master_seed, opts,
                                      kRolePolicy);
    const auto ftl = simulate_samples(instance, {PolicyKind::FTL, 0.0}, n, master_seed, opts,
                                      kRoleFtlPartner);
    std::vector<double> arl_rev(n), ftl_rev(n);
    for (std::size_t i = 0; i < n; ++i) {
        arl_rev[i] = arl[i].expected_revenue;
        ftl_rev[i] = ftl[i].expected_revenue;
    }
    const MeanSe a = mean_se(arl_rev);
    const MeanSe f = mean_se(ftl_rev);

    RegretReport r;
    r.n_trajectories = n;
    r.identification_period =
        identification_period(instance.arrivals, constants.v, constants.b, constants.c);
    r.bound = 2.0 * sc.K1 *
              static_cast<double>(arrivals_before_identification(instance.arrivals, constants.v,
                                                                 constants.b, constants.c));
    r.regret = ci_r_star(instance) - a.mean;
    r.regret_se = a.se;
    r.ftl_arl_deviation = std::abs(f.mean - a.mean);
    r.deviation_se = std::sqrt(a.se * a.se + f.se * f.se);
    r.regret_passed = r.regret <= r.bound + 3.0 * r.regret_se;
    r.deviation_passed = r.ftl_arl_deviation <= r.bound + 3.0 * r.deviation_se;
    return r;
}

FullAmbiguityReport check_full_ambiguity(const Instance& instance, std::size_t n, std::uint64_t master_seed,
                                 const SimulationOptions& options) {
    const auto arl = simulate_samples(instance, {PolicyKind::ARL, 0.0}, n, master_seed, options,
                                      kRolePolicy);
    const auto ftl = simulate_samples(instance, {PolicyKind::FTL, 0.0}, n, master_seed, options,
                                      kRoleFtlPartner);
    const CandidateSet everything = CandidateSet::full(instance.num_candidates());
    auto full_throughout = [&](const TrajectorySample& s) {
        return std::all_of(s.sets.begin(), s.sets.end(),
                           [&](CandidateSet u) { return u == everything; });
    };

    std::vector<double> a, f, diff;
    for (std::size_t i = 0; i < n; ++i) {
        if (!full_throughout(arl[i]) || !full_throughout(ftl[i])) continue;
        a.push_back(arl[i].arl_revenue);
        f.push_back(ftl[i].arl_revenue);
        diff.push_back(arl[i].arl_revenue - ftl[i].arl_revenue);
    }

    FullAmbiguityReport r;
    r.n_trajectories = n;
    r.n_condition = a.size();
    r.condition_held = !a.empty();
    if (!r.condition_held) return r;
    r.arl_r_arl = mean_se(a).mean;
    r.arl_r_ftl = mean_se(f).mean;
    r.difference_se = mean_se(diff).se;
    r.passed = r.arl_r_arl - r.arl_r_ftl >= -3.0 * r.difference_se - 1e-9 * std::abs(r.arl_r_arl);
    return r;
}

PricePartition partition_prices(const Instance& instance, int period, std::size_t arl_price) {
    const DemandModel& truth = instance.truth();
    const double reference = truth.revenue_rate(instance.grid[arl_price], period);
    PricePartition out;
    for (std::size_t i : price_star_set(instance)) {
        if (truth.revenue_rate(instance.grid[i], period) - reference >= 0.0) {
            out.improving.push_back(i);
        } else {
            out.diminishing.push_back(i);
        }
    }
    return out;
}

}  // namespace arl
