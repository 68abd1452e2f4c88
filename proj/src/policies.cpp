#include "arl/policies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace arl {

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::CI: return "ci";
        case PolicyKind::SR: return "sr";
        case PolicyKind::FTL: return "ftl";
        case PolicyKind::ARL: return "arl";
        case PolicyKind::ARLPlus: return "arl_plus";
        case PolicyKind::UCB: return "ucb";
    }
    return "unknown";
}

std::string to_string(const PolicySpec& spec) {
    if (spec.kind != PolicyKind::UCB) return to_string(spec.kind);
    char buf[64];
    std::snprintf(buf, sizeof buf, "ucb:%.6g", spec.ucb_lambda);
    return buf;
}

PolicyKind parse_policy_kind(const std::string& name) {
    if (name == "ci") return PolicyKind::CI;
    if (name == "sr") return PolicyKind::SR;
    if (name == "ftl") return PolicyKind::FTL;
    if (name == "arl") return PolicyKind::ARL;
    if (name == "arl_plus" || name == "arl+") return PolicyKind::ARLPlus;
    if (name == "ucb") return PolicyKind::UCB;
    throw ConfigError("unknown policy '" + name + "'");
}

PolicySpec parse_policy(const std::string& text) {
    const auto colon = text.find(':');
    PolicySpec spec;
    spec.kind = parse_policy_kind(text.substr(0, colon));
    if (colon != std::string::npos) {
        if (spec.kind != PolicyKind::UCB) throw ConfigError("only ucb takes a parameter: " + text);
        try {
            std::size_t used = 0;
            spec.ucb_lambda = std::stod(text.substr(colon + 1), &used);
            if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("bad ucb lambda in '" + text + "'");
        }
        if (!(spec.ucb_lambda >= 0.0)) throw ConfigError("ucb lambda must be nonnegative");
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Price rules
// ---------------------------------------------------------------------------

std::size_t greedy_price(const Instance& instance, std::size_t model, int period) {
    const auto& grid = instance.grid;
    const DemandModel& m = instance.candidates.at(model);
    std::size_t best = 0;
    double best_r = m.revenue_rate(grid[0], period);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double r = m.revenue_rate(grid[i], period);
        if (r > best_r) {
            best = i;
            best_r = r;
        }
    }
    return best;
}

namespace {

double min_revenue(const Instance& instance, CandidateSet set, double price, int period) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k : set.indices()) {
        worst = std::min(worst, instance.candidates[k].revenue_rate(price, period));
    }
    return worst;
}

}  // namespace

std::size_t maxmin_price(const Instance& instance, CandidateSet set, int period) {
    if (set.empty()) throw std::invalid_argument("max-min over an empty candidate set");
    const auto& grid = instance.grid;
    std::size_t best = 0;
    double best_r = min_revenue(instance, set, grid[0], period);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double r = min_revenue(instance, set, grid[i], period);
        if (r > best_r) {
            best = i;
            best_r = r;
        }
    }
    return best;
}

std::size_t ci_price(const Instance& instance, int period) {
    return greedy_price(instance, instance.true_index, period);
}

std::size_t sr_price(const Instance& instance, int period) {
    return maxmin_price(instance, CandidateSet::full(instance.num_candidates()), period);
}

std::size_t arl_price(const Instance& instance, const AmbiguityTracker& tracker, int period) {
    return maxmin_price(instance, build_set(tracker), period);
}

std::size_t ftl_price(const Instance& instance, const AmbiguityTracker& tracker,
                      std::size_t prior_draw, int period) {
    const std::size_t estimate = tracker.cum_arrivals() == 0 ? prior_draw : tracker.best_estimate();
    return greedy_price(instance, estimate, period);
}

bool has_separated_member(const Instance& instance, CandidateSet set, std::size_t price,
                          double tol) {
    const double p = instance.grid[price];
    const auto members = set.indices();
    if (members.size() <= 1) return true;
    for (std::size_t a : members) {
        const double mu_a = instance.candidates[a].mean_demand(p);
        bool separated = true;
        for (std::size_t b : members) {
            if (a == b) continue;
            if (!(std::abs(mu_a - instance.candidates[b].mean_demand(p)) > tol)) {
                separated = false;
                break;
            }
        }
        if (separated) return true;
    }
    return false;
}

std::size_t arl_plus_price(const Instance& instance, CandidateSet set, int period,
                           double intersect_tol) {
    std::size_t price = maxmin_price(instance, set, period);
    if (set.size() <= 1 || has_separated_member(instance, set, price, intersect_tol)) return price;

    // Members tied at the current price are removed most-conservative first:
    // lowest revenue at the price, then lowest revenue summed over the grid.
    auto grid_revenue = [&](std::size_t k) {
        double sum = 0.0;
        for (double p : instance.grid.prices()) sum += instance.candidates[k].revenue_rate(p, period);
        return sum;
    };

    CandidateSet working = set;
    while (working.size() > 1) {
        const double p = instance.grid[price];
        std::size_t drop = 0;
        double drop_r = std::numeric_limits<double>::infinity();
        double drop_total = std::numeric_limits<double>::infinity();
        for (std::size_t k : working.indices()) {
            const double r = instance.candidates[k].revenue_rate(p, period);
            const double total = grid_revenue(k);
            if (r < drop_r || (r == drop_r && total < drop_total)) {
                drop = k;
                drop_r = r;
                drop_total = total;
            }
        }
        working.erase(drop);
        price = maxmin_price(instance, working, period);
        if (has_separated_member(instance, set, price, intersect_tol)) break;
    }
    return price;
}

std::vector<std::size_t> price_star_set(const Instance& instance) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < instance.num_candidates(); ++k) {
        out.push_back(greedy_price(instance, k));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

double objective(ObjectiveKind kind, const Instance& instance, int period, std::size_t price,
                 const ObjectiveContext& context) {
    const double p = instance.grid[price];
    const double n = instance.arrivals_at(period);
    switch (kind) {
        case ObjectiveKind::ARL:
            return n * min_revenue(instance, context.ambiguity, p, period);
        case ObjectiveKind::SR:
            return n * min_revenue(instance, CandidateSet::full(instance.num_candidates()), p, period);
        case ObjectiveKind::FTL:
            return n * instance.candidates.at(context.estimate).revenue_rate(p, period);
        case ObjectiveKind::CI:
            return n * instance.truth().revenue_rate(p, period);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// UCB
// ---------------------------------------------------------------------------

UcbState::UcbState(std::vector<std::size_t> arms, RandomStream& rng)
    : arms_(std::move(arms)),
      order_(arms_),
      counts_(arms_.size(), 0),
      customers_(arms_.size(), 0),
      revenue_sums_(arms_.size(), 0.0) {
    if (arms_.empty()) throw std::invalid_argument("UCB needs at least one arm");
    std::shuffle(order_.begin(), order_.end(), rng.engine());
}

std::size_t UcbState::arm_of(std::size_t price) const {
    auto it = std::find(arms_.begin(), arms_.end(), price);
    if (it == arms_.end()) throw std::invalid_argument("price is not a UCB arm");
    return static_cast<std::size_t>(it - arms_.begin());
}

double UcbState::mean_period_revenue(std::size_t arm) const {
    return revenue_sums_.at(arm) / static_cast<double>(counts_.at(arm));
}

double UcbState::mean_customer_revenue(std::size_t arm) const {
    return revenue_sums_.at(arm) / static_cast<double>(customers_.at(arm));
}

double UcbState::index(std::size_t arm, int period, double lambda) const {
    const double n = static_cast<double>(counts_.at(arm));
    if (n == 0) throw std::logic_error("UCB index of an unplayed arm");
    return revenue_sums_[arm] / n + lambda * std::sqrt(2.0 * std::log(static_cast<double>(period)) / n);
}

std::size_t UcbState::select(int period, double lambda) const {
    if (!initialized()) throw std::logic_error("UCB state used before initialization");
    if (period <= static_cast<int>(order_.size())) return order_[static_cast<std::size_t>(period - 1)];
    std::size_t best = 0;
    double best_index = index(0, period, lambda);
    for (std::size_t a = 1; a < arms_.size(); ++a) {
        const double v = index(a, period, lambda);
        if (v > best_index) {
            best = a;
            best_index = v;
        }
    }
    return arms_[best];
}

void UcbState::record(std::size_t price, double price_value, int arrivals, double demand_total) {
    const std::size_t a = arm_of(price);
    counts_[a] += 1;
    customers_[a] += arrivals;
    revenue_sums_[a] += price_value * demand_total;
}

// ---------------------------------------------------------------------------
// PricingPolicy
// ---------------------------------------------------------------------------

PricingPolicy::PricingPolicy(const Instance& instance, PolicySpec spec, PolicyOptions options,
                             RandomStream& rng)
    : instance_(&instance),
      spec_(spec),
      options_(options),
      tracker_(instance.num_candidates(), instance.total_traffic(), instance.horizon(),
               options.threshold),
      means_scratch_(instance.num_candidates()) {
    if (spec_.kind == PolicyKind::FTL) {
        ftl_prior_ = rng.uniform_index(instance.num_candidates());
    } else if (spec_.kind == PolicyKind::UCB) {
        ucb_ = UcbState(price_star_set(instance), rng);
    }
}

std::size_t PricingPolicy::choose_price() const {
    const Instance& inst = *instance_;
    const int t = tracker_.period();
    switch (spec_.kind) {
        case PolicyKind::CI: return ci_price(inst, t);
        case PolicyKind::SR: return sr_price(inst, t);
        case PolicyKind::FTL: return ftl_price(inst, tracker_, *ftl_prior_, t);
        case PolicyKind::ARL: return arl_price(inst, tracker_, t);
        case PolicyKind::ARLPlus:
            return arl_plus_price(inst, build_set(tracker_), t, options_.intersect_tol);
        case PolicyKind::UCB: return ucb_.select(t, spec_.ucb_lambda);
    }
    throw std::logic_error("unhandled policy kind");
}

void PricingPolicy::observe(std::size_t price, int arrivals, double demand_total) {
    const double p = instance_->grid[price];
    for (std::size_t k = 0; k < means_scratch_.size(); ++k) {
        means_scratch_[k] = instance_->candidates[k].mean_demand(p, tracker_.period());
    }
    if (spec_.kind == PolicyKind::UCB) ucb_.record(price, p, arrivals, demand_total);
    tracker_.update(means_scratch_, arrivals, demand_total);
}

}  // namespace arl
