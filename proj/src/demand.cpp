#include "arl/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace arl {

namespace {

double std_normal_pdf(double x) {
    constexpr double kInvSqrt2Pi = 0.39894228040143267794;
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

std::string to_string(DemandForm form) {
    return form == DemandForm::Linear ? "linear" : "exponential";
}

DemandForm parse_demand_form(const std::string& name) {
    if (name == "linear" || name == "Linear") return DemandForm::Linear;
    if (name == "exponential" || name == "Exponential") return DemandForm::Exponential;
    throw ConfigError("unknown demand form '" + name + "'");
}

double DemandModel::mean_demand(double price, int /*period*/) const {
    const double index = theta0 - theta1 * price;
    return form == DemandForm::Linear ? index : std::exp(index);
}

double DemandModel::revenue_rate(double price, int period) const {
    return price * mean_demand(price, period);
}

double mean_demand(const DemandModel& model, double price, int period) {
    return model.mean_demand(price, period);
}

double revenue_rate(const DemandModel& model, double price, int period) {
    return model.revenue_rate(price, period);
}

// ---------------------------------------------------------------------------
// PriceGrid
// ---------------------------------------------------------------------------

PriceGrid PriceGrid::from_discounts(double full_price, std::vector<double> discounts) {
    if (!(full_price > 0.0) || !std::isfinite(full_price)) {
        throw ConfigError("full price must be positive and finite");
    }
    if (discounts.empty()) throw ConfigError("discount list is empty");
    for (double q : discounts) {
        if (!(q >= 0.0 && q < 100.0)) {
            throw ConfigError("discounts must lie in [0, 100)");
        }
    }
    // Descending discount == ascending price.
    std::sort(discounts.begin(), discounts.end(), std::greater<>());

    PriceGrid grid;
    grid.full_price_ = full_price;
    for (double q : discounts) {
        // (100 - q) * P / 100 keeps grid prices such as 8.5 exact.
        const double price = (100.0 - q) * full_price / 100.0;
        if (!grid.prices_.empty() && price == grid.prices_.back()) {
            throw ConfigError("duplicate price after applying discounts");
        }
        grid.prices_.push_back(price);
        grid.discounts_.push_back(q);
    }
    return grid;
}

PriceGrid PriceGrid::from_prices(std::vector<double> prices) {
    if (prices.empty()) throw ConfigError("price list is empty");
    std::sort(prices.begin(), prices.end());
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw ConfigError("prices must be positive and finite");
        }
        if (i > 0 && prices[i] == prices[i - 1]) throw ConfigError("duplicate price");
    }
    PriceGrid grid;
    grid.full_price_ = prices.back();
    grid.prices_ = std::move(prices);
    grid.discounts_.reserve(grid.prices_.size());
    for (double p : grid.prices_) {
        grid.discounts_.push_back(100.0 * (1.0 - p / grid.full_price_));
    }
    return grid;
}

std::size_t PriceGrid::index_of(double price) const {
    auto it = std::find(prices_.begin(), prices_.end(), price);
    if (it == prices_.end()) throw ConfigError("price not on grid");
    return static_cast<std::size_t>(it - prices_.begin());
}

PriceGrid derive_grid(double full_price, std::vector<double> discounts) {
    return PriceGrid::from_discounts(full_price, std::move(discounts));
}

// ---------------------------------------------------------------------------
// NoiseSpec
// ---------------------------------------------------------------------------

void NoiseSpec::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("noise sigma must be positive");
    if (!(lower < 0.0 && 0.0 < upper)) throw ConfigError("noise bounds must bracket zero");
}

double NoiseSpec::acceptance_probability() const {
    return std_normal_cdf(upper / sigma) - std_normal_cdf(lower / sigma);
}

double NoiseSpec::truncated_mean() const {
    const double a = lower / sigma;
    const double b = upper / sigma;
    const double z = acceptance_probability();
    return sigma * (std_normal_pdf(a) - std_normal_pdf(b)) / z;
}

double NoiseSpec::truncated_sd() const {
    const double a = lower / sigma;
    const double b = upper / sigma;
    const double z = acceptance_probability();
    const double pa = std_normal_pdf(a);
    const double pb = std_normal_pdf(b);
    const double shift = (pa - pb) / z;
    const double var = sigma * sigma * (1.0 + (a * pa - b * pb) / z - shift * shift);
    return std::sqrt(var);
}

// ---------------------------------------------------------------------------
// Instance
// ---------------------------------------------------------------------------

long Instance::total_traffic() const noexcept {
    return std::accumulate(arrivals.begin(), arrivals.end(), 0L);
}

long Instance::cumulative_before(int period) const {
    long sum = 0;
    for (int j = 1; j < period; ++j) sum += arrivals.at(static_cast<std::size_t>(j - 1));
    return sum;
}

void Instance::validate() const {
    if (grid.size() == 0) throw ConfigError(label + ": empty price grid");
    if (candidates.empty()) throw ConfigError(label + ": need at least one candidate model");
    if (candidates.size() > kMaxCandidates) throw ConfigError(label + ": too many candidate models");
    if (true_index >= candidates.size()) throw ConfigError(label + ": true_index out of range");
    if (arrivals.empty()) throw ConfigError(label + ": horizon must be positive");
    for (int n : arrivals) {
        if (n < 1) throw ConfigError(label + ": every period needs at least one arrival");
    }
    noise.validate();
    const DemandForm form = candidates.front().form;
    for (const auto& model : candidates) {
        if (model.form != form) throw ConfigError(label + ": candidate forms differ");
        if (!(model.theta1 >= 0.0)) throw ConfigError(label + ": theta1 must be nonnegative");
        if (!std::isfinite(model.theta0) || !std::isfinite(model.theta1)) {
            throw ConfigError(label + ": non-finite model parameter");
        }
        if (form == DemandForm::Linear) {
            for (double p : grid.prices()) {
                if (model.mean_demand(p) < 0.0) {
                    throw ConfigError(label + ": negative linear mean demand on the grid");
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

double sample_noise(const NoiseSpec& noise, RandomStream& rng) {
    for (;;) {
        const double eps = noise.sigma * rng.normal();
        if (eps >= noise.lower && eps <= noise.upper) return eps;
    }
}

double sample_customer_demand(const DemandModel& model, double price,
                              const NoiseSpec& noise, RandomStream& rng) {
    return model.mean_demand(price) + sample_noise(noise, rng);
}

PeriodDemand sample_period_demand(const DemandModel& model, double price,
                                  const NoiseSpec& noise, int arrivals,
                                  RandomStream& rng, bool keep_per_customer) {
    if (arrivals < 1) throw ConfigError("period arrivals must be at least one");
    const double mu = model.mean_demand(price);
    PeriodDemand out;
    if (keep_per_customer) {
        out.per_customer.emplace();
        out.per_customer->reserve(static_cast<std::size_t>(arrivals));
    }
    for (int i = 0; i < arrivals; ++i) {
        const double d = mu + sample_noise(noise, rng);
        out.total += d;
        if (keep_per_customer) out.per_customer->push_back(d);
    }
    return out;
}

}  // namespace arl
