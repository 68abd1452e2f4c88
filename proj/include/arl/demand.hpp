#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arl/random.hpp"

namespace arl {

/// Raised when an instance, grid, or model violates its construction rules.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class DemandForm { Linear, Exponential };

std::string to_string(DemandForm form);
DemandForm parse_demand_form(const std::string& name);

/// Parametric per-customer mean demand: theta0 - theta1 * p (Linear) or
/// exp(theta0 - theta1 * p) (Exponential). Time-homogeneous; the period
/// argument is accepted but unused.
struct DemandModel {
    DemandForm form = DemandForm::Linear;
    double theta0 = 0.0;
    double theta1 = 0.0;

    double mean_demand(double price, int period = 1) const;
    double revenue_rate(double price, int period = 1) const;

    friend bool operator==(const DemandModel&, const DemandModel&) = default;
};

double mean_demand(const DemandModel& model, double price, int period = 1);
double revenue_rate(const DemandModel& model, double price, int period = 1);

/// Ascending, duplicate-free set of admissible prices.
class PriceGrid {
public:
    PriceGrid() = default;

    /// Builds the grid {(100 - q) / 100 * full_price : q in discounts}.
    static PriceGrid from_discounts(double full_price, std::vector<double> discounts);
    /// Builds a grid from explicit prices (sorted on construction).
    static PriceGrid from_prices(std::vector<double> prices);

    std::size_t size() const noexcept { return prices_.size(); }
    double operator[](std::size_t i) const { return prices_[i]; }
    std::span<const double> prices() const noexcept { return prices_; }
    double full_price() const noexcept { return full_price_; }
    /// Discount percentages aligned with prices() (ascending price order).
    std::span<const double> discounts() const noexcept { return discounts_; }

    /// Index of the grid price equal to `price`; throws if absent.
    std::size_t index_of(double price) const;

private:
    double full_price_ = 0.0;
    std::vector<double> prices_;
    std::vector<double> discounts_;
};

PriceGrid derive_grid(double full_price, std::vector<double> discounts);

/// Additive per-customer noise: normal(0, sigma^2) truncated to [lower, upper].
/// sigma is the scale of the underlying normal before truncation.
struct NoiseSpec {
    double sigma = 1.0;
    double lower = -100.0;
    double upper = 100.0;

    void validate() const;
    /// Closed-form mean of the truncated distribution.
    double truncated_mean() const;
    /// Closed-form standard deviation of the truncated distribution.
    double truncated_sd() const;
    /// Probability that an untruncated draw falls inside [lower, upper].
    double acceptance_probability() const;
};

struct Instance {
    std::string label;
    PriceGrid grid;
    std::vector<DemandModel> candidates;
    std::size_t true_index = 0;
    std::vector<int> arrivals;
    NoiseSpec noise;

    int horizon() const noexcept { return static_cast<int>(arrivals.size()); }
    long total_traffic() const noexcept;
    std::size_t num_candidates() const noexcept { return candidates.size(); }
    const DemandModel& truth() const { return candidates.at(true_index); }
    int arrivals_at(int period) const { return arrivals.at(static_cast<std::size_t>(period - 1)); }
    /// Arrivals in periods 1..period-1.
    long cumulative_before(int period) const;

    /// Throws ConfigError on any broken invariant.
    void validate() const;
};

/// Largest number of candidates an Instance may carry (CandidateSet width).
inline constexpr std::size_t kMaxCandidates = 64;

/// One truncated-normal noise draw, by rejection from the untruncated normal.
double sample_noise(const NoiseSpec& noise, RandomStream& rng);

double sample_customer_demand(const DemandModel& model, double price,
                              const NoiseSpec& noise, RandomStream& rng);

struct PeriodDemand {
    double total = 0.0;
    std::optional<std::vector<double>> per_customer;
};

PeriodDemand sample_period_demand(const DemandModel& model, double price,
                                  const NoiseSpec& noise, int arrivals,
                                  RandomStream& rng, bool keep_per_customer = false);

}  // namespace arl
