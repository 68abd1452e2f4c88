#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "arl/demand.hpp"
#include "arl/policies.hpp"
#include "arl/simulation.hpp"

namespace arl {

// ---------------------------------------------------------------------------
// Arrival patterns
// ---------------------------------------------------------------------------

/// N_t = ceil(alpha exp(beta (t - 1))) with the largest alpha whose total does
/// not exceed M; the residual goes to the period with the largest N_t (latest
/// such period on ties). Sums to M exactly. Throws ConfigError when M < T.
std::vector<int> arrival_pattern(long total_traffic, double beta, int horizon);

// ---------------------------------------------------------------------------
// Model families and the battery
// ---------------------------------------------------------------------------

struct ModelFamily {
    std::string name;
    DemandForm form = DemandForm::Linear;
    double full_price = 10.0;
    std::vector<double> discounts;
    /// Candidates; the true model is candidates[0].
    std::vector<DemandModel> candidates;
};

/// The six shipped families L1, E1, L2, E2, L3, E3.
const std::vector<ModelFamily>& standard_families();
/// Throws ConfigError on an unknown name.
const ModelFamily& find_family(const std::string& name);

struct BatterySpec {
    std::vector<std::string> families{"L1", "E1", "L2", "E2", "L3", "E3"};
    std::vector<double> sigmas{5, 10, 15, 30, 60, 90};
    std::vector<long> traffics{80, 400, 800, 1200, 1600, 3200};
    std::vector<double> betas{0.0, 1.5, 2.0, -1.5, -2.0};
    int horizon = 8;

    std::size_t size() const noexcept {
        return families.size() * sigmas.size() * traffics.size() * betas.size();
    }
};

/// "L1-s15-M400-b+1.5"
std::string instance_label(const std::string& family, double sigma, long total_traffic,
                           double beta);

Instance make_instance(const ModelFamily& family, double sigma, long total_traffic, double beta,
                       int horizon = 8);

/// Cartesian product in the order family, sigma, M, beta. Every family must
/// pass its calibration check; throws ConfigError otherwise.
std::vector<Instance> generate_battery(const BatterySpec& spec = {});

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

enum class Informativeness { Informative, PartiallyInformative, Uninformative };

std::string to_string(Informativeness value);

/// Per grid price: Informative when every pair of candidates differs in mean
/// demand by more than `tol`, Uninformative when every pair is within `tol`.
std::vector<Informativeness> classify_informativeness(const Instance& instance,
                                                      double tol = 1e-9);

/// Informative iff every grid price is; Uninformative iff every price is.
Informativeness instance_informativeness(const Instance& instance, double tol = 1e-9);

/// (1 - r(p; truth) / max_p' r(p'; truth)) * 100 at grid index `price`.
double revenue_dispersion(const Instance& instance, std::size_t price);

/// Candidate k is conservative when its revenue is at most the truth's at
/// every grid price.
bool is_conservative(const Instance& instance, std::size_t k);

struct CalibrationReport {
    std::string family;
    bool passed = false;
    /// Dispersion at p*(theta) for every non-true candidate.
    std::vector<double> dispersions;
    /// Averages over conservative / other non-true candidates (families 2 only).
    double conservative_average = 0.0;
    double other_average = 0.0;
    Informativeness informativeness = Informativeness::Informative;
    std::string detail;
};

/// Checks a family against its published constraints: four candidates, the
/// standard grid, the informativeness class and the dispersion ranges.
CalibrationReport check_family_calibration(const ModelFamily& family);

// ---------------------------------------------------------------------------
// UCB cross-validation
// ---------------------------------------------------------------------------

/// {1e-6, 1e-5, ..., 1e6}
std::vector<double> default_ucb_lambdas();

/// Role tag of cross-validation streams; disjoint from every evaluation role.
inline constexpr std::uint64_t kCrossValidationRole = 0xC5;

struct CrossValidationResult {
    double lambda = 0.0;
    std::vector<double> mean_ci_r;  // aligned with the candidate list
};

/// Hold-out Monte-Carlo: n_cv trajectories per lambda on streams
/// (seed, i, kCrossValidationRole); returns the lambda with the largest mean
/// CI-R, smallest lambda on ties.
CrossValidationResult cross_validate_ucb_lambda(const Instance& instance,
                                                const std::vector<double>& lambdas,
                                                std::size_t n_cv, std::uint64_t seed,
                                                unsigned threads = 1);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string instance_to_json(const Instance& instance);
/// Throws ConfigError on malformed input or broken invariants.
Instance instance_from_json(const std::string& text);
Instance load_instance(const std::string& path);
void save_instance(const Instance& instance, const std::string& path);

/// Exact column order of the metrics CSV.
const std::vector<std::string>& metrics_columns();
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricReport& report);
std::string metrics_json(const std::vector<MetricReport>& reports);

/// Parsed metrics CSV: header plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Report summaries
// ---------------------------------------------------------------------------

struct Summary {
    std::size_t n = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

/// Quantiles by linear interpolation between order statistics
/// (position (n - 1) q, 0-based).
double quantile(std::vector<double> values, double q);
Summary summarize(const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 1,
    kExitAssumptionViolation = 2,
    kExitCheckFailed = 3,
};

int run_cli(int argc, const char* const* argv);

}  // namespace arl
