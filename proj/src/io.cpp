#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "arl/harness.hpp"
#include "json.hpp"

namespace arl {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

std::string instance_to_json(const Instance& instance) {
    json j;
    j["label"] = instance.label;
    j["form"] = to_string(instance.truth().form);
    j["full_price"] = instance.grid.full_price();
    j["discounts"] = std::vector<double>(instance.grid.discounts().begin(),
                                         instance.grid.discounts().end());
    json cands = json::array();
    for (const auto& m : instance.candidates) cands.push_back({m.theta0, m.theta1});
    j["candidates"] = cands;
    j["true_index"] = instance.true_index;
    j["T"] = instance.horizon();
    j["arrivals"] = instance.arrivals;
    j["sigma"] = instance.noise.sigma;
    j["noise_bounds"] = {instance.noise.lower, instance.noise.upper};
    return j.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
    Instance inst;
    try {
        const json j = json::parse(text);
        inst.label = j.value("label", std::string{});
        const DemandForm form = parse_demand_form(j.at("form").get<std::string>());
        inst.grid = PriceGrid::from_discounts(j.at("full_price").get<double>(),
                                              j.at("discounts").get<std::vector<double>>());
        for (const auto& c : j.at("candidates")) {
            if (!c.is_array() || c.size() != 2) throw ConfigError("candidate must be [theta0, theta1]");
            inst.candidates.push_back({form, c.at(0).get<double>(), c.at(1).get<double>()});
        }
        inst.true_index = j.value("true_index", std::size_t{0});
        inst.arrivals = j.at("arrivals").get<std::vector<int>>();
        if (j.contains("T") && j.at("T").get<int>() != inst.horizon()) {
            throw ConfigError("T does not match the number of arrivals");
        }
        inst.noise.sigma = j.at("sigma").get<double>();
        if (j.contains("noise_bounds")) {
            const auto b = j.at("noise_bounds").get<std::vector<double>>();
            if (b.size() != 2) throw ConfigError("noise_bounds must have two entries");
            inst.noise.lower = b[0];
            inst.noise.upper = b[1];
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed instance JSON: ") + e.what());
    }
    inst.validate();
    return inst;
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open instance file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return instance_from_json(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void save_instance(const Instance& instance, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << instance_to_json(instance);
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace {

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

const std::vector<std::string>& metrics_columns() {
    static const std::vector<std::string> cols{
        "instance_label", "policy",          "n_trajectories", "master_seed", "ci_r",
        "ci_r_star",      "expected_gap_pct", "gap_se",        "rvar_pct",    "arl_r",
        "regret",         "regret_bound",    "assessment_error"};
    return cols;
}

std::string metrics_csv_header() {
    std::string out;
    for (const auto& c : metrics_columns()) {
        if (!out.empty()) out += ',';
        out += c;
    }
    return out;
}

std::string metrics_csv_row(const MetricReport& r) {
    std::ostringstream out;
    out << csv_escape(r.instance_label) << ',' << to_string(r.policy) << ',' << r.n_trajectories
        << ',' << r.master_seed << ',' << num(r.ci_r) << ',' << num(r.ci_r_star) << ','
        << num(r.expected_gap_pct) << ',' << num(r.gap_se) << ',' << num(r.rvar_pct) << ','
        << num(r.arl_r) << ',' << num(r.regret) << ',' << num(r.regret_bound) << ','
        << num(r.assessment_error);
    return out.str();
}

std::string metrics_json(const std::vector<MetricReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) {
        json j;
        j["instance_label"] = r.instance_label;
        j["policy"] = to_string(r.policy);
        j["n_trajectories"] = r.n_trajectories;
        j["master_seed"] = r.master_seed;
        j["ci_r"] = r.ci_r;
        j["ci_r_star"] = r.ci_r_star;
        j["expected_gap_pct"] = r.expected_gap_pct;
        j["gap_se"] = r.gap_se;
        j["rvar_pct"] = r.rvar_pct;
        j["rvar_noisy_pct"] = r.rvar_noisy_pct;
        j["arl_r"] = r.arl_r;
        j["regret"] = r.regret;
        j["regret_bound"] = r.regret_bound;
        j["assessment_error"] = r.assessment_error;
        j["realized_revenue"] = r.realized_revenue;
        j["ci_realized_revenue"] = r.ci_realized_revenue;
        j["standard_errors"] = {{"ci_r", r.se.ci_r},
                                {"arl_r", r.se.arl_r},
                                {"realized_revenue", r.se.realized_revenue},
                                {"ci_realized_revenue", r.se.ci_realized_revenue}};
        arr.push_back(j);
    }
    return arr.dump(2) + "\n";
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const char c = s[i];
            if (quoted) {
                if (c == '"' && i + 1 < s.size() && s[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    cur += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        cells.push_back(cur);
        return cells;
    };
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            table.header = split(line);
            first = false;
        } else {
            table.rows.push_back(split(line));
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return values[lo] + w * (values[hi] - values[lo]);
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.n = values.size();
    if (values.empty()) return s;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    s.q1 = quantile(values, 0.25);
    s.median = quantile(values, 0.5);
    s.q3 = quantile(values, 0.75);
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    return s;
}

}  // namespace arl
