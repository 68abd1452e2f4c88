#include <glob.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "arl/harness.hpp"
#include "json.hpp"

namespace arl {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class CheckFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::vector<std::string> instances;
    std::string policies;
    std::optional<std::uint64_t> seed;
    std::size_t trajectories = 0;
    unsigned threads = 0;
    std::string out;
    std::string format;
    std::string threshold;
    std::string families;
    std::vector<std::string> metrics;
    std::size_t n_cv = 0;
};

// Settings after merging the config file (if any) with command-line flags,
// flags taking precedence.
struct RunConfig {
    std::vector<std::string> instance_patterns;
    std::vector<std::string> policies{"ci", "sr", "ftl", "arl", "arl_plus"};
    std::optional<std::uint64_t> seed;
    std::size_t trajectories = 1000;
    unsigned threads = 1;
    std::string out = ".";
    std::string format = "csv";
    ThresholdMode threshold = SimplifiedThreshold{};
    std::vector<std::string> families{"L1", "E1", "L2", "E2", "L3", "E3"};
    std::size_t n_cv = 200;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

ThresholdMode parse_threshold(const std::string& text) {
    if (text == "simplified") return SimplifiedThreshold{};
    // full:v,b,c
    if (text.rfind("full:", 0) == 0) {
        const auto parts = split_list(text.substr(5));
        if (parts.size() != 3) throw ConfigError("threshold must be full:v,b,c");
        try {
            return FullThreshold{std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
        } catch (const std::exception&) {
            throw ConfigError("bad numbers in threshold '" + text + "'");
        }
    }
    throw ConfigError("unknown threshold mode '" + text + "'");
}

RunConfig load_config(const Options& opt) {
    RunConfig cfg;
    if (!opt.config.empty()) {
        std::ifstream in(opt.config);
        if (!in) throw ConfigError("cannot open config " + opt.config);
        json j;
        try {
            j = json::parse(in);
            if (j.contains("instances")) {
                const auto& v = j.at("instances");
                if (v.is_string()) {
                    cfg.instance_patterns = {v.get<std::string>()};
                } else {
                    cfg.instance_patterns = v.get<std::vector<std::string>>();
                }
            }
            if (j.contains("policies")) cfg.policies = j.at("policies").get<std::vector<std::string>>();
            if (j.contains("master_seed")) cfg.seed = j.at("master_seed").get<std::uint64_t>();
            if (j.contains("n_trajectories")) cfg.trajectories = j.at("n_trajectories").get<std::size_t>();
            if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
            if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
            if (j.contains("format")) cfg.format = j.at("format").get<std::string>();
            if (j.contains("threshold")) cfg.threshold = parse_threshold(j.at("threshold").get<std::string>());
            if (j.contains("families")) cfg.families = j.at("families").get<std::vector<std::string>>();
            if (j.contains("n_cv")) cfg.n_cv = j.at("n_cv").get<std::size_t>();
        } catch (const json::exception& e) {
            throw ConfigError(opt.config + ": " + e.what());
        }
    }
    if (!opt.instances.empty()) cfg.instance_patterns = opt.instances;
    if (!opt.policies.empty()) cfg.policies = split_list(opt.policies);
    if (opt.seed) cfg.seed = opt.seed;
    if (opt.trajectories) cfg.trajectories = opt.trajectories;
    if (opt.threads) cfg.threads = opt.threads;
    if (!opt.out.empty()) cfg.out = opt.out;
    if (!opt.format.empty()) cfg.format = opt.format;
    if (!opt.threshold.empty()) cfg.threshold = parse_threshold(opt.threshold);
    if (!opt.families.empty()) cfg.families = split_list(opt.families);
    if (opt.n_cv) cfg.n_cv = opt.n_cv;

    if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("format must be csv or json");
    if (cfg.trajectories < 1) throw ConfigError("n_trajectories must be at least 1");
    if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
    return cfg;
}

std::vector<std::string> expand_globs(const std::vector<std::string>& patterns) {
    std::vector<std::string> out;
    for (const auto& pattern : patterns) {
        glob_t g{};
        const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
        if (rc == 0) {
            for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
        }
        globfree(&g);
        if (rc == GLOB_NOMATCH) throw ConfigError("no instance files match '" + pattern + "'");
        if (rc != 0 && rc != GLOB_NOMATCH) throw ConfigError("bad glob '" + pattern + "'");
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Instance> load_instances(const RunConfig& cfg) {
    if (cfg.instance_patterns.empty()) throw ConfigError("no instances given (--instances)");
    std::vector<Instance> out;
    for (const auto& path : expand_globs(cfg.instance_patterns)) out.push_back(load_instance(path));
    return out;
}

std::uint64_t require_seed(const RunConfig& cfg) {
    if (!cfg.seed) throw ConfigError("a master seed is required (--seed or master_seed)");
    return *cfg.seed;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

// Resolves "ucb" (no parameter) by cross-validation on a seed disjoint from
// the evaluation streams.
PolicySpec resolve_policy(const std::string& text, const Instance& inst, const RunConfig& cfg,
                          std::uint64_t seed) {
    if (text == "ucb" || text == "ucb:cv") {
        const auto cv = cross_validate_ucb_lambda(inst, default_ucb_lambdas(), cfg.n_cv,
                                                  splitmix64(seed ^ 0x5EEDC0DEULL), cfg.threads);
        return {PolicyKind::UCB, cv.lambda};
    }
    return parse_policy(text);
}

int cmd_generate(const RunConfig& cfg) {
    BatterySpec spec;
    spec.families = cfg.families;
    const auto battery = generate_battery(spec);
    fs::create_directories(cfg.out);
    for (const auto& inst : battery) save_instance(inst, (fs::path(cfg.out) / (inst.label + ".json")).string());
    std::cerr << "wrote " << battery.size() << " instances to " << cfg.out << "\n";
    return kExitOk;
}

int cmd_run(const RunConfig& cfg) {
    const std::uint64_t seed = require_seed(cfg);
    const auto instances = load_instances(cfg);
    for (const auto& p : cfg.policies) {
        if (p != "ucb" && p != "ucb:cv") parse_policy(p);  // validate before simulating
    }
    SimulationOptions opts;
    opts.threshold = cfg.threshold;
    opts.threads = cfg.threads;

    std::vector<MetricReport> reports;
    for (const auto& inst : instances) {
        for (const auto& p : cfg.policies) {
            const PolicySpec spec = resolve_policy(p, inst, cfg, seed);
            reports.push_back(estimate_metrics(inst, spec, std::max<std::size_t>(cfg.trajectories, 2), seed, opts));
        }
    }
    if (cfg.format == "csv") {
        std::string text = metrics_csv_header() + "\n";
        for (const auto& r : reports) text += metrics_csv_row(r) + "\n";
        write_file(fs::path(cfg.out) / "metrics.csv", text);
    } else {
        write_file(fs::path(cfg.out) / "metrics.json", metrics_json(reports));
    }
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
    const std::uint64_t seed = require_seed(cfg);
    const auto instances = load_instances(cfg);
    bool all_ok = true;
    std::ostringstream log;
    char line[512];
    for (const auto& inst : instances) {
        const FullThreshold k = std::holds_alternative<FullThreshold>(cfg.threshold)
                                    ? std::get<FullThreshold>(cfg.threshold)
                                    : oracle_full_threshold(inst);
        const PolicySpec arl{PolicyKind::ARL, 0.0};
        const auto ident = check_identification(inst, arl, cfg.trajectories, seed, k, cfg.threads);
        const auto bounds = check_bounding_sets(inst, arl, cfg.trajectories, seed, k, cfg.threads);
        const auto rb = check_regret_bound(inst, cfg.trajectories, seed, k, cfg.threads);
        SimulationOptions copts;
        copts.threshold = k;
        copts.threads = cfg.threads;
        const auto full = check_full_ambiguity(inst, cfg.trajectories, seed, copts);

        std::snprintf(line, sizeof line, "%s identification %s freq=%.4f bound=%.4f t_tilde=%d\n",
                      inst.label.c_str(), ident.passed ? "PASS" : "FAIL", ident.frequency, ident.bound,
                      ident.identification_period);
        log << line;
        std::snprintf(line, sizeof line, "%s bounding_sets %s freq=%.4f bound=%.4f\n", inst.label.c_str(),
                      bounds.passed ? "PASS" : "FAIL", bounds.frequency, bounds.bound);
        log << line;
        std::snprintf(line, sizeof line,
                      "%s regret %s regret=%.4f se=%.4f bound=%.4f deviation=%.4f se=%.4f\n",
                      inst.label.c_str(), rb.passed() ? "PASS" : "FAIL", rb.regret, rb.regret_se,
                      rb.bound, rb.ftl_arl_deviation, rb.deviation_se);
        log << line;
        if (full.condition_held) {
            std::snprintf(line, sizeof line, "%s full_ambiguity %s n=%zu arl=%.4f ftl=%.4f\n",
                          inst.label.c_str(), full.passed ? "PASS" : "FAIL", full.n_condition,
                          full.arl_r_arl, full.arl_r_ftl);
        } else {
            std::snprintf(line, sizeof line, "%s full_ambiguity SKIP condition never held\n",
                          inst.label.c_str());
        }
        log << line;
        all_ok = all_ok && ident.passed && bounds.passed && rb.passed() &&
                 (!full.condition_held || full.passed);
    }
    std::cout << log.str();
    if (!cfg.out.empty() && cfg.out != ".") write_file(fs::path(cfg.out) / "verify.txt", log.str());
    if (!all_ok) throw CheckFailure("one or more checks failed");
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& metric_patterns, const RunConfig& cfg) {
    if (metric_patterns.empty()) throw ConfigError("report needs --metrics <csv glob>");
    const std::vector<std::string> wanted{"expected_gap_pct", "rvar_pct", "ci_r", "arl_r",
                                          "regret", "assessment_error"};
    // (group, policy, metric) -> values; group is the family prefix or "all".
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> cells;
    for (const auto& path : expand_globs(metric_patterns)) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open " + path);
        const CsvTable t = read_csv(in);
        auto col = [&](const std::string& name) -> std::size_t {
            auto it = std::find(t.header.begin(), t.header.end(), name);
            if (it == t.header.end()) throw ConfigError(path + ": missing column " + name);
            return static_cast<std::size_t>(it - t.header.begin());
        };
        const std::size_t label_col = col("instance_label");
        const std::size_t policy_col = col("policy");
        for (const auto& row : t.rows) {
            if (row.size() != t.header.size()) throw ConfigError(path + ": ragged row");
            const std::string& label = row[label_col];
            const std::string family = label.substr(0, label.find('-'));
            for (const auto& m : wanted) {
                const double v = std::stod(row[col(m)]);
                cells[{family, row[policy_col], m}].push_back(v);
                cells[{"all", row[policy_col], m}].push_back(v);
            }
        }
    }
    std::ostringstream out;
    out << "group,policy,metric,n,min,q1,median,q3,max,mean\n";
    char buf[256];
    for (const auto& [key, values] : cells) {
        const Summary s = summarize(values);
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%zu,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                      std::get<0>(key).c_str(), std::get<1>(key).c_str(), std::get<2>(key).c_str(),
                      s.n, s.min, s.q1, s.median, s.q3, s.max, s.mean);
        out << buf;
    }
    write_file(fs::path(cfg.out) / "summary.csv", out.str());
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Adaptively robust demand-learning pricing simulator"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed_value = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON run configuration");
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--threads", opt.threads, "worker threads");
    };
    auto add_sim = [&](CLI::App* sub) {
        sub->add_option("--instances", opt.instances, "instance file glob(s)");
        sub->add_option("--seed", seed_value, "64-bit master seed");
        sub->add_option("--trajectories", opt.trajectories, "trajectories per policy");
        sub->add_option("--threshold", opt.threshold, "simplified | full:v,b,c");
    };

    auto* gen = app.add_subcommand("generate", "write the instance battery as JSON files");
    add_common(gen);
    gen->add_option("--families", opt.families, "comma-separated family names");

    auto* run = app.add_subcommand("run", "simulate policies and write metrics");
    add_common(run);
    add_sim(run);
    run->add_option("--policies", opt.policies, "comma-separated policies (ucb = cross-validated)");
    run->add_option("--format", opt.format, "csv or json");
    run->add_option("--n-cv", opt.n_cv, "UCB cross-validation trajectories per lambda");

    auto* verify = app.add_subcommand("verify", "run the ambiguity-set and regret checkers");
    add_common(verify);
    add_sim(verify);

    auto* report = app.add_subcommand("report", "summarize metric CSVs");
    add_common(report);
    report->add_option("--metrics", opt.metrics, "metrics CSV glob(s)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfigError;
    }

    for (auto* sub : {run, verify}) {
        if (sub->parsed() && sub->count("--seed")) opt.seed = seed_value;
    }

    try {
        const RunConfig cfg = load_config(opt);
        if (gen->parsed()) return cmd_generate(cfg);
        if (run->parsed()) return cmd_run(cfg);
        if (verify->parsed()) return cmd_verify(cfg);
        if (report->parsed()) return cmd_report(opt.metrics, cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const AssumptionViolation& e) {
        std::cerr << "assumption violation: " << e.what() << "\n";
        return kExitAssumptionViolation;
    } catch (const CheckFailure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitConfigError;
}

}  // namespace arl
