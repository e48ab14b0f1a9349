#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "weaksatd/errors.hpp"
#include "weaksatd/scanner.hpp"
#include "weaksatd/version.hpp"

namespace {

using weaksatd::Config;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitClean = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

void write_output(const std::string& bytes, const std::string& path) {
    if (path.empty()) {
        std::cout << bytes;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw weaksatd::IoError("cannot write output file: " + path);
    out << bytes;
    if (!out) throw weaksatd::IoError("write failure on " + path);
}

std::string render_report(const weaksatd::report::Report& report, const Config& config,
                          const weaksatd::ScanEnvironment& env) {
    if (config.output_format == "json") return weaksatd::report::emit_json(report);
    if (config.output_format == "sarif")
        return weaksatd::report::emit_sarif(report, env.rules, &env.catalog);
    return weaksatd::report::emit_text(report);
}

ordered_json calibration_json(const weaksatd::assoc::CalibrationResult& c) {
    ordered_json j;
    j["available"] = c.available;
    j["chosen"] = weaksatd::assoc::to_string(c.chosen);
    j["statistic"] = c.statistic;
    j["p_value"] = c.p_value;
    j["alpha"] = c.alpha;
    j["n_following"] = c.n_following;
    j["n_enclosing"] = c.n_enclosing;
    return j;
}

struct CommonOpts {
    std::string config_file;
    std::vector<std::string> roots{"."};
    std::vector<std::string> include;
    std::vector<std::string> exclude;
    std::vector<std::string> satd_exclude;
    bool no_satd_exclusions = false;
    std::string policy;
    int max_gap = -1;
    double alpha = -1.0;
    std::string rules_dir;
    std::string catalog_path;
    std::string patterns_file;
    std::string format;
    std::string output;
    std::string fail_on;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_output) {
    cmd->add_option("roots", opts.roots, "Directories or files to scan")->capture_default_str();
    cmd->add_option("--include", opts.include, "Include globs (default: *.c *.h)");
    cmd->add_option("--exclude", opts.exclude, "Exclude globs");
    cmd->add_option("--satd-exclude", opts.satd_exclude, "SATD pattern ids to disable");
    cmd->add_flag("--no-satd-exclusions", opts.no_satd_exclusions,
                  "Enable every shipped SATD pattern");
    cmd->add_option("--policy", opts.policy, "following|enclosing|nearest|auto");
    cmd->add_option("--max-gap", opts.max_gap, "Max comment-to-block gap in lines");
    cmd->add_option("--alpha", opts.alpha, "Significance level for calibration");
    cmd->add_option("--rules", opts.rules_dir, "Weakness rule directory");
    cmd->add_option("--catalog", opts.catalog_path, "CWE catalog export (.csv or .json)");
    cmd->add_option("--patterns", opts.patterns_file, "SATD pattern file");
    cmd->add_option("--threads", opts.threads, "Worker threads (default: all cores)");
    if (with_output) {
        cmd->add_option("--format", opts.format, "text|json|sarif")
            ->check(CLI::IsMember({"text", "json", "sarif"}));
        cmd->add_option("--output", opts.output, "Write the report to a file");
        cmd->add_option("--fail-on", opts.fail_on, "none|any-satd|weak-satd")
            ->check(CLI::IsMember({"none", "any-satd", "weak-satd"}));
    }
}

Config build_config(const CommonOpts& opts) {
    Config config;
    if (!opts.config_file.empty())
        config = weaksatd::load_config_file(opts.config_file, std::move(config));
    else
        config = weaksatd::load_config_from_env(std::move(config));

    if (!opts.include.empty()) config.include = opts.include;
    if (!opts.exclude.empty()) config.exclude = opts.exclude;
    if (opts.no_satd_exclusions)
        config.satd_exclude = std::vector<std::string>{};
    else if (!opts.satd_exclude.empty())
        config.satd_exclude = opts.satd_exclude;
    if (!opts.policy.empty()) {
        if (opts.policy != "auto" &&
            !weaksatd::assoc::policy_from_string(opts.policy).has_value())
            throw weaksatd::ConfigError("unknown --policy: " + opts.policy);
        config.assoc_policy = opts.policy;
    }
    if (opts.max_gap >= 0) config.max_gap_lines = opts.max_gap;
    if (opts.alpha > 0.0) {
        if (opts.alpha >= 1.0) throw weaksatd::ConfigError("--alpha must be in (0, 1)");
        config.alpha = opts.alpha;
    }
    if (!opts.rules_dir.empty()) config.rules_dir = opts.rules_dir;
    if (!opts.catalog_path.empty()) config.cwe_catalog = opts.catalog_path;
    if (!opts.patterns_file.empty()) config.patterns_file = opts.patterns_file;
    if (!opts.format.empty()) config.output_format = opts.format;
    if (!opts.output.empty()) config.output_path = opts.output;
    if (!opts.fail_on.empty()) config.fail_on = *weaksatd::fail_on_from_string(opts.fail_on);
    if (opts.threads > 0) config.threads = opts.threads;
    return config;
}

int run_scan(const CommonOpts& opts, bool stats_only) {
    const Config config = build_config(opts);
    const auto env = weaksatd::load_environment(config);
    const auto outcome = weaksatd::scan_tree(opts.roots, config, env);

    if (stats_only) {
        if (config.output_format == "json") {
            ordered_json j = ordered_json::parse(weaksatd::report::emit_json(outcome.report));
            write_output(ordered_json(j["stats"]).dump(2) + "\n", config.output_path);
        } else {
            const std::string text = weaksatd::report::emit_text(outcome.report);
            const size_t footer = text.find("--\n");
            write_output(footer == std::string::npos ? text : text.substr(footer),
                         config.output_path);
        }
        return kExitClean;
    }

    write_output(render_report(outcome.report, config, env), config.output_path);
    switch (config.fail_on) {
    case weaksatd::FailOn::None: return kExitClean;
    case weaksatd::FailOn::AnySatd: return outcome.any_satd ? kExitThreshold : kExitClean;
    case weaksatd::FailOn::WeakSatd: return outcome.weak_satd ? kExitThreshold : kExitClean;
    }
    return kExitClean;
}

int run_calibrate(const CommonOpts& opts) {
    const Config config = build_config(opts);
    const auto env = weaksatd::load_environment(config);
    const auto result = weaksatd::calibrate_tree(opts.roots, config, env);
    if (!result.available)
        std::cerr << "warning: not enough SATD comments with both candidates; "
                     "falling back to the configured policy\n";
    write_output(calibration_json(result).dump(2) + "\n", config.output_path);
    return kExitClean;
}

int explain_issue(const weaksatd::cwe::Catalog& catalog, int id) {
    const weaksatd::cwe::CweIssue* issue = catalog.find(id);
    if (issue == nullptr) {
        std::cerr << "error: CWE-" << id << " is not in the catalog\n";
        return kExitUsage;
    }
    std::cout << "CWE-" << issue->id << ": " << issue->name << "\n\n";
    std::cout << issue->description << "\n";
    if (!issue->extended_description.empty())
        std::cout << "\n" << issue->extended_description << "\n";
    if (!issue->mitigations.empty()) {
        std::cout << "\nPotential mitigations:\n";
        for (const auto& m : issue->mitigations) {
            if (!m.phases.empty()) std::cout << "  [" << m.phases << "] " << m.advice << "\n";
            else std::cout << "  " << m.advice << "\n";
        }
    }
    return kExitClean;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weaksatd: finds CWE weaknesses in code blocks tied to "
                 "self-admitted technical debt comments"};
    app.set_version_flag("--version", weaksatd::kVersion);
    app.require_subcommand(1);

    CommonOpts scan_opts, calibrate_opts, stats_opts;
    std::string config_file;
    app.add_option("--config", config_file, "Config file (or WEAKSATD_CONFIG env var)");

    CLI::App* scan = app.add_subcommand("scan", "Scan a tree and report weak SATD blocks");
    add_common(scan, scan_opts, true);

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "Pick the association policy with a rank-sum test");
    add_common(calibrate, calibrate_opts, false);
    calibrate->add_option("--output", calibrate_opts.output, "Write the result to a file");

    CLI::App* stats = app.add_subcommand("stats", "Scan and print repository statistics only");
    add_common(stats, stats_opts, true);

    CLI::App* catalog_cmd = app.add_subcommand("catalog", "CWE catalog operations");
    catalog_cmd->require_subcommand(1);
    std::string catalog_path, catalog_output;
    int explain_id = 0;
    CLI::App* cat_import = catalog_cmd->add_subcommand("import", "Parse an export and report");
    cat_import->add_option("--catalog", catalog_path, "Catalog export path");
    CLI::App* cat_filter =
        catalog_cmd->add_subcommand("filter", "List issues kept by the C-relevance filter");
    cat_filter->add_option("--catalog", catalog_path, "Catalog export path");
    CLI::App* cat_export = catalog_cmd->add_subcommand("export", "Write the JSON snapshot");
    cat_export->add_option("--catalog", catalog_path, "Catalog export path");
    cat_export->add_option("--output", catalog_output, "Snapshot destination");
    CLI::App* cat_explain = catalog_cmd->add_subcommand("explain", "Describe one CWE issue");
    cat_explain->add_option("id", explain_id, "CWE id")->required();
    cat_explain->add_option("--catalog", catalog_path, "Catalog export path");

    CLI::App* explain = app.add_subcommand("explain", "Describe one CWE issue");
    explain->add_option("id", explain_id, "CWE id")->required();
    explain->add_option("--catalog", catalog_path, "Catalog export path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitClean : kExitUsage;
    }

    scan_opts.config_file = config_file;
    calibrate_opts.config_file = config_file;
    stats_opts.config_file = config_file;

    try {
        if (scan->parsed()) return run_scan(scan_opts, false);
        if (stats->parsed()) return run_scan(stats_opts, true);
        if (calibrate->parsed()) return run_calibrate(calibrate_opts);

        if (catalog_cmd->parsed() || explain->parsed()) {
            Config config;
            config = weaksatd::load_config_from_env(std::move(config));
            if (!catalog_path.empty()) config.cwe_catalog = catalog_path;
            auto catalog = weaksatd::cwe::import_catalog(config.resolved_catalog());

            if (explain->parsed() || cat_explain->parsed())
                return explain_issue(catalog, explain_id);
            if (cat_import->parsed()) {
                std::cout << "imported " << catalog.issues.size() << " issues\n";
                for (const auto& d : catalog.diagnostics) std::cout << "note: " << d << "\n";
                return kExitClean;
            }
            if (cat_filter->parsed()) {
                const auto kept =
                    weaksatd::cwe::filter_issues(catalog.issues, weaksatd::cwe::CatalogFilter{});
                for (const auto& issue : kept)
                    std::cout << "CWE-" << issue.id << ": " << issue.name << "\n";
                std::cout << kept.size() << " issues kept\n";
                return kExitClean;
            }
            if (cat_export->parsed()) {
                write_output(weaksatd::cwe::export_catalog_json(catalog), catalog_output);
                return kExitClean;
            }
        }
    } catch (const weaksatd::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const weaksatd::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const weaksatd::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitClean;
}
