#include "weaksatd/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "weaksatd/version.hpp"

namespace weaksatd::report {

using ordered_json = nlohmann::ordered_json;

Quartiles quartiles(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("quartiles: empty value list");

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();

    auto median_of = [](std::span<const double> v) {
        const size_t m = v.size();
        return m % 2 == 1 ? v[m / 2] : (v[m / 2 - 1] + v[m / 2]) / 2.0;
    };

    Quartiles q;
    q.median = median_of(sorted);
    for (double v : sorted) q.mean += v;
    q.mean /= static_cast<double>(n);

    if (n == 1) {
        q.q1 = q.q3 = sorted[0];
        return q;
    }
    const std::span<const double> all(sorted);
    q.q1 = median_of(all.subspan(0, n / 2));
    q.q3 = median_of(all.subspan(n % 2 == 1 ? n / 2 + 1 : n / 2));
    return q;
}

namespace {

struct DistinctBlockKey {
    std::string file;
    size_t begin;
    size_t end;
    auto operator<=>(const DistinctBlockKey&) const = default;
};

double pct(long num, long den) {
    return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::string pct_text(long num, long den) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f%% (%ld/%ld)", pct(num, den), num, den);
    return buf;
}

std::string join_cwe_ids(const std::vector<int>& ids) {
    std::string out;
    for (int id : ids) {
        if (!out.empty()) out += '/';
        out += std::to_string(id);
    }
    return out;
}

} // namespace

Report build_report(std::vector<FileResult> files, const engine::RuleSet& rules,
                    std::vector<std::pair<std::string, std::string>> config_snapshot,
                    std::optional<assoc::CalibrationResult> calibration) {
    std::sort(files.begin(), files.end(),
              [](const FileResult& a, const FileResult& b) { return a.path < b.path; });

    Report report;
    report.tool_version = kVersion;
    report.rule_set_hash = rules.hash;
    report.calibration = std::move(calibration);
    std::sort(config_snapshot.begin(), config_snapshot.end());
    report.config_snapshot = std::move(config_snapshot);

    auto& stats = report.stats;
    for (const auto& rule : rules.rules)
        for (int id : rule.cwe_ids) stats.per_cwe[id]; // zero entries for every rule CWE
    for (const auto& warning : rules.warnings) report.diagnostics.push_back(warning);

    for (const auto& file : files) {
        ++stats.files_scanned;
        stats.comments_total += file.comments;
        stats.comment_groups_total += file.comment_groups;
        stats.satd_comments += file.satd_comments;
        if (!file.associations.empty()) ++stats.files_with_satd;
        if (!file.file_findings.empty()) ++stats.files_with_weak_code;
        for (const auto& finding : file.file_findings)
            for (int id : finding.cwe_ids) ++stats.per_cwe[id].snippet_count;
        for (const auto& d : file.diagnostics) report.diagnostics.push_back(d);

        // distinct blocks within the file
        static const std::vector<engine::Finding> kNoFindings;
        std::set<DistinctBlockKey> seen;
        for (size_t i = 0; i < file.associations.size(); ++i) {
            const auto& assoc_entry = file.associations[i];
            const auto& findings =
                i < file.association_findings.size() ? file.association_findings[i] : kNoFindings;

            SatdBlockSummary summary;
            summary.file = file.path;
            summary.comment_start_line = assoc_entry.satd.start_line;
            summary.comment_end_line = assoc_entry.satd.end_line;
            summary.comment_excerpt = assoc_entry.satd.text.substr(0, 120);
            summary.matched_patterns = assoc_entry.satd.matched_patterns;
            summary.block_header_line = assoc_entry.block.header_start_line;
            summary.block_start_line = assoc_entry.block.start_line;
            summary.block_end_line = assoc_entry.block.end_line;
            summary.block_depth = assoc_entry.block.depth;
            summary.distance_lines = assoc_entry.distance_lines;
            summary.policy = assoc::to_string(assoc_entry.policy_used);
            summary.finding_count = static_cast<long>(findings.size());
            report.satd_blocks.push_back(std::move(summary));

            const DistinctBlockKey key{file.path, assoc_entry.block.span.begin,
                                       assoc_entry.block.span.end};
            if (!seen.insert(key).second) continue;

            ++stats.satd_blocks;
            if (!findings.empty()) ++stats.weak_satd_blocks;
            std::set<int> block_cwes;
            for (const auto& finding : findings) {
                report.findings.push_back(finding);
                for (int id : finding.cwe_ids) block_cwes.insert(id);
            }
            for (int id : block_cwes) ++stats.per_cwe[id].weak_satd_block_count;
        }
    }

    if (!stats.per_cwe.empty()) {
        std::vector<double> counts;
        counts.reserve(stats.per_cwe.size());
        for (const auto& [id, entry] : stats.per_cwe)
            counts.push_back(static_cast<double>(entry.snippet_count));
        stats.per_cwe_quartiles = quartiles(counts);
    }
    return report;
}

namespace {

ordered_json finding_to_json(const engine::Finding& f) {
    ordered_json j;
    j["file"] = f.file;
    j["rule_id"] = f.rule_id;
    j["cwe_ids"] = f.cwe_ids;
    j["line"] = f.line;
    j["column"] = f.column;
    j["snippet"] = f.snippet;
    j["block_span"] = {f.block_span.start_line, f.block_span.end_line};
    j["message"] = f.message;
    j["mitigations"] = f.mitigations;
    return j;
}

ordered_json calibration_to_json(const assoc::CalibrationResult& c) {
    ordered_json j;
    j["available"] = c.available;
    j["chosen"] = assoc::to_string(c.chosen);
    j["statistic"] = c.statistic;
    j["p_value"] = c.p_value;
    j["alpha"] = c.alpha;
    j["n_following"] = c.n_following;
    j["n_enclosing"] = c.n_enclosing;
    return j;
}

ordered_json stats_to_json(const ScanStats& s) {
    ordered_json j;
    j["files_scanned"] = s.files_scanned;
    j["files_with_satd"] = s.files_with_satd;
    j["comments_total"] = s.comments_total;
    j["comment_groups_total"] = s.comment_groups_total;
    j["satd_comments"] = s.satd_comments;
    j["satd_blocks"] = s.satd_blocks;
    j["weak_satd_blocks"] = s.weak_satd_blocks;
    j["files_with_weak_code"] = s.files_with_weak_code;
    j["pct_files_with_satd"] = pct(s.files_with_satd, s.files_scanned);
    j["pct_satd_comments_of_groups"] = pct(s.satd_comments, s.comment_groups_total);
    j["pct_satd_comments_of_comments"] = pct(s.satd_comments, s.comments_total);
    j["pct_satd_blocks_of_groups"] = pct(s.satd_blocks, s.comment_groups_total);
    j["pct_files_with_weak_code"] = pct(s.files_with_weak_code, s.files_scanned);
    j["weak_satd_ratio"] =
        s.satd_blocks == 0 ? 0.0
                           : static_cast<double>(s.weak_satd_blocks) /
                                 static_cast<double>(s.satd_blocks);
    j["weak_satd_ratio_defined"] = s.satd_blocks != 0;
    j["per_cwe"] = ordered_json::object();
    for (const auto& [id, entry] : s.per_cwe)
        j["per_cwe"]["CWE-" + std::to_string(id)] = {
            {"snippet_count", entry.snippet_count},
            {"weak_satd_block_count", entry.weak_satd_block_count}};
    if (s.per_cwe_quartiles.has_value()) {
        j["per_cwe_snippet_quartiles"] = {{"mean", s.per_cwe_quartiles->mean},
                                          {"q1", s.per_cwe_quartiles->q1},
                                          {"median", s.per_cwe_quartiles->median},
                                          {"q3", s.per_cwe_quartiles->q3}};
        j["quartile_method"] = kQuartileMethod;
    }
    return j;
}

} // namespace

std::string emit_json(const Report& report) {
    ordered_json j;
    j["tool"] = {{"name", "weaksatd"},
                 {"version", report.tool_version},
                 {"rule_set_hash", report.rule_set_hash}};
    j["config"] = ordered_json::object();
    for (const auto& [key, value] : report.config_snapshot) j["config"][key] = value;
    j["calibration"] =
        report.calibration.has_value() ? calibration_to_json(*report.calibration) : ordered_json();
    j["stats"] = stats_to_json(report.stats);
    j["satd_blocks"] = ordered_json::array();
    for (const auto& b : report.satd_blocks) {
        ordered_json entry;
        entry["file"] = b.file;
        entry["comment_lines"] = {b.comment_start_line, b.comment_end_line};
        entry["comment_excerpt"] = b.comment_excerpt;
        entry["matched_patterns"] = b.matched_patterns;
        entry["block"] = {{"header_line", b.block_header_line},
                          {"start_line", b.block_start_line},
                          {"end_line", b.block_end_line},
                          {"depth", b.block_depth}};
        entry["distance_lines"] = b.distance_lines;
        entry["policy"] = b.policy;
        entry["finding_count"] = b.finding_count;
        j["satd_blocks"].push_back(std::move(entry));
    }
    j["findings"] = ordered_json::array();
    for (const auto& f : report.findings) j["findings"].push_back(finding_to_json(f));
    j["diagnostics"] = report.diagnostics;
    return j.dump(2) + "\n";
}

std::string emit_text(const Report& report) {
    std::string out;
    for (const auto& f : report.findings) {
        out += f.file + ":" + std::to_string(f.line) + ":" + std::to_string(f.column) +
               " [CWE-" + join_cwe_ids(f.cwe_ids) + "] " + f.message + "\n";
    }
    const auto& s = report.stats;
    out += "--\n";
    out += "files scanned:        " + std::to_string(s.files_scanned) + "\n";
    out += "files with SATD:      " + pct_text(s.files_with_satd, s.files_scanned) + "\n";
    out += "comment groups:       " + std::to_string(s.comment_groups_total) + " (" +
           std::to_string(s.comments_total) + " comments)\n";
    out += "SATD comments:        " + pct_text(s.satd_comments, s.comment_groups_total) +
           " of comment groups\n";
    out += "SATD blocks:          " + std::to_string(s.satd_blocks) + "\n";
    if (s.satd_blocks > 0)
        out += "weak SATD blocks:     " + pct_text(s.weak_satd_blocks, s.satd_blocks) + "\n";
    else
        out += "weak SATD blocks:     0 (no SATD blocks, ratio undefined)\n";
    out += "files with weak code: " + pct_text(s.files_with_weak_code, s.files_scanned) + "\n";
    if (report.calibration.has_value() && report.calibration->available) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "calibration:          %s (U=%.1f, p=%.4g, alpha=%g)\n",
                      assoc::to_string(report.calibration->chosen), report.calibration->statistic,
                      report.calibration->p_value, report.calibration->alpha);
        out += buf;
    }
    return out;
}

namespace {

std::string uri_for_path(const std::string& path) {
    static const char* kHex = "0123456789ABCDEF";
    std::string out;
    for (char c : path) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '/' || c == '.' || c == '-' || c == '_' || c == '~') {
            out.push_back(c == '\\' ? '/' : c);
        } else if (c == '\\') {
            out.push_back('/');
        } else {
            out.push_back('%');
            out.push_back(kHex[u >> 4]);
            out.push_back(kHex[u & 0xF]);
        }
    }
    return out;
}

} // namespace

std::string emit_sarif(const Report& report, const engine::RuleSet& rules,
                       const cwe::Catalog* catalog) {
    ordered_json doc;
    doc["$schema"] =
        "https://docs.oasis-open.org/sarif/sarif/v2.1.0/errata01/os/schemas/sarif-schema-2.1.0.json";
    doc["version"] = "2.1.0";

    ordered_json driver;
    driver["name"] = "weaksatd";
    driver["version"] = report.tool_version;
    driver["informationUri"] = "https://cwe.mitre.org/";
    driver["rules"] = ordered_json::array();

    std::map<std::string, size_t> rule_index;
    for (const auto& rule : rules.rules) {
        ordered_json entry;
        entry["id"] = rule.rule_id;
        entry["shortDescription"] = {{"text", rule.message}};
        std::string help;
        if (catalog != nullptr) {
            if (const cwe::CweIssue* issue = catalog->find(rule.mitigation_ref)) {
                for (const auto& m : issue->mitigations) {
                    if (!help.empty()) help += "\n";
                    help += m.phases.empty() ? m.advice : m.phases + ": " + m.advice;
                }
            }
        }
        if (help.empty()) help = "See CWE-" + std::to_string(rule.mitigation_ref) + ".";
        entry["help"] = {{"text", help}};
        entry["helpUri"] = "https://cwe.mitre.org/data/definitions/" +
                           std::to_string(rule.mitigation_ref) + ".html";
        entry["defaultConfiguration"] = {{"level", "warning"}};
        ordered_json tags = ordered_json::array();
        tags.push_back("security");
        for (int id : rule.cwe_ids) tags.push_back("external/cwe/cwe-" + std::to_string(id));
        entry["properties"] = {{"tags", tags}};
        rule_index[rule.rule_id] = rule_index.size();
        driver["rules"].push_back(std::move(entry));
    }

    ordered_json results = ordered_json::array();
    for (const auto& f : report.findings) {
        ordered_json result;
        result["ruleId"] = f.rule_id;
        if (auto it = rule_index.find(f.rule_id); it != rule_index.end())
            result["ruleIndex"] = it->second;
        result["level"] = "warning";
        std::string text = f.message + " (CWE-" + join_cwe_ids(f.cwe_ids) + ")";
        result["message"] = {{"text", text}};
        ordered_json region;
        region["startLine"] = f.line;
        region["startColumn"] = f.column;
        if (!f.snippet.empty()) region["snippet"] = {{"text", f.snippet}};
        ordered_json location;
        location["physicalLocation"] = {
            {"artifactLocation", {{"uri", uri_for_path(f.file)}}},
            {"region", std::move(region)}};
        result["locations"] = ordered_json::array({std::move(location)});
        results.push_back(std::move(result));
    }

    ordered_json run;
    run["tool"] = {{"driver", std::move(driver)}};
    run["columnKind"] = "utf16CodeUnits";
    run["results"] = std::move(results);
    doc["runs"] = ordered_json::array({std::move(run)});
    return doc.dump(2) + "\n";
}

} // namespace weaksatd::report
