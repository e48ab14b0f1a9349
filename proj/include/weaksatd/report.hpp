#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weaksatd/association.hpp"
#include "weaksatd/weakness_engine.hpp"

namespace weaksatd::report {

struct Quartiles {
    double mean = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

// Median of the two halves excluding the overall median for odd n; the
// method is recorded in the report metadata as quartile_method.
// Throws std::invalid_argument on an empty list.
Quartiles quartiles(std::span<const double> values);

inline constexpr const char* kQuartileMethod = "median-of-halves-excluding-overall-median";

struct PerCwe {
    long snippet_count = 0;         // repository-wide matches
    long weak_satd_block_count = 0; // distinct SATD blocks with a hit
};

struct ScanStats {
    long files_scanned = 0;
    long files_with_satd = 0; // files contributing at least one SATD block
    long comments_total = 0;
    long comment_groups_total = 0;
    long satd_comments = 0; // SATD comment groups, associated or not
    long satd_blocks = 0;   // distinct associated blocks
    long weak_satd_blocks = 0;
    long files_with_weak_code = 0;
    std::map<int, PerCwe> per_cwe;
    std::optional<Quartiles> per_cwe_quartiles; // over snippet counts
};

struct SatdBlockSummary {
    std::string file;
    int comment_start_line = 0;
    int comment_end_line = 0;
    std::string comment_excerpt; // first 120 chars
    std::vector<std::string> matched_patterns;
    int block_header_line = 0;
    int block_start_line = 0;
    int block_end_line = 0;
    int block_depth = 0;
    int distance_lines = 0;
    std::string policy;
    long finding_count = 0;
};

struct Report {
    ScanStats stats;
    std::vector<engine::Finding> findings; // inside SATD blocks; (file,line,col,rule) order
    std::vector<SatdBlockSummary> satd_blocks;
    std::optional<assoc::CalibrationResult> calibration;
    std::string tool_version;
    std::string rule_set_hash;
    std::vector<std::pair<std::string, std::string>> config_snapshot; // sorted keys
    std::vector<std::string> diagnostics;
};

// Everything the scanner learned about one file. Results are merged in path
// order, so reports do not depend on scan scheduling.
struct FileResult {
    std::string path;
    long comments = 0;
    long comment_groups = 0;
    long blocks = 0;
    long satd_comments = 0;
    std::vector<assoc::SatdBlock> associations;
    std::vector<std::vector<engine::Finding>> association_findings; // parallel list
    std::vector<engine::Finding> file_findings;                     // whole-file scan
    std::vector<std::string> diagnostics;
};

// Aggregates per-file results. Statistics count distinct blocks: two SATD
// comments sharing a block contribute one SATD block (and its findings once).
// Every CWE id named by a loaded rule appears in per_cwe, zeros included.
Report build_report(std::vector<FileResult> files, const engine::RuleSet& rules,
                    std::vector<std::pair<std::string, std::string>> config_snapshot,
                    std::optional<assoc::CalibrationResult> calibration);

// Deterministic: identical reports serialize to identical bytes.
std::string emit_json(const Report& report);
std::string emit_text(const Report& report);
// SARIF 2.1.0; one rule entry per weakness rule with the CWE mitigations in
// the rule help text, one result per finding.
std::string emit_sarif(const Report& report, const engine::RuleSet& rules,
                       const cwe::Catalog* catalog);

} // namespace weaksatd::report
