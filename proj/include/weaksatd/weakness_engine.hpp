#pragma once

#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "weaksatd/cwe_catalog.hpp"
#include "weaksatd/source_model.hpp"

namespace weaksatd::engine {

enum class RuleKind { Pattern, Structural };

struct WeaknessRule {
    std::string rule_id;
    std::vector<int> cwe_ids; // shared heuristics list several ids
    RuleKind kind = RuleKind::Pattern;
    std::vector<std::string> pattern_texts;
    std::vector<std::regex> patterns;
    std::string detector; // structural rules only
    std::vector<std::string> guards;
    std::string message;
    int mitigation_ref = 0;
    bool inheritable = false; // children of these CWEs may reuse this rule
};

struct RuleSet {
    std::vector<WeaknessRule> rules; // sorted by rule_id
    std::string hash;                // changes iff any rule file byte changes
    std::vector<std::string> warnings;
};

struct LineRange {
    int start_line = 0;
    int end_line = 0;
};

struct Finding {
    std::string file;
    std::string rule_id;
    std::vector<int> cwe_ids;
    int line = 0;   // 1-based
    int column = 0; // 1-based byte column
    std::string snippet;
    LineRange block_span; // scanned range, header line included
    std::string message;
    std::vector<std::string> mitigations;
};

// Loads every *.json rule file in rule_dir (sorted by name). Pattern syntax
// is validated at load time; a malformed pattern, unknown guard or unknown
// structural detector raises ConfigError naming the offending file. An empty
// directory yields zero rules and a warning. Backreferences are rejected to
// keep rules portable across regex engines.
RuleSet load_rules(const std::string& rule_dir);

// Names accepted in a rule's "detector" field.
const std::vector<std::string>& structural_detector_names();

// Scans the block, header line included. Pattern rules run over the
// code-only text (comments, literals and preprocessor lines blanked); the
// no_identifier_prefix guard drops matches preceded by [A-Za-z0-9_].
// Structural detectors work on a token approximation. Findings are sorted by
// (line, column, rule_id) and carry no mitigations yet.
std::vector<Finding> scan_block(const SourceUnit& unit, const Block& block,
                                const RuleSet& rules);

// Same scan over the entire file (used for repository-wide statistics).
std::vector<Finding> scan_file(const SourceUnit& unit, const RuleSet& rules);

// Resolves each finding's mitigation_ref against the catalog. A missing
// catalog entry leaves the list empty and adds a diagnostic.
void attach_mitigations(std::vector<Finding>& findings, const cwe::Catalog& catalog,
                        const RuleSet& rules, std::vector<std::string>* diagnostics);

} // namespace weaksatd::engine
