#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace weaksatd::cwe {

enum class RelationNature { ChildOf, ParentOf, MemberOf, Other };

const char* to_string(RelationNature nature);
RelationNature nature_from_string(std::string_view name);

struct Relationship {
    RelationNature nature = RelationNature::Other;
    std::string nature_text; // catalog spelling, kept verbatim
    int target_id = 0;
};

struct CodeExample {
    std::string language;
    std::string code;
};

struct Mitigation {
    std::string phases;
    std::string advice;
};

struct CweIssue {
    int id = 0;
    std::string name;
    std::string abstraction; // Base/Variant/Class/...; empty for categories
    std::string description;
    std::string extended_description;
    std::set<std::string> languages;
    std::vector<Relationship> relationships;
    std::vector<CodeExample> examples;
    std::vector<Mitigation> mitigations;
    std::string likelihood;
    std::vector<std::string> raw_fields; // compound subfields we could not parse

    bool operator==(const CweIssue&) const = default;
};

struct CatalogFilter {
    bool require_software = true;
    std::string require_language = "C";
    std::string require_code_example_in = "C";
};

struct Catalog {
    std::vector<CweIssue> issues;
    std::vector<std::string> diagnostics;

    const CweIssue* find(int id) const;
};

// Reads a catalog export. CSV exports use the catalog's packed
// ::KEY:value:KEY:value:: encoding for compound columns; files ending in
// .json are treated as a previously exported snapshot. Unparseable compound
// subfields are kept as raw text with a diagnostic, never dropped.
// Throws IoError (unreadable) or FormatError (missing id/name columns,
// empty file).
Catalog import_catalog(const std::string& export_file);

// Keeps issues that are software weaknesses (non-empty abstraction), list the
// required language, and carry at least one code example in that language.
std::vector<CweIssue> filter_issues(const std::vector<CweIssue>& issues,
                                    const CatalogFilter& filter);

struct HeuristicTarget {
    int issue_id = 0;
    int inherited_from = 0; // issue whose heuristic applies (self when own)
    bool needs_rule = false;

    bool operator==(const HeuristicTarget&) const = default;
};

// Metadata about shipped rules: which CWE ids have their own heuristic, and
// whether children may reuse it.
struct RuleCoverage {
    std::set<int> covered;     // ids some rule lists directly
    std::set<int> inheritable; // covered ids whose rule children may reuse
};

// Maps each issue onto the heuristic it should use: its own when a rule
// covers it, else the nearest ChildOf ancestor with an inheritable rule.
// Relationship cycles are reported as diagnostics and their members kept
// distinct.
std::vector<HeuristicTarget> collapse_for_heuristics(const std::vector<CweIssue>& issues,
                                                     const RuleCoverage& coverage,
                                                     std::vector<std::string>* diagnostics);

// Mitigations verbatim, in catalog order. Nullopt when the id is unknown.
std::optional<std::vector<Mitigation>> mitigation_for(const Catalog& catalog, int issue_id);

// Normalized JSON snapshot with stable key ordering. import_catalog() reads
// it back to an identical issue list.
std::string export_catalog_json(const Catalog& catalog);

} // namespace weaksatd::cwe
