#include "weaksatd/cwe_catalog.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "weaksatd/errors.hpp"

namespace weaksatd::cwe {

using ordered_json = nlohmann::ordered_json;

const char* to_string(RelationNature nature) {
    switch (nature) {
    case RelationNature::ChildOf: return "ChildOf";
    case RelationNature::ParentOf: return "ParentOf";
    case RelationNature::MemberOf: return "MemberOf";
    case RelationNature::Other: return "Other";
    }
    return "?";
}

RelationNature nature_from_string(std::string_view name) {
    if (name == "ChildOf") return RelationNature::ChildOf;
    if (name == "ParentOf") return RelationNature::ParentOf;
    if (name == "MemberOf") return RelationNature::MemberOf;
    return RelationNature::Other;
}

const CweIssue* Catalog::find(int id) const {
    for (const auto& issue : issues)
        if (issue.id == id) return &issue;
    return nullptr;
}

namespace {

// ---------------------------------------------------------------- CSV

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    size_t i = 0;
    const size_t n = text.size();

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };

    while (i < n) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                } else {
                    quoted = false;
                    ++i;
                }
            } else {
                field.push_back(c);
                ++i;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
            ++i;
        } else if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
            end_row();
            i += 2;
        } else if (c == '\n') {
            end_row();
            ++i;
        } else {
            field.push_back(c);
            ++i;
        }
    }
    if (!field.empty() || !row.empty()) end_row();
    return rows;
}

// --------------------------------------------- packed compound fields
//
// Compound columns pack their records as ::KEY:value:KEY:value:: with
// double-colon record separators. Values may themselves contain colons
// (code snippets, URLs), so records are recognized by known key names and
// anything that does not parse is preserved verbatim.

using Pairs = std::vector<std::pair<std::string, std::string>>;

bool starts_with_key(const std::string& text, size_t pos,
                     const std::vector<std::string>& keys, std::string* which) {
    for (const auto& key : keys) {
        if (text.compare(pos, key.size(), key) == 0 && pos + key.size() < text.size() &&
            text[pos + key.size()] == ':') {
            *which = key;
            return true;
        }
    }
    return false;
}

std::optional<Pairs> parse_packed_record(const std::string& record,
                                         const std::vector<std::string>& keys) {
    Pairs pairs;
    std::string key;
    if (!starts_with_key(record, 0, keys, &key)) return std::nullopt;

    size_t pos = 0;
    while (pos < record.size()) {
        std::string current;
        if (!starts_with_key(record, pos, keys, &current)) return std::nullopt;
        const size_t value_start = pos + current.size() + 1;
        size_t next = std::string::npos;
        for (size_t p = value_start; p < record.size(); ++p) {
            std::string probe;
            if (record[p - 1] == ':' && starts_with_key(record, p, keys, &probe)) {
                next = p;
                break;
            }
        }
        if (next == std::string::npos) {
            pairs.emplace_back(current, record.substr(value_start));
            break;
        }
        pairs.emplace_back(current, record.substr(value_start, next - 1 - value_start));
        pos = next;
    }
    return pairs;
}

// Splits on :: and re-joins pieces that are actually value text containing
// a double colon (e.g. C++ scope operators inside code examples).
std::vector<std::string> split_packed_records(const std::string& field,
                                              const std::vector<std::string>& keys) {
    std::vector<std::string> pieces;
    size_t pos = 0;
    while (pos <= field.size()) {
        const size_t sep = field.find("::", pos);
        if (sep == std::string::npos) {
            pieces.push_back(field.substr(pos));
            break;
        }
        pieces.push_back(field.substr(pos, sep - pos));
        pos = sep + 2;
    }

    std::vector<std::string> records;
    std::string probe;
    for (auto& piece : pieces) {
        if (piece.empty()) continue;
        if (!records.empty() && !starts_with_key(piece, 0, keys, &probe))
            records.back() += "::" + piece;
        else
            records.push_back(std::move(piece));
    }
    return records;
}

const std::vector<std::string> kRelationKeys = {"NATURE", "CWE ID", "VIEW ID", "ORDINAL"};
const std::vector<std::string> kPlatformKeys = {
    "LANGUAGE NAME",         "LANGUAGE CLASS",         "LANGUAGE PREVALENCE",
    "OPERATING SYSTEM NAME", "OPERATING SYSTEM CLASS", "OPERATING SYSTEM PREVALENCE",
    "ARCHITECTURE NAME",     "ARCHITECTURE CLASS",     "ARCHITECTURE PREVALENCE",
    "TECHNOLOGY NAME",       "TECHNOLOGY CLASS",       "TECHNOLOGY PREVALENCE"};
const std::vector<std::string> kMitigationKeys = {"PHASE",         "STRATEGY",
                                                  "DESCRIPTION",   "EFFECTIVENESS",
                                                  "EFFECTIVENESS NOTES", "MITIGATION ID"};
const std::vector<std::string> kExampleKeys = {"LANGUAGE", "CODE", "TEXT"};

std::string pair_value(const Pairs& pairs, const std::string& key) {
    for (const auto& [k, v] : pairs)
        if (k == key) return v;
    return {};
}

void parse_relationships(const std::string& field, CweIssue& issue,
                         std::vector<std::string>& diagnostics) {
    for (const auto& record : split_packed_records(field, kRelationKeys)) {
        const auto pairs = parse_packed_record(record, kRelationKeys);
        int target = 0;
        if (pairs) {
            const std::string id_text = pair_value(*pairs, "CWE ID");
            target = std::atoi(id_text.c_str());
        }
        if (!pairs || target <= 0) {
            issue.raw_fields.push_back("Related Weaknesses: " + record);
            diagnostics.push_back("CWE-" + std::to_string(issue.id) +
                                  ": unparseable relationship record kept as raw text");
            continue;
        }
        Relationship rel;
        rel.nature_text = pair_value(*pairs, "NATURE");
        rel.nature = nature_from_string(rel.nature_text);
        rel.target_id = target;
        issue.relationships.push_back(std::move(rel));
    }
}

void parse_platforms(const std::string& field, CweIssue& issue,
                     std::vector<std::string>& diagnostics) {
    for (const auto& record : split_packed_records(field, kPlatformKeys)) {
        const auto pairs = parse_packed_record(record, kPlatformKeys);
        if (!pairs) {
            issue.raw_fields.push_back("Applicable Platforms: " + record);
            diagnostics.push_back("CWE-" + std::to_string(issue.id) +
                                  ": unparseable platform record kept as raw text");
            continue;
        }
        for (const auto& [key, value] : *pairs)
            if ((key == "LANGUAGE NAME" || key == "LANGUAGE CLASS") && !value.empty())
                issue.languages.insert(value);
    }
}

void parse_mitigations(const std::string& field, CweIssue& issue,
                       std::vector<std::string>& diagnostics) {
    for (const auto& record : split_packed_records(field, kMitigationKeys)) {
        const auto pairs = parse_packed_record(record, kMitigationKeys);
        if (!pairs) {
            issue.raw_fields.push_back("Potential Mitigations: " + record);
            diagnostics.push_back("CWE-" + std::to_string(issue.id) +
                                  ": unparseable mitigation record kept as raw text");
            continue;
        }
        Mitigation m;
        m.phases = pair_value(*pairs, "PHASE");
        m.advice = pair_value(*pairs, "DESCRIPTION");
        issue.mitigations.push_back(std::move(m));
    }
}

void parse_examples(const std::string& field, CweIssue& issue,
                    std::vector<std::string>& diagnostics) {
    for (const auto& record : split_packed_records(field, kExampleKeys)) {
        const auto pairs = parse_packed_record(record, kExampleKeys);
        if (!pairs) {
            issue.raw_fields.push_back("Demonstrative Examples: " + record);
            diagnostics.push_back("CWE-" + std::to_string(issue.id) +
                                  ": unparseable example record kept as raw text");
            continue;
        }
        CodeExample ex;
        ex.language = pair_value(*pairs, "LANGUAGE");
        ex.code = pair_value(*pairs, "CODE");
        issue.examples.push_back(std::move(ex));
    }
}

Catalog import_csv(const std::string& text, const std::string& origin) {
    const auto rows = read_csv(text);
    if (rows.empty()) throw FormatError(origin + ": empty catalog export");

    std::map<std::string, size_t> columns;
    for (size_t i = 0; i < rows[0].size(); ++i) columns[rows[0][i]] = i;

    std::vector<std::string> missing;
    for (const char* required : {"CWE-ID", "Name"})
        if (!columns.contains(required)) missing.push_back(required);
    if (!missing.empty()) {
        std::string report = origin + ": missing required columns:";
        for (const auto& m : missing) report += " " + m;
        throw FormatError(report);
    }

    auto cell = [&](const std::vector<std::string>& row, const char* name) -> std::string {
        auto it = columns.find(name);
        if (it == columns.end() || it->second >= row.size()) return {};
        return row[it->second];
    };

    Catalog catalog;
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.empty() || (row.size() == 1 && row[0].empty())) continue;
        CweIssue issue;
        issue.id = std::atoi(cell(row, "CWE-ID").c_str());
        if (issue.id <= 0) {
            catalog.diagnostics.push_back(origin + ": row " + std::to_string(r + 1) +
                                          " has no usable CWE-ID, skipped");
            continue;
        }
        issue.name = cell(row, "Name");
        issue.abstraction = cell(row, "Weakness Abstraction");
        issue.description = cell(row, "Description");
        issue.extended_description = cell(row, "Extended Description");
        issue.likelihood = cell(row, "Likelihood of Exploit");
        parse_relationships(cell(row, "Related Weaknesses"), issue, catalog.diagnostics);
        parse_platforms(cell(row, "Applicable Platforms"), issue, catalog.diagnostics);
        parse_mitigations(cell(row, "Potential Mitigations"), issue, catalog.diagnostics);
        parse_examples(cell(row, "Demonstrative Examples"), issue, catalog.diagnostics);
        catalog.issues.push_back(std::move(issue));
    }
    if (catalog.issues.empty()) throw FormatError(origin + ": catalog export has no rows");
    return catalog;
}

// ------------------------------------------------------- JSON snapshot

ordered_json issue_to_json(const CweIssue& issue) {
    ordered_json j;
    j["id"] = issue.id;
    j["name"] = issue.name;
    j["abstraction"] = issue.abstraction;
    j["description"] = issue.description;
    j["extended_description"] = issue.extended_description;
    j["languages"] = issue.languages;
    j["relationships"] = ordered_json::array();
    for (const auto& rel : issue.relationships)
        j["relationships"].push_back(
            {{"nature", rel.nature_text}, {"target_id", rel.target_id}});
    j["examples"] = ordered_json::array();
    for (const auto& ex : issue.examples)
        j["examples"].push_back({{"language", ex.language}, {"code", ex.code}});
    j["mitigations"] = ordered_json::array();
    for (const auto& m : issue.mitigations)
        j["mitigations"].push_back({{"phases", m.phases}, {"advice", m.advice}});
    j["likelihood"] = issue.likelihood;
    j["raw_fields"] = issue.raw_fields;
    return j;
}

CweIssue issue_from_json(const ordered_json& j) {
    CweIssue issue;
    issue.id = j.at("id").get<int>();
    issue.name = j.at("name").get<std::string>();
    issue.abstraction = j.value("abstraction", "");
    issue.description = j.value("description", "");
    issue.extended_description = j.value("extended_description", "");
    for (const auto& lang : j.value("languages", ordered_json::array()))
        issue.languages.insert(lang.get<std::string>());
    for (const auto& rel : j.value("relationships", ordered_json::array())) {
        Relationship r;
        r.nature_text = rel.value("nature", "");
        r.nature = nature_from_string(r.nature_text);
        r.target_id = rel.value("target_id", 0);
        issue.relationships.push_back(std::move(r));
    }
    for (const auto& ex : j.value("examples", ordered_json::array()))
        issue.examples.push_back({ex.value("language", ""), ex.value("code", "")});
    for (const auto& m : j.value("mitigations", ordered_json::array()))
        issue.mitigations.push_back({m.value("phases", ""), m.value("advice", "")});
    issue.likelihood = j.value("likelihood", "");
    for (const auto& raw : j.value("raw_fields", ordered_json::array()))
        issue.raw_fields.push_back(raw.get<std::string>());
    return issue;
}

Catalog import_json(const std::string& text, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(origin + ": invalid JSON snapshot: " + e.what());
    }
    if (!j.contains("issues")) throw FormatError(origin + ": snapshot lacks an issues array");
    Catalog catalog;
    for (const auto& item : j["issues"]) catalog.issues.push_back(issue_from_json(item));
    if (catalog.issues.empty()) throw FormatError(origin + ": snapshot has no issues");
    return catalog;
}

} // namespace

Catalog import_catalog(const std::string& export_file) {
    std::ifstream in(export_file, std::ios::binary);
    if (!in) throw IoError("cannot read catalog export: " + export_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);
    if (text.empty()) throw FormatError(export_file + ": empty catalog export");

    if (export_file.ends_with(".json") || text.starts_with('{'))
        return import_json(text, export_file);
    return import_csv(text, export_file);
}

std::vector<CweIssue> filter_issues(const std::vector<CweIssue>& issues,
                                    const CatalogFilter& filter) {
    std::vector<CweIssue> kept;
    for (const auto& issue : issues) {
        if (filter.require_software && issue.abstraction.empty()) continue;
        if (!filter.require_language.empty() &&
            !issue.languages.contains(filter.require_language))
            continue;
        if (!filter.require_code_example_in.empty()) {
            const bool has_example =
                std::any_of(issue.examples.begin(), issue.examples.end(),
                            [&](const CodeExample& ex) {
                                return ex.language == filter.require_code_example_in;
                            });
            if (!has_example) continue;
        }
        kept.push_back(issue);
    }
    return kept;
}

std::vector<HeuristicTarget> collapse_for_heuristics(const std::vector<CweIssue>& issues,
                                                     const RuleCoverage& coverage,
                                                     std::vector<std::string>* diagnostics) {
    std::map<int, const CweIssue*> by_id;
    for (const auto& issue : issues) by_id[issue.id] = &issue;

    std::vector<HeuristicTarget> targets;
    for (const auto& issue : issues) {
        HeuristicTarget target;
        target.issue_id = issue.id;
        target.inherited_from = issue.id;

        if (coverage.covered.contains(issue.id)) {
            targets.push_back(target);
            continue;
        }

        // nearest ChildOf ancestor with an inheritable rule (breadth-first)
        std::vector<int> frontier{issue.id};
        std::set<int> visited{issue.id};
        int found = 0;
        bool cycle = false;
        while (!frontier.empty() && found == 0) {
            std::vector<int> next;
            for (int id : frontier) {
                auto it = by_id.find(id);
                if (it == by_id.end()) continue; // dangling target, tolerated
                for (const auto& rel : it->second->relationships) {
                    if (rel.nature != RelationNature::ChildOf) continue;
                    if (visited.contains(rel.target_id)) {
                        cycle = true;
                        continue;
                    }
                    visited.insert(rel.target_id);
                    if (coverage.inheritable.contains(rel.target_id)) {
                        found = rel.target_id;
                        break;
                    }
                    next.push_back(rel.target_id);
                }
                if (found != 0) break;
            }
            frontier = std::move(next);
        }

        if (cycle && diagnostics != nullptr)
            diagnostics->push_back("CWE-" + std::to_string(issue.id) +
                                   ": ChildOf relationship cycle detected; issue kept distinct");
        if (found != 0)
            target.inherited_from = found;
        else
            target.needs_rule = true;
        targets.push_back(target);
    }
    return targets;
}

std::optional<std::vector<Mitigation>> mitigation_for(const Catalog& catalog, int issue_id) {
    const CweIssue* issue = catalog.find(issue_id);
    if (issue == nullptr) return std::nullopt;
    return issue->mitigations;
}

std::string export_catalog_json(const Catalog& catalog) {
    ordered_json j;
    j["format"] = "weaksatd-cwe-snapshot";
    j["issues"] = ordered_json::array();
    for (const auto& issue : catalog.issues) j["issues"].push_back(issue_to_json(issue));
    return j.dump(2) + "\n";
}

} // namespace weaksatd::cwe
