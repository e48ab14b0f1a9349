#include "weaksatd/weakness_engine.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "weaksatd/errors.hpp"

namespace weaksatd::engine {

namespace fs = std::filesystem;

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// ------------------------------------------------------------- tokens

struct Token {
    enum class Kind { Ident, Number, Punct };
    Kind kind = Kind::Punct;
    std::string_view text;
    size_t offset = 0;
};

const char* kMultiCharOps[] = {"<<=", ">>=", "...", "->", "++", "--", "<<", ">>",
                               "<=",  ">=",  "==",  "!=", "&&", "||", "+=", "-=",
                               "*=",  "/=",  "%=",  "&=", "^=", "|=", "##"};

std::vector<Token> tokenize(std::string_view masked, ByteSpan span) {
    std::vector<Token> tokens;
    size_t i = span.begin;
    while (i < span.end) {
        const char c = masked[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i + 1;
            while (j < span.end && is_ident_char(masked[j])) ++j;
            tokens.push_back({Token::Kind::Ident, masked.substr(i, j - i), i});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i + 1;
            while (j < span.end && (is_ident_char(masked[j]) || masked[j] == '.')) ++j;
            tokens.push_back({Token::Kind::Number, masked.substr(i, j - i), i});
            i = j;
            continue;
        }
        size_t len = 1;
        for (const char* op : kMultiCharOps) {
            const size_t n = std::strlen(op);
            if (i + n <= span.end && masked.compare(i, n, op) == 0) {
                len = n;
                break;
            }
        }
        tokens.push_back({Token::Kind::Punct, masked.substr(i, len), i});
        i += len;
    }
    return tokens;
}

bool tok_is(const std::vector<Token>& tokens, size_t i, std::string_view text) {
    return i < tokens.size() && tokens[i].text == text;
}

// index just past the matching ')' (tokens[i] must be '(')
size_t skip_paren_group(const std::vector<Token>& tokens, size_t i) {
    int depth = 0;
    for (; i < tokens.size(); ++i) {
        if (tokens[i].text == "(") ++depth;
        else if (tokens[i].text == ")") {
            if (--depth == 0) return i + 1;
        }
    }
    return tokens.size();
}

// index of the matching '}' (tokens[i] must be '{')
size_t find_matching_brace(const std::vector<Token>& tokens, size_t i) {
    int depth = 0;
    for (; i < tokens.size(); ++i) {
        if (tokens[i].text == "{") ++depth;
        else if (tokens[i].text == "}") {
            if (--depth == 0) return i;
        }
    }
    return tokens.size();
}

// index just past the ';' ending the statement starting at i
size_t skip_statement(const std::vector<Token>& tokens, size_t i) {
    int nest = 0;
    for (; i < tokens.size(); ++i) {
        const auto& t = tokens[i].text;
        if (t == "(" || t == "[" || t == "{") ++nest;
        else if (t == ")" || t == "]" || t == "}") {
            if (nest == 0) return i; // ran out of the enclosing block
            --nest;
        } else if (t == ";" && nest == 0) {
            return i + 1;
        }
    }
    return tokens.size();
}

// skips a whole control construct starting at tokens[i] (for/while/do/switch)
size_t skip_construct(const std::vector<Token>& tokens, size_t i) {
    const std::string_view kw = tokens[i].text;
    size_t j = i + 1;
    if (kw == "for" || kw == "while" || kw == "switch") {
        if (tok_is(tokens, j, "(")) j = skip_paren_group(tokens, j);
        if (tok_is(tokens, j, "{")) return find_matching_brace(tokens, j) + 1;
        return skip_statement(tokens, j);
    }
    if (kw == "do") {
        if (tok_is(tokens, j, "{"))
            j = find_matching_brace(tokens, j) + 1;
        else
            j = skip_statement(tokens, j);
        if (tok_is(tokens, j, "while")) {
            j = skip_paren_group(tokens, j + 1);
            if (tok_is(tokens, j, ";")) ++j;
        }
        return j;
    }
    return i + 1;
}

// ------------------------------------------------------------ findings

struct DetectorContext {
    const SourceUnit& unit;
    const std::string& masked;
    ByteSpan span;
    LineRange span_lines;
    const std::vector<Token>& tokens;
};

Finding make_finding(const DetectorContext& ctx, const WeaknessRule& rule, size_t offset,
                     std::string snippet) {
    Finding f;
    f.file = ctx.unit.path;
    f.rule_id = rule.rule_id;
    f.cwe_ids = rule.cwe_ids;
    f.line = ctx.unit.line_of(offset);
    f.column = ctx.unit.column_of(offset);
    if (snippet.size() > 120) snippet.resize(120);
    f.snippet = std::move(snippet);
    f.block_span = ctx.span_lines;
    f.message = rule.message;
    return f;
}

std::string line_snippet(const DetectorContext& ctx, size_t offset) {
    std::string_view line = ctx.unit.line_text(ctx.unit.line_of(offset));
    size_t b = 0, e = line.size();
    while (b < e && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1]))) --e;
    return std::string(line.substr(b, e - b));
}

// --------------------------------------------------- pattern matching

void run_pattern_rule(const DetectorContext& ctx, const WeaknessRule& rule,
                      std::vector<Finding>& out) {
    const bool guard_prefix =
        std::find(rule.guards.begin(), rule.guards.end(), "no_identifier_prefix") !=
        rule.guards.end();

    const char* base = ctx.masked.data();
    const char* first = base + ctx.span.begin;
    const char* last = base + ctx.span.end;

    std::set<size_t> seen;
    for (const auto& re : rule.patterns) {
        for (std::cregex_iterator it(first, last, re), end; it != end; ++it) {
            const auto& m = (*it)[0];
            const size_t offset = ctx.span.begin + static_cast<size_t>(it->position(0));
            if (guard_prefix && offset > 0 && is_ident_char(ctx.masked[offset - 1])) continue;
            if (!seen.insert(offset).second) continue;
            out.push_back(make_finding(ctx, rule, offset, m.str()));
        }
    }
}

// ------------------------------------------------ structural: switch

struct SwitchArm {
    size_t label_tok = 0; // 'case' or 'default'
    bool is_case = false;
    size_t colon_tok = 0;
};

struct SwitchStmt {
    size_t keyword = 0;
    size_t open_brace = 0;
    size_t close_brace = 0;
    std::vector<SwitchArm> arms;
    int case_count = 0;
    bool has_default = false;
};

std::vector<SwitchStmt> collect_switches(const std::vector<Token>& tokens) {
    std::vector<SwitchStmt> switches;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i].kind != Token::Kind::Ident || tokens[i].text != "switch") continue;
        size_t j = i + 1;
        if (!tok_is(tokens, j, "(")) continue;
        j = skip_paren_group(tokens, j);
        if (!tok_is(tokens, j, "{")) continue;

        SwitchStmt sw;
        sw.keyword = i;
        sw.open_brace = j;
        sw.close_brace = find_matching_brace(tokens, j);

        // labels belonging to this switch: anything inside the block except
        // nested switch statements
        for (size_t k = sw.open_brace + 1; k < sw.close_brace; ++k) {
            const auto& t = tokens[k];
            if (t.kind != Token::Kind::Ident) continue;
            if (t.text == "switch") {
                k = std::max(skip_construct(tokens, k), k + 2) - 1;
                continue;
            }
            if (t.text != "case" && t.text != "default") continue;
            SwitchArm arm;
            arm.label_tok = k;
            arm.is_case = t.text == "case";
            size_t colon = k + 1;
            while (colon < sw.close_brace && tokens[colon].text != ":") ++colon;
            arm.colon_tok = colon;
            sw.arms.push_back(arm);
            if (arm.is_case) ++sw.case_count;
            else sw.has_default = true;
            k = colon;
        }
        switches.push_back(std::move(sw));
    }
    return switches;
}

void detect_missing_default(const DetectorContext& ctx, const WeaknessRule& rule,
                            std::vector<Finding>& out) {
    for (const auto& sw : collect_switches(ctx.tokens)) {
        if (sw.case_count >= 1 && !sw.has_default) {
            const size_t offset = ctx.tokens[sw.keyword].offset;
            out.push_back(make_finding(ctx, rule, offset, line_snippet(ctx, offset)));
        }
    }
}

bool fallthrough_comment_between(const SourceUnit& unit, size_t from, size_t to) {
    static const std::regex kFallthrough("falls?[-_ ]?through",
                                         std::regex::icase | std::regex::optimize);
    for (const auto& c : unit.comments) {
        if (c.span.begin < from || c.span.begin >= to) continue;
        if (std::regex_search(c.text, kFallthrough)) return true;
    }
    return false;
}

void detect_omitted_break(const DetectorContext& ctx, const WeaknessRule& rule,
                          std::vector<Finding>& out) {
    const auto& tokens = ctx.tokens;
    for (const auto& sw : collect_switches(tokens)) {
        for (size_t a = 0; a + 1 < sw.arms.size(); ++a) {
            const SwitchArm& arm = sw.arms[a];
            if (!arm.is_case) continue; // only case arms are reported
            const size_t arm_end = sw.arms[a + 1].label_tok;

            bool terminated = false;
            bool has_statement = false;
            size_t i = arm.colon_tok + 1;
            while (i < arm_end) {
                const auto& t = tokens[i];
                if (t.kind == Token::Kind::Ident &&
                    (t.text == "switch" || t.text == "for" || t.text == "while" ||
                     t.text == "do")) {
                    // break/continue inside a loop or nested switch bind to
                    // that construct, not to this arm
                    has_statement = true;
                    i = std::max(skip_construct(tokens, i), i + 1);
                    continue;
                }
                if (t.kind == Token::Kind::Ident &&
                    (t.text == "break" || t.text == "return" || t.text == "goto" ||
                     t.text == "continue")) {
                    terminated = true;
                    break;
                }
                if (t.text != ";") has_statement = true;
                ++i;
            }
            if (!has_statement || terminated) continue;
            if (fallthrough_comment_between(ctx.unit, tokens[arm.label_tok].offset,
                                            tokens[arm_end].offset))
                continue;
            const size_t offset = tokens[arm.label_tok].offset;
            out.push_back(make_finding(ctx, rule, offset, line_snippet(ctx, offset)));
        }
    }
}

// ------------------------------------- structural: block delimitation

void detect_block_delimitation(const DetectorContext& ctx, const WeaknessRule& rule,
                               std::vector<Finding>& out) {
    const auto& tokens = ctx.tokens;
    for (size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        if (t.kind != Token::Kind::Ident) continue;

        size_t body;
        if (t.text == "if" || t.text == "for" || t.text == "while") {
            if (!tok_is(tokens, i + 1, "(")) continue;
            body = skip_paren_group(tokens, i + 1);
        } else if (t.text == "else") {
            if (tok_is(tokens, i + 1, "if")) continue; // handled by the if
            body = i + 1;
        } else {
            continue;
        }
        if (body >= tokens.size()) continue;

        const Token& bt = tokens[body];
        if (bt.text == "{" || bt.text == ";" || bt.text == "case" || bt.text == "default")
            continue;

        const int control_line = ctx.unit.line_of(t.offset);
        const int body_line = ctx.unit.line_of(bt.offset);
        const int body_col = ctx.unit.column_of(bt.offset);
        if (body_line <= control_line) continue;

        const size_t end = skip_statement(tokens, body);
        if (end == 0 || end >= tokens.size() || tokens[end - 1].text != ";") continue;

        const Token& next = tokens[end];
        if (next.text == "else" || next.text == "}" || next.text == "{" ||
            next.text == "case" || next.text == "default" || next.text == "while")
            continue;
        const int next_line = ctx.unit.line_of(next.offset);
        const int next_col = ctx.unit.column_of(next.offset);
        if (next_line > ctx.unit.line_of(tokens[end - 1].offset) && next_col == body_col)
            out.push_back(make_finding(ctx, rule, t.offset, line_snippet(ctx, t.offset)));
    }
}

// ------------------------------------------ structural: precedence

bool is_operand(const Token& t) {
    return t.kind == Token::Kind::Ident || t.kind == Token::Kind::Number;
}

void detect_precedence(const DetectorContext& ctx, const WeaknessRule& rule,
                       std::vector<Finding>& out) {
    const auto& tokens = ctx.tokens;
    std::set<size_t> seen;
    auto emit = [&](size_t tok_index) {
        const size_t offset = tokens[tok_index].offset;
        if (seen.insert(offset).second)
            out.push_back(make_finding(ctx, rule, offset, line_snippet(ctx, offset)));
    };

    for (size_t i = 0; i + 2 < tokens.size(); ++i) {
        const auto& t = tokens[i];
        // x & MASK == 0  parses as  x & (MASK == 0)
        if ((t.text == "&" || t.text == "|") && i > 0) {
            const auto& prev = tokens[i - 1];
            const bool binary = is_operand(prev) || prev.text == ")" || prev.text == "]";
            if (binary && is_operand(tokens[i + 1]) &&
                (tokens[i + 2].text == "==" || tokens[i + 2].text == "!="))
                emit(i);
        }
        // x == 0 & y  parses as  (x == 0) & y
        if ((t.text == "==" || t.text == "!=") && is_operand(tokens[i + 1]) &&
            (tokens[i + 2].text == "&" || tokens[i + 2].text == "|"))
            emit(i + 2);
    }
}

// ---------------------------------------- structural: chroot jail

void detect_chroot(const DetectorContext& ctx, const WeaknessRule& rule,
                   std::vector<Finding>& out) {
    const auto& tokens = ctx.tokens;
    for (size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (tokens[i].kind != Token::Kind::Ident || tokens[i].text != "chroot") continue;
        if (!tok_is(tokens, i + 1, "(")) continue;

        // search limit: end of the innermost block containing the call
        size_t limit = ctx.span.end;
        const Block* innermost = nullptr;
        for (const auto& b : ctx.unit.blocks) {
            if (!b.span.contains(tokens[i].offset)) continue;
            if (innermost == nullptr || b.depth > innermost->depth) innermost = &b;
        }
        if (innermost != nullptr) limit = std::min(limit, innermost->span.end);

        bool has_chdir = false;
        for (size_t j = i + 2; j < tokens.size() && tokens[j].offset < limit; ++j) {
            if (tokens[j].kind == Token::Kind::Ident && tokens[j].text == "chdir" &&
                tok_is(tokens, j + 1, "(")) {
                has_chdir = true;
                break;
            }
        }
        if (!has_chdir)
            out.push_back(
                make_finding(ctx, rule, tokens[i].offset, line_snippet(ctx, tokens[i].offset)));
    }
}

using DetectorFn = void (*)(const DetectorContext&, const WeaknessRule&,
                            std::vector<Finding>&);

const std::vector<std::pair<std::string, DetectorFn>>& detector_registry() {
    static const std::vector<std::pair<std::string, DetectorFn>> kDetectors = {
        {"switch_missing_default", detect_missing_default},
        {"switch_omitted_break", detect_omitted_break},
        {"unbraced_body_indent", detect_block_delimitation},
        {"bitwise_eq_precedence", detect_precedence},
        {"chroot_without_chdir", detect_chroot},
    };
    return kDetectors;
}

DetectorFn detector_by_name(const std::string& name) {
    for (const auto& [n, fn] : detector_registry())
        if (n == name) return fn;
    return nullptr;
}

// ----------------------------------------------------------- loading

uint64_t fnv1a(uint64_t h, std::string_view bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

bool has_backreference(const std::string& pattern) {
    for (size_t i = 0; i + 1 < pattern.size(); ++i)
        if (pattern[i] == '\\' && pattern[i + 1] >= '1' && pattern[i + 1] <= '9') return true;
    return false;
}

WeaknessRule parse_rule(const nlohmann::json& j, const std::string& file) {
    WeaknessRule rule;
    try {
        rule.rule_id = j.at("rule_id").get<std::string>();
        rule.cwe_ids = j.at("cwe_ids").get<std::vector<int>>();
        const std::string kind = j.at("kind").get<std::string>();
        rule.message = j.at("message").get<std::string>();
        rule.mitigation_ref = j.at("mitigation_ref").get<int>();
        rule.inheritable = j.value("inheritable", false);
        rule.guards = j.value("guards", std::vector<std::string>{});

        if (rule.cwe_ids.empty()) throw ConfigError(file + ": cwe_ids must not be empty");

        if (kind == "pattern") {
            rule.kind = RuleKind::Pattern;
            rule.pattern_texts = j.at("patterns").get<std::vector<std::string>>();
            if (rule.pattern_texts.empty())
                throw ConfigError(file + ": pattern rule needs at least one pattern");
            for (const auto& text : rule.pattern_texts) {
                if (has_backreference(text))
                    throw ConfigError(file + ": backreferences are not allowed: " + text);
                try {
                    rule.patterns.emplace_back(text,
                                               std::regex::ECMAScript | std::regex::optimize);
                } catch (const std::regex_error& e) {
                    throw ConfigError(file + ": invalid pattern '" + text + "': " + e.what());
                }
            }
        } else if (kind == "structural") {
            rule.kind = RuleKind::Structural;
            rule.detector = j.at("detector").get<std::string>();
            if (detector_by_name(rule.detector) == nullptr)
                throw ConfigError(file + ": unknown structural detector: " + rule.detector);
        } else {
            throw ConfigError(file + ": unknown rule kind: " + kind);
        }

        for (const auto& guard : rule.guards)
            if (guard != "no_identifier_prefix")
                throw ConfigError(file + ": unknown guard: " + guard);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(file + ": malformed rule file: " + e.what());
    }
    return rule;
}

} // namespace

const std::vector<std::string>& structural_detector_names() {
    static const std::vector<std::string> kNames = [] {
        std::vector<std::string> names;
        for (const auto& [name, fn] : detector_registry()) names.push_back(name);
        return names;
    }();
    return kNames;
}

RuleSet load_rules(const std::string& rule_dir) {
    RuleSet set;
    if (!fs::exists(rule_dir)) throw ConfigError("rule directory does not exist: " + rule_dir);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(rule_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    uint64_t hash = 1469598103934665603ULL;
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot read rule file: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string bytes = buf.str();
        hash = fnv1a(hash, path.filename().string());
        hash = fnv1a(hash, std::string_view("\0", 1));
        hash = fnv1a(hash, bytes);

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(bytes);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(path.string() + ": invalid JSON: " + e.what());
        }
        set.rules.push_back(parse_rule(j, path.string()));
    }

    std::sort(set.rules.begin(), set.rules.end(),
              [](const WeaknessRule& a, const WeaknessRule& b) { return a.rule_id < b.rule_id; });
    for (size_t i = 1; i < set.rules.size(); ++i)
        if (set.rules[i].rule_id == set.rules[i - 1].rule_id)
            throw ConfigError("duplicate rule_id: " + set.rules[i].rule_id);

    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
    set.hash = hex;
    if (set.rules.empty())
        set.warnings.push_back("rule directory contains no rules: " + rule_dir);
    return set;
}

namespace {

std::vector<Finding> scan_span(const SourceUnit& unit, const std::string& masked, ByteSpan span,
                               LineRange span_lines, const RuleSet& rules) {
    const auto tokens = tokenize(masked, span);
    DetectorContext ctx{unit, masked, span, span_lines, tokens};

    std::vector<Finding> findings;
    for (const auto& rule : rules.rules) {
        if (rule.kind == RuleKind::Pattern)
            run_pattern_rule(ctx, rule, findings);
        else
            detector_by_name(rule.detector)(ctx, rule, findings);
    }
    std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
        return std::tie(a.line, a.column, a.rule_id) < std::tie(b.line, b.column, b.rule_id);
    });
    return findings;
}

} // namespace

std::vector<Finding> scan_block(const SourceUnit& unit, const Block& block,
                                const RuleSet& rules) {
    const std::string masked = code_only_view(unit);
    const int header = std::min(block.header_start_line, block.start_line);
    const size_t begin = unit.line_index[static_cast<size_t>(header - 1)];
    return scan_span(unit, masked, {begin, block.span.end}, {header, block.end_line}, rules);
}

std::vector<Finding> scan_file(const SourceUnit& unit, const RuleSet& rules) {
    const std::string masked = code_only_view(unit);
    return scan_span(unit, masked, {0, unit.text.size()}, {1, unit.line_count()}, rules);
}

void attach_mitigations(std::vector<Finding>& findings, const cwe::Catalog& catalog,
                        const RuleSet& rules, std::vector<std::string>* diagnostics) {
    std::set<int> reported_missing;
    for (auto& finding : findings) {
        int ref = 0;
        for (const auto& rule : rules.rules)
            if (rule.rule_id == finding.rule_id) {
                ref = rule.mitigation_ref;
                break;
            }
        const auto mitigations = mitigation_for(catalog, ref);
        if (!mitigations.has_value()) {
            if (diagnostics != nullptr && reported_missing.insert(ref).second)
                diagnostics->push_back("CWE-" + std::to_string(ref) +
                                      " not present in catalog; no mitigations attached");
            continue;
        }
        finding.mitigations.clear();
        for (const auto& m : *mitigations)
            finding.mitigations.push_back(
                m.phases.empty() ? m.advice : m.phases + ": " + m.advice);
    }
}

} // namespace weaksatd::engine
