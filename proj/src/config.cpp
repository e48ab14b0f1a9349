#include "weaksatd/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "weaksatd/association.hpp"
#include "weaksatd/errors.hpp"

#ifndef WEAKSATD_DATA_DIR
#define WEAKSATD_DATA_DIR ""
#endif

namespace weaksatd {

const char* to_string(FailOn fail_on) {
    switch (fail_on) {
    case FailOn::None: return "none";
    case FailOn::AnySatd: return "any-satd";
    case FailOn::WeakSatd: return "weak-satd";
    }
    return "?";
}

std::optional<FailOn> fail_on_from_string(std::string_view name) {
    if (name == "none") return FailOn::None;
    if (name == "any-satd") return FailOn::AnySatd;
    if (name == "weak-satd") return FailOn::WeakSatd;
    return std::nullopt;
}

std::string default_data_dir() {
    if (const char* env = std::getenv("WEAKSATD_DATA"); env != nullptr && *env != '\0')
        return env;
    return WEAKSATD_DATA_DIR;
}

std::string Config::resolved_patterns_file() const {
    return patterns_file.empty() ? default_data_dir() + "/satd_patterns.txt" : patterns_file;
}

std::string Config::resolved_rules_dir() const {
    return rules_dir.empty() ? default_data_dir() + "/rules" : rules_dir;
}

std::string Config::resolved_catalog() const {
    return cwe_catalog.empty() ? default_data_dir() + "/cwe/cwe_catalog.csv" : cwe_catalog;
}

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ",";
        out += item;
    }
    return out;
}

} // namespace

std::vector<std::pair<std::string, std::string>> Config::snapshot() const {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("include", join(include));
    kv.emplace_back("exclude", join(exclude));
    kv.emplace_back("satd.exclude",
                    satd_exclude.has_value() ? join(*satd_exclude) : "(default)");
    kv.emplace_back("assoc.policy", assoc_policy);
    kv.emplace_back("assoc.max_gap_lines", std::to_string(max_gap_lines));
    kv.emplace_back("assoc.alpha", std::to_string(alpha));
    kv.emplace_back("rules.dir", resolved_rules_dir());
    kv.emplace_back("cwe.catalog", resolved_catalog());
    kv.emplace_back("satd.patterns", resolved_patterns_file());
    kv.emplace_back("output.format", output_format);
    kv.emplace_back("ci.fail_on", to_string(fail_on));
    kv.emplace_back("threads", threads == 0 ? "auto" : std::to_string(threads));
    return kv;
}

namespace {

struct Value {
    std::string scalar;
    std::vector<std::string> list;
    bool is_list = false;
};

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string unquote(const std::string& s, const std::string& where) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'')) {
        if (s.back() != s.front())
            throw ConfigError(where + ": unterminated quoted string: " + s);
        return s.substr(1, s.size() - 2);
    }
    return s;
}

Value parse_value(const std::string& raw, const std::string& where) {
    Value v;
    if (raw.starts_with('[')) {
        if (!raw.ends_with(']')) throw ConfigError(where + ": unterminated list: " + raw);
        v.is_list = true;
        std::string inner = raw.substr(1, raw.size() - 2);
        std::string item;
        bool quoted = false;
        char quote = 0;
        for (char c : inner) {
            if (quoted) {
                item.push_back(c);
                if (c == quote) quoted = false;
            } else if (c == '"' || c == '\'') {
                quoted = true;
                quote = c;
                item.push_back(c);
            } else if (c == ',') {
                const std::string t = trim(item);
                if (!t.empty()) v.list.push_back(unquote(t, where));
                item.clear();
            } else {
                item.push_back(c);
            }
        }
        const std::string t = trim(item);
        if (!t.empty()) v.list.push_back(unquote(t, where));
        return v;
    }
    v.scalar = unquote(raw, where);
    return v;
}

int parse_int(const Value& v, const std::string& where) {
    try {
        size_t used = 0;
        const int n = std::stoi(v.scalar, &used);
        if (used != v.scalar.size()) throw std::invalid_argument(v.scalar);
        return n;
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected an integer, got '" + v.scalar + "'");
    }
}

double parse_double(const Value& v, const std::string& where) {
    try {
        size_t used = 0;
        const double d = std::stod(v.scalar, &used);
        if (used != v.scalar.size()) throw std::invalid_argument(v.scalar);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected a number, got '" + v.scalar + "'");
    }
}

} // namespace

Config load_config_file(const std::string& path, Config base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = path + ":" + std::to_string(lineno);

        // strip comments outside quotes
        bool quoted = false;
        char quote = 0;
        std::string stripped;
        for (char c : line) {
            if (quoted) {
                stripped.push_back(c);
                if (c == quote) quoted = false;
            } else if (c == '"' || c == '\'') {
                quoted = true;
                quote = c;
                stripped.push_back(c);
            } else if (c == '#') {
                break;
            } else {
                stripped.push_back(c);
            }
        }
        const std::string text = trim(stripped);
        if (text.empty()) continue;

        const size_t eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const Value value = parse_value(trim(text.substr(eq + 1)), where);

        if (key == "include") {
            base.include = value.is_list ? value.list : std::vector<std::string>{value.scalar};
            if (base.include.empty()) throw ConfigError(where + ": include must not be empty");
        } else if (key == "exclude") {
            base.exclude = value.is_list ? value.list : std::vector<std::string>{value.scalar};
        } else if (key == "satd.exclude") {
            base.satd_exclude = value.is_list ? value.list
                                              : std::vector<std::string>{value.scalar};
        } else if (key == "satd.patterns") {
            base.patterns_file = value.scalar;
        } else if (key == "assoc.policy") {
            if (value.scalar != "auto" && !assoc::policy_from_string(value.scalar).has_value())
                throw ConfigError(where + ": unknown assoc.policy: " + value.scalar);
            base.assoc_policy = value.scalar;
        } else if (key == "assoc.max_gap_lines") {
            base.max_gap_lines = parse_int(value, where);
            if (base.max_gap_lines < 0)
                throw ConfigError(where + ": assoc.max_gap_lines must be >= 0");
        } else if (key == "assoc.alpha") {
            base.alpha = parse_double(value, where);
            if (base.alpha <= 0.0 || base.alpha >= 1.0)
                throw ConfigError(where + ": assoc.alpha must be in (0, 1)");
        } else if (key == "rules.dir") {
            base.rules_dir = value.scalar;
        } else if (key == "cwe.catalog") {
            base.cwe_catalog = value.scalar;
        } else if (key == "output.format") {
            if (value.scalar != "text" && value.scalar != "json" && value.scalar != "sarif")
                throw ConfigError(where + ": unknown output.format: " + value.scalar);
            base.output_format = value.scalar;
        } else if (key == "output.path") {
            base.output_path = value.scalar;
        } else if (key == "ci.fail_on") {
            const auto f = fail_on_from_string(value.scalar);
            if (!f.has_value()) throw ConfigError(where + ": unknown ci.fail_on: " + value.scalar);
            base.fail_on = *f;
        } else if (key == "threads") {
            if (value.scalar == "auto")
                base.threads = 0;
            else {
                base.threads = parse_int(value, where);
                if (base.threads < 1) throw ConfigError(where + ": threads must be >= 1");
            }
        } else {
            throw ConfigError(where + ": unknown config key: " + key);
        }
    }
    return base;
}

Config load_config_from_env(Config base) {
    if (const char* env = std::getenv("WEAKSATD_CONFIG"); env != nullptr && *env != '\0')
        return load_config_file(env, std::move(base));
    return base;
}

} // namespace weaksatd
