#include "weaksatd/satd.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "weaksatd/errors.hpp"

namespace weaksatd::satd {

namespace {

bool is_alnum(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

char lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

// lowercase + collapse whitespace runs; trims both ends
std::string normalize(std::string_view in) {
    std::string out;
    out.reserve(in.size());
    bool pending_space = false;
    for (char c : in) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(lower(c));
        }
    }
    return out;
}

bool matches_at_word_boundary(const std::string& text, const std::string& phrase) {
    size_t pos = 0;
    while ((pos = text.find(phrase, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_alnum(text[pos - 1]);
        const size_t end = pos + phrase.size();
        const bool right_ok = end == text.size() || !is_alnum(text[end]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

} // namespace

std::string pattern_id_for(const std::string& phrase) {
    std::string id;
    bool pending_dash = false;
    for (char c : phrase) {
        if (is_alnum(c)) {
            if (pending_dash && !id.empty()) id.push_back('-');
            pending_dash = false;
            id.push_back(lower(c));
        } else {
            pending_dash = true;
        }
    }
    return id;
}

std::vector<CommentGroup> group_comments(const SourceUnit& unit) {
    std::vector<CommentGroup> groups;
    for (const auto& c : unit.comments) {
        if (!groups.empty() && groups.back().group_id == c.group_id) {
            auto& g = groups.back();
            g.end_line = c.end_line;
            g.span.end = c.span.end;
            g.text.push_back('\n');
            g.text += c.text;
        } else {
            groups.push_back({c.group_id, c.start_line, c.end_line, c.span, c.text});
        }
    }
    return groups;
}

std::vector<SatdPattern> load_patterns(const std::string& pattern_file,
                                       const std::optional<std::vector<std::string>>& exclusions) {
    std::ifstream in(pattern_file);
    if (!in) throw ConfigError("cannot open SATD pattern file: " + pattern_file);

    std::vector<SatdPattern> patterns;
    std::string line;
    while (std::getline(in, line)) {
        const std::string text = normalize(line);
        if (text.empty() || text.starts_with('#')) continue;
        patterns.push_back({pattern_id_for(text), text, true});
    }
    if (patterns.empty())
        throw ConfigError("SATD pattern file contains no patterns: " + pattern_file);

    const std::vector<std::string>& excluded =
        exclusions.has_value() ? *exclusions : default_exclusions();
    for (const auto& id : excluded) {
        auto it = std::find_if(patterns.begin(), patterns.end(),
                               [&](const SatdPattern& p) { return p.id == id; });
        if (it == patterns.end())
            throw ConfigError("satd.exclude names unknown pattern id: " + id);
        it->enabled = false;
    }
    return patterns;
}

std::optional<SatdComment> detect_satd(const CommentGroup& group,
                                       const std::vector<SatdPattern>& patterns,
                                       const std::string& file) {
    const std::string text = normalize(group.text);
    std::vector<std::string> hits;
    for (const auto& p : patterns) {
        if (!p.enabled) continue;
        if (matches_at_word_boundary(text, p.text)) hits.push_back(p.id);
    }
    if (hits.empty()) return std::nullopt;

    SatdComment result;
    result.file = file;
    result.group_id = group.group_id;
    result.start_line = group.start_line;
    result.end_line = group.end_line;
    result.span = group.span;
    result.text = group.text;
    result.matched_patterns = std::move(hits);
    return result;
}

} // namespace weaksatd::satd
