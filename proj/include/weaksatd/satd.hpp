#pragma once

#include <optional>
#include <string>
#include <vector>

#include "weaksatd/source_model.hpp"

namespace weaksatd::satd {

struct SatdPattern {
    std::string id;   // kebab-cased phrase, e.g. "take-care"
    std::string text; // lowercase phrase, single-spaced
    bool enabled = true;
};

// One merged comment group that matched at least one enabled pattern.
struct SatdComment {
    std::string file;
    int group_id = -1;
    int start_line = 0;
    int end_line = 0;
    ByteSpan span;                             // first to last member comment
    std::string text;                          // joined group text
    std::vector<std::string> matched_patterns; // pattern ids, >= 1
};

// A logical comment: one block comment, or a run of merged line comments.
struct CommentGroup {
    int group_id = -1;
    int start_line = 0;
    int end_line = 0;
    ByteSpan span;
    std::string text;
};

std::string pattern_id_for(const std::string& phrase);

std::vector<CommentGroup> group_comments(const SourceUnit& unit);

// Loads the pattern data file (one phrase per line, '#' comments allowed) and
// disables the given pattern ids. Passing nullopt applies the default
// exclusion set {"take-care"}; an explicit empty list enables everything.
// Throws ConfigError when the file is missing or contains no patterns, or
// when an exclusion names no pattern.
std::vector<SatdPattern> load_patterns(const std::string& pattern_file,
                                       const std::optional<std::vector<std::string>>& exclusions);

inline const std::vector<std::string>& default_exclusions() {
    static const std::vector<std::string> kDefaults{"take-care"};
    return kDefaults;
}

// Case-insensitive phrase match at word boundaries (neighbouring characters
// must be non-alphanumeric or text edge); whitespace runs in the comment
// collapse to a single space so multi-word phrases match across lines.
std::optional<SatdComment> detect_satd(const CommentGroup& group,
                                       const std::vector<SatdPattern>& patterns,
                                       const std::string& file);

} // namespace weaksatd::satd
