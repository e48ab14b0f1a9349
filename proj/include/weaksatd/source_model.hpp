#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace weaksatd {

// Byte classification for C source. Every byte of a file belongs to exactly
// one region kind:
//
//   Code          anything not covered below, including all bare newlines
//   LineComment   from "//" up to (not including) the terminating newline;
//                 backslash-newline continues the comment onto the next line
//   BlockComment  from "/*" through the closing "*/" (or EOF if unterminated)
//   StringLit     from opening '"' through the closing '"'; backslash escapes
//                 the next byte; an unescaped newline terminates the literal
//   CharLit       same rules as StringLit with single quotes
//   Preprocessor  from a '#' preceded on its line only by spaces/tabs/CR, up
//                 to (not including) the terminating newline; backslash-newline
//                 continues the directive; comments and string/char literals
//                 inside the directive are carved out as their own regions
//
// Trigraphs are not interpreted. No macro expansion is performed.
enum class RegionKind : uint8_t {
    Code,
    LineComment,
    BlockComment,
    StringLit,
    CharLit,
    Preprocessor,
};

const char* to_string(RegionKind kind);

// Half-open byte range [begin, end).
struct ByteSpan {
    size_t begin = 0;
    size_t end = 0;

    size_t size() const { return end - begin; }
    bool contains(size_t offset) const { return offset >= begin && offset < end; }
    bool contains(const ByteSpan& other) const {
        return other.begin >= begin && other.end <= end;
    }
    bool operator==(const ByteSpan&) const = default;
};

struct Region {
    ByteSpan span;
    RegionKind kind = RegionKind::Code;

    bool operator==(const Region&) const = default;
};

struct Comment {
    ByteSpan span;      // includes the delimiters
    int start_line = 0; // 1-based
    int end_line = 0;
    std::string text;   // delimiters stripped
    bool line_comment = false;
    int group_id = -1;  // shared by merged adjacent line comments
};

struct Block {
    ByteSpan span;             // from '{' to the matching '}' inclusive
    int start_line = 0;        // line of '{'
    int end_line = 0;          // line of '}'
    int depth = 0;             // 0 for outermost
    int header_start_line = 0; // line of the introducing construct
};

struct SourceUnit {
    std::string path;
    std::string text;              // UTF-8, invalid bytes replaced
    std::vector<Region> regions;   // partition of [0, text.size())
    std::vector<Comment> comments; // ascending start offset
    std::vector<Block> blocks;     // ascending start offset
    std::vector<size_t> line_index;      // byte offset of each line start
    std::vector<std::string> diagnostics;

    int line_count() const { return static_cast<int>(line_index.size()); }
    // 1-based line number of a byte offset.
    int line_of(size_t offset) const;
    // 1-based byte column of an offset within its line.
    int column_of(size_t offset) const;
    std::string_view line_text(int line) const;
};

// Lexes C source text. Never fails on malformed input; unbalanced braces
// yield best-effort blocks plus a diagnostic. Assigns comment group ids.
SourceUnit lex_source(std::string path, std::string text);

// Reads and lexes a file. Throws IoError if unreadable. Invalid UTF-8 byte
// sequences are replaced with U+FFFD.
SourceUnit lex_file(const std::string& path);

// Groups consecutive '//' comments on consecutive lines with no intervening
// code. Block comments always form their own group. Returns the group count.
int merge_adjacent_line_comments(std::vector<Comment>& comments, const SourceUnit& unit);

// The block's text with comment and string/char-literal bytes replaced by
// spaces; newlines are kept so line numbers are preserved.
std::string strip_noncode(const Block& block, const SourceUnit& unit);

// Whole-file variant used by the rule engine: comments, string/char literals
// and (optionally) preprocessor lines are blanked out.
std::string code_only_view(const SourceUnit& unit, bool mask_preprocessor = true);

} // namespace weaksatd
