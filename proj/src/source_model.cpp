#include "weaksatd/source_model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "weaksatd/errors.hpp"

namespace weaksatd {

const char* to_string(RegionKind kind) {
    switch (kind) {
    case RegionKind::Code: return "code";
    case RegionKind::LineComment: return "line_comment";
    case RegionKind::BlockComment: return "block_comment";
    case RegionKind::StringLit: return "string";
    case RegionKind::CharLit: return "char";
    case RegionKind::Preprocessor: return "preprocessor";
    }
    return "?";
}

namespace {

// Replaces ill-formed UTF-8 sequences with U+FFFD. ASCII bytes pass through
// untouched, so all lexically significant characters keep their positions
// relative to each other.
std::string sanitize_utf8(std::string_view raw) {
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(raw.size());
    size_t i = 0;
    while (i < raw.size()) {
        const auto b0 = static_cast<unsigned char>(raw[i]);
        size_t len = 0;
        if (b0 < 0x80) len = 1;
        else if ((b0 & 0xE0) == 0xC0 && b0 >= 0xC2) len = 2;
        else if ((b0 & 0xF0) == 0xE0) len = 3;
        else if ((b0 & 0xF8) == 0xF0 && b0 <= 0xF4) len = 4;

        bool ok = len > 0 && i + len <= raw.size();
        for (size_t j = 1; ok && j < len; ++j)
            ok = (static_cast<unsigned char>(raw[i + j]) & 0xC0) == 0x80;
        if (ok && len == 3 && b0 == 0xE0 && static_cast<unsigned char>(raw[i + 1]) < 0xA0) ok = false;
        if (ok && len == 3 && b0 == 0xED && static_cast<unsigned char>(raw[i + 1]) > 0x9F) ok = false;
        if (ok && len == 4 && b0 == 0xF0 && static_cast<unsigned char>(raw[i + 1]) < 0x90) ok = false;
        if (ok && len == 4 && b0 == 0xF4 && static_cast<unsigned char>(raw[i + 1]) > 0x8F) ok = false;

        if (ok) {
            out.append(raw.substr(i, len));
            i += len;
        } else {
            out.append(kReplacement);
            ++i;
        }
    }
    return out;
}

// Region-emitting scanner. Consumes one region at a time; scan_*() helpers
// each swallow a whole comment/literal and return its end offset.
class Scanner {
public:
    explicit Scanner(const std::string& text) : text_(text), n_(text.size()) {}

    std::vector<Region> run() {
        std::vector<Region> regions;
        size_t code_start = 0;
        bool in_preproc = false;
        bool line_blank = true;

        auto flush = [&](size_t upto, RegionKind kind) {
            if (upto > code_start)
                regions.push_back({{code_start, upto}, kind});
        };

        size_t i = 0;
        while (i < n_) {
            const char c = text_[i];
            const RegionKind host = in_preproc ? RegionKind::Preprocessor : RegionKind::Code;

            if (c == '/' && peek(i + 1) == '/') {
                flush(i, host);
                const size_t end = scan_line_comment(i);
                regions.push_back({{i, end}, RegionKind::LineComment});
                code_start = end;
                i = end;
                in_preproc = false; // the directive ends at the same newline
                line_blank = false;
                continue;
            }
            if (c == '/' && peek(i + 1) == '*') {
                flush(i, host);
                const size_t end = scan_block_comment(i);
                regions.push_back({{i, end}, RegionKind::BlockComment});
                code_start = end;
                i = end;
                line_blank = false;
                continue;
            }
            if (c == '"' || c == '\'') {
                flush(i, host);
                bool terminated = false;
                const size_t end = scan_quoted(i, c, terminated);
                regions.push_back({{i, end}, c == '"' ? RegionKind::StringLit : RegionKind::CharLit});
                code_start = end;
                i = end;
                if (!terminated) in_preproc = false; // ran into a bare newline
                line_blank = false;
                continue;
            }
            if (!in_preproc && c == '#' && line_blank) {
                flush(i, RegionKind::Code);
                code_start = i;
                in_preproc = true;
                line_blank = false;
                ++i;
                continue;
            }
            if (in_preproc && c == '\\' && continuation_len(i) > 0) {
                i += continuation_len(i);
                continue;
            }
            if (c == '\n') {
                if (in_preproc) {
                    flush(i, RegionKind::Preprocessor);
                    code_start = i;
                    in_preproc = false;
                }
                line_blank = true;
                ++i;
                continue;
            }
            if (c != ' ' && c != '\t' && c != '\r') line_blank = false;
            ++i;
        }
        flush(n_, in_preproc ? RegionKind::Preprocessor : RegionKind::Code);
        return regions;
    }

private:
    char peek(size_t i) const { return i < n_ ? text_[i] : '\0'; }

    size_t continuation_len(size_t i) const {
        if (text_[i] != '\\') return 0;
        if (peek(i + 1) == '\n') return 2;
        if (peek(i + 1) == '\r' && peek(i + 2) == '\n') return 3;
        return 0;
    }

    // "//" to end of logical line (backslash-newline continues it).
    size_t scan_line_comment(size_t i) const {
        i += 2;
        while (i < n_) {
            if (size_t k = continuation_len(i)) {
                i += k;
            } else if (text_[i] == '\n') {
                break;
            } else {
                ++i;
            }
        }
        return i;
    }

    // "/*" through "*/" or EOF.
    size_t scan_block_comment(size_t i) const {
        i += 2;
        while (i < n_) {
            if (text_[i] == '*' && peek(i + 1) == '/') return i + 2;
            ++i;
        }
        return n_;
    }

    // Quoted literal; escape skips the next byte (and a full CRLF). A bare
    // newline terminates the literal without being part of it.
    size_t scan_quoted(size_t i, char quote, bool& terminated) const {
        ++i;
        while (i < n_) {
            const char c = text_[i];
            if (c == '\\' && i + 1 < n_) {
                if (peek(i + 1) == '\r' && peek(i + 2) == '\n')
                    i += 3;
                else
                    i += 2;
            } else if (c == quote) {
                terminated = true;
                return i + 1;
            } else if (c == '\n') {
                terminated = false;
                return i;
            } else {
                ++i;
            }
        }
        terminated = false;
        return n_;
    }

    const std::string& text_;
    const size_t n_;
};

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_space_char(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

// Per-byte kind table, used while building blocks and headers.
std::vector<RegionKind> byte_kinds(const std::vector<Region>& regions, size_t size) {
    std::vector<RegionKind> kinds(size, RegionKind::Code);
    for (const auto& r : regions)
        std::fill(kinds.begin() + static_cast<std::ptrdiff_t>(r.span.begin),
                  kinds.begin() + static_cast<std::ptrdiff_t>(r.span.end), r.kind);
    return kinds;
}

struct HeaderScanner {
    const std::string& text;
    const std::vector<RegionKind>& kinds;

    bool is_code(size_t i) const { return kinds[i] == RegionKind::Code; }

    // Previous code byte that is not whitespace, or npos.
    size_t prev_token_byte(size_t from) const {
        size_t i = from;
        while (i > 0) {
            --i;
            if (!is_code(i)) continue;
            if (is_space_char(text[i])) continue;
            return i;
        }
        return std::string::npos;
    }

    size_t match_open_paren(size_t close) const {
        int depth = 0;
        size_t i = close + 1;
        while (i > 0) {
            --i;
            if (!is_code(i)) continue;
            if (text[i] == ')') ++depth;
            else if (text[i] == '(') {
                if (--depth == 0) return i;
            }
        }
        return std::string::npos;
    }

    // Identifier/keyword ending at byte `last` (inclusive); returns start.
    size_t word_start(size_t last) const {
        size_t begin = last;
        while (begin > 0 && is_code(begin - 1) && is_ident_char(text[begin - 1])) --begin;
        return begin;
    }
};

int find_header_line(const SourceUnit& unit, const HeaderScanner& scan, size_t open_brace,
                     int block_start_line) {
    const std::string& text = unit.text;
    size_t p = scan.prev_token_byte(open_brace);
    if (p == std::string::npos) return block_start_line;

    if (text[p] == ')') {
        const size_t open = scan.match_open_paren(p);
        if (open == std::string::npos) return block_start_line;
        const size_t w = scan.prev_token_byte(open);
        if (w == std::string::npos || !is_ident_char(text[w])) return block_start_line;
        const size_t ws = scan.word_start(w);
        return unit.line_of(ws);
    }

    if (is_ident_char(text[p])) {
        const size_t ws = scan.word_start(p);
        const std::string_view word(text.data() + ws, p - ws + 1);
        if (word == "do" || word == "else" || word == "struct" || word == "union" ||
            word == "enum")
            return unit.line_of(ws);
        // tag or macro name: if introduced by struct/union/enum, point at that
        const size_t q = scan.prev_token_byte(ws);
        if (q != std::string::npos && is_ident_char(text[q])) {
            const size_t qs = scan.word_start(q);
            const std::string_view intro(text.data() + qs, q - qs + 1);
            if (intro == "struct" || intro == "union" || intro == "enum")
                return unit.line_of(qs);
        }
        return unit.line_of(ws);
    }

    return block_start_line;
}

} // namespace

int SourceUnit::line_of(size_t offset) const {
    auto it = std::upper_bound(line_index.begin(), line_index.end(), offset);
    return static_cast<int>(it - line_index.begin());
}

int SourceUnit::column_of(size_t offset) const {
    const int line = line_of(offset);
    return static_cast<int>(offset - line_index[static_cast<size_t>(line - 1)]) + 1;
}

std::string_view SourceUnit::line_text(int line) const {
    if (line < 1 || line > line_count()) return {};
    const size_t begin = line_index[static_cast<size_t>(line - 1)];
    size_t end = (line < line_count()) ? line_index[static_cast<size_t>(line)] : text.size();
    while (end > begin && (text[end - 1] == '\n' || text[end - 1] == '\r')) --end;
    return std::string_view(text).substr(begin, end - begin);
}

SourceUnit lex_source(std::string path, std::string raw) {
    SourceUnit unit;
    unit.path = std::move(path);
    unit.text = sanitize_utf8(raw);
    const std::string& text = unit.text;

    unit.line_index.push_back(0);
    for (size_t i = 0; i < text.size(); ++i)
        if (text[i] == '\n') unit.line_index.push_back(i + 1);

    unit.regions = Scanner(text).run();
    const auto kinds = byte_kinds(unit.regions, text.size());

    // comments, in region order
    for (const auto& region : unit.regions) {
        if (region.kind != RegionKind::LineComment && region.kind != RegionKind::BlockComment)
            continue;
        Comment c;
        c.span = region.span;
        c.line_comment = region.kind == RegionKind::LineComment;
        c.start_line = unit.line_of(region.span.begin);
        c.end_line = region.span.size() > 0 ? unit.line_of(region.span.end - 1) : c.start_line;
        std::string_view body = std::string_view(text).substr(region.span.begin, region.span.size());
        if (c.line_comment) {
            body.remove_prefix(2);
        } else {
            body.remove_prefix(2);
            if (body.size() >= 2 && body.ends_with("*/")) body.remove_suffix(2);
        }
        c.text = std::string(body);
        unit.comments.push_back(std::move(c));
    }

    // brace matching over code bytes only
    std::vector<size_t> stack;
    int unmatched_closers = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        if (kinds[i] != RegionKind::Code) continue;
        if (text[i] == '{') {
            stack.push_back(i);
        } else if (text[i] == '}') {
            if (stack.empty()) {
                ++unmatched_closers;
                continue;
            }
            const size_t open = stack.back();
            stack.pop_back();
            Block b;
            b.span = {open, i + 1};
            b.depth = static_cast<int>(stack.size());
            b.start_line = unit.line_of(open);
            b.end_line = unit.line_of(i);
            unit.blocks.push_back(b);
        }
    }
    if (unmatched_closers > 0)
        unit.diagnostics.push_back(unit.path + ": " + std::to_string(unmatched_closers) +
                                   " unmatched '}' ignored");
    if (!stack.empty())
        unit.diagnostics.push_back(unit.path + ": " + std::to_string(stack.size()) +
                                   " unmatched '{' at end of file");
    std::sort(unit.blocks.begin(), unit.blocks.end(),
              [](const Block& a, const Block& b) { return a.span.begin < b.span.begin; });

    HeaderScanner scan{text, kinds};
    for (auto& block : unit.blocks)
        block.header_start_line = find_header_line(unit, scan, block.span.begin, block.start_line);

    merge_adjacent_line_comments(unit.comments, unit);
    return unit;
}

SourceUnit lex_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path);
    return lex_source(path, buf.str());
}

int merge_adjacent_line_comments(std::vector<Comment>& comments, const SourceUnit& unit) {
    int next_group = 0;
    const Comment* prev = nullptr;
    for (auto& c : comments) {
        bool merge = false;
        if (prev != nullptr && prev->line_comment && c.line_comment &&
            c.start_line == prev->end_line + 1) {
            // nothing but whitespace between the two comments
            merge = true;
            for (size_t i = prev->span.end; i < c.span.begin; ++i) {
                if (!is_space_char(unit.text[i])) {
                    merge = false;
                    break;
                }
            }
        }
        c.group_id = merge ? prev->group_id : next_group++;
        prev = &c;
    }
    return next_group;
}

std::string strip_noncode(const Block& block, const SourceUnit& unit) {
    std::string out = unit.text.substr(block.span.begin, block.span.size());
    for (const auto& region : unit.regions) {
        if (region.kind == RegionKind::Code || region.kind == RegionKind::Preprocessor) continue;
        const size_t lo = std::max(region.span.begin, block.span.begin);
        const size_t hi = std::min(region.span.end, block.span.end);
        for (size_t i = lo; i < hi; ++i)
            if (out[i - block.span.begin] != '\n') out[i - block.span.begin] = ' ';
    }
    return out;
}

std::string code_only_view(const SourceUnit& unit, bool mask_preprocessor) {
    std::string out = unit.text;
    for (const auto& region : unit.regions) {
        if (region.kind == RegionKind::Code) continue;
        if (region.kind == RegionKind::Preprocessor && !mask_preprocessor) continue;
        for (size_t i = region.span.begin; i < region.span.end; ++i)
            if (out[i] != '\n') out[i] = ' ';
    }
    return out;
}

} // namespace weaksatd
