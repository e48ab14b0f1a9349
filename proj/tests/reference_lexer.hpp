#pragma once

// Test-only reference classifier. Implements the byte classification contract
// of weaksatd/source_model.hpp as a direct one-byte-at-a-time interpreter and
// is kept deliberately independent of the production lexer: no spans, no
// regions, just one RegionKind per byte.

#include <string_view>
#include <vector>

#include "weaksatd/source_model.hpp"

namespace weaksatd::testing {

inline std::vector<RegionKind> classify_bytes_reference(std::string_view text) {
    using K = RegionKind;
    enum class St { Code, Line, Block, Str, Chr, Pre };

    std::vector<RegionKind> out(text.size(), K::Code);
    St st = St::Code;
    St after_nested = St::Code; // where Block/Str/Chr return to
    bool line_blank_so_far = true;
    size_t i = 0;
    const size_t n = text.size();

    auto is_continuation = [&](size_t pos) {
        // backslash-newline, tolerating a CR in between
        if (text[pos] != '\\') return size_t{0};
        if (pos + 1 < n && text[pos + 1] == '\n') return size_t{2};
        if (pos + 2 < n && text[pos + 1] == '\r' && text[pos + 2] == '\n') return size_t{3};
        return size_t{0};
    };

    while (i < n) {
        const char c = text[i];
        switch (st) {
        case St::Code:
            if (c == '/' && i + 1 < n && text[i + 1] == '/') {
                out[i] = out[i + 1] = K::LineComment;
                i += 2;
                st = St::Line;
                line_blank_so_far = false;
            } else if (c == '/' && i + 1 < n && text[i + 1] == '*') {
                out[i] = out[i + 1] = K::BlockComment;
                i += 2;
                st = St::Block;
                after_nested = St::Code;
                line_blank_so_far = false;
            } else if (c == '"') {
                out[i] = K::StringLit;
                ++i;
                st = St::Str;
                after_nested = St::Code;
                line_blank_so_far = false;
            } else if (c == '\'') {
                out[i] = K::CharLit;
                ++i;
                st = St::Chr;
                after_nested = St::Code;
                line_blank_so_far = false;
            } else if (c == '#' && line_blank_so_far) {
                out[i] = K::Preprocessor;
                ++i;
                st = St::Pre;
            } else {
                out[i] = K::Code;
                if (c == '\n')
                    line_blank_so_far = true;
                else if (c != ' ' && c != '\t' && c != '\r')
                    line_blank_so_far = false;
                ++i;
            }
            break;

        case St::Pre:
            if (c == '/' && i + 1 < n && text[i + 1] == '/') {
                out[i] = out[i + 1] = K::LineComment;
                i += 2;
                st = St::Line;
            } else if (c == '/' && i + 1 < n && text[i + 1] == '*') {
                out[i] = out[i + 1] = K::BlockComment;
                i += 2;
                st = St::Block;
                after_nested = St::Pre;
            } else if (c == '"') {
                out[i] = K::StringLit;
                ++i;
                st = St::Str;
                after_nested = St::Pre;
            } else if (c == '\'') {
                out[i] = K::CharLit;
                ++i;
                st = St::Chr;
                after_nested = St::Pre;
            } else if (size_t k = is_continuation(i)) {
                for (size_t j = 0; j < k; ++j) out[i + j] = K::Preprocessor;
                i += k;
            } else if (c == '\n') {
                out[i] = K::Code;
                ++i;
                st = St::Code;
                line_blank_so_far = true;
            } else {
                out[i] = K::Preprocessor;
                ++i;
            }
            break;

        case St::Line:
            if (size_t k = is_continuation(i)) {
                for (size_t j = 0; j < k; ++j) out[i + j] = K::LineComment;
                i += k;
            } else if (c == '\n') {
                out[i] = K::Code;
                ++i;
                st = St::Code;
                line_blank_so_far = true;
            } else {
                out[i] = K::LineComment;
                ++i;
            }
            break;

        case St::Block:
            if (c == '*' && i + 1 < n && text[i + 1] == '/') {
                out[i] = out[i + 1] = K::BlockComment;
                i += 2;
                st = after_nested;
            } else {
                out[i] = K::BlockComment;
                ++i;
            }
            break;

        case St::Str:
        case St::Chr: {
            const K kind = (st == St::Str) ? K::StringLit : K::CharLit;
            const char quote = (st == St::Str) ? '"' : '\'';
            if (c == '\\' && i + 1 < n) {
                // escape: both bytes belong to the literal (covers \" \' \\
                // and backslash-newline continuations)
                out[i] = kind;
                if (text[i + 1] == '\r' && i + 2 < n && text[i + 2] == '\n') {
                    out[i + 1] = kind;
                    out[i + 2] = kind;
                    i += 3;
                } else {
                    out[i + 1] = kind;
                    i += 2;
                }
            } else if (c == quote) {
                out[i] = kind;
                ++i;
                st = after_nested;
            } else if (c == '\n') {
                // unterminated literal: the bare newline ends it and the line
                out[i] = K::Code;
                ++i;
                st = St::Code;
                line_blank_so_far = true;
            } else {
                out[i] = kind;
                ++i;
            }
            break;
        }
        }
    }
    return out;
}

} // namespace weaksatd::testing
