#pragma once

// Random C-like source generator shared by the lexer property tests and the
// acceptance suite. Seeded mt19937 everywhere; no test may depend on
// wall-clock randomness.

#include <algorithm>
#include <iterator>
#include <random>
#include <string>
#include <vector>

namespace weaksatd::testing {

inline std::string random_identifier(std::mt19937& rng) {
    static const char* kWords[] = {"i",     "n",      "buf",   "len",   "src",   "dest",
                                   "count", "x",      "y",     "tmp",   "flags", "size",
                                   "if",    "for",    "while", "int",   "char",  "return",
                                   "str",   "handle", "state", "value", "p",     "q"};
    return kWords[rng() % std::size(kWords)];
}

inline std::string random_comment_payload(std::mt19937& rng, bool allow_newline) {
    static const char* kBits[] = {"todo",  "fixme later", "x",     "*",     "**",  "/",
                                  "\\",    "\"quoted\"",  "'c'",   "//",    "/*",  "a b c",
                                  "hack?", "see below",   "0xFF",  "{",     "}",   "#define",
                                  "end*",  "*start",      "tail "};
    std::string out;
    const int parts = static_cast<int>(rng() % 6);
    for (int i = 0; i < parts; ++i) {
        out += kBits[rng() % std::size(kBits)];
        if (allow_newline && rng() % 5 == 0) out += '\n';
        else out += ' ';
    }
    return out;
}

inline std::string random_string_payload(std::mt19937& rng) {
    static const char* kBits[] = {"abc", "%s",  "\\\"", "\\\\", "//",   "/*",  "*/",
                                  "  ",  "a'b", "\\n",  "\\t",  "0x1,", "{;}", "#x"};
    std::string out;
    const int parts = static_cast<int>(rng() % 5);
    for (int i = 0; i < parts; ++i) out += kBits[rng() % std::size(kBits)];
    if (rng() % 8 == 0) out += "\\\n"; // escaped newline inside the literal
    return out;
}

// Emits a file mixing balanced/unbalanced braces, both comment styles,
// string/char literals with escapes, preprocessor lines with continuations,
// and the occasional pathological fragment.
inline std::string random_c_like_file(std::mt19937& rng, int max_items = 120) {
    std::string out;
    const int items = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_items));
    int brace_depth = 0;

    for (int i = 0; i < items; ++i) {
        switch (rng() % 16) {
        case 0: // line comment, sometimes backslash-continued
            out += "// " + random_comment_payload(rng, false);
            if (rng() % 6 == 0) out += "\\\n continued " + random_comment_payload(rng, false);
            out += '\n';
            break;
        case 1: // block comment
            out += "/* " + random_comment_payload(rng, true);
            if (rng() % 10 != 0) out += " */"; // sometimes unterminated (EOF case)
            else {
                out += '\n';
                continue;
            }
            out += rng() % 2 == 0 ? "\n" : " ";
            break;
        case 2: // string literal
            out += "s = \"" + random_string_payload(rng);
            if (rng() % 8 != 0) out += '"';
            out += ";\n";
            break;
        case 3: // char literal
            out += "c = '";
            out += (rng() % 4 == 0) ? "\\'" : std::string(1, "axz\\"[rng() % 4]);
            if (rng() % 8 != 0) out += '\'';
            out += ";\n";
            break;
        case 4: // preprocessor line with optional continuation / embedded bits
            out += "#define " + random_identifier(rng) + " ";
            if (rng() % 4 == 0) out += "/* inside */ ";
            if (rng() % 4 == 1) out += "\"str // not comment\" ";
            out += random_identifier(rng);
            if (rng() % 5 == 0) out += " \\\n    " + random_identifier(rng);
            out += '\n';
            break;
        case 5: // open block
            out += random_identifier(rng) + " (" + random_identifier(rng) + ") {\n";
            ++brace_depth;
            break;
        case 6: // close block (sometimes unmatched)
            out += "}\n";
            if (brace_depth > 0) --brace_depth;
            break;
        case 7: // statement
            out += "    " + random_identifier(rng) + " = " + random_identifier(rng) + " + " +
                   std::to_string(rng() % 100) + ";\n";
            break;
        case 8: // division and pointer soup that looks like comment openers
            out += "    a = b / *p; c = d / e; e = f // trailing\n";
            break;
        case 9: // hash mid-line (not a directive)
            out += "    m = a # b;\n";
            break;
        case 10: // indented preprocessor
            out += "  \t#include <" + random_identifier(rng) + ".h>\n";
            break;
        case 11: // stacked line comments on consecutive lines
            out += "// first " + random_comment_payload(rng, false) + "\n// second " +
                   random_comment_payload(rng, false) + "\n";
            break;
        case 12: // UTF-8 text in a comment (multibyte pass-through)
            out += "// caf\xC3\xA9 na\xC3\xAFve\n";
            break;
        case 13: // invalid UTF-8 byte (gets replaced, must still classify)
            out += "x = 1; ";
            out += static_cast<char>(0xC3);
            out += static_cast<char>(0x28);
            out += "\n";
            break;
        case 14: // quote inside a comment, comment inside a string
            out += "/* \"not a string */ s = \"/* not a comment */\";\n";
            break;
        case 15: // empty-ish line / whitespace
            out += rng() % 2 == 0 ? "\n" : "   \t\n";
            break;
        }
    }
    while (brace_depth > 0 && rng() % 3 != 0) {
        out += "}\n";
        --brace_depth;
    }
    return out;
}

// Distinct doubles for rank-sum tests.
inline std::vector<double> random_distinct_sample(std::mt19937& rng, size_t n,
                                                  std::vector<double>& pool) {
    std::vector<double> out;
    for (size_t i = 0; i < n; ++i) {
        double v;
        do {
            v = static_cast<double>(rng() % 10000) / 7.0;
        } while (std::find(pool.begin(), pool.end(), v) != pool.end());
        pool.push_back(v);
        out.push_back(v);
    }
    return out;
}

} // namespace weaksatd::testing
