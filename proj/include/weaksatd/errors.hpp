#pragma once

#include <stdexcept>
#include <string>

namespace weaksatd {

// Bad configuration, bad CLI usage, malformed rule/pattern data. Exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable input, unwritable output. Exit code 3.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally broken catalog export (missing required columns etc.).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace weaksatd
