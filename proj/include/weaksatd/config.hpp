#pragma once

#include <optional>
#include <string>
#include <vector>

namespace weaksatd {

enum class FailOn { None, AnySatd, WeakSatd };

const char* to_string(FailOn fail_on);
std::optional<FailOn> fail_on_from_string(std::string_view name);

struct Config {
    std::vector<std::string> include = {"*.c", "*.h"};
    std::vector<std::string> exclude;

    // nullopt applies the shipped default exclusions ("take-care")
    std::optional<std::vector<std::string>> satd_exclude;
    std::string patterns_file; // empty: <data>/satd_patterns.txt

    std::string assoc_policy = "following"; // following|enclosing|nearest|auto
    int max_gap_lines = 5;
    double alpha = 0.05;

    std::string rules_dir;   // empty: <data>/rules
    std::string cwe_catalog; // empty: <data>/cwe/cwe_catalog.csv

    std::string output_format = "text"; // text|json|sarif
    std::string output_path;            // empty: stdout

    FailOn fail_on = FailOn::WeakSatd;
    int threads = 0; // 0 = all cores

    std::string resolved_patterns_file() const;
    std::string resolved_rules_dir() const;
    std::string resolved_catalog() const;

    // key/value pairs recorded in reports
    std::vector<std::pair<std::string, std::string>> snapshot() const;
};

// Data directory: WEAKSATD_DATA env var when set, else the built-in location.
std::string default_data_dir();

// Parses the TOML-style key/value config file (quoted strings, numbers,
// [lists], # comments) and overlays it on `base`. Unknown keys or malformed
// values raise ConfigError.
Config load_config_file(const std::string& path, Config base);

// Reads WEAKSATD_CONFIG when set, returning base untouched otherwise.
Config load_config_from_env(Config base);

} // namespace weaksatd
