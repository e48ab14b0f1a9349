#pragma once

#include <string>
#include <vector>

#include "weaksatd/config.hpp"
#include "weaksatd/cwe_catalog.hpp"
#include "weaksatd/report.hpp"

namespace weaksatd {

// Shared immutable state for one scan: patterns, rules and catalog resolved
// from the config. Loading raises ConfigError/IoError/FormatError.
struct ScanEnvironment {
    std::vector<satd::SatdPattern> patterns;
    engine::RuleSet rules;
    cwe::Catalog catalog;
};

ScanEnvironment load_environment(const Config& config);

// All files under the roots matching the include/exclude globs; explicitly
// named files bypass the globs. Sorted, deterministic. Throws IoError when a
// root does not exist.
std::vector<std::string> collect_files(const std::vector<std::string>& roots,
                                       const Config& config);

struct ScanOutcome {
    report::Report report;
    bool any_satd = false;
    bool weak_satd = false;
};

// The full pipeline: lex, SATD detect, associate, weakness scan, aggregate.
// File-level work runs on config.threads threads; the merge is ordered by
// path, so the report is byte-identical for any thread count.
ScanOutcome scan_tree(const std::vector<std::string>& roots, const Config& config,
                      const ScanEnvironment& env);

// Calibration only: builds both distance distributions over the tree and
// runs the rank-sum comparison.
assoc::CalibrationResult calibrate_tree(const std::vector<std::string>& roots,
                                        const Config& config, const ScanEnvironment& env);

// Simple glob match: '*', '?' and '[...]', with '*' also crossing '/'.
bool glob_match(std::string_view pattern, std::string_view text);

} // namespace weaksatd
