#include "weaksatd/scanner.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <thread>

#include "weaksatd/errors.hpp"

namespace weaksatd {

namespace fs = std::filesystem;

ScanEnvironment load_environment(const Config& config) {
    ScanEnvironment env;
    env.patterns = satd::load_patterns(config.resolved_patterns_file(), config.satd_exclude);
    env.rules = engine::load_rules(config.resolved_rules_dir());
    env.catalog = cwe::import_catalog(config.resolved_catalog());
    return env;
}

bool glob_match(std::string_view pattern, std::string_view text) {
    size_t p = 0, t = 0;
    size_t star_p = std::string_view::npos, star_t = 0;
    while (t < text.size()) {
        if (p < pattern.size() && pattern[p] == '*') {
            star_p = p++;
            star_t = t;
        } else if (p < pattern.size() && pattern[p] == '?') {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '[') {
            const size_t close = pattern.find(']', p + 1);
            if (close == std::string_view::npos) return false;
            bool negate = pattern[p + 1] == '!' || pattern[p + 1] == '^';
            bool hit = false;
            size_t q = p + (negate ? 2 : 1);
            while (q < close) {
                if (q + 2 < close && pattern[q + 1] == '-') {
                    if (text[t] >= pattern[q] && text[t] <= pattern[q + 2]) hit = true;
                    q += 3;
                } else {
                    if (text[t] == pattern[q]) hit = true;
                    ++q;
                }
            }
            if (hit == negate) {
                if (star_p == std::string_view::npos) return false;
                p = star_p + 1;
                t = ++star_t;
                continue;
            }
            p = close + 1;
            ++t;
        } else if (p < pattern.size() && pattern[p] == text[t]) {
            ++p;
            ++t;
        } else if (star_p != std::string_view::npos) {
            p = star_p + 1;
            t = ++star_t;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

namespace {

bool matches_any(const std::vector<std::string>& patterns, const std::string& path) {
    const std::string name = fs::path(path).filename().generic_string();
    for (const auto& pattern : patterns)
        if (glob_match(pattern, name) || glob_match(pattern, path)) return true;
    return false;
}

} // namespace

std::vector<std::string> collect_files(const std::vector<std::string>& roots,
                                       const Config& config) {
    std::vector<std::string> files;
    for (const auto& root : roots) {
        std::error_code ec;
        const fs::file_status st = fs::status(root, ec);
        if (ec || st.type() == fs::file_type::not_found)
            throw IoError("cannot read " + root);
        if (fs::is_regular_file(st)) {
            files.push_back(fs::path(root).lexically_normal().generic_string());
            continue;
        }
        if (!fs::is_directory(st)) throw IoError(root + " is neither a file nor a directory");
        for (fs::recursive_directory_iterator it(root, ec), end; it != end; it.increment(ec)) {
            if (ec) throw IoError("error walking " + root + ": " + ec.message());
            if (!it->is_regular_file()) continue;
            const std::string path = it->path().lexically_normal().generic_string();
            if (!matches_any(config.include, path)) continue;
            if (!config.exclude.empty() && matches_any(config.exclude, path)) continue;
            files.push_back(path);
        }
    }
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    return files;
}

namespace {

// Per-file intermediate: the unit is retained only while needed for
// association and block scanning.
struct FileScan {
    report::FileResult result;
    std::optional<SourceUnit> unit;
    std::vector<satd::SatdComment> satd_comments;
};

FileScan scan_one_file(const std::string& path, const ScanEnvironment& env) {
    FileScan scan;
    scan.result.path = path;
    SourceUnit unit = lex_file(path);

    scan.result.comments = static_cast<long>(unit.comments.size());
    scan.result.blocks = static_cast<long>(unit.blocks.size());
    for (const auto& d : unit.diagnostics) scan.result.diagnostics.push_back(d);

    const auto groups = satd::group_comments(unit);
    scan.result.comment_groups = static_cast<long>(groups.size());
    for (const auto& group : groups) {
        auto hit = satd::detect_satd(group, env.patterns, path);
        if (hit.has_value()) scan.satd_comments.push_back(std::move(*hit));
    }
    scan.result.satd_comments = static_cast<long>(scan.satd_comments.size());

    scan.result.file_findings = engine::scan_file(unit, env.rules);
    if (!scan.satd_comments.empty()) scan.unit = std::move(unit);
    return scan;
}

std::vector<FileScan> run_file_scans(const std::vector<std::string>& files, const Config& config,
                                     const ScanEnvironment& env) {
    std::vector<FileScan> scans(files.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_threads =
        config.threads > 0 ? static_cast<unsigned>(config.threads)
                           : std::min<unsigned>(hw, std::max<size_t>(files.size(), 1));

    std::atomic<size_t> next{0};
    std::vector<std::string> errors(files.size());
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
            try {
                scans[i] = scan_one_file(files[i], env);
            } catch (const IoError& e) {
                scans[i].result.path = files[i];
                errors[i] = e.what();
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (size_t i = 0; i < files.size(); ++i)
        if (!errors[i].empty())
            scans[i].result.diagnostics.push_back(files[i] + ": " + errors[i]);
    return scans;
}

assoc::AssociationPolicy resolve_policy(const Config& config, assoc::PolicyKind kind) {
    assoc::AssociationPolicy policy;
    policy.kind = kind;
    policy.max_gap_lines = config.max_gap_lines;
    return policy;
}

std::vector<assoc::DistanceSample> collect_samples(const std::vector<FileScan>& scans) {
    std::vector<assoc::DistanceSample> samples;
    for (const auto& scan : scans) {
        if (!scan.unit.has_value()) continue;
        for (const auto& comment : scan.satd_comments) {
            auto sample = assoc::distance_sample(comment, scan.unit->blocks);
            if (sample.has_value()) samples.push_back(*sample);
        }
    }
    return samples;
}

} // namespace

ScanOutcome scan_tree(const std::vector<std::string>& roots, const Config& config,
                      const ScanEnvironment& env) {
    const auto files = collect_files(roots, config);
    auto scans = run_file_scans(files, config, env);

    std::optional<assoc::CalibrationResult> calibration;
    assoc::PolicyKind kind = assoc::PolicyKind::Following;
    if (config.assoc_policy == "auto") {
        calibration = assoc::calibrate(collect_samples(scans), config.alpha);
        if (calibration->available) kind = calibration->chosen;
    } else {
        kind = *assoc::policy_from_string(config.assoc_policy);
    }
    const assoc::AssociationPolicy policy = resolve_policy(config, kind);

    std::vector<report::FileResult> results;
    results.reserve(scans.size());
    for (auto& scan : scans) {
        if (scan.unit.has_value()) {
            for (const auto& comment : scan.satd_comments) {
                auto association = assoc::associate(comment, scan.unit->blocks, policy);
                if (!association.has_value()) continue; // excluded from the analysis
                auto findings = engine::scan_block(*scan.unit, association->block, env.rules);
                engine::attach_mitigations(findings, env.catalog, env.rules,
                                           &scan.result.diagnostics);
                scan.result.associations.push_back(std::move(*association));
                scan.result.association_findings.push_back(std::move(findings));
            }
            scan.unit.reset();
        }
        results.push_back(std::move(scan.result));
    }

    ScanOutcome outcome;
    outcome.report =
        report::build_report(std::move(results), env.rules, config.snapshot(), calibration);
    outcome.any_satd = outcome.report.stats.satd_comments > 0;
    outcome.weak_satd = outcome.report.stats.weak_satd_blocks > 0;
    return outcome;
}

assoc::CalibrationResult calibrate_tree(const std::vector<std::string>& roots,
                                        const Config& config, const ScanEnvironment& env) {
    const auto files = collect_files(roots, config);
    const auto scans = run_file_scans(files, config, env);
    return assoc::calibrate(collect_samples(scans), config.alpha);
}

} // namespace weaksatd
