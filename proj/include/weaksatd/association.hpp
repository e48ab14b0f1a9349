#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weaksatd/satd.hpp"
#include "weaksatd/source_model.hpp"

namespace weaksatd::assoc {

enum class PolicyKind { Following, Enclosing, Nearest };

const char* to_string(PolicyKind kind);
std::optional<PolicyKind> policy_from_string(std::string_view name);

struct AssociationPolicy {
    PolicyKind kind = PolicyKind::Following;
    int max_gap_lines = 5; // Following/Nearest only
};

struct SatdBlock {
    satd::SatdComment satd;
    Block block;
    int distance_lines = 0;
    PolicyKind policy_used = PolicyKind::Following;
};

struct RankSumResult {
    double u = 0.0;       // U statistic of the first sample
    double p_value = 1.0; // two-sided
    bool exact = false;
};

struct CalibrationResult {
    bool available = false;
    PolicyKind chosen = PolicyKind::Following;
    double statistic = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    int n_following = 0;
    int n_enclosing = 0;
};

// Picks the code block for a SATD comment, or nothing when no candidate
// exists (such comments are excluded downstream).
//
//   Following  block with the smallest header line at or below the comment
//              end, within max_gap_lines (ties: innermost)
//   Enclosing  innermost block containing the comment, distance 0
//   Nearest    whichever of the two candidates is closer (tie: Following)
std::optional<SatdBlock> associate(const satd::SatdComment& comment,
                                   const std::vector<Block>& blocks,
                                   const AssociationPolicy& policy);

// Mann-Whitney rank-sum with midranks for ties. Exact two-sided p by
// enumeration when the pooled size is <= 16 and there are no ties, otherwise
// a normal approximation with tie and continuity corrections.
// Throws std::invalid_argument when either sample is empty.
RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

// Distance pair for one SATD comment that has both candidates.
struct DistanceSample {
    double following_gap = 0.0;  // block header line - comment end line
    double enclosing_gap = 0.0;  // comment start line - enclosing header line
};

// Compares the two distance distributions and picks the policy: Following
// when following gaps are significantly smaller at level alpha, Enclosing
// when significantly larger, Nearest otherwise. Fewer than 2 samples yields
// an unavailable result (callers fall back to the configured default).
CalibrationResult calibrate(const std::vector<DistanceSample>& samples, double alpha);

// Both candidate distances for a comment, where they exist. Used to build
// calibration samples; gaps are not capped by max_gap_lines here.
std::optional<DistanceSample> distance_sample(const satd::SatdComment& comment,
                                              const std::vector<Block>& blocks);

} // namespace weaksatd::assoc
