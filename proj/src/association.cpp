#include "weaksatd/association.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace weaksatd::assoc {

const char* to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::Following: return "following";
    case PolicyKind::Enclosing: return "enclosing";
    case PolicyKind::Nearest: return "nearest";
    }
    return "?";
}

std::optional<PolicyKind> policy_from_string(std::string_view name) {
    if (name == "following") return PolicyKind::Following;
    if (name == "enclosing") return PolicyKind::Enclosing;
    if (name == "nearest") return PolicyKind::Nearest;
    return std::nullopt;
}

namespace {

const Block* following_candidate(const satd::SatdComment& comment,
                                 const std::vector<Block>& blocks) {
    const Block* best = nullptr;
    for (const auto& b : blocks) {
        if (b.header_start_line < comment.end_line) continue;
        if (best == nullptr || b.header_start_line < best->header_start_line ||
            (b.header_start_line == best->header_start_line && b.depth > best->depth))
            best = &b;
    }
    return best;
}

const Block* enclosing_candidate(const satd::SatdComment& comment,
                                 const std::vector<Block>& blocks) {
    const Block* best = nullptr;
    for (const auto& b : blocks) {
        if (!b.span.contains(comment.span.begin)) continue;
        if (best == nullptr || b.depth > best->depth) best = &b;
    }
    return best;
}

} // namespace

std::optional<SatdBlock> associate(const satd::SatdComment& comment,
                                   const std::vector<Block>& blocks,
                                   const AssociationPolicy& policy) {
    const Block* follow = following_candidate(comment, blocks);
    const int follow_gap =
        follow != nullptr ? std::max(0, follow->header_start_line - comment.end_line) : 0;
    if (follow != nullptr && follow_gap > policy.max_gap_lines) follow = nullptr;

    const Block* enclose = enclosing_candidate(comment, blocks);
    const int enclose_gap =
        enclose != nullptr ? std::max(0, comment.start_line - enclose->header_start_line) : 0;

    const Block* chosen = nullptr;
    int distance = 0;
    switch (policy.kind) {
    case PolicyKind::Following:
        chosen = follow;
        distance = follow_gap;
        break;
    case PolicyKind::Enclosing:
        chosen = enclose;
        distance = 0;
        break;
    case PolicyKind::Nearest:
        if (follow != nullptr && enclose != nullptr) {
            if (follow_gap <= enclose_gap) {
                chosen = follow;
                distance = follow_gap;
            } else {
                chosen = enclose;
                distance = 0;
            }
        } else if (follow != nullptr) {
            chosen = follow;
            distance = follow_gap;
        } else if (enclose != nullptr) {
            chosen = enclose;
            distance = 0;
        }
        break;
    }
    if (chosen == nullptr) return std::nullopt;
    return SatdBlock{comment, *chosen, distance, policy.kind};
}

std::optional<DistanceSample> distance_sample(const satd::SatdComment& comment,
                                              const std::vector<Block>& blocks) {
    const Block* follow = following_candidate(comment, blocks);
    const Block* enclose = enclosing_candidate(comment, blocks);
    if (follow == nullptr || enclose == nullptr) return std::nullopt;
    DistanceSample s;
    s.following_gap = std::max(0, follow->header_start_line - comment.end_line);
    s.enclosing_gap = std::max(0, comment.start_line - enclose->header_start_line);
    return s;
}

namespace {

struct RankedSamples {
    double rank_sum_a = 0.0;
    double tie_term = 0.0; // sum over tie groups of t^3 - t
    bool has_ties = false;
};

RankedSamples midranks(std::span<const double> a, std::span<const double> b) {
    std::vector<std::pair<double, bool>> pooled; // value, belongs-to-a
    pooled.reserve(a.size() + b.size());
    for (double v : a) pooled.emplace_back(v, true);
    for (double v : b) pooled.emplace_back(v, false);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    RankedSamples out;
    size_t i = 0;
    while (i < pooled.size()) {
        size_t j = i;
        while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
        const double tied = static_cast<double>(j - i);
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k)
            if (pooled[k].second) out.rank_sum_a += rank;
        if (tied > 1.0) {
            out.has_ties = true;
            out.tie_term += tied * tied * tied - tied;
        }
        i = j;
    }
    return out;
}

// Exact tail counts of the rank-sum distribution by recursive enumeration of
// the C(N, n_a) rank subsets. Only used for pooled sizes <= 16.
void enumerate_subsets(int next_rank, int n_total, int remaining, int sum, int target,
                       long long& le_count, long long& ge_count, long long& total) {
    if (remaining == 0) {
        ++total;
        if (sum <= target) ++le_count;
        if (sum >= target) ++ge_count;
        return;
    }
    if (n_total - next_rank + 1 < remaining) return;
    // take next_rank
    enumerate_subsets(next_rank + 1, n_total, remaining - 1, sum + next_rank, target, le_count,
                      ge_count, total);
    // skip next_rank
    enumerate_subsets(next_rank + 1, n_total, remaining, sum, target, le_count, ge_count, total);
}

double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

} // namespace

RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("wilcoxon_rank_sum: both samples must be non-empty");

    const double n_a = static_cast<double>(a.size());
    const double n_b = static_cast<double>(b.size());
    const double n = n_a + n_b;
    const RankedSamples ranked = midranks(a, b);

    RankSumResult result;
    result.u = ranked.rank_sum_a - n_a * (n_a + 1.0) / 2.0;

    if (!ranked.has_ties && a.size() + b.size() <= 16) {
        const int target = static_cast<int>(ranked.rank_sum_a + 0.5);
        long long le = 0, ge = 0, total = 0;
        enumerate_subsets(1, static_cast<int>(n), static_cast<int>(a.size()), 0, target, le, ge,
                          total);
        const double tail = static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
        result.p_value = std::min(1.0, 2.0 * tail);
        result.exact = true;
        return result;
    }

    const double mean_u = n_a * n_b / 2.0;
    const double variance =
        n_a * n_b / 12.0 * ((n + 1.0) - ranked.tie_term / (n * (n - 1.0)));
    if (variance <= 0.0) {
        // all pooled values identical
        result.p_value = 1.0;
        return result;
    }
    const double sigma = std::sqrt(variance);
    double z = 0.0;
    if (result.u > mean_u)
        z = (result.u - mean_u - 0.5) / sigma;
    else if (result.u < mean_u)
        z = (result.u - mean_u + 0.5) / sigma;
    result.p_value = std::clamp(2.0 * normal_sf(std::fabs(z)), 0.0, 1.0);
    return result;
}

CalibrationResult calibrate(const std::vector<DistanceSample>& samples, double alpha) {
    CalibrationResult result;
    result.alpha = alpha;
    result.n_following = static_cast<int>(samples.size());
    result.n_enclosing = static_cast<int>(samples.size());
    if (samples.size() < 2) return result; // unavailable

    std::vector<double> following, enclosing;
    following.reserve(samples.size());
    enclosing.reserve(samples.size());
    for (const auto& s : samples) {
        following.push_back(s.following_gap);
        enclosing.push_back(s.enclosing_gap);
    }

    const RankSumResult test = wilcoxon_rank_sum(following, enclosing);
    result.available = true;
    result.statistic = test.u;
    result.p_value = test.p_value;

    const double mean_u =
        static_cast<double>(following.size()) * static_cast<double>(enclosing.size()) / 2.0;
    if (test.p_value < alpha && test.u < mean_u)
        result.chosen = PolicyKind::Following;
    else if (test.p_value < alpha && test.u > mean_u)
        result.chosen = PolicyKind::Enclosing;
    else
        result.chosen = PolicyKind::Nearest;
    return result;
}

} // namespace weaksatd::assoc
