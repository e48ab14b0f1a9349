#pragma once

// Test-only oracle for the two-sided rank-sum p-value, valid for tie-free
// samples. Enumerates the full null distribution of the first sample's rank
// sum by dynamic programming over subsets of {1..N}, independent of the
// production code path (which enumerates combinations recursively for the
// exact case and uses a normal approximation otherwise).

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace weaksatd::testing {

struct RankSumOracleResult {
    double u = 0.0;
    double p_two_sided = 1.0;
};

// counts[k][s] = number of k-subsets of {1..N} with rank sum s.
inline std::vector<std::vector<double>> rank_sum_counts(int n_total, int k_pick) {
    const int max_sum = n_total * (n_total + 1) / 2;
    std::vector<std::vector<double>> ways(
        static_cast<size_t>(k_pick) + 1, std::vector<double>(static_cast<size_t>(max_sum) + 1, 0.0));
    ways[0][0] = 1.0;
    for (int rank = 1; rank <= n_total; ++rank) {
        for (int k = std::min(rank, k_pick); k >= 1; --k) {
            for (int s = max_sum; s >= rank; --s) {
                if (ways[k - 1][s - rank] != 0.0) ways[k][s] += ways[k - 1][s - rank];
            }
        }
    }
    return ways;
}

inline RankSumOracleResult rank_sum_exact_oracle(std::span<const double> a,
                                                 std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");

    std::vector<double> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    std::vector<double> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("oracle requires distinct values");

    const int n_a = static_cast<int>(a.size());
    const int n_total = static_cast<int>(all.size());

    // observed rank sum of sample a (ranks 1..N, no ties by precondition)
    double rank_sum_a = 0.0;
    for (double v : a) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
        rank_sum_a += static_cast<double>(it - sorted.begin()) + 1.0;
    }

    const auto ways = rank_sum_counts(n_total, n_a);
    const auto& dist = ways[static_cast<size_t>(n_a)];

    double total = 0.0, at_or_below = 0.0, at_or_above = 0.0;
    const int observed = static_cast<int>(rank_sum_a + 0.5);
    for (int s = 0; s < static_cast<int>(dist.size()); ++s) {
        total += dist[static_cast<size_t>(s)];
        if (s <= observed) at_or_below += dist[static_cast<size_t>(s)];
        if (s >= observed) at_or_above += dist[static_cast<size_t>(s)];
    }

    RankSumOracleResult r;
    r.u = rank_sum_a - static_cast<double>(n_a) * (n_a + 1) / 2.0;
    r.p_two_sided = std::min(1.0, 2.0 * std::min(at_or_below, at_or_above) / total);
    return r;
}

} // namespace weaksatd::testing
