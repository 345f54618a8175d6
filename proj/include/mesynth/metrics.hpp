#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mesynth/au.hpp"
#include "mesynth/error.hpp"
#include "mesynth/rng.hpp"

namespace mesynth {

// Subject-wise fold planning, 3-class classification metrics (UF1, UAR,
// accuracy) and the permutation test used to tag run comparisons.

struct FoldPlan {
    int k = 0;
    std::vector<std::vector<std::string>> folds;  // disjoint subject sets
    std::uint64_t seed = 0;
};

// Subjects are canonicalized (sorted, deduplicated), shuffled with the seed
// and dealt round-robin, so fold sizes differ by at most one and the plan is
// independent of input order.
inline FoldPlan split_subjects(std::vector<std::string> subjects, int k, std::uint64_t seed) {
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
    if (k < 2) fail("TooFewSubjects", "k must be >= 2");
    if (static_cast<std::size_t>(k) > subjects.size()) {
        fail("TooFewSubjects", "k=" + std::to_string(k) + " exceeds " +
                                   std::to_string(subjects.size()) + " distinct subjects");
    }
    RngStream rng(seed, "folds/shuffle", 0);
    for (std::size_t i = subjects.size(); i > 1; --i) {
        std::size_t j = rng.uniform_int(0, i - 1);
        std::swap(subjects[i - 1], subjects[j]);
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.folds.resize(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        plan.folds[i % static_cast<std::size_t>(k)].push_back(std::move(subjects[i]));
    }
    return plan;
}

struct ConfusionMatrix {
    // rows = true class, columns = predicted class
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

    std::int64_t total() const {
        std::int64_t t = 0;
        for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
        return t;
    }
    std::int64_t row_sum(std::size_t r) const {
        return std::accumulate(counts[r].begin(), counts[r].end(), std::int64_t{0});
    }
    std::int64_t col_sum(std::size_t c) const {
        std::int64_t t = 0;
        for (const auto& row : counts) t += row[c];
        return t;
    }
};

inline ConfusionMatrix confusion(std::span<const EmotionClass> pred,
                                 std::span<const EmotionClass> truth) {
    if (pred.size() != truth.size()) {
        fail("LengthMismatch", "predictions (" + std::to_string(pred.size()) + ") and truth (" +
                                   std::to_string(truth.size()) + ") differ in length");
    }
    if (pred.empty()) fail("EmptyInput", "no samples to score");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        cm.counts[static_cast<int>(truth[i])][static_cast<int>(pred[i])] += 1;
    }
    return cm;
}

struct MetricsReport {
    double uf1 = 0.0;
    double uar = 0.0;
    double accuracy = 0.0;
    std::array<double, kNumClasses> f1{};
    std::array<double, kNumClasses> recall{};
};

// Per-class F1 = 2TP / (2TP + FP + FN) and recall = TP / (TP + FN), both
// defined as 0 when the denominator is 0; UF1/UAR are the unweighted means
// over the three classes.
inline MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) fail("EmptyInput", "confusion matrix is empty");
    MetricsReport report;
    double diag = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double tp = static_cast<double>(cm.counts[c][c]);
        const double fn = static_cast<double>(cm.row_sum(c)) - tp;
        const double fp = static_cast<double>(cm.col_sum(c)) - tp;
        const double f1_den = 2.0 * tp + fp + fn;
        report.f1[c] = f1_den > 0.0 ? 2.0 * tp / f1_den : 0.0;
        const double rec_den = tp + fn;
        report.recall[c] = rec_den > 0.0 ? tp / rec_den : 0.0;
        diag += tp;
    }
    report.uf1 = (report.f1[0] + report.f1[1] + report.f1[2]) / 3.0;
    report.uar = (report.recall[0] + report.recall[1] + report.recall[2]) / 3.0;
    report.accuracy = diag / static_cast<double>(cm.total());
    return report;
}

inline double uf1(const ConfusionMatrix& cm) { return compute_metrics(cm).uf1; }
inline double uar(const ConfusionMatrix& cm) { return compute_metrics(cm).uar; }
inline double accuracy(const ConfusionMatrix& cm) { return compute_metrics(cm).accuracy; }

struct RunSeries {
    std::vector<double> values;
    std::string label;
};

namespace detail {

// C(n, k) saturating at a large cap to avoid overflow.
inline std::uint64_t binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        // result *= (n - k + i) / i, guarding overflow against the cap
        std::uint64_t num = n - k + i;
        if (result > cap / num) return cap + 1;
        result = result * num / i;
    }
    return result;
}

inline double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace detail

// Two-sided permutation test on the difference of means. Exhaustive when the
// number of group-a selections C(|a|+|b|, |a|) fits within num_permutations,
// Monte-Carlo otherwise; either way p > 0 because the observed labeling is
// counted. Arguments are canonicalized first so the p-value is symmetric in
// (a, b).
inline double permutation_test(const RunSeries& a, const RunSeries& b,
                               std::uint64_t num_permutations, RngStream rng) {
    if (a.values.empty() || b.values.empty()) fail("EmptyInput", "both run series must be non-empty");

    std::span<const double> va = a.values;
    std::span<const double> vb = b.values;
    if (va.size() > vb.size() ||
        (va.size() == vb.size() &&
         std::lexicographical_compare(vb.begin(), vb.end(), va.begin(), va.end()))) {
        std::swap(va, vb);
    }

    const double observed = std::abs(detail::mean_of(va) - detail::mean_of(vb));
    const double tol = 1e-12 * (1.0 + observed);

    std::vector<double> pooled(va.begin(), va.end());
    pooled.insert(pooled.end(), vb.begin(), vb.end());
    const std::size_t n = pooled.size();
    const std::size_t na = va.size();
    const double inv_na = 1.0 / static_cast<double>(na);
    const double inv_nb = 1.0 / static_cast<double>(n - na);
    const double pooled_sum = std::accumulate(pooled.begin(), pooled.end(), 0.0);

    auto delta_for_selection = [&](double sum_a) {
        double mean_a = sum_a * inv_na;
        double mean_b = (pooled_sum - sum_a) * inv_nb;
        return std::abs(mean_a - mean_b);
    };

    const std::uint64_t exhaustive_count = detail::binomial_capped(n, na, num_permutations);
    if (exhaustive_count <= num_permutations) {
        // Lexicographic enumeration of all na-subsets of the pooled indices.
        std::vector<std::size_t> idx(na);
        std::iota(idx.begin(), idx.end(), 0);
        std::uint64_t at_least = 0;
        std::uint64_t total = 0;
        while (true) {
            double sum_a = 0.0;
            for (std::size_t i : idx) sum_a += pooled[i];
            if (delta_for_selection(sum_a) >= observed - tol) ++at_least;
            ++total;
            // advance to next combination
            std::size_t i = na;
            while (i > 0) {
                --i;
                if (idx[i] != i + n - na) break;
                if (i == 0) {
                    return static_cast<double>(at_least) / static_cast<double>(total);
                }
            }
            ++idx[i];
            for (std::size_t j = i + 1; j < na; ++j) idx[j] = idx[j - 1] + 1;
        }
    }

    // Monte-Carlo: shuffle and take the first na as group a; add-one
    // smoothing counts the observed labeling.
    std::uint64_t at_least = 0;
    for (std::uint64_t t = 0; t < num_permutations; ++t) {
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = rng.uniform_int(0, i - 1);
            std::swap(pooled[i - 1], pooled[j]);
        }
        double sum_a = std::accumulate(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(na), 0.0);
        if (delta_for_selection(sum_a) >= observed - tol) ++at_least;
    }
    return static_cast<double>(at_least + 1) / static_cast<double>(num_permutations + 1);
}

// Significance tiers: p > 0.05 n.s.; (0.01, 0.05] *; (0.001, 0.01] **;
// <= 0.001 ***. Boundaries land in the less-significant tier.
inline std::string_view significance_star(double p) {
    if (!(p > 0.0 && p <= 1.0)) fail("InvalidPValue", "p must lie in (0, 1]");
    if (p >= 0.05) return "n.s.";
    if (p >= 0.01) return "*";
    if (p >= 0.001) return "**";
    return "***";
}

}  // namespace mesynth
