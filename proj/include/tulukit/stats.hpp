#pragma once

// The statistical procedures the evaluation pipeline needs: paired bootstrap
// with a percentile CI, Holm-Bonferroni step-down correction, Pearson
// correlation with a t-based p-value, and Cohen's / Fleiss' kappa. Nothing
// more; this is not a general statistics library.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tulukit/errors.hpp"
#include "tulukit/rng.hpp"

namespace tulu::stats {

struct PairedSample {
    std::vector<double> a;
    std::vector<double> b;

    size_t size() const { return a.size(); }
    void validate() const {
        if (a.size() != b.size()) throw Error("paired sample: length mismatch");
        if (a.empty()) throw Error("paired sample: empty");
    }
};

struct TestResult {
    double observed_diff = 0.0;
    double p_value = 1.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    size_t resamples = 0;
    uint64_t seed = 0;
};

// Paired bootstrap over item indices: statistic is mean(A*) - mean(B*), the
// two-sided p is 2 * min(frac <= 0, frac >= 0) clamped to [2/R, 1], and the
// CI is the 2.5/97.5 percentile of the resampling distribution. Deterministic
// under the seed.
inline TestResult paired_bootstrap(const PairedSample& sample, size_t resamples = 10000,
                                   uint64_t seed = 20260800) {
    sample.validate();
    if (resamples < 100) throw Error("paired_bootstrap: fewer than 100 resamples");

    size_t n = sample.size();
    std::vector<double> diffs(n);
    double observed = 0.0;
    for (size_t i = 0; i < n; ++i) {
        diffs[i] = sample.a[i] - sample.b[i];
        observed += diffs[i];
    }
    observed /= static_cast<double>(n);

    SplitMix64 rng(seed);
    std::vector<double> stats(resamples);
    size_t le_zero = 0, ge_zero = 0;
    for (size_t r = 0; r < resamples; ++r) {
        double sum = 0.0;
        for (size_t i = 0; i < n; ++i) sum += diffs[rng.bounded(n)];
        double stat = sum / static_cast<double>(n);
        stats[r] = stat;
        if (stat <= 0.0) ++le_zero;
        if (stat >= 0.0) ++ge_zero;
    }
    std::sort(stats.begin(), stats.end());

    double p = 2.0 * static_cast<double>(std::min(le_zero, ge_zero)) /
               static_cast<double>(resamples);
    p = std::clamp(p, 2.0 / static_cast<double>(resamples), 1.0);

    size_t lo_idx = static_cast<size_t>(std::floor(0.025 * static_cast<double>(resamples)));
    size_t hi_idx = static_cast<size_t>(std::ceil(0.975 * static_cast<double>(resamples))) - 1;
    TestResult result;
    result.observed_diff = observed;
    result.p_value = p;
    result.ci_low = stats[std::min(lo_idx, resamples - 1)];
    result.ci_high = stats[std::min(hi_idx, resamples - 1)];
    result.resamples = resamples;
    result.seed = seed;
    return result;
}

struct HolmResult {
    double adjusted_p = 1.0;
    bool rejected = false;
};

// Step-down Holm-Bonferroni; results are returned in input order.
// adjusted_p(i) = max over j <= i (sorted) of (m - j + 1) * p_(j), capped at 1.
inline std::vector<HolmResult> holm_bonferroni(const std::vector<double>& p_values,
                                               double alpha = 0.05) {
    size_t m = p_values.size();
    std::vector<size_t> order(m);
    for (size_t i = 0; i < m; ++i) {
        if (p_values[i] < 0.0 || p_values[i] > 1.0)
            throw Error("holm_bonferroni: p-value outside [0, 1]");
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t x, size_t y) { return p_values[x] < p_values[y]; });
    std::vector<HolmResult> out(m);
    double running_max = 0.0;
    for (size_t rank = 0; rank < m; ++rank) {
        double scaled = static_cast<double>(m - rank) * p_values[order[rank]];
        running_max = std::max(running_max, scaled);
        double adjusted = std::min(running_max, 1.0);
        out[order[rank]] = {adjusted, adjusted <= alpha};
    }
    return out;
}

namespace detail {

// Regularized incomplete beta via Lentz's continued fraction; standard
// numerical recipe, adequate for the t-distribution tails used here.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 200;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

struct Correlation {
    double r = 0.0;
    double p = 1.0;
};

// Product-moment correlation; two-sided p from the t distribution with n-2
// degrees of freedom.
inline Correlation pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error("pearson_r: length mismatch");
    size_t n = x.size();
    if (n < 3) throw Error("pearson_r: need at least 3 points");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error("pearson_r: zero variance");
    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);
    double df = static_cast<double>(n - 2);
    double r2 = r * r;
    double p = r2 >= 1.0 ? 0.0 : detail::incomplete_beta(df / 2.0, 0.5, df / (df + df * r2 / (1.0 - r2)));
    return {r, p};
}

// ---------------------------------------------------------------------------
// Agreement coefficients. kappa = (p_o - p_e) / (1 - p_e); undefined when the
// expected agreement is 1 (a single category everywhere), reported as a
// distinct error.

template <typename Label>
inline double cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
    if (a.size() != b.size()) throw Error("cohen_kappa: length mismatch");
    if (a.empty()) throw Error("cohen_kappa: empty label lists");
    std::map<Label, double> ca, cb;
    size_t agree = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        ca[a[i]] += 1.0;
        cb[b[i]] += 1.0;
        if (a[i] == b[i]) ++agree;
    }
    double n = static_cast<double>(a.size());
    double p_o = static_cast<double>(agree) / n;
    double p_e = 0.0;
    for (const auto& [label, count_a] : ca) {
        auto it = cb.find(label);
        if (it != cb.end()) p_e += (count_a / n) * (it->second / n);
    }
    if (p_e >= 1.0 - 1e-15)
        throw Error("kappa undefined: expected agreement is 1 (single observed category)");
    return (p_o - p_e) / (1.0 - p_e);
}

template <typename Label>
inline double mean_pairwise_kappa(const std::vector<std::vector<Label>>& annotators) {
    if (annotators.size() < 2) throw Error("mean_pairwise_kappa: need at least 2 annotators");
    double sum = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < annotators.size(); ++i) {
        for (size_t j = i + 1; j < annotators.size(); ++j) {
            sum += cohen_kappa(annotators[i], annotators[j]);
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

// Standard items x categories formulation; every item must carry the same
// number of ratings.
inline double fleiss_kappa(const std::vector<std::vector<int>>& table) {
    if (table.empty()) throw Error("fleiss_kappa: empty table");
    size_t categories = table.front().size();
    if (categories < 2) throw Error("fleiss_kappa: need at least 2 categories");
    int raters = 0;
    for (int c : table.front()) raters += c;
    if (raters < 2) throw Error("fleiss_kappa: need at least 2 ratings per item");

    double n = static_cast<double>(raters);
    double N = static_cast<double>(table.size());
    std::vector<double> category_share(categories, 0.0);
    double p_bar = 0.0;
    for (const auto& row : table) {
        if (row.size() != categories) throw Error("fleiss_kappa: ragged table");
        int row_total = 0;
        double sq = 0.0;
        for (size_t j = 0; j < categories; ++j) {
            row_total += row[j];
            sq += static_cast<double>(row[j]) * static_cast<double>(row[j]);
            category_share[j] += static_cast<double>(row[j]);
        }
        if (row_total != raters) throw Error("fleiss_kappa: unequal ratings per item");
        p_bar += (sq - n) / (n * (n - 1.0));
    }
    p_bar /= N;
    double p_e = 0.0;
    for (double share : category_share) {
        double p_j = share / (N * n);
        p_e += p_j * p_j;
    }
    if (p_e >= 1.0 - 1e-15)
        throw Error("kappa undefined: expected agreement is 1 (single observed category)");
    return (p_bar - p_e) / (1.0 - p_e);
}

template <typename Label>
inline std::vector<std::vector<int>> fleiss_table(const std::vector<std::vector<Label>>& annotators) {
    if (annotators.empty()) throw Error("fleiss_table: no annotators");
    size_t items = annotators.front().size();
    std::map<Label, size_t> category_index;
    for (const auto& list : annotators) {
        if (list.size() != items) throw Error("fleiss_table: misaligned annotator lists");
        for (const auto& label : list) category_index.emplace(label, category_index.size());
    }
    std::vector<std::vector<int>> table(items, std::vector<int>(category_index.size(), 0));
    for (const auto& list : annotators)
        for (size_t i = 0; i < items; ++i) ++table[i][category_index[list[i]]];
    return table;
}

}  // namespace tulu::stats
