#ifndef ISA_STATS_HPP
#define ISA_STATS_HPP

#include "isa/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace isa::stats {

/// Binary classification quality with Unsafe (1) as the positive class.
struct EvalReport {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0, accuracy = 0.0;
    bool precision_undefined = false; // no predicted positives
    bool recall_undefined = false;    // no actual positives
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
};

namespace detail {
inline double ratio(std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
inline double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }
} // namespace detail

inline EvalReport evaluate(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw Error(ErrorCode::DimensionMismatch, "evaluate needs equal, non-empty prediction and truth vectors");
    EvalReport r;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == 1 && truth[i] == 1) ++r.tp;
        else if (pred[i] == 1) ++r.fp;
        else if (truth[i] == 1) ++r.fn;
        else ++r.tn;
    }
    r.precision = detail::ratio(r.tp, r.tp + r.fp, r.precision_undefined);
    r.recall = detail::ratio(r.tp, r.tp + r.fn, r.recall_undefined);
    r.f1 = detail::harmonic(r.precision, r.recall);
    r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(pred.size());
    bool u = false;
    const double p0 = detail::ratio(r.tn, r.tn + r.fn, u);
    const double r0 = detail::ratio(r.tn, r.tn + r.fp, u);
    r.macro_precision = 0.5 * (r.precision + p0);
    r.macro_recall = 0.5 * (r.recall + r0);
    r.macro_f1 = 0.5 * (r.f1 + detail::harmonic(p0, r0));
    return r;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct WilcoxonResult {
    double p = 1.0;
    double w_plus = 0.0;
    double w_minus = 0.0;
    std::size_t m = 0; // non-zero differences
    bool exact = true;
};

/// Largest non-zero difference count evaluated exactly.
inline constexpr std::size_t wilcoxon_exact_limit = 25;

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are discarded; |d| is ranked with average ties and the
/// statistic is min(W+, W-). Up to 25 non-zero differences the null
/// distribution over all 2^m sign assignments is counted exactly (dynamic
/// programming over doubled rank sums, which are integers even with ties);
/// above that a tie-corrected normal approximation with continuity
/// correction is used. `force_normal` selects the approximation regardless.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                           bool force_normal = false) {
    if (a.size() != b.size() || a.empty())
        throw Error(ErrorCode::DimensionMismatch, "wilcoxon needs paired samples of equal non-zero length");
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
    WilcoxonResult r;
    r.m = d.size();
    if (d.empty()) return r;

    const std::size_t m = d.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::abs(d[x]) < std::abs(d[y]); });
    std::vector<std::uint64_t> rank2(m); // doubled ranks
    double tie_term = 0.0;
    for (std::size_t i = 0; i < m;) {
        std::size_t j = i;
        while (j + 1 < m && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
        const std::uint64_t r2 = static_cast<std::uint64_t>(i + j + 2); // 2 * average of (i+1 .. j+1)
        for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    std::uint64_t wplus2 = 0, total2 = 0;
    for (std::size_t i = 0; i < m; ++i) {
        total2 += rank2[i];
        if (d[i] > 0) wplus2 += rank2[i];
    }
    const std::uint64_t wminus2 = total2 - wplus2;
    r.w_plus = static_cast<double>(wplus2) / 2.0;
    r.w_minus = static_cast<double>(wminus2) / 2.0;
    const std::uint64_t wmin2 = std::min(wplus2, wminus2);

    if (m <= wilcoxon_exact_limit && !force_normal) {
        // counts[s] = number of sign assignments whose doubled W+ equals s
        std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
        counts[0] = 1.0;
        std::uint64_t reach = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const auto rk = rank2[i];
            for (std::uint64_t s = reach + 1; s-- > 0;)
                if (counts[static_cast<std::size_t>(s)] != 0.0) counts[static_cast<std::size_t>(s + rk)] += counts[static_cast<std::size_t>(s)];
            reach += rk;
        }
        double tail = 0.0;
        for (std::uint64_t s = 0; s <= wmin2; ++s) tail += counts[static_cast<std::size_t>(s)];
        r.p = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(m)));
        r.exact = true;
    } else {
        const double md = static_cast<double>(m);
        const double mean = md * (md + 1.0) / 4.0;
        const double var = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0 - tie_term / 48.0;
        const double w = static_cast<double>(wmin2) / 2.0;
        const double z = var > 0.0 ? (std::min(w + 0.5, mean) - mean) / std::sqrt(var) : 0.0;
        r.p = std::min(1.0, 2.0 * normal_cdf(z));
        r.exact = false;
    }
    return r;
}

} // namespace isa::stats

#endif // ISA_STATS_HPP
