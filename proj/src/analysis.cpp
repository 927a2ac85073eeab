#include "primo/analysis.hpp"

#include "primo/errors.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace primo::stats {

double mean(const std::vector<double>& values) {
    if (values.empty()) throw DomainError("mean of an empty list");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(const std::vector<double>& values) {
    if (values.size() < 2) throw DomainError("sample standard deviation needs at least two values");
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

Descriptive descriptive(const std::vector<double>& values) {
    if (values.empty()) throw DomainError("descriptive statistics of an empty list");
    return {mean(values), sample_sd(values)};
}

double f_survival(double F, double df_num, double df_den) {
    if (!(df_num > 0.0) || !(df_den > 0.0)) throw DomainError("F distribution needs positive degrees of freedom");
    if (std::isnan(F)) return 1.0;
    if (F <= 0.0) return 1.0;
    if (std::isinf(F)) return 0.0;
    const double x = df_den / (df_den + df_num * F);
    return boost::math::ibeta(0.5 * df_den, 0.5 * df_num, x);
}

AnovaResult anova_2x2(const SampleTable& data) {
    std::array<std::vector<double>, 4> cells;
    for (const auto& row : data.rows) {
        if (!std::isfinite(row.value)) throw DomainError("anova_2x2: non-finite value");
        cells[static_cast<std::size_t>(2 * static_cast<int>(row.display) + static_cast<int>(row.style))].push_back(row.value);
    }

    AnovaResult out;
    std::array<double, 4> m{};
    double grand = 0.0;
    for (int c = 0; c < 4; ++c) {
        const auto& values = cells[static_cast<std::size_t>(c)];
        if (values.empty()) throw DomainError("anova_2x2: empty cell");
        CellSummary& summary = out.cells[static_cast<std::size_t>(c)];
        summary.display = static_cast<DisplayMode>(c / 2);
        summary.style = static_cast<NavStyle>(c % 2);
        summary.n = values.size();
        summary.mean = mean(values);
        summary.sd = values.size() > 1 ? sample_sd(values) : 0.0;
        m[static_cast<std::size_t>(c)] = summary.mean;
        out.n += values.size();
        grand += std::accumulate(values.begin(), values.end(), 0.0);
    }
    grand /= static_cast<double>(out.n);
    if (out.n <= 4) throw DomainError("anova_2x2: no error degrees of freedom (need more than one value in some cell)");

    for (int c = 0; c < 4; ++c) {
        for (double v : cells[static_cast<std::size_t>(c)]) {
            out.ss_error += (v - m[static_cast<std::size_t>(c)]) * (v - m[static_cast<std::size_t>(c)]);
            out.ss_total += (v - grand) * (v - grand);
        }
    }
    out.df_error = static_cast<int>(out.n) - 4;
    const double ms_error = out.ss_error / out.df_error;

    // Cell order: (Sel,Str), (Sel,Uns), (Eve,Str), (Eve,Uns).
    auto effect = [&](std::array<double, 4> coeff) {
        double contrast = 0.0;
        double weight = 0.0;
        for (std::size_t c = 0; c < 4; ++c) {
            contrast += coeff[c] * m[c];
            weight += coeff[c] * coeff[c] / static_cast<double>(cells[c].size());
        }
        EffectResult e;
        e.ss = contrast * contrast / weight;
        e.df_num = 1;
        e.df_den = out.df_error;
        if (e.ss == 0.0) {
            e.F = 0.0;
        } else if (ms_error == 0.0) {
            e.F = std::numeric_limits<double>::infinity();
        } else {
            e.F = e.ss / ms_error;
        }
        e.p = f_survival(e.F, e.df_num, e.df_den);
        const double denom = e.ss + out.ss_error;
        e.eta_p_sq = denom > 0.0 ? e.ss / denom : 0.0;
        return e;
    };
    out.display = effect({1, 1, -1, -1});
    out.style = effect({1, -1, 1, -1});
    out.interaction = effect({1, -1, -1, 1});
    return out;
}

double wilcoxon_exact_upper(const std::vector<double>& ranks, double observed_w_plus) {
    // Ranks are multiples of 1/2, so doubled ranks are exact integers.
    std::vector<int> doubled;
    doubled.reserve(ranks.size());
    int max_sum = 0;
    for (double r : ranks) {
        doubled.push_back(static_cast<int>(std::lround(2.0 * r)));
        max_sum += doubled.back();
    }
    // counts[s] = number of sign patterns with doubled W+ = s
    std::vector<double> counts(static_cast<std::size_t>(max_sum) + 1, 0.0);
    counts[0] = 1.0;
    int reach = 0;
    for (int r : doubled) {
        for (int s = reach; s >= 0; --s) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
        reach += r;
    }
    const auto threshold = static_cast<int>(std::lround(2.0 * observed_w_plus));
    double tail = 0.0;
    for (int s = std::max(threshold, 0); s <= max_sum; ++s) tail += counts[static_cast<std::size_t>(s)];
    return tail / std::ldexp(1.0, static_cast<int>(ranks.size()));
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<double> diffs;
    for (const auto& [pre, post] : pairs) {
        const double d = post - pre;
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw DomainError("wilcoxon_signed_rank: every difference is zero");

    const std::size_t n = diffs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });

    std::vector<double> ranks(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
        const double shared = 0.5 * static_cast<double>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        const auto t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }

    WilcoxonResult out;
    out.n_effective = static_cast<int>(n);
    for (std::size_t i = 0; i < n; ++i) (diffs[i] > 0.0 ? out.w_plus : out.w_minus) += ranks[i];

    const double nn = static_cast<double>(n);
    const double expected = nn * (nn + 1.0) / 4.0;
    const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double deviation = out.w_plus - expected;
    const double corrected = std::max(std::abs(deviation) - 0.5, 0.0);
    out.Z = variance > 0.0 ? std::copysign(corrected / std::sqrt(variance), deviation) : 0.0;
    if (corrected == 0.0) out.Z = 0.0;

    if (out.n_effective <= kWilcoxonExactLimit) {
        out.exact = true;
        const double upper = wilcoxon_exact_upper(ranks, out.w_plus);
        // Lower tail by symmetry: P(W+ <= w) = P(W+ >= total - w).
        const double lower = wilcoxon_exact_upper(ranks, nn * (nn + 1.0) / 2.0 - out.w_plus);
        out.p = std::min(1.0, 2.0 * std::min(upper, lower));
    } else {
        out.p = std::min(1.0, std::erfc(std::abs(out.Z) / std::sqrt(2.0)));
    }
    return out;
}

double cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw DomainError("cohens_d: each group needs at least two values");
    const double sa = sample_sd(a);
    const double sb = sample_sd(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double pooled = std::sqrt(((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / (na + nb - 2.0));
    if (pooled == 0.0) throw DomainError("cohens_d: pooled standard deviation is zero");
    return (mean(a) - mean(b)) / pooled;
}

SsqWeightConfig SsqWeightConfig::standard() {
    SsqWeightConfig w;
    // N, O, D columns.
    w.membership = {
        {true, true, false},    // general discomfort
        {false, true, false},   // fatigue
        {false, true, false},   // headache
        {false, true, false},   // eyestrain
        {false, true, true},    // difficulty focusing
        {true, false, false},   // increased salivation
        {true, false, false},   // sweating
        {true, false, true},    // nausea
        {true, true, false},    // difficulty concentrating
        {false, false, true},   // fullness of head
        {false, true, true},    // blurred vision
        {false, false, true},   // dizzy (eyes open)
        {false, false, true},   // dizzy (eyes closed)
        {false, false, true},   // vertigo
        {true, false, false},   // stomach awareness
        {true, false, false},   // burping
    };
    w.nausea = 9.54;
    w.oculomotor = 7.58;
    w.disorientation = 13.92;
    w.total = 3.74;
    return w;
}

SsqScores ssq_scores(const std::vector<int>& ratings, const SsqWeightConfig& weights) {
    if (ratings.size() != weights.membership.size()) {
        throw DomainError("ssq_scores: expected " + std::to_string(weights.membership.size()) + " ratings, got " +
                          std::to_string(ratings.size()));
    }
    std::array<double, 3> raw{};
    for (std::size_t i = 0; i < ratings.size(); ++i) {
        for (std::size_t s = 0; s < 3; ++s) {
            if (weights.membership[i][s]) raw[s] += ratings[i];
        }
    }
    return {raw[0] * weights.nausea, raw[1] * weights.oculomotor, raw[2] * weights.disorientation,
            (raw[0] + raw[1] + raw[2]) * weights.total};
}

}  // namespace primo::stats
