#pragma once

#include "primo/navigation.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace primo::stats {

struct Descriptive {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation (n - 1)
};

double mean(const std::vector<double>& values);
// Throws DomainError for fewer than two values.
double sample_sd(const std::vector<double>& values);
// Throws DomainError on an empty list and, through sample_sd, on a single value.
Descriptive descriptive(const std::vector<double>& values);

struct SampleRow {
    DisplayMode display = DisplayMode::Selection;
    NavStyle style = NavStyle::Structured;
    double value = 0.0;
    int participant = 0;
};

struct SampleTable {
    std::vector<SampleRow> rows;
};

struct EffectResult {
    double ss = 0.0;
    double F = 0.0;
    int df_num = 1;
    int df_den = 0;
    double p = 1.0;
    double eta_p_sq = 0.0;
};

struct CellSummary {
    DisplayMode display;
    NavStyle style;
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // 0 for single-value cells
};

struct AnovaResult {
    EffectResult display;
    EffectResult style;
    EffectResult interaction;
    double ss_error = 0.0;
    int df_error = 0;
    double ss_total = 0.0;
    std::array<CellSummary, 4> cells;  // indexed by Condition::code()
    std::size_t n = 0;
};

// Fixed-effects 2x2 ANOVA. Effects use the +/-1 contrast sums of squares,
// which coincide with the classical decomposition on balanced data.
// Throws DomainError when a cell is empty or there are no error degrees of freedom.
AnovaResult anova_2x2(const SampleTable& data);

// Upper tail of F(df_num, df_den) at F, via the regularized incomplete beta.
double f_survival(double F, double df_num, double df_den);

struct WilcoxonResult {
    double Z = 0.0;
    double p = 1.0;
    int n_effective = 0;
    double w_plus = 0.0;
    double w_minus = 0.0;
    bool exact = false;
};

inline constexpr int kWilcoxonExactLimit = 12;

// Paired signed-rank test on post - pre. Zero differences are dropped,
// ties get averaged ranks, p is two-sided and exact up to
// kWilcoxonExactLimit pairs. Throws DomainError when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs);

// One-sided exact P(W+ >= observed) under the sign-flip null, using the
// given (possibly tied) ranks.
double wilcoxon_exact_upper(const std::vector<double>& ranks, double observed_w_plus);

// (mean(a) - mean(b)) / pooled sd. Throws DomainError for groups smaller
// than 2 or zero pooled sd.
double cohens_d(const std::vector<double>& a, const std::vector<double>& b);

struct SsqWeightConfig {
    // Per symptom: membership in nausea, oculomotor, disorientation.
    std::vector<std::array<bool, 3>> membership;
    double nausea = 1.0;
    double oculomotor = 1.0;
    double disorientation = 1.0;
    double total = 1.0;

    // 16 symptoms and the conversion weights of the standard simulator
    // sickness questionnaire.
    static SsqWeightConfig standard();
};

struct SsqScores {
    double nausea = 0.0;
    double oculomotor = 0.0;
    double disorientation = 0.0;
    double total = 0.0;
};

// Throws DomainError when the rating count does not match the configuration.
SsqScores ssq_scores(const std::vector<int>& ratings, const SsqWeightConfig& weights);

}  // namespace primo::stats
