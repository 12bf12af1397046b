#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace anchorprobe::stats {

/// Significance level used for every `significant` flag in the toolkit.
inline constexpr double kAlpha = 0.05;

enum class Alternative { two_sided, greater, less };

std::string_view to_string(Alternative alt);
Alternative parse_alternative(std::string_view text);

// ---------------------------------------------------------------- basics

double mean(std::span<const double> xs);
/// Sample variance (n - 1 denominator). Requires n >= 2.
double variance(std::span<const double> xs);
double stddev(std::span<const double> xs);

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> xs);

// ---------------------------------------------------------------- ANOVA

struct AnovaResult {
  double f = 0.0;  ///< +inf when the within-group sum of squares is zero.
  double p = 1.0;
  double log10_p = 0.0;
  double eta_squared = 0.0;  ///< SS_between / SS_total
  int df_between = 0;
  int df_within = 0;
  double ss_between = 0.0;
  double ss_within = 0.0;
};

/// Classical one-way ANOVA. Throws DomainError for fewer than two groups or a
/// group with fewer than two values, DegenerateError when every value is equal.
AnovaResult one_way_anova(std::span<const std::vector<double>> groups);

// ---------------------------------------------------------------- Tukey HSD

struct LabeledGroup {
  std::string label;
  std::vector<double> values;
};

struct PairwiseComparison {
  std::string group_a;
  std::string group_b;
  double mean_diff = 0.0;  ///< mean(a) - mean(b)
  double q = 0.0;          ///< studentized range statistic
  double p_adjusted = 1.0;
  bool significant = false;
};

/// All k(k-1)/2 Tukey-Kramer comparisons in input order (a before b).
std::vector<PairwiseComparison> tukey_hsd(std::span<const LabeledGroup> groups,
                                          double alpha = kAlpha);

// ---------------------------------------------------------------- rank tests

struct RankTestResult {
  double statistic = 0.0;  ///< W+ for signed-rank, U of the first sample for Mann-Whitney
  double p = 1.0;
  double log10_p = 0.0;
  bool exact = false;
  std::size_t n_used = 0;  ///< signed-rank: nonzero differences kept
  Alternative alternative = Alternative::two_sided;
};

/// Largest number of nonzero differences handled by exact enumeration.
inline constexpr std::size_t kSignedRankExactMax = 25;
/// Largest n1·n2 handled by the exact Mann-Whitney distribution.
inline constexpr std::size_t kMannWhitneyExactMax = 400;

/// Wilcoxon signed-rank test. Zero differences are dropped before ranking.
/// Exact null distribution of W+ (ties handled through half-integer midranks)
/// up to kSignedRankExactMax nonzero differences; above that a normal
/// approximation with tie-corrected variance and continuity correction 0.5.
/// Throws DegenerateError when every difference is zero.
RankTestResult wilcoxon_signed_rank(std::span<const double> paired_diffs,
                                    Alternative alt = Alternative::two_sided);

/// Mann-Whitney U test of `a` against `b`. U counts pairs with a > b (ties
/// 1/2). "greater" means a tends to exceed b.
RankTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                              Alternative alt = Alternative::two_sided);

// ---------------------------------------------------------------- effect sizes

enum class EffectKind { cohens_d, cliffs_delta };
enum class EffectLabel { negligible, small, medium, large };

std::string_view to_string(EffectKind kind);
std::string_view to_string(EffectLabel label);

struct EffectSize {
  EffectKind kind = EffectKind::cohens_d;
  double value = 0.0;
  EffectLabel label = EffectLabel::negligible;
};

/// Thresholds are inclusive on |value|: d 0.2/0.5/0.8, δ 0.147/0.33/0.474.
EffectLabel label_effect(EffectKind kind, double value);

/// (mean_a - mean_b) / pooled SD with (n-1)-weighted pooled variance.
EffectSize cohens_d(std::span<const double> a, std::span<const double> b);

/// (#(a > b) - #(a < b)) / (n_a · n_b), counted in O(n log n) by sorting b.
EffectSize cliffs_delta(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------- correlation

struct Correlation {
  double r = 0.0;
  double p = 1.0;  ///< two-sided, t distribution with n - 2 df
  double log10_p = 0.0;
  std::size_t n = 0;
};

Correlation pearson_r(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------- bootstrap

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

using Statistic = std::function<double(std::span<const double>)>;

/// Percentile bootstrap interval. Resample indices come from a CounterRng
/// keyed by `seed`; quantiles use linear interpolation between order statistics.
Interval bootstrap_ci(std::span<const double> data, const Statistic& statistic,
                      int n_resamples = 1000, double alpha = 0.05, std::uint64_t seed = 42);

}  // namespace anchorprobe::stats
