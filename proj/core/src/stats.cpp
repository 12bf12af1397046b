#include "anchorprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "anchorprobe/distributions.hpp"
#include "anchorprobe/error.hpp"
#include "anchorprobe/rng.hpp"

namespace anchorprobe::stats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_log10(double p) { return p > 0 ? std::log10(p) : -kInf; }

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite value");
  }
}

// Tail probabilities of a discrete null distribution given as counts over
// integer support [0, counts.size()).
struct Tails {
  double lower;  // P(X <= x)
  double upper;  // P(X >= x)
};

Tails tails_at(const std::vector<double>& counts, std::size_t x) {
  double total = 0.0, lower = 0.0, upper = 0.0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    total += counts[s];
    if (s <= x) lower += counts[s];
    if (s >= x) upper += counts[s];
  }
  return {lower / total, upper / total};
}

double p_from_tails(const Tails& t, Alternative alt) {
  switch (alt) {
    case Alternative::greater: return std::min(1.0, t.upper);
    case Alternative::less: return std::min(1.0, t.lower);
    case Alternative::two_sided: break;
  }
  return std::min(1.0, 2.0 * std::min(t.lower, t.upper));
}

// Normal approximation with continuity correction. `delta` = stat - mean.
std::pair<double, double> normal_p(double delta, double sd, Alternative alt) {
  if (sd <= 0) return {1.0, 0.0};
  double z = 0.0;
  double p = 1.0, lp = 0.0;
  switch (alt) {
    case Alternative::two_sided:
      z = (std::fabs(delta) - 0.5) / sd;
      if (z <= 0) return {1.0, 0.0};
      p = std::min(1.0, 2.0 * normal_sf(z));
      lp = std::min(0.0, std::log10(2.0) + log10_normal_sf(z));
      break;
    case Alternative::greater:
      z = (delta - 0.5) / sd;
      p = normal_sf(z);
      lp = log10_normal_sf(z);
      break;
    case Alternative::less:
      z = (delta + 0.5) / sd;
      p = normal_cdf(z);
      lp = log10_normal_sf(-z);
      break;
  }
  return {p, lp};
}

double tie_term(std::vector<double> sorted) {
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    acc += t * t * t - t;
    i = j;
  }
  return acc;
}

}  // namespace

std::string_view to_string(Alternative alt) {
  switch (alt) {
    case Alternative::two_sided: return "two-sided";
    case Alternative::greater: return "greater";
    case Alternative::less: return "less";
  }
  return "two-sided";
}

Alternative parse_alternative(std::string_view text) {
  if (text == "two-sided" || text == "two_sided") return Alternative::two_sided;
  if (text == "greater") return Alternative::greater;
  if (text == "less") return Alternative::less;
  throw DomainError("unknown alternative: " + std::string(text));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw DomainError("variance needs at least two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double stddev(std::span<const double> xs) { return std::sqrt(variance(xs)); }

std::vector<double> midranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

// ---------------------------------------------------------------- ANOVA

AnovaResult one_way_anova(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw DomainError("ANOVA needs at least two groups");
  std::size_t n_total = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw DomainError("ANOVA needs at least two values per group");
    require_finite(g, "ANOVA");
    n_total += g.size();
    grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
  }
  const double grand_mean = grand_sum / static_cast<double>(n_total);

  AnovaResult res;
  for (const auto& g : groups) {
    const double m = mean(g);
    res.ss_between += static_cast<double>(g.size()) * (m - grand_mean) * (m - grand_mean);
    for (double x : g) res.ss_within += (x - m) * (x - m);
  }
  const double ss_total = res.ss_between + res.ss_within;
  if (ss_total <= 0) throw DegenerateError("ANOVA: all values identical");

  res.df_between = static_cast<int>(groups.size()) - 1;
  res.df_within = static_cast<int>(n_total - groups.size());
  res.eta_squared = res.ss_between / ss_total;
  if (res.ss_within <= 0) {
    res.f = kInf;
    res.p = 0.0;
    res.log10_p = -kInf;
  } else {
    res.f = (res.ss_between / res.df_between) / (res.ss_within / res.df_within);
    res.p = f_sf(res.f, res.df_between, res.df_within);
    res.log10_p = log10_f_sf(res.f, res.df_between, res.df_within);
  }
  return res;
}

// ---------------------------------------------------------------- Tukey

std::vector<PairwiseComparison> tukey_hsd(std::span<const LabeledGroup> groups, double alpha) {
  std::vector<std::vector<double>> values;
  values.reserve(groups.size());
  for (const auto& g : groups) values.push_back(g.values);
  const AnovaResult anova = one_way_anova(values);
  const double mse = anova.ss_within / anova.df_within;
  const int k = static_cast<int>(groups.size());

  std::vector<double> means;
  for (const auto& v : values) means.push_back(mean(v));

  std::vector<PairwiseComparison> out;
  out.reserve(groups.size() * (groups.size() - 1) / 2);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      PairwiseComparison c;
      c.group_a = groups[i].label;
      c.group_b = groups[j].label;
      c.mean_diff = means[i] - means[j];
      const double se = std::sqrt(0.5 * mse *
                                  (1.0 / static_cast<double>(values[i].size()) +
                                   1.0 / static_cast<double>(values[j].size())));
      if (c.mean_diff == 0.0) {
        c.q = 0.0;
        c.p_adjusted = 1.0;
      } else if (se <= 0) {
        c.q = kInf;
        c.p_adjusted = 0.0;
      } else {
        c.q = std::fabs(c.mean_diff) / se;
        c.p_adjusted = studentized_range_sf(c.q, k, anova.df_within);
      }
      c.significant = c.p_adjusted < alpha;
      out.push_back(std::move(c));
    }
  }
  return out;
}

// ---------------------------------------------------------------- Wilcoxon

RankTestResult wilcoxon_signed_rank(std::span<const double> paired_diffs, Alternative alt) {
  require_finite(paired_diffs, "signed-rank");
  std::vector<double> nonzero;
  for (double d : paired_diffs) {
    if (d != 0.0) nonzero.push_back(d);
  }
  if (nonzero.empty()) throw DegenerateError("signed-rank: all differences are zero");

  std::vector<double> magnitudes(nonzero.size());
  std::transform(nonzero.begin(), nonzero.end(), magnitudes.begin(),
                 [](double d) { return std::fabs(d); });
  const std::vector<double> ranks = midranks(magnitudes);

  RankTestResult res;
  res.alternative = alt;
  res.n_used = nonzero.size();
  for (std::size_t i = 0; i < nonzero.size(); ++i) {
    if (nonzero[i] > 0) res.statistic += ranks[i];
  }

  const std::size_t n = nonzero.size();
  if (n <= kSignedRankExactMax) {
    // Doubled midranks are integers; count sign patterns per doubled W+.
    std::vector<std::size_t> doubled(n);
    std::size_t max_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
      max_sum += doubled[i];
    }
    std::vector<double> counts(max_sum + 1, 0.0);
    counts[0] = 1.0;
    std::size_t reach = 0;
    for (std::size_t r : doubled) {
      for (std::size_t s = reach + 1; s-- > 0;) {
        if (counts[s] != 0.0) counts[s + r] += counts[s];
      }
      reach += r;
    }
    const auto observed = static_cast<std::size_t>(std::llround(2.0 * res.statistic));
    res.p = p_from_tails(tails_at(counts, observed), alt);
    res.log10_p = safe_log10(res.p);
    res.exact = true;
    return res;
  }

  const double nn = static_cast<double>(n);
  const double mu = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term(magnitudes) / 48.0;
  const auto [p, lp] = normal_p(res.statistic - mu, std::sqrt(std::max(var, 0.0)), alt);
  res.p = p;
  res.log10_p = lp;
  return res;
}

// ---------------------------------------------------------------- Mann-Whitney

RankTestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                              Alternative alt) {
  if (a.empty() || b.empty()) throw DomainError("Mann-Whitney: empty sample");
  require_finite(a, "Mann-Whitney");
  require_finite(b, "Mann-Whitney");
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;

  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<double> ranks = midranks(pooled);
  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < n1; ++i) rank_sum_a += ranks[i];

  RankTestResult res;
  res.alternative = alt;
  res.statistic = rank_sum_a - static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
  const double n1n2 = static_cast<double>(n1) * static_cast<double>(n2);

  if (n1 * n2 <= kMannWhitneyExactMax) {
    // Null distribution of the doubled U of the smaller sample, by counting
    // subsets of doubled pooled ranks.
    const bool a_small = n1 <= n2;
    const std::size_t m = a_small ? n1 : n2;
    std::vector<std::size_t> doubled(n);
    std::size_t top_sum = 0;
    for (std::size_t i = 0; i < n; ++i) doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
    {
      std::vector<std::size_t> sorted = doubled;
      std::sort(sorted.rbegin(), sorted.rend());
      for (std::size_t i = 0; i < m; ++i) top_sum += sorted[i];
    }
    // dp[j][s]: subsets of size j with doubled rank sum s.
    std::vector<std::vector<double>> dp(m + 1, std::vector<double>(top_sum + 1, 0.0));
    dp[0][0] = 1.0;
    for (std::size_t item = 0; item < n; ++item) {
      const std::size_t r = doubled[item];
      for (std::size_t j = std::min(m, item + 1); j >= 1; --j) {
        auto& dst = dp[j];
        const auto& src = dp[j - 1];
        for (std::size_t s = top_sum + 1; s-- > r;) {
          if (src[s - r] != 0.0) dst[s] += src[s - r];
        }
      }
    }
    // doubled U = doubled R - m(m+1)
    const std::size_t offset = m * (m + 1);
    const auto u2_max = static_cast<std::size_t>(std::llround(2.0 * n1n2));
    std::vector<double> counts(u2_max + 1, 0.0);
    for (std::size_t s = offset; s <= top_sum; ++s) {
      const std::size_t u2 = s - offset;
      if (u2 > u2_max || dp[m][s] == 0.0) continue;
      // Express as the distribution of U for sample a.
      counts[a_small ? u2 : u2_max - u2] += dp[m][s];
    }
    const auto observed = static_cast<std::size_t>(std::llround(2.0 * res.statistic));
    res.p = p_from_tails(tails_at(counts, observed), alt);
    res.log10_p = safe_log10(res.p);
    res.exact = true;
    return res;
  }

  const double nn = static_cast<double>(n);
  const double var = n1n2 / 12.0 * ((nn + 1.0) - tie_term(pooled) / (nn * (nn - 1.0)));
  const auto [p, lp] = normal_p(res.statistic - n1n2 / 2.0, std::sqrt(std::max(var, 0.0)), alt);
  res.p = p;
  res.log10_p = lp;
  return res;
}

// ---------------------------------------------------------------- effect sizes

std::string_view to_string(EffectKind kind) {
  return kind == EffectKind::cohens_d ? "cohens_d" : "cliffs_delta";
}

std::string_view to_string(EffectLabel label) {
  switch (label) {
    case EffectLabel::negligible: return "negligible";
    case EffectLabel::small: return "small";
    case EffectLabel::medium: return "medium";
    case EffectLabel::large: return "large";
  }
  return "negligible";
}

EffectLabel label_effect(EffectKind kind, double value) {
  const double v = std::fabs(value);
  const bool d = kind == EffectKind::cohens_d;
  if (v >= (d ? 0.8 : 0.474)) return EffectLabel::large;
  if (v >= (d ? 0.5 : 0.33)) return EffectLabel::medium;
  if (v >= (d ? 0.2 : 0.147)) return EffectLabel::small;
  return EffectLabel::negligible;
}

EffectSize cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("Cohen's d needs two values per sample");
  require_finite(a, "Cohen's d");
  require_finite(b, "Cohen's d");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double pooled = ((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / (na + nb - 2.0);
  if (!(pooled > 0)) throw DegenerateError("Cohen's d: pooled standard deviation is zero");
  EffectSize e;
  e.kind = EffectKind::cohens_d;
  e.value = (mean(a) - mean(b)) / std::sqrt(pooled);
  e.label = label_effect(e.kind, e.value);
  return e;
}

EffectSize cliffs_delta(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("Cliff's delta: empty sample");
  require_finite(a, "Cliff's delta");
  require_finite(b, "Cliff's delta");
  std::vector<double> sorted(b.begin(), b.end());
  std::sort(sorted.begin(), sorted.end());
  std::int64_t net = 0;
  for (double x : a) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
    net += below - above;
  }
  EffectSize e;
  e.kind = EffectKind::cliffs_delta;
  e.value = static_cast<double>(net) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
  e.label = label_effect(e.kind, e.value);
  return e;
}

// ---------------------------------------------------------------- Pearson

Correlation pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("Pearson r: length mismatch");
  if (x.size() < 3) throw DomainError("Pearson r needs at least three pairs");
  require_finite(x, "Pearson r");
  require_finite(y, "Pearson r");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0 || syy <= 0) throw DegenerateError("Pearson r: constant input");
  Correlation c;
  c.n = x.size();
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(c.n) - 2.0;
  if (std::fabs(c.r) >= 1.0) {
    c.p = 0.0;
    c.log10_p = -kInf;
  } else {
    const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
    c.p = std::min(1.0, 2.0 * t_sf(std::fabs(t), df));
    c.log10_p = log10_t_two_sided(t, df);
  }
  return c;
}

// ---------------------------------------------------------------- bootstrap

Interval bootstrap_ci(std::span<const double> data, const Statistic& statistic, int n_resamples,
                      double alpha, std::uint64_t seed) {
  if (data.empty()) throw DomainError("bootstrap: empty data");
  if (n_resamples < 1) throw DomainError("bootstrap: n_resamples must be positive");
  if (!(alpha > 0 && alpha < 1)) throw DomainError("bootstrap: alpha must lie in (0, 1)");
  CounterRng rng = CounterRng::keyed(seed, "bootstrap");
  std::vector<double> resample(data.size());
  std::vector<double> stats(static_cast<std::size_t>(n_resamples));
  for (auto& s : stats) {
    for (auto& v : resample) v = data[static_cast<std::size_t>(rng.uniform_below(data.size()))];
    s = statistic(resample);
  }
  std::sort(stats.begin(), stats.end());
  auto quantile = [&](double q) {
    const double h = (static_cast<double>(stats.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, stats.size() - 1);
    return stats[lo] + (h - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
  };
  return {quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0)};
}

}  // namespace anchorprobe::stats
