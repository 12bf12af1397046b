#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "anchorprobe/distributions.hpp"
#include "anchorprobe/error.hpp"
#include "anchorprobe/rng.hpp"
#include "anchorprobe/stats.hpp"
#include "oracles.hpp"

using namespace anchorprobe;
using namespace anchorprobe::stats;

namespace {

std::vector<double> draw(CounterRng& rng, std::size_t n, int levels) {
  // coarse grid so that ties show up
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(static_cast<int>(rng.uniform_below(levels))) - levels / 2.0;
  return v;
}

}  // namespace

TEST(Anova, IdenticalGroupsGiveZero) {
  std::vector<std::vector<double>> g{{1, 2, 3}, {1, 2, 3}};
  const auto r = one_way_anova(g);
  EXPECT_DOUBLE_EQ(r.f, 0.0);
  EXPECT_DOUBLE_EQ(r.eta_squared, 0.0);
  EXPECT_NEAR(r.p, 1.0, 1e-12);
}

TEST(Anova, BetweenDominatedApproachesOne) {
  std::vector<std::vector<double>> g{{0, 0, 0, 1e-6}, {1, 1, 1, 1 + 1e-6}};
  EXPECT_GT(one_way_anova(g).eta_squared, 0.999999);
}

TEST(Anova, Errors) {
  std::vector<std::vector<double>> one{{1, 2}};
  EXPECT_THROW(one_way_anova(one), DomainError);
  std::vector<std::vector<double>> flat{{2, 2}, {2, 2}};
  EXPECT_THROW(one_way_anova(flat), DegenerateError);
  std::vector<std::vector<double>> tiny{{1}, {2, 3}};
  EXPECT_THROW(one_way_anova(tiny), DomainError);
}

TEST(Anova, MatchesSumsOfSquaresOracle) {
  CounterRng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::vector<double>> g(3, std::vector<double>(10));
    for (std::size_t k = 0; k < 3; ++k)
      for (auto& v : g[k]) v = rng.normal() + 0.3 * static_cast<double>(k);
    const auto r = one_way_anova(g);
    const auto o = oracle::anova(g);
    EXPECT_NEAR(r.f, o.f, 1e-10 * std::max(1.0, o.f));
    EXPECT_NEAR(r.p, o.p, 1e-10);
    EXPECT_NEAR(r.eta_squared, o.eta_squared, 1e-10);
    EXPECT_EQ(r.df_between, 2);
    EXPECT_EQ(r.df_within, 27);
  }
}

TEST(Anova, ScipyReference) {
  std::vector<std::vector<double>> g{{4.2, 5.1, 3.9, 4.8, 5.5, 4.4},
                                     {5.9, 6.3, 5.2, 6.8, 6.1},
                                     {4.9, 5.0, 5.6, 4.7, 5.3, 5.8, 5.1}};
  const auto r = one_way_anova(g);
  EXPECT_NEAR(r.f, 10.064134087369892, 1e-10);
  EXPECT_NEAR(r.p, 0.001691448954958912, 1e-10);
}

TEST(Anova, InvariantUnderReorderingAndShift) {
  std::vector<std::vector<double>> g{{1.5, 2.5, 3.0, 2.2}, {3.1, 4.4, 3.9}, {0.2, 1.1, 0.7, 0.9, 1.4}};
  const auto base = one_way_anova(g);
  auto h = g;
  std::reverse(h[0].begin(), h[0].end());
  std::swap(h[1], h[2]);
  for (auto& grp : h)
    for (auto& v : grp) v += 100.0;
  const auto moved = one_way_anova(h);
  EXPECT_NEAR(base.f, moved.f, 1e-8);
  EXPECT_NEAR(base.eta_squared, moved.eta_squared, 1e-10);
}

TEST(StudentizedRange, ScipyReference) {
  EXPECT_NEAR(studentized_range_sf(3.5, 3, 10), 0.07710331083841038, 1e-6);
  EXPECT_NEAR(studentized_range_sf(2.0, 4, 20), 0.5054403454121139, 1e-6);
  EXPECT_NEAR(studentized_range_sf(5.0, 6, 100), 0.007918336704579088, 1e-6);
}

TEST(Tukey, ScipyReferenceFixtures) {
  struct Case {
    std::vector<std::vector<double>> g;
    double p01, p02, p12;
  };
  const std::vector<Case> cases{
      {{{4.2, 5.1, 3.9, 4.8, 5.5, 4.4}, {5.9, 6.3, 5.2, 6.8, 6.1}, {4.9, 5.0, 5.6, 4.7, 5.3, 5.8, 5.1}},
       0.0012244306302510166, 0.17332102506127856, 0.032617355144892946},
      {{{1, 2, 3, 4}, {2.5, 3.5, 4.5, 5.5}, {1.5, 1.7, 2.1, 2.0, 2.2}},
       0.14251682400700139, 0.6645562933018971, 0.02874358637992458},
      {{{3.1, 2.8, 3.6, 3.3, 2.9, 3.4, 3.0, 3.2},
        {4.4, 4.1, 4.9, 4.6, 4.0, 4.7, 4.3, 4.5},
        {3.3, 3.5, 3.9, 3.4, 3.1, 3.8, 3.6, 3.7}},
       2.700130941057921e-08, 0.0353519716514159, 6.275927301180317e-06},
  };
  for (const auto& c : cases) {
    std::vector<LabeledGroup> groups{{"a", c.g[0]}, {"b", c.g[1]}, {"c", c.g[2]}};
    const auto r = tukey_hsd(groups);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_NEAR(r[0].p_adjusted, c.p01, 1e-4);
    EXPECT_NEAR(r[1].p_adjusted, c.p02, 1e-4);
    EXPECT_NEAR(r[2].p_adjusted, c.p12, 1e-4);
    EXPECT_EQ(r[0].group_a, "a");
    EXPECT_EQ(r[2].group_b, "c");
  }
}

TEST(Tukey, SevenGroupsGiveTwentyOneComparisons) {
  CounterRng rng(3);
  std::vector<LabeledGroup> groups;
  for (int k = 0; k < 7; ++k) {
    LabeledGroup g{std::to_string(k), {}};
    for (int i = 0; i < 12; ++i) g.values.push_back(rng.normal() + k);
    groups.push_back(g);
  }
  EXPECT_EQ(tukey_hsd(groups).size(), 21u);
}

TEST(Tukey, OrderFlipNegatesDiffKeepsP) {
  std::vector<LabeledGroup> g{{"x", {1, 2, 3, 4}}, {"y", {2.5, 3.5, 4.5, 5.5}}};
  std::vector<LabeledGroup> h{g[1], g[0]};
  const auto a = tukey_hsd(g), b = tukey_hsd(h);
  EXPECT_DOUBLE_EQ(a[0].mean_diff, -b[0].mean_diff);
  EXPECT_DOUBLE_EQ(a[0].p_adjusted, b[0].p_adjusted);
}

TEST(Tukey, IdenticalGroupsNotSignificant) {
  std::vector<LabeledGroup> g{{"x", {1, 2, 3, 4}}, {"y", {1, 2, 3, 4}}, {"z", {2, 3, 4, 5}}};
  const auto r = tukey_hsd(g);
  EXPECT_DOUBLE_EQ(r[0].mean_diff, 0.0);
  EXPECT_NEAR(r[0].p_adjusted, 1.0, 1e-6);
  EXPECT_FALSE(r[0].significant);
}

TEST(SignedRank, AllPositiveSixIsOneOver64) {
  std::vector<double> d(6, 1.0);
  const auto r = wilcoxon_signed_rank(d, Alternative::greater);
  EXPECT_TRUE(r.exact);
  EXPECT_DOUBLE_EQ(r.p, 1.0 / 64.0);
}

TEST(SignedRank, SymmetricIsNearOne) {
  std::vector<double> d{1, -1, 1, -1, 1, -1, 1, -1};
  EXPECT_NEAR(wilcoxon_signed_rank(d).p, 1.0, 1e-12);
}

TEST(SignedRank, AllZeroIsDegenerate) {
  std::vector<double> d{0, 0, 0};
  EXPECT_THROW(wilcoxon_signed_rank(d), DegenerateError);
}

TEST(SignedRank, ScipyReference) {
  std::vector<double> d{0.5, -1.2, 2.3, 1.1, 0.8, -0.3, 1.9, 2.2, 0.4, 1.5, -0.7, 1.0};
  const auto two = wilcoxon_signed_rank(d);
  EXPECT_DOUBLE_EQ(two.statistic, 65.0);
  EXPECT_NEAR(two.p, 0.04248046875, 1e-15);
  EXPECT_NEAR(wilcoxon_signed_rank(d, Alternative::greater).p, 0.021240234375, 1e-15);
}

TEST(SignedRank, ExactEqualsEnumerationForAllSmallN) {
  CounterRng rng(11);
  for (std::size_t n = 1; n <= 10; ++n) {
    for (int rep = 0; rep < 30; ++rep) {
      auto d = draw(rng, n, 7);
      if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0; })) d[0] = 1;
      for (auto alt : {Alternative::two_sided, Alternative::greater, Alternative::less}) {
        double w = 0;
        const double expect = oracle::signed_rank_p(d, alt, &w);
        const auto got = wilcoxon_signed_rank(d, alt);
        ASSERT_TRUE(got.exact);
        EXPECT_EQ(got.p, expect) << "n=" << n;
        EXPECT_EQ(got.statistic, w);
      }
    }
  }
}

TEST(SignedRank, ApproximationCloseToEnumeration) {
  // n = 30 exceeds the exact limit; compare against a DP count of the same
  // null distribution (2^30 patterns is too many to enumerate directly).
  CounterRng rng(5);
  std::vector<double> d(30);
  for (auto& x : d) x = rng.normal() + 0.4;
  const auto got = wilcoxon_signed_rank(d);
  EXPECT_FALSE(got.exact);
  std::vector<double> mags(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mags[i] = std::fabs(d[i]);
  const auto ranks = oracle::naive_midranks(mags);
  std::vector<double> counts(466, 0.0);
  counts[0] = 1;
  int reach = 0;
  for (double r : ranks) {
    const int ri = static_cast<int>(std::lround(r));
    for (int s = reach; s >= 0; --s) counts[s + ri] += counts[s];
    reach += ri;
  }
  double total = 0, upper = 0, lower = 0;
  const double w = got.statistic;
  for (int s = 0; s <= reach; ++s) {
    total += counts[s];
    if (s >= w) upper += counts[s];
    if (s <= w) lower += counts[s];
  }
  const double exact = std::min(1.0, 2 * std::min(lower, upper) / total);
  EXPECT_NEAR(got.p, exact, 0.005);
}

TEST(SignedRank, InvariantUnderReordering) {
  std::vector<double> d{0.3, -0.1, 0.9, 1.2, -0.4, 0.6, 0.2};
  auto e = d;
  std::reverse(e.begin(), e.end());
  EXPECT_EQ(wilcoxon_signed_rank(d).p, wilcoxon_signed_rank(e).p);
}

TEST(MannWhitney, ScipyReference) {
  std::vector<double> a{1.1, 2.3, 3.1, 4.8, 5.2, 6.0, 2.2}, b{3.3, 4.1, 5.9, 6.2, 7.5, 8.1};
  const auto r = mann_whitney_u(a, b);
  EXPECT_DOUBLE_EQ(r.statistic, 7.0);
  EXPECT_NEAR(r.p, 0.05128205128205128, 1e-15);
}

TEST(MannWhitney, IdenticalAndSeparated) {
  std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7};
  const auto same = mann_whitney_u(a, a);
  EXPECT_DOUBLE_EQ(same.statistic, 8.0);
  EXPECT_NEAR(same.p, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(mann_whitney_u(a, b).statistic, 0.0);
  EXPECT_DOUBLE_EQ(mann_whitney_u(b, a).statistic, 12.0);
}

TEST(MannWhitney, EmptyIsDomainError) {
  std::vector<double> a{1, 2}, none;
  EXPECT_THROW(mann_whitney_u(a, none), DomainError);
}

TEST(MannWhitney, ExactEqualsEnumerationForAllSmallN) {
  CounterRng rng(13);
  for (std::size_t n1 = 1; n1 <= 10; ++n1) {
    for (std::size_t n2 = 1; n2 <= 10; ++n2) {
      const int reps = n1 + n2 > 16 ? 1 : 3;
      for (int rep = 0; rep < reps; ++rep) {
        const auto a = draw(rng, n1, 9), b = draw(rng, n2, 9);
        for (auto alt : {Alternative::two_sided, Alternative::greater, Alternative::less}) {
          double u = 0;
          const double expect = oracle::mann_whitney_p(a, b, alt, &u);
          const auto got = mann_whitney_u(a, b, alt);
          ASSERT_TRUE(got.exact);
          EXPECT_EQ(got.p, expect) << n1 << "x" << n2;
          EXPECT_EQ(got.statistic, u);
        }
      }
    }
  }
}

TEST(MannWhitney, SwapAntisymmetry) {
  std::vector<double> a{1.2, 3.3, 2.1, 5.0}, b{2.2, 4.1, 0.3};
  const auto ab = mann_whitney_u(a, b), ba = mann_whitney_u(b, a);
  EXPECT_DOUBLE_EQ(ab.statistic + ba.statistic, 12.0);
  EXPECT_DOUBLE_EQ(ab.p, ba.p);
}

TEST(CohensD, Basics) {
  std::vector<double> a{1, 2, 3, 4};
  const auto zero = cohens_d(a, a);
  EXPECT_DOUBLE_EQ(zero.value, 0.0);
  EXPECT_EQ(zero.label, EffectLabel::negligible);
  EXPECT_EQ(label_effect(EffectKind::cohens_d, 0.5), EffectLabel::medium);
  EXPECT_EQ(label_effect(EffectKind::cohens_d, -0.8), EffectLabel::large);
  EXPECT_EQ(label_effect(EffectKind::cohens_d, 0.19), EffectLabel::negligible);
  EXPECT_EQ(label_effect(EffectKind::cliffs_delta, 0.147), EffectLabel::small);
  EXPECT_EQ(label_effect(EffectKind::cliffs_delta, 0.474), EffectLabel::large);
  std::vector<double> flat{1, 1, 1};
  EXPECT_THROW(cohens_d(flat, flat), DegenerateError);
}

TEST(CohensD, MonteCarloUnitShift) {
  CounterRng rng(2024);
  std::vector<double> a(10000), b(10000);
  for (auto& x : a) x = rng.normal() + 1.0;
  for (auto& x : b) x = rng.normal();
  EXPECT_NEAR(cohens_d(a, b).value, 1.0, 0.05);
}

TEST(CliffsDelta, EqualsBruteForce) {
  CounterRng rng(17);
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = draw(rng, 1 + rng.uniform_below(40), 11);
    const auto b = draw(rng, 1 + rng.uniform_below(40), 11);
    EXPECT_EQ(cliffs_delta(a, b).value, oracle::cliffs_delta(a, b));
    EXPECT_EQ(cliffs_delta(a, b).value, -cliffs_delta(b, a).value);
  }
  std::vector<double> lo{1, 2}, hi{3, 4};
  EXPECT_DOUBLE_EQ(cliffs_delta(hi, lo).value, 1.0);
  EXPECT_DOUBLE_EQ(cliffs_delta(lo, lo).value, 0.0);
}

TEST(Pearson, Basics) {
  std::vector<double> x{1, 2, 3, 4, 5}, y{3, 5, 7, 9, 11};
  EXPECT_NEAR(pearson_r(x, y).r, 1.0, 1e-15);
  std::vector<double> flat{2, 2, 2, 2, 2};
  EXPECT_THROW(pearson_r(x, flat), DegenerateError);
}

TEST(Pearson, MatchesCovarianceDefinition) {
  std::vector<double> x, y{2.1, 3.9, 6.2, 7.8, 10.1, 12.2, 13.8, 16.1, 18.0, 19.9, 22.3, 23.8};
  for (int i = 1; i <= 12; ++i) x.push_back(i);
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  const auto r = pearson_r(x, y);
  EXPECT_NEAR(r.r, sxy / std::sqrt(sxx * syy), 1e-12);
  EXPECT_NEAR(r.r, 0.9997068111289482, 1e-12);
  EXPECT_NEAR(r.p, 1.705201631340556e-17, 1e-20);
}

TEST(Pearson, IndependentNearZero) {
  CounterRng rng(99);
  std::vector<double> x(20000), y(20000);
  for (auto& v : x) v = rng.normal();
  for (auto& v : y) v = rng.normal();
  EXPECT_LT(std::fabs(pearson_r(x, y).r), 0.05);
}

TEST(Bootstrap, ConstantAndDeterministic) {
  std::vector<double> c(20, 3.5);
  auto m = [](std::span<const double> s) { return mean(s); };
  const auto ci = bootstrap_ci(c, m);
  EXPECT_DOUBLE_EQ(ci.lo, 3.5);
  EXPECT_DOUBLE_EQ(ci.hi, 3.5);
  std::vector<double> d{1, 4, 2, 8, 5, 7, 3};
  const auto a = bootstrap_ci(d, m, 500, 0.05, 9), b = bootstrap_ci(d, m, 500, 0.05, 9);
  EXPECT_EQ(a.lo, b.lo);
  EXPECT_EQ(a.hi, b.hi);
}

TEST(Bootstrap, CoverageNearNominal) {
  CounterRng rng(31);
  auto m = [](std::span<const double> s) { return mean(s); };
  int covered = 0;
  const int reps = 1000;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<double> d(60);
    for (auto& v : d) v = rng.normal();
    const auto ci = bootstrap_ci(d, m, 1000, 0.05, 1000 + rep);
    covered += ci.lo <= 0.0 && 0.0 <= ci.hi;
  }
  // percentile intervals under-cover slightly at n = 60
  EXPECT_NEAR(covered / double(reps), 0.95, 0.02);
}
