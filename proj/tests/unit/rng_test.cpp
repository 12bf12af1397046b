#include <gtest/gtest.h>

#include <fstream>

#include <numeric>
#include <set>
#include <vector>

#include "anchorprobe/digest.hpp"
#include "anchorprobe/parallel.hpp"
#include "anchorprobe/rng.hpp"
#include "fixtures.hpp"

using namespace anchorprobe;

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(CounterRng, DrawDependsOnlyOnKeyAndIndex) {
  CounterRng a(123), b(123);
  std::vector<std::uint64_t> seq;
  for (int i = 0; i < 10; ++i) seq.push_back(a.next());
  for (int i = 9; i >= 0; --i) EXPECT_EQ(b.at(i), seq[i]);
  EXPECT_NE(CounterRng::keyed(42, "x").key(), CounterRng::keyed(42, "y").key());
  EXPECT_EQ(CounterRng::keyed(42, "x").key(), CounterRng::keyed(42, "x").key());
}

TEST(CounterRng, UniformBelowInRangeAndCoversValues) {
  CounterRng r(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.uniform_below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(CounterRng, NormalMoments) {
  CounterRng r(8);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(CounterRng, ShuffleIsPermutation) {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  CounterRng r(1);
  r.shuffle(std::span<int>(w));
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(Digest, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fixture::TempDir dir;
  {
    std::ofstream out(dir / "f.txt", std::ios::binary);
    out << "abc";
  }
  EXPECT_EQ(sha256_file(dir / "f.txt"), sha256_hex("abc"));
}

TEST(Parallel, RunsEveryItemAndPropagatesErrors) {
  std::vector<int> hit(100, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  EXPECT_EQ(std::accumulate(hit.begin(), hit.end(), 0), 100);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 5) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}
