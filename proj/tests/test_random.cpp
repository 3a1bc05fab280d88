#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "sve/random.hpp"

using namespace sve;

TEST(Random, SplitmixAndFnvReferenceValues) {
  // Published reference outputs.
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(fnv1a64(""), 0xCBF29CE484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xAF63DC4C8601EC8CULL);
}

TEST(Random, SameSeedSameStream) {
  Rng a(RngSeed{42}), b(RngSeed{42}), c(RngSeed{43});
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs = differs || x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Random, DeriveSeedSeparatesSalts) {
  const RngSeed root{7};
  EXPECT_NE(derive_seed(root, "train").value, derive_seed(root, "test").value);
  EXPECT_EQ(derive_seed(root, "train").value, derive_seed(root, "train").value);
  EXPECT_EQ(derive_seed(root, "x").value, derive_seed(root, fnv1a64("x")).value);
}

TEST(Random, UniformInUnitInterval) {
  Rng rng(RngSeed{1});
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Random, BelowCoversRangeEvenly) {
  Rng rng(RngSeed{2});
  std::map<std::uint64_t, int> counts;
  for (int i = 0; i < 70000; ++i) counts[rng.below(7)]++;
  ASSERT_EQ(counts.size(), 7u);
  for (const auto& [v, n] : counts) {
    EXPECT_LT(v, 7u);
    EXPECT_NEAR(n, 10000, 500);
  }
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(Random, NormalMoments) {
  Rng rng(RngSeed{3});
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(5.0, 2.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 5.0, 0.03);
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 2.0, 0.03);
}

TEST(Random, ShuffleIsPermutation) {
  Rng rng(RngSeed{4});
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  rng.shuffle(w);
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}
