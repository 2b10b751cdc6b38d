#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "devassist/common.hpp"

using namespace devassist;

TEST(Fnv1a, PublishedVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Hex, FixedWidth) {
  EXPECT_EQ(to_hex(0), "0000000000000000");
  EXPECT_EQ(to_hex(0xdeadbeefULL), "00000000deadbeef");
}

TEST(Rng, EngineMatchesStandardSequence) {
  // The standard pins the 10000th output of a default-seeded mt19937_64.
  Rng rng(5489u);
  uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng.next_u64();
  EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(Rng, UniformIntCoversInclusiveRange) {
  Rng rng(1);
  std::map<int64_t, int> counts;
  for (int i = 0; i < 20000; ++i) {
    const auto v = rng.uniform_int(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
    ++counts[v];
  }
  ASSERT_EQ(counts.size(), 5u);
  for (auto [v, c] : counts) EXPECT_NEAR(c / 20000.0, 0.2, 0.02) << v;
  EXPECT_EQ(rng.uniform_int(7, 7), 7);
}

TEST(Rng, ExponentialMean) {
  Rng rng(3);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.exponential(30.0);
    ASSERT_GE(x, 0.0);
    sum += x;
  }
  // Standard error of the mean is 30 / sqrt(n), about 0.067.
  EXPECT_NEAR(sum / n, 30.0, 0.4);
}

TEST(Rng, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(42, "network"), derive_seed(42, "battery"));
  EXPECT_NE(derive_seed(42, "network"), derive_seed(43, "network"));
  EXPECT_EQ(derive_seed(42, "network"), derive_seed(42, "network"));
}

TEST(ParseError, CarriesPosition) {
  const ParseError e("bad token", 3, 14);
  EXPECT_EQ(e.line(), 3);
  EXPECT_EQ(e.column(), 14);
  EXPECT_NE(std::string(e.what()).find("3:14"), std::string::npos);
}
