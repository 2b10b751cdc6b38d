#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "devassist/vector_index.hpp"
#include "support.hpp"

using namespace devassist;
using namespace devassist::index;
namespace fs = std::filesystem;

namespace {

constexpr size_t kDim = embed::kEmbeddingDim;

std::string id_of(size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%05zu", i);
  return buf;
}

std::vector<std::vector<float>> random_rows(std::mt19937_64& rng, size_t n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<float>> rows(n, std::vector<float>(kDim));
  for (auto& row : rows) {
    double norm = 0.0;
    for (auto& x : row) {
      x = static_cast<float>(gauss(rng));
      norm += static_cast<double>(x) * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : row) x = static_cast<float>(x / norm);
  }
  return rows;
}

VectorIndex build(const std::vector<std::vector<float>>& rows) {
  VectorIndex idx("cfg");
  for (size_t i = 0; i < rows.size(); ++i) idx.insert(id_of(i), rows[i], {"f" + std::to_string(i), "1-1", "code"});
  return idx;
}

std::vector<double> random_query(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> q(kDim);
  for (auto& x : q) x = gauss(rng);
  return q;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

IndexErrorKind load_error(const fs::path& p, std::optional<std::string_view> hash = std::nullopt) {
  try {
    VectorIndex::load(p, hash);
  } catch (const IndexError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "load succeeded";
  return IndexErrorKind::Io;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("devassist_index_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST(VectorIndex, InsertAndDuplicates) {
  VectorIndex idx("cfg");
  std::mt19937_64 rng(1);
  const auto rows = random_rows(rng, 2);
  idx.insert("a", rows[0], {"a.java", "1-3", "code"});
  EXPECT_EQ(idx.size(), 1u);
  EXPECT_THROW(idx.insert("a", rows[1], {}), IndexError);
  EXPECT_EQ(idx.size(), 1u);
  // Unchanged: the stored vector is still the first one.
  EXPECT_TRUE(std::equal(rows[0].begin(), rows[0].end(), idx.vector(0).begin()));
  try {
    idx.insert("a", rows[1], {});
  } catch (const IndexError& e) {
    EXPECT_EQ(e.kind(), IndexErrorKind::DuplicateId);
  }
  std::vector<float> short_vec(10, 1.0f);
  try {
    idx.insert("b", short_vec, {});
    FAIL();
  } catch (const IndexError& e) {
    EXPECT_EQ(e.kind(), IndexErrorKind::DimensionMismatch);
  }
}

TEST(VectorIndex, OnboardingScale) {
  std::mt19937_64 rng(2);
  EXPECT_EQ(build(random_rows(rng, 500)).size(), 500u);
}

TEST(VectorIndex, ZeroKAndExactSelfMatch) {
  std::mt19937_64 rng(3);
  const auto rows = random_rows(rng, 50);
  const auto idx = build(rows);
  const auto q = random_query(rng);
  EXPECT_TRUE(idx.search(q, 0).hits.empty());
  std::vector<double> self(rows[17].begin(), rows[17].end());
  const auto top = idx.search(self, 3);
  ASSERT_EQ(top.hits.size(), 3u);
  EXPECT_EQ(top.hits[0].id, id_of(17));
  EXPECT_NEAR(top.hits[0].similarity, 1.0, 1e-9);
  EXPECT_EQ(top.hits[0].metadata.path, "f17");
}

TEST(VectorIndex, MatchesBruteForceForManyK) {
  std::mt19937_64 rng(4);
  for (size_t n : {1u, 10u, 257u, 2000u}) {
    const auto rows = random_rows(rng, n);
    const auto idx = build(rows);
    for (int trial = 0; trial < 3; ++trial) {
      const auto q = random_query(rng);
      for (size_t k : {1u, 5u, 10u, 64u, 3000u}) {
        const auto want = testsupport::brute_force_top_k(rows, q, k);
        const auto got = idx.search(q, k);
        ASSERT_EQ(got.hits.size(), want.size());
        for (size_t i = 0; i < want.size(); ++i) EXPECT_EQ(got.hits[i].id, id_of(want[i])) << "n=" << n;
        for (size_t i = 1; i < got.hits.size(); ++i) {
          EXPECT_GE(got.hits[i - 1].similarity, got.hits[i].similarity);
        }
      }
    }
  }
}

TEST(VectorIndex, PrefixMonotoneInK) {
  std::mt19937_64 rng(5);
  const auto idx = build(random_rows(rng, 300));
  const auto q = random_query(rng);
  auto prev = idx.search(q, 0).hits;
  for (size_t k = 1; k <= 40; ++k) {
    const auto cur = idx.search(q, k).hits;
    ASSERT_EQ(cur.size(), k);
    for (size_t i = 0; i < prev.size(); ++i) EXPECT_EQ(cur[i].id, prev[i].id);
    prev = cur;
  }
}

TEST(VectorIndex, TiesBreakByAscendingId) {
  VectorIndex idx("cfg");
  std::vector<float> v(kDim, 0.0f);
  v[0] = 1.0f;
  for (const char* id : {"delta", "alpha", "charlie", "bravo"}) idx.insert(id, v, {});
  std::vector<double> q(kDim, 0.0);
  q[0] = 2.0;
  const auto hits = idx.search(q, 3).hits;
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].id, "alpha");
  EXPECT_EQ(hits[1].id, "bravo");
  EXPECT_EQ(hits[2].id, "charlie");
}

TEST(VectorIndex, ZeroVectorsScoreZero) {
  VectorIndex idx("cfg");
  idx.insert("z", embed::EmbeddingVector{}, {});
  std::vector<double> q(kDim, 1.0);
  const auto hits = idx.search(q, 1).hits;
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].similarity, 0.0);
}

TEST_F(TempDir, RoundTripIsBitIdentical) {
  std::mt19937_64 rng(6);
  const auto idx = build(random_rows(rng, 500));
  const auto path = dir_ / "index.bin";
  idx.save(path);
  const auto back = VectorIndex::load(path, "cfg");
  ASSERT_EQ(back.size(), idx.size());
  EXPECT_EQ(back.band_config_hash(), "cfg");
  for (size_t i = 0; i < idx.size(); ++i) {
    EXPECT_EQ(back.id(i), idx.id(i));
    EXPECT_EQ(back.metadata(i), idx.metadata(i));
    const auto a = idx.vector(i);
    const auto b = back.vector(i);
    EXPECT_EQ(std::memcmp(a.data(), b.data(), kDim * sizeof(float)), 0);
  }
  // Saving the reloaded index reproduces the file byte for byte.
  back.save(dir_ / "again.bin");
  EXPECT_EQ(slurp(path), slurp(dir_ / "again.bin"));
}

TEST_F(TempDir, EmptyRoundTrip) {
  VectorIndex idx("cfg");
  idx.save(dir_ / "empty.bin");
  EXPECT_EQ(VectorIndex::load(dir_ / "empty.bin").size(), 0u);
}

TEST_F(TempDir, DistinctErrorKinds) {
  std::mt19937_64 rng(7);
  const auto path = dir_ / "index.bin";
  build(random_rows(rng, 3)).save(path);
  const std::string good = slurp(path);

  EXPECT_EQ(load_error(path, "other"), IndexErrorKind::HashMismatch);

  spit(dir_ / "trunc.bin", good.substr(0, good.size() - 100));
  EXPECT_EQ(load_error(dir_ / "trunc.bin"), IndexErrorKind::Truncated);

  std::string bumped = good;
  const auto at = bumped.find("\"version\":1");
  ASSERT_NE(at, std::string::npos);
  bumped.replace(at, 11, "\"version\":9");
  spit(dir_ / "version.bin", bumped);
  EXPECT_EQ(load_error(dir_ / "version.bin"), IndexErrorKind::VersionMismatch);

  spit(dir_ / "garbage.bin", "not json at all\n" + good);
  EXPECT_EQ(load_error(dir_ / "garbage.bin"), IndexErrorKind::Corrupt);

  spit(dir_ / "trailing.bin", good + "x");
  EXPECT_EQ(load_error(dir_ / "trailing.bin"), IndexErrorKind::Corrupt);

  EXPECT_EQ(load_error(dir_ / "missing.bin"), IndexErrorKind::Io);
}
