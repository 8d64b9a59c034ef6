#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "vecext/tabulate.hpp"

using namespace vecext;
namespace fs = std::filesystem;

namespace {

class TabulateTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vecext-tab-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static TabulationRequest request() {
    TabulationRequest r;
    r.alpha = {1.0};
    r.a = {1.0};
    r.drift = {PowerLaw{1.0, 1.0}};
    r.s1 = -0.5;
    r.s2 = 0.5;
    r.replicates = 2000;
    r.seed = 9;
    return r;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(TabulateTest, KeyIsCanonical) {
  auto a = request();
  auto b = request();
  EXPECT_EQ(cache_key(a), cache_key(b));
  // an explicit default step is the same entry
  b.delta = default_delta(a.s1, a.s2);
  EXPECT_EQ(cache_key(a), cache_key(b));
  b.seed = 10;
  EXPECT_NE(cache_key(a), cache_key(b));
  b = request();
  b.drift = {PowerLaw{1.0, 1.5}};
  EXPECT_NE(cache_key(a), cache_key(b));
  b.drift = {UserDrift{[](double t) { return t; }}};
  EXPECT_THROW(cache_key(b), DomainError);
}

TEST_F(TabulateTest, SecondRunHitsCacheWithIdenticalValues) {
  std::ostringstream warn;
  const ConstantCache cache(dir_, &warn);
  const auto first = tabulate({request()}, cache);
  ASSERT_EQ(first.size(), 1u);
  EXPECT_FALSE(first[0].from_cache);
  EXPECT_TRUE(fs::exists(cache.entry_path(request())));
  const auto second = tabulate({request()}, cache);
  EXPECT_TRUE(second[0].from_cache);
  EXPECT_EQ(second[0].estimate.value, first[0].estimate.value);
  EXPECT_EQ(second[0].estimate.std_error, first[0].estimate.std_error);
  EXPECT_EQ(second[0].estimate.drift, first[0].estimate.drift);
  EXPECT_TRUE(warn.str().empty());
}

TEST_F(TabulateTest, CorruptEntryIsRecomputed) {
  std::ostringstream warn;
  const ConstantCache cache(dir_, &warn);
  const auto first = tabulate({request()}, cache);
  std::ofstream(cache.entry_path(request())) << "{not json";
  const auto again = tabulate({request()}, cache);
  EXPECT_FALSE(again[0].from_cache);
  EXPECT_EQ(again[0].estimate.value, first[0].estimate.value);
  EXPECT_NE(warn.str().find("corrupt"), std::string::npos);
}

TEST_F(TabulateTest, StaleSchemaIsRecomputed) {
  std::ostringstream warn;
  const ConstantCache cache(dir_, &warn);
  tabulate({request()}, cache);
  const auto path = cache.entry_path(request());
  nlohmann::json doc;
  std::ifstream(path) >> doc;
  doc["schema"] = kCacheSchemaVersion + 1;
  std::ofstream(path) << doc.dump();
  EXPECT_FALSE(cache.load(request()));
  EXPECT_NE(warn.str().find("stale"), std::string::npos);
}

TEST_F(TabulateTest, JsonRoundTripKeepsInfinitiesAndLadder) {
  ConstantEstimate e;
  e.s1 = 0.0;
  e.s2 = INFINITY;
  e.value = 1.25;
  e.ladder = {{0.0, 4.0, 1.2, 0.01}, {0.0, 8.0, 1.24, 0.01}};
  e.slope = 0.5;
  const auto back = ConstantCache::from_json(to_json(e));
  EXPECT_TRUE(std::isinf(back.s2));
  EXPECT_EQ(back.ladder.size(), 2u);
  EXPECT_EQ(*back.slope, 0.5);
  EXPECT_EQ(back.value, 1.25);
}

TEST_F(TabulateTest, CsvLayout) {
  const ConstantCache cache(dir_, nullptr);
  auto wide = request();
  wide.alpha = {1.0, 1.5};
  wide.a = {1.0, 0.5};
  wide.drift = {PowerLaw{1.0, 1.0}, ZeroDrift{}};
  std::ostringstream out;
  write_table_csv(out, tabulate({request(), wide}, cache));
  std::istringstream in(out.str());
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  EXPECT_EQ(header, "n,alpha1,alpha2,a1,a2,drift_id,S1,S2,delta,R,value,stderr");
  EXPECT_EQ(row1.rfind("1,1,,1,,\"pow(1;1)\",-0.5,0.5,", 0), 0u) << row1;
  EXPECT_EQ(row2.rfind("2,1,1.5,1,0.5,\"pow(1;1)|zero\",", 0), 0u) << row2;
}

TEST_F(TabulateTest, UnknownKind) {
  auto r = request();
  r.kind = "other";
  EXPECT_THROW(compute_entry(r), DomainError);
}
