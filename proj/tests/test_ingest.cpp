#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "lexp/ingest.hpp"

using lexp::RawItemRow;

TEST(Filter, BoundsAreInclusive) {
  const std::vector<RawItemRow> rows{{"a", 2001, 500}, {"b", 2000, 100}, {"c", 1500, 99}};
  const auto kept = lexp::filter_items(rows);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].item_id, "b");
}

TEST(Filter, CustomBoundsKeepOrder) {
  const std::vector<RawItemRow> rows{{"x", 10, 5}, {"y", 30, 1}, {"z", 20, 7}, {"w", 5, 5}};
  const auto kept = lexp::filter_items(rows, 25, 5);
  ASSERT_EQ(kept.size(), 3u);
  EXPECT_EQ(kept[0].item_id, "x");
  EXPECT_EQ(kept[1].item_id, "z");
  EXPECT_EQ(kept[2].item_id, "w");
}

TEST(Rates, MinMaxScaledViews) {
  const std::vector<RawItemRow> rows{{"a", 100, 10}, {"b", 600, 60}, {"c", 1100, 2000}};
  const auto pool = lexp::compute_rates_and_scale(rows);
  EXPECT_EQ(pool.mean_ctr, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_DOUBLE_EQ(pool.mean_revenue[0], 0.1);
  EXPECT_DOUBLE_EQ(pool.mean_revenue[1], 0.1);
  EXPECT_EQ(pool.mean_revenue[2], 1.0);
}

TEST(Rates, SimpleRate) {
  const auto pool = lexp::compute_rates_and_scale({{"a", 500, 50}, {"b", 0, 3}});
  EXPECT_DOUBLE_EQ(pool.mean_revenue[0], 0.1);
  EXPECT_EQ(pool.mean_revenue[1], 0.0);
}

TEST(Rates, Errors) {
  try {
    lexp::compute_rates_and_scale({{"a", 5, 1}, {"b", 5, 2}});
    FAIL();
  } catch (const lexp::Error& e) {
    EXPECT_EQ(e.code(), lexp::Errc::DegenerateRange);
  }
  try {
    lexp::compute_rates_and_scale({{"a", 5, 1}});
    FAIL();
  } catch (const lexp::Error& e) {
    EXPECT_EQ(e.code(), lexp::Errc::EmptyInput);
  }
}

TEST(Rates, ScalingPreservesViewOrder) {
  lexp::Rng rng(81);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RawItemRow> rows(2 + rng.uniform_int(20));
    for (auto& r : rows) {
      r.views = rng.uniform_int(5000);
      r.conversions = rng.uniform_int(300);
    }
    rows[0].views = 0;
    rows[1].views = 5000;
    const auto pool = lexp::compute_rates_and_scale(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ASSERT_GE(pool.mean_ctr[i], 0.0);
      ASSERT_LE(pool.mean_ctr[i], 1.0);
      for (std::size_t j = 0; j < rows.size(); ++j)
        if (rows[i].views < rows[j].views) {
          ASSERT_LT(pool.mean_ctr[i], pool.mean_ctr[j]);
        }
    }
  }
}

// Filtering first changes the min and max used for scaling.
TEST(Pipeline, FilterThenRateThenScale) {
  std::istringstream raw(
      "item_id,views,conversions\n"
      "a,100,100\n"
      "b,5000,400\n"
      "c,1100,110\n"
      "d,600,20\n"
      "e,2000,200\n");
  const auto pool = lexp::compute_rates_and_scale(lexp::filter_items(lexp::parse_raw_items(raw)));
  ASSERT_EQ(pool.size(), 3u);
  EXPECT_EQ(pool.mean_ctr[0], 0.0);
  EXPECT_NEAR(pool.mean_ctr[1], 1000.0 / 1900.0, 1e-15);
  EXPECT_EQ(pool.mean_ctr[2], 1.0);
  EXPECT_EQ(pool.mean_revenue, (std::vector<double>{1.0, 0.1, 0.1}));
  std::ostringstream out;
  lexp::write_arm_pool(out, pool);
  EXPECT_EQ(out.str(),
            "arm_id,mean_ctr,mean_revenue\n"
            "0,0,1\n"
            "1,0.52631578947368418,0.10000000000000001\n"
            "2,1,0.10000000000000001\n");
}

TEST(Parse, ErrorsNameTheLine) {
  std::istringstream bad("item_id,views,conversions\na,10,1\nb,ten,1\n");
  try {
    lexp::parse_raw_items(bad, "raw.csv");
    FAIL();
  } catch (const lexp::Error& e) {
    EXPECT_EQ(e.code(), lexp::Errc::Parse);
    EXPECT_NE(std::string(e.what()).find("raw.csv:3"), std::string::npos) << e.what();
  }
  std::istringstream header("id,v,c\n");
  EXPECT_THROW(lexp::parse_raw_items(header), lexp::Error);
  std::istringstream negative("item_id,views,conversions\na,-1,0\n");
  EXPECT_THROW(lexp::parse_raw_items(negative), lexp::Error);
}
