#pragma once

// Per-item (views, conversions) counts -> arm pool. Items with too many views
// or too few conversions are dropped, the conversion rate becomes the mean
// second-level reward and min-max scaled views become the mean CTR.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <string>
#include <vector>

#include "lexp/core.hpp"

namespace lexp {

struct RawItemRow {
  std::string item_id;
  std::uint64_t views = 0;
  std::uint64_t conversions = 0;
};

inline constexpr std::uint64_t kDefaultMaxViews = 2000;
inline constexpr std::uint64_t kDefaultMinConversions = 100;

/// Keeps rows with views <= max_views and conversions >= min_conversions.
inline std::vector<RawItemRow> filter_items(const std::vector<RawItemRow>& rows,
                                            std::uint64_t max_views = kDefaultMaxViews,
                                            std::uint64_t min_conversions = kDefaultMinConversions) {
  std::vector<RawItemRow> kept;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(kept), [&](const RawItemRow& r) {
    return r.views <= max_views && r.conversions >= min_conversions;
  });
  return kept;
}

inline ArmPool compute_rates_and_scale(const std::vector<RawItemRow>& rows) {
  if (rows.size() < 2) throw Error(Errc::EmptyInput, "need at least two items to scale");
  const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(),
                                            [](const RawItemRow& l, const RawItemRow& r) {
                                              return l.views < r.views;
                                            });
  const auto min_views = static_cast<double>(lo->views);
  const auto max_views = static_cast<double>(hi->views);
  if (max_views == min_views) throw Error(Errc::DegenerateRange, "all items have equal views");

  ArmPool pool;
  pool.mean_ctr.reserve(rows.size());
  pool.mean_revenue.reserve(rows.size());
  for (const auto& r : rows) {
    const auto views = static_cast<double>(r.views);
    const double rate = r.views > 0 ? static_cast<double>(r.conversions) / views : 0.0;
    pool.mean_revenue.push_back(std::clamp(rate, 0.0, 1.0));
    pool.mean_ctr.push_back((views - min_views) / (max_views - min_views));
  }
  return pool;
}

/// Reads `item_id,views,conversions` with a header row.
inline std::vector<RawItemRow> parse_raw_items(std::istream& in, const std::string& source = "<raw>") {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::EmptyInput, source + ": empty file");
  detail::strip_cr(line);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
  if (detail::trim(line) != "item_id,views,conversions")
    throw Error(Errc::Parse, source + ":1: expected header 'item_id,views,conversions'");
  std::vector<RawItemRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (detail::trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 3) throw Error(Errc::Parse, where + ": expected 3 fields");
    const long long views = detail::parse_integer(fields[1], where);
    const long long conversions = detail::parse_integer(fields[2], where);
    if (views < 0 || conversions < 0) throw Error(Errc::Parse, where + ": counts must be nonnegative");
    rows.push_back({detail::trim(fields[0]), static_cast<std::uint64_t>(views),
                    static_cast<std::uint64_t>(conversions)});
  }
  return rows;
}

inline std::vector<RawItemRow> load_raw_items(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open raw item file '" + path + "'");
  return parse_raw_items(in, path);
}

}  // namespace lexp
