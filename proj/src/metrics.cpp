#include "treebary/metrics.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "treebary/error.hpp"

namespace treebary {

namespace {

double pairs(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  require(a.size() == b.size(), ErrorKind::Domain, "labelings have different lengths");
  require(!a.empty(), ErrorKind::Domain, "adjusted Rand index of zero items");
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> rows;
  std::map<std::size_t, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, n] : joint) {
    index += pairs(n);
  }
  double row_sum = 0.0;
  for (const auto& [key, n] : rows) {
    row_sum += pairs(n);
  }
  double col_sum = 0.0;
  for (const auto& [key, n] : cols) {
    col_sum += pairs(n);
  }
  const double expected = row_sum * col_sum / pairs(static_cast<double>(a.size()));
  const double max_index = 0.5 * (row_sum + col_sum);
  if (max_index == expected) {
    return 1.0;
  }
  return (index - expected) / (max_index - expected);
}

}  // namespace treebary
