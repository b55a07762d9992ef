#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace treebary {

// Dense row-major set of d-dimensional points.
class PointCloud {
public:
  PointCloud() = default;
  PointCloud(std::size_t dim, std::vector<double> data);
  explicit PointCloud(const std::vector<std::vector<double>>& rows);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return size() == 0; }

  std::span<const double> operator[](std::size_t i) const {
    return std::span<const double>(data_).subspan(i * dim_, dim_);
  }
  std::span<const double> data() const { return data_; }

  void push_back(std::span<const double> point);
  void append(const PointCloud& other);

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);
std::vector<double> centroid(const PointCloud& points);

}  // namespace treebary
