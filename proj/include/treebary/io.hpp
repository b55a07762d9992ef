#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "treebary/measure.hpp"
#include "treebary/points.hpp"
#include "treebary/tree.hpp"
#include "treebary/tree_sampling.hpp"

namespace treebary::io {

using Json = nlohmann::json;

// 17 significant digits; throws a numeric error on NaN or infinity.
std::string format_double(double x);

// Like Json::dump(indent) but every floating-point number is written with
// 17 significant digits. Object keys come out sorted.
std::string dump(const Json& j, int indent = 2);
Json parse_json(std::string_view text, std::string_view origin);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::uint64_t fnv1a(std::string_view bytes);
std::string hash_hex(std::string_view bytes);

Json tree_to_json(const Tree& tree);
Tree tree_from_json(const Json& j);
Json ensemble_to_json(const TreeEnsemble& ensemble);
TreeEnsemble ensemble_from_json(const Json& j);
Json measure_to_json(const DiscreteMeasure& mu);

// Numeric CSV. Blank lines and lines starting with '#' are skipped, and a
// first row that does not parse as numbers is taken as a header. Errors
// carry the file name and line number.
std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path);

PointCloud read_points_csv(const std::filesystem::path& path);

struct WeightedPoints {
  PointCloud points;
  std::vector<double> masses;
};
// Rows x1,...,xd,mass.
WeightedPoints read_weighted_points_csv(const std::filesystem::path& path);

// Rows node_id,weight.
DiscreteMeasure read_measure_csv(const std::filesystem::path& path);

// Regular files with a .csv extension, sorted by file name.
std::vector<std::filesystem::path> csv_files(const std::filesystem::path& dir);

}  // namespace treebary::io
