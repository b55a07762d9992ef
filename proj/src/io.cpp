#include "treebary/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "treebary/error.hpp"

namespace treebary::io {

std::string format_double(double x) {
  require(std::isfinite(x), ErrorKind::Numeric, "cannot serialize a non-finite number");
  return fmt::format("{:.17g}", x);
}

namespace {

void dump_into(const Json& j, int indent, int level, std::string& out) {
  const auto newline = [&](int depth) {
    if (indent >= 0) {
      out += '\n';
      out.append(static_cast<std::size_t>(indent * depth), ' ');
    }
  };
  switch (j.type()) {
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& item : j) {
        if (!first) {
          out += ',';
        }
        first = false;
        newline(level + 1);
        dump_into(item, indent, level + 1, out);
      }
      newline(level);
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) {
          out += ',';
        }
        first = false;
        newline(level + 1);
        out += Json(key).dump();
        out += indent >= 0 ? ": " : ":";
        dump_into(value, indent, level + 1, out);
      }
      newline(level);
      out += '}';
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

double number_at(const Json& j, const char* key) {
  require(j.contains(key) && j.at(key).is_number(), ErrorKind::Parse,
          fmt::format("expected a number in field '{}'", key));
  return j.at(key).get<double>();
}

std::uint32_t index_at(const Json& j, const char* key) {
  require(j.contains(key) && j.at(key).is_number_integer() && j.at(key).get<long long>() >= 0,
          ErrorKind::Parse, fmt::format("expected a non-negative integer in field '{}'", key));
  return static_cast<std::uint32_t>(j.at(key).get<long long>());
}

std::string_view trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) {
    return {};
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_row(std::string_view line, std::vector<double>& row) {
  row.clear();
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto field = trim(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                                : comma - start));
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      return false;
    }
    row.push_back(value);
    if (comma == std::string_view::npos) {
      return true;
    }
    start = comma + 1;
  }
}

}  // namespace

std::string dump(const Json& j, int indent) {
  std::string out;
  dump_into(j, indent, 0, out);
  if (indent >= 0) {
    out += '\n';
  }
  return out;
}

Json parse_json(std::string_view text, std::string_view origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::Parse, fmt::format("{}: invalid JSON: {}", origin, e.what()));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Parse,
          fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Parse,
          fmt::format("cannot open '{}' for writing", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::string_view bytes) { return fmt::format("{:016x}", fnv1a(bytes)); }

Json tree_to_json(const Tree& tree) {
  Json nodes = Json::array();
  for (std::size_t v = 0; v < tree.node_count(); ++v) {
    const NodeId id(v);
    Json node;
    node["id"] = v;
    const auto parent = tree.parent(id);
    node["parent"] = parent ? Json(parent->value) : Json(nullptr);
    node["edge_weight"] = parent ? tree.weight(tree.edge_above(id)) : 0.0;
    if (tree.has_embeddings()) {
      const auto e = tree.embedding(id);
      node["embedding"] = std::vector<double>(e.begin(), e.end());
    } else {
      node["embedding"] = nullptr;
    }
    nodes.push_back(std::move(node));
  }
  return Json{{"root", tree.root().value}, {"nodes", std::move(nodes)}};
}

Tree tree_from_json(const Json& j) {
  require(j.is_object(), ErrorKind::Parse, "tree JSON must be an object");
  const auto root = index_at(j, "root");
  require(j.contains("nodes") && j.at("nodes").is_array(), ErrorKind::Parse,
          "tree JSON needs a 'nodes' array");
  const auto& nodes = j.at("nodes");
  const std::size_t n = nodes.size();
  std::vector<std::optional<NodeId>> parent(n);
  std::vector<double> weight(n, 0.0);
  std::vector<std::vector<double>> embedding;
  std::vector<char> seen(n, 0);
  for (const auto& node : nodes) {
    const auto id = index_at(node, "id");
    require(id < n && !seen[id], ErrorKind::Parse,
            fmt::format("node id {} is out of range or repeated", id));
    seen[id] = 1;
    require(node.contains("parent"), ErrorKind::Parse, fmt::format("node {} has no 'parent'", id));
    if (!node.at("parent").is_null()) {
      parent[id] = NodeId(index_at(node, "parent"));
    }
    weight[id] = number_at(node, "edge_weight");
    if (node.contains("embedding") && !node.at("embedding").is_null()) {
      require(node.at("embedding").is_array(), ErrorKind::Parse,
              fmt::format("embedding of node {} is not an array", id));
      if (embedding.empty()) {
        embedding.resize(n);
      }
      embedding[id] = node.at("embedding").get<std::vector<double>>();
    }
  }
  return Tree(NodeId(root), std::move(parent), std::move(weight), std::move(embedding));
}

Json ensemble_to_json(const TreeEnsemble& ensemble) {
  Json trees = Json::array();
  Json paths = Json::array();
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    trees.push_back(tree_to_json(ensemble.trees[t]));
    Json leaves = Json::array();
    for (const NodeId v : ensemble.point_paths[t]) {
      leaves.push_back(v.value);
    }
    paths.push_back(std::move(leaves));
  }
  return Json{{"trees", std::move(trees)}, {"point_paths", std::move(paths)}};
}

TreeEnsemble ensemble_from_json(const Json& j) {
  require(j.is_object() && j.contains("trees") && j.at("trees").is_array(), ErrorKind::Parse,
          "ensemble JSON needs a 'trees' array");
  TreeEnsemble out;
  for (const auto& t : j.at("trees")) {
    out.trees.push_back(tree_from_json(t));
  }
  if (j.contains("point_paths")) {
    require(j.at("point_paths").is_array() && j.at("point_paths").size() == out.trees.size(),
            ErrorKind::Parse, "'point_paths' must hold one array per tree");
    for (const auto& leaves : j.at("point_paths")) {
      std::vector<NodeId> path;
      for (const auto& v : leaves) {
        require(v.is_number_integer(), ErrorKind::Parse, "point path entries must be node ids");
        path.emplace_back(v.get<std::uint32_t>());
      }
      out.point_paths.push_back(std::move(path));
    }
  } else {
    out.point_paths.resize(out.trees.size());
  }
  return out;
}

Json measure_to_json(const DiscreteMeasure& mu) {
  Json supports = Json::array();
  for (const NodeId v : mu.supports()) {
    supports.push_back(v.value);
  }
  return Json{{"supports", std::move(supports)},
              {"weights", std::vector<double>(mu.weights().begin(), mu.weights().end())}};
}

std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path) {
  const auto text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  std::size_t line_no = 0;
  bool seen_content = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto line =
        trim(std::string_view(text).substr(start, end == std::string::npos ? text.npos
                                                                            : end - start));
    start = end == std::string::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const bool ok = parse_row(line, row);
    if (!ok && !seen_content) {
      seen_content = true;  // header
      continue;
    }
    seen_content = true;
    require(ok, ErrorKind::Parse,
            fmt::format("{}:{}: expected comma-separated numbers", path.string(), line_no));
    require(rows.empty() || rows.front().size() == row.size(), ErrorKind::Parse,
            fmt::format("{}:{}: row has {} fields, expected {}", path.string(), line_no,
                        row.size(), rows.empty() ? 0 : rows.front().size()));
    rows.push_back(row);
  }
  require(!rows.empty(), ErrorKind::Parse, fmt::format("{}: no data rows", path.string()));
  return rows;
}

PointCloud read_points_csv(const std::filesystem::path& path) {
  return PointCloud(read_csv_rows(path));
}

WeightedPoints read_weighted_points_csv(const std::filesystem::path& path) {
  auto rows = read_csv_rows(path);
  require(rows.front().size() >= 2, ErrorKind::Parse,
          fmt::format("{}: weighted points need at least one coordinate and a mass",
                      path.string()));
  WeightedPoints out;
  for (auto& r : rows) {
    out.masses.push_back(r.back());
    r.pop_back();
    out.points.push_back(r);
  }
  return out;
}

DiscreteMeasure read_measure_csv(const std::filesystem::path& path) {
  const auto rows = read_csv_rows(path);
  require(rows.front().size() == 2, ErrorKind::Parse,
          fmt::format("{}: measure rows must be node_id,weight", path.string()));
  std::vector<NodeId> supports;
  std::vector<double> weights;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double id = rows[i][0];
    require(id >= 0.0 && std::floor(id) == id && id < 4294967296.0, ErrorKind::Parse,
            fmt::format("{}: row {} has a non-integer node id", path.string(), i + 1));
    supports.emplace_back(static_cast<std::uint32_t>(id));
    weights.push_back(rows[i][1]);
  }
  return DiscreteMeasure(std::move(supports), std::move(weights));
}

std::vector<std::filesystem::path> csv_files(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), ErrorKind::Parse,
          fmt::format("'{}' is not a directory", dir.string()));
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  require(!out.empty(), ErrorKind::Parse, fmt::format("no .csv files in '{}'", dir.string()));
  return out;
}

}  // namespace treebary::io
