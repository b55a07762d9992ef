#pragma once

#include <optional>
#include <vector>

#include "treebary/tree.hpp"

namespace fixtures {

using treebary::NodeId;
using treebary::Tree;

// r(0) -- x1, x2, x3; x1 -- x4; x2 -- x5, x6; x5 -- x7. Node i is x_i.
inline Tree eight_node(std::vector<double> w = {0, 1, 1, 1, 1, 1, 1, 1}) {
  std::vector<std::optional<NodeId>> parent{std::nullopt, NodeId(0), NodeId(0), NodeId(0),
                                            NodeId(1),    NodeId(2), NodeId(2), NodeId(5)};
  return Tree(NodeId(0), std::move(parent), std::move(w));
}

// r(0) -- a(1) -- b(2)
inline Tree chain(double wa = 1.0, double wb = 2.0) {
  return Tree(NodeId(0), {std::nullopt, NodeId(0), NodeId(1)}, {0.0, wa, wb});
}

// r(0) with leaves a(1), b(2)
inline Tree star(double wa = 1.0, double wb = 2.0) {
  return Tree(NodeId(0), {std::nullopt, NodeId(0), NodeId(0)}, {0.0, wa, wb});
}

// r(0) -- x(1)
inline Tree edge(double w = 1.0) { return Tree(NodeId(0), {std::nullopt, NodeId(0)}, {0.0, w}); }

}  // namespace fixtures
