#include "treebary/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "treebary/error.hpp"
#include "treebary/measure.hpp"

namespace treebary {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kResidualFloor = 1e-15;

struct Arc {
  std::size_t to;
  std::size_t rev;
  double capacity;
  double cost;
};

class FlowNetwork {
public:
  explicit FlowNetwork(std::size_t n) : adj_(n) {}

  std::size_t add(std::size_t from, std::size_t to, double capacity, double cost) {
    adj_[from].push_back({to, adj_[to].size(), capacity, cost});
    adj_[to].push_back({from, adj_[from].size() - 1, 0.0, -cost});
    return adj_[from].size() - 1;
  }

  const Arc& arc(std::size_t from, std::size_t index) const { return adj_[from][index]; }

  // Pushes flow along cheapest residual paths until none remains. Dijkstra
  // on reduced costs; potentials stay valid because every initial arc cost
  // is non-negative.
  void min_cost_flow(std::size_t source, std::size_t sink) {
    const std::size_t n = adj_.size();
    std::vector<double> potential(n, 0.0);
    std::vector<double> dist(n);
    std::vector<std::size_t> prev_node(n);
    std::vector<std::size_t> prev_arc(n);
    std::vector<char> done(n);
    while (true) {
      std::fill(dist.begin(), dist.end(), kInf);
      std::fill(done.begin(), done.end(), 0);
      dist[source] = 0.0;
      for (std::size_t round = 0; round < n; ++round) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v) {
          if (!done[v] && dist[v] < kInf && (u == n || dist[v] < dist[u])) {
            u = v;
          }
        }
        if (u == n) {
          break;
        }
        done[u] = 1;
        for (std::size_t a = 0; a < adj_[u].size(); ++a) {
          const Arc& arc = adj_[u][a];
          if (arc.capacity <= kResidualFloor) {
            continue;
          }
          const double reduced = std::max(0.0, arc.cost + potential[u] - potential[arc.to]);
          if (dist[u] + reduced < dist[arc.to]) {
            dist[arc.to] = dist[u] + reduced;
            prev_node[arc.to] = u;
            prev_arc[arc.to] = a;
          }
        }
      }
      if (dist[sink] == kInf) {
        return;
      }
      for (std::size_t v = 0; v < n; ++v) {
        if (dist[v] < kInf) {
          potential[v] += dist[v];
        }
      }
      double push = kInf;
      for (std::size_t v = sink; v != source; v = prev_node[v]) {
        push = std::min(push, adj_[prev_node[v]][prev_arc[v]].capacity);
      }
      for (std::size_t v = sink; v != source; v = prev_node[v]) {
        Arc& arc = adj_[prev_node[v]][prev_arc[v]];
        arc.capacity -= push;
        adj_[v][arc.rev].capacity += push;
      }
    }
  }

  // Shortest distances from a virtual root joined to every node at cost 0,
  // over residual arcs (Bellman-Ford). No negative cycles remain at optimum.
  std::vector<double> residual_potentials() const {
    const std::size_t n = adj_.size();
    std::vector<double> dist(n, 0.0);
    for (std::size_t round = 0; round < n; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < n; ++u) {
        for (const Arc& arc : adj_[u]) {
          if (arc.capacity > kResidualFloor && dist[u] + arc.cost < dist[arc.to] - 1e-15) {
            dist[arc.to] = dist[u] + arc.cost;
            changed = true;
          }
        }
      }
      if (!changed) {
        break;
      }
    }
    return dist;
  }

private:
  std::vector<std::vector<Arc>> adj_;
};

double check_marginal(std::span<const double> w, const char* name) {
  double total = 0.0;
  for (const double x : w) {
    require(std::isfinite(x) && x >= 0.0, ErrorKind::Domain,
            fmt::format("invalid {} weight {}", name, x));
    total += x;
  }
  return total;
}

}  // namespace

TransportPlan exact_ot(std::span<const double> cost, std::span<const double> mu,
                       std::span<const double> nu) {
  const std::size_t n = mu.size();
  const std::size_t m = nu.size();
  require(n > 0 && m > 0, ErrorKind::Domain, "transport between empty measures");
  require(n <= kMaxOracleSupports && m <= kMaxOracleSupports, ErrorKind::Unsupported,
          fmt::format("exact OT oracle is limited to {} supports per side, got {} x {}",
                      kMaxOracleSupports, n, m));
  require(cost.size() == n * m, ErrorKind::Domain,
          fmt::format("cost matrix has {} entries, expected {} x {}", cost.size(), n, m));
  for (const double c : cost) {
    require(std::isfinite(c) && c >= 0.0, ErrorKind::Domain, fmt::format("invalid cost {}", c));
  }
  const double total_mu = check_marginal(mu, "source");
  const double total_nu = check_marginal(nu, "target");
  require(std::abs(total_mu - total_nu) <= kMassTolerance, ErrorKind::Domain,
          fmt::format("unbalanced marginals: {:.17g} vs {:.17g}", total_mu, total_nu));

  // Nodes: rows 0..n-1, columns n..n+m-1, source n+m, sink n+m+1.
  const std::size_t source = n + m;
  const std::size_t sink = n + m + 1;
  FlowNetwork net(n + m + 2);
  for (std::size_t i = 0; i < n; ++i) {
    net.add(source, i, mu[i], 0.0);
  }
  std::vector<std::size_t> handle(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      handle[i * m + j] = net.add(i, n + j, kInf, cost[i * m + j]);
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    net.add(n + j, sink, nu[j], 0.0);
  }
  net.min_cost_flow(source, sink);

  TransportPlan plan;
  plan.rows = n;
  plan.cols = m;
  plan.matrix.assign(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const Arc& arc = net.arc(i, handle[i * m + j]);
      // Flow on i -> j equals the capacity of its reverse arc.
      const double flow = net.arc(n + j, arc.rev).capacity;
      plan.matrix[i * m + j] = flow;
      plan.cost += flow * cost[i * m + j];
    }
  }
  const auto pi = net.residual_potentials();
  plan.row_dual.resize(n);
  plan.col_dual.resize(m);
  for (std::size_t i = 0; i < n; ++i) {
    plan.row_dual[i] = -pi[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    plan.col_dual[j] = pi[n + j];
  }
  return plan;
}

SinkhornResult sinkhorn_barycenter(std::size_t support_size, std::span<const SinkhornInput> inputs,
                                   std::span<const double> mixture_weights,
                                   SinkhornOptions options) {
  require(support_size > 0, ErrorKind::Domain, "empty barycenter support");
  require(!inputs.empty(), ErrorKind::Domain, "no input measures");
  require(inputs.size() == mixture_weights.size(), ErrorKind::Domain,
          fmt::format("{} inputs but {} mixture weights", inputs.size(), mixture_weights.size()));
  require(options.iters >= 1, ErrorKind::Domain, "iters must be at least 1");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    require(!inputs[i].weights.empty() &&
                inputs[i].cost.size() == support_size * inputs[i].weights.size(),
            ErrorKind::Domain, fmt::format("input {} has a malformed cost matrix", i));
  }

  double epsilon = options.epsilon;
  if (epsilon == 0.0) {
    std::vector<double> all;
    for (const auto& in : inputs) {
      all.insert(all.end(), in.cost.begin(), in.cost.end());
    }
    const auto mid = all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2);
    std::nth_element(all.begin(), mid, all.end());
    epsilon = 0.1 * *mid;
  }
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::Domain,
          fmt::format("epsilon must be positive, got {}", epsilon));

  const std::size_t S = support_size;
  const std::size_t n = inputs.size();
  std::vector<std::vector<double>> kernel(n);
  std::vector<std::vector<double>> u(n, std::vector<double>(S, 1.0));
  std::vector<std::vector<double>> v(n);
  std::vector<std::vector<double>> kv(n, std::vector<double>(S));
  for (std::size_t i = 0; i < n; ++i) {
    kernel[i].resize(inputs[i].cost.size());
    for (std::size_t e = 0; e < kernel[i].size(); ++e) {
      kernel[i][e] = std::exp(-inputs[i].cost[e] / epsilon);
    }
    v[i].assign(inputs[i].weights.size(), 1.0);
  }
  auto underflow = [&](double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      fail(ErrorKind::Numeric,
           fmt::format("Sinkhorn kernel underflow at epsilon = {:.6g}; retry with a larger "
                       "epsilon",
                       epsilon));
    }
  };

  std::vector<double> bary(S, 1.0 / static_cast<double>(S));
  for (int it = 0; it < options.iters; ++it) {
    std::vector<double> log_bary(S, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ni = v[i].size();
      const auto& K = kernel[i];
      // v = a / K^T u
      for (std::size_t j = 0; j < ni; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < S; ++r) {
          s += K[r * ni + j] * u[i][r];
        }
        underflow(s);
        v[i][j] = inputs[i].weights[j] / s;
      }
      for (std::size_t r = 0; r < S; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < ni; ++j) {
          s += K[r * ni + j] * v[i][j];
        }
        underflow(s);
        kv[i][r] = s;
        log_bary[r] += mixture_weights[i] * std::log(u[i][r] * s);
      }
    }
    for (std::size_t r = 0; r < S; ++r) {
      bary[r] = std::exp(log_bary[r]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t r = 0; r < S; ++r) {
        u[i][r] = bary[r] / kv[i][r];
      }
    }
  }

  SinkhornResult out;
  out.epsilon = epsilon;
  double total = 0.0;
  for (const double b : bary) {
    total += b;
  }
  underflow(total);
  out.weights.resize(S);
  for (std::size_t r = 0; r < S; ++r) {
    out.weights[r] = bary[r] / total;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ni = v[i].size();
    double gap = 0.0;
    for (std::size_t j = 0; j < ni; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < S; ++r) {
        s += kernel[i][r * ni + j] * u[i][r];
      }
      gap += std::abs(s * v[i][j] - inputs[i].weights[j]);
    }
    out.marginal_violation = std::max(out.marginal_violation, gap);
  }
  return out;
}

}  // namespace treebary
