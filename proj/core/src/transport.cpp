#include "cbounds/transport.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace cbounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassEps = 1e-15;

// Successive shortest paths on the network S -> supply i -> demand j -> T with
// Dijkstra on reduced costs. Node ids: S = 0, supply 1..n, demand n+1..2n, T = 2n+1.
class SspSolver {
 public:
  SspSolver(const Vector& mu, const Vector& nu, const Matrix& cost)
      : n_(mu.size()), mu_(mu), nu_(nu), c_(cost), flow_(Matrix::Zero(n_, n_)), sent_(Vector::Zero(n_)),
        recv_(Vector::Zero(n_)), pot_(2 * n_ + 2, 0.0) {}

  void run() {
    const double total = mu_.sum();
    double shipped = 0.0;
    const std::size_t max_rounds = 8 * static_cast<std::size_t>(n_ * n_) + 16;
    for (std::size_t round = 0; round < max_rounds && total - shipped > kMassEps; ++round) {
      const double pushed = augment();
      if (pushed <= 0.0) break;
      shipped += pushed;
    }
  }

  const Matrix& flow() const { return flow_; }
  /// Potential of a supply node (i) and demand node (j).
  double supply_potential(Eigen::Index i) const { return pot_[node_supply(i)]; }
  double demand_potential(Eigen::Index j) const { return pot_[node_demand(j)]; }

 private:
  std::size_t node_supply(Eigen::Index i) const { return 1 + static_cast<std::size_t>(i); }
  std::size_t node_demand(Eigen::Index j) const { return 1 + static_cast<std::size_t>(n_ + j); }
  std::size_t node_sink() const { return static_cast<std::size_t>(2 * n_ + 1); }

  double augment() {
    const std::size_t V = node_sink() + 1;
    std::vector<double> dist(V, kInf);
    std::vector<std::size_t> parent(V, V);
    std::vector<char> done(V, 0);
    dist[0] = 0.0;

    auto relax = [&](std::size_t u, std::size_t v, double c) {
      if (done[v]) return;
      const double nd = dist[u] + c + pot_[u] - pot_[v];
      if (nd < dist[v]) {
        dist[v] = nd;
        parent[v] = u;
      }
    };

    for (;;) {
      std::size_t u = V;
      double best = kInf;
      for (std::size_t v = 0; v < V; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u == V) break;
      done[u] = 1;
      if (u == node_sink()) break;
      if (u == 0) {
        for (Eigen::Index i = 0; i < n_; ++i)
          if (mu_(i) - sent_(i) > kMassEps) relax(u, node_supply(i), 0.0);
      } else if (u <= static_cast<std::size_t>(n_)) {
        const Eigen::Index i = static_cast<Eigen::Index>(u - 1);
        for (Eigen::Index j = 0; j < n_; ++j) relax(u, node_demand(j), c_(i, j));
      } else {
        const Eigen::Index j = static_cast<Eigen::Index>(u - 1 - n_);
        for (Eigen::Index i = 0; i < n_; ++i)
          if (flow_(i, j) > kMassEps) relax(u, node_supply(i), -c_(i, j));
        if (nu_(j) - recv_(j) > kMassEps) relax(u, node_sink(), 0.0);
      }
    }

    const double dt = dist[node_sink()];
    if (!std::isfinite(dt)) return 0.0;
    for (std::size_t v = 0; v < V; ++v) pot_[v] += std::min(dist[v], dt);

    // Bottleneck along the path T <- ... <- S.
    double push = kInf;
    for (std::size_t v = node_sink(); v != 0; v = parent[v]) {
      const std::size_t u = parent[v];
      if (u == 0) {
        push = std::min(push, mu_(static_cast<Eigen::Index>(v - 1)) - sent_(static_cast<Eigen::Index>(v - 1)));
      } else if (v == node_sink()) {
        const Eigen::Index j = static_cast<Eigen::Index>(u - 1 - n_);
        push = std::min(push, nu_(j) - recv_(j));
      } else if (u > static_cast<std::size_t>(n_)) {
        push = std::min(push, flow_(static_cast<Eigen::Index>(v - 1), static_cast<Eigen::Index>(u - 1 - n_)));
      }
    }
    for (std::size_t v = node_sink(); v != 0; v = parent[v]) {
      const std::size_t u = parent[v];
      if (u == 0) {
        sent_(static_cast<Eigen::Index>(v - 1)) += push;
      } else if (v == node_sink()) {
        recv_(static_cast<Eigen::Index>(u - 1 - n_)) += push;
      } else if (u <= static_cast<std::size_t>(n_)) {
        flow_(static_cast<Eigen::Index>(u - 1), static_cast<Eigen::Index>(v - 1 - n_)) += push;
      } else {
        flow_(static_cast<Eigen::Index>(v - 1), static_cast<Eigen::Index>(u - 1 - n_)) -= push;
      }
    }
    return push > 0.0 ? push : 0.0;
  }

  Eigen::Index n_;
  const Vector& mu_;
  const Vector& nu_;
  const Matrix& c_;
  Matrix flow_;
  Vector sent_;
  Vector recv_;
  std::vector<double> pot_;
};

void check_inputs(const ProbVector& mu, const ProbVector& nu, const FiniteMetric& rho) {
  require(mu.size() == nu.size() && mu.size() == rho.size(), ErrorCode::DimensionMismatch,
          "marginals and metric must have the same size");
  require(std::abs(mu.values().sum() - nu.values().sum()) <= 1e-10, ErrorCode::Degenerate,
          "marginal masses differ");
}

}  // namespace

TransportSolution solve_transport_raw(const Vector& mu, const Vector& nu, const Matrix& cost, const Matrix& closure) {
  const Eigen::Index n = mu.size();
  require(nu.size() == n && cost.rows() == n && cost.cols() == n && closure.rows() == n && closure.cols() == n,
          ErrorCode::DimensionMismatch, "marginals and cost must have the same size");
  require(std::abs(mu.sum() - nu.sum()) <= 1e-10, ErrorCode::Degenerate, "marginal masses differ");
  SspSolver solver(mu, nu, cost);
  solver.run();

  TransportSolution out;
  out.plan.pi = solver.flow();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (out.plan.pi(i, j) < 1e-14) out.plan.pi(i, j) = 0.0;
  out.plan.cost = (out.plan.pi.array() * cost.array()).sum();

  // Demand potentials b_j = -p(j) satisfy a_i - b_j <= c_ij with a_i = -p(i).
  // The c-transform over the closure yields one potential on all states that is
  // 1-Lipschitz for the closure (hence for the cost) and dominates a on the support.
  Vector b(n);
  for (Eigen::Index j = 0; j < n; ++j) b(j) = -solver.demand_potential(j);
  Vector f(n);
  for (Eigen::Index x = 0; x < n; ++x) f(x) = (b + closure.row(x).transpose()).minCoeff();
  f.array() -= f.minCoeff();
  out.dual.f = f;
  out.dual.value = mu.dot(f) - nu.dot(f);
  return out;
}

TransportSolution solve_transport(const ProbVector& mu, const ProbVector& nu, const FiniteMetric& rho) {
  check_inputs(mu, nu, rho);
  const Matrix closure = rho.mode() == MetricMode::Metric ? rho.distances() : rho.shortest_path_closure();
  return solve_transport_raw(mu.values(), nu.values(), rho.distances(), closure);
}

CouplingPlan wasserstein_primal(const ProbVector& mu, const ProbVector& nu, const FiniteMetric& rho) {
  return solve_transport(mu, nu, rho).plan;
}

DualPotential wasserstein_dual(const ProbVector& mu, const ProbVector& nu, const FiniteMetric& rho) {
  return solve_transport(mu, nu, rho).dual;
}

}  // namespace cbounds
