#include "egovo/rotavg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "egovo/errors.hpp"

namespace egovo {

int ViewGraph::index_of(int id) const {
  for (size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] == id) return static_cast<int>(k);
  }
  return -1;
}

int ViewGraph::anchor_index() const {
  return static_cast<int>(std::min_element(ids.begin(), ids.end()) - ids.begin());
}

bool ViewGraph::connected() const {
  const int n = static_cast<int>(ids.size());
  if (n == 0) return false;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto root = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  int components = n;
  for (const auto& e : edges) {
    const int a = index_of(e.i);
    const int b = index_of(e.j);
    if (a < 0 || b < 0) continue;
    const int ra = root(a);
    const int rb = root(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

namespace {

struct IndexedEdge {
  int a, b;  // node indices
  const RelRotEdge* edge;
};

// Tangent residual log(R_j^-1 R_ij R_i); zero when the edge is satisfied.
RotVec edge_residual(const IndexedEdge& e, const std::vector<Rotation>& rots) {
  const Mat3 m = rots[e.b].matrix().transpose() * e.edge->r_ij.matrix() * rots[e.a].matrix();
  return log_so3(Rotation::from_matrix(m));
}

double edge_angle(const IndexedEdge& e, const std::vector<Rotation>& rots) {
  const Mat3 m = rots[e.b].matrix().transpose() * e.edge->r_ij.matrix() * rots[e.a].matrix();
  return rotation_angle(Rotation::from_matrix_unchecked(m));
}

double huber(double theta, double delta) {
  return theta <= delta ? 0.5 * theta * theta : delta * (theta - 0.5 * delta);
}

double huber_factor(double theta, double delta) {
  return theta <= delta ? 1.0 : delta / theta;
}

double squared_cost(const std::vector<IndexedEdge>& edges, const std::vector<Rotation>& rots) {
  double c = 0.0;
  for (const auto& e : edges) {
    const double t = edge_angle(e, rots);
    c += t * t;
  }
  return c;
}

double robust_cost(const std::vector<IndexedEdge>& edges, const std::vector<Rotation>& rots,
                   double delta) {
  double c = 0.0;
  for (const auto& e : edges) c += e.edge->weight * huber(edge_angle(e, rots), delta);
  return c;
}

std::vector<IndexedEdge> index_edges(const ViewGraph& g) {
  std::vector<IndexedEdge> out;
  out.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    const int a = g.index_of(e.i);
    const int b = g.index_of(e.j);
    if (a < 0 || b < 0) {
      throw ConfigError("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                        ") references an unknown node");
    }
    out.push_back({a, b, &e});
  }
  return out;
}

}  // namespace

double graph_cost(const ViewGraph& g) { return squared_cost(index_edges(g), g.rotations); }

AveragingResult average_rotations(const ViewGraph& g, const RotAvgConfig& cfg) {
  const int n = static_cast<int>(g.ids.size());
  if (n < 2) throw ConfigError("rotation averaging needs at least two nodes");
  if (g.rotations.size() != g.ids.size()) throw ConfigError("one rotation per node required");
  const auto edges = index_edges(g);
  if (!g.connected()) throw ConfigError("view graph is disconnected");

  const int anchor = g.anchor_index();
  std::vector<int> unknown(n, -1);
  int m = 0;
  for (int k = 0; k < n; ++k) {
    if (k != anchor) unknown[k] = m++;
  }

  AveragingResult res;
  res.rotations = g.rotations;
  auto& rep = res.report;
  rep.initial_cost = squared_cost(edges, res.rotations);
  rep.initial_robust_cost = robust_cost(edges, res.rotations, cfg.huber_delta);
  double current = rep.initial_robust_cost;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(3 * m);
    for (const auto& e : edges) {
      const RotVec w = edge_residual(e, res.rotations);
      const double wt = e.edge->weight * huber_factor(w.norm(), cfg.huber_delta);
      // Linearized residual: w + d_a - d_b.
      const int ua = unknown[e.a];
      const int ub = unknown[e.b];
      for (int d = 0; d < 3; ++d) {
        if (ua >= 0) {
          trip.emplace_back(3 * ua + d, 3 * ua + d, wt);
          grad[3 * ua + d] += wt * w[d];
        }
        if (ub >= 0) {
          trip.emplace_back(3 * ub + d, 3 * ub + d, wt);
          grad[3 * ub + d] -= wt * w[d];
        }
        if (ua >= 0 && ub >= 0) {
          trip.emplace_back(3 * ua + d, 3 * ub + d, -wt);
          trip.emplace_back(3 * ub + d, 3 * ua + d, -wt);
        }
      }
    }
    Eigen::SparseMatrix<double> h(3 * m, 3 * m);
    h.setFromTriplets(trip.begin(), trip.end());
    solver.compute(h);
    if (solver.info() != Eigen::Success) {
      rep.solver_failed = true;
      break;
    }
    const Eigen::VectorXd delta = -solver.solve(grad);
    if (solver.info() != Eigen::Success || !delta.allFinite()) {
      rep.solver_failed = true;
      break;
    }

    double scale = 1.0;
    bool accepted = false;
    std::vector<Rotation> cand(res.rotations);
    for (int damp = 0; damp <= cfg.max_dampings; ++damp) {
      for (int k = 0; k < n; ++k) {
        if (unknown[k] < 0) continue;
        cand[k] = res.rotations[k] * exp_so3(scale * delta.segment<3>(3 * unknown[k]));
      }
      const double c = robust_cost(edges, cand, cfg.huber_delta);
      if (c <= current) {
        current = c;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;
    res.rotations = cand;
    ++rep.iterations;

    double max_step = 0.0;
    for (int k = 0; k < m; ++k) max_step = std::max(max_step, scale * delta.segment<3>(3 * k).norm());
    if (max_step < cfg.tolerance) break;
  }

  if (rep.solver_failed) res.rotations = g.rotations;
  rep.final_cost = squared_cost(edges, res.rotations);
  rep.final_robust_cost = robust_cost(edges, res.rotations, cfg.huber_delta);
  for (const auto& e : edges) {
    const double t = edge_angle(e, res.rotations);
    rep.edge_residuals.push_back(t);
    rep.robust_weights.push_back(huber_factor(t, cfg.huber_delta));
  }
  return res;
}

void write_edge_list(std::ostream& os, const std::vector<RelRotEdge>& edges) {
  const auto old = os.precision(17);
  for (const auto& e : edges) {
    os << e.i << ' ' << e.j;
    const Mat3& r = e.r_ij.matrix();
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) os << ' ' << r(a, b);
    }
    os << ' ' << e.weight << ' ' << (e.kind == EdgeKind::kClosure ? "closure" : "sequential")
       << '\n';
  }
  os.precision(old);
}

std::vector<RelRotEdge> read_edge_list(std::istream& is) {
  std::vector<RelRotEdge> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    RelRotEdge e;
    Mat3 r;
    std::string kind;
    ss >> e.i >> e.j;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) ss >> r(a, b);
    }
    ss >> e.weight >> kind;
    if (!ss || (kind != "closure" && kind != "sequential")) {
      throw IoError("malformed edge on line " + std::to_string(lineno));
    }
    e.r_ij = Rotation::from_matrix(r);
    e.kind = kind == "closure" ? EdgeKind::kClosure : EdgeKind::kSequential;
    out.push_back(e);
  }
  return out;
}

}  // namespace egovo
