// Robust averaging of absolute rotations over a view graph of relative
// rotation measurements.
//
// Node rotations R_k map world to camera k, so an edge (i, j) measures
// R_ij = R_j R_i^-1. The solver runs iteratively reweighted least squares in
// the tangent space with a Huber loss and holds the lowest-id node fixed.

#ifndef EGOVO_ROTAVG_HPP
#define EGOVO_ROTAVG_HPP

#include <iosfwd>
#include <vector>

#include "egovo/geometry.hpp"

namespace egovo {

enum class EdgeKind { kSequential, kClosure };

struct RelRotEdge {
  int i = 0;
  int j = 0;
  Rotation r_ij;
  EdgeKind kind = EdgeKind::kSequential;
  double weight = 1.0;
};

struct ViewGraph {
  std::vector<int> ids;
  std::vector<Rotation> rotations;
  std::vector<RelRotEdge> edges;

  int index_of(int id) const;
  int anchor_index() const;
  bool connected() const;
};

struct RotAvgConfig {
  double huber_delta = 5.0 * 3.14159265358979323846 / 180.0;
  int max_iterations = 50;
  double tolerance = 1e-6;
  int max_dampings = 5;
};

struct AveragingReport {
  int iterations = 0;
  double initial_cost = 0.0;  // sum of squared geodesic edge errors
  double final_cost = 0.0;
  double initial_robust_cost = 0.0;
  double final_robust_cost = 0.0;
  std::vector<double> edge_residuals;  // radians, after averaging
  std::vector<double> robust_weights;  // Huber factor per edge, after averaging
  bool solver_failed = false;
};

struct AveragingResult {
  std::vector<Rotation> rotations;
  AveragingReport report;
};

/// Sum over edges of d(R_j R_i^-1, R_ij)^2.
double graph_cost(const ViewGraph& g);

/// Throws ConfigError for graphs that are disconnected, have fewer than two
/// nodes or reference unknown ids. Solver failures leave the rotations
/// unchanged and set report.solver_failed.
AveragingResult average_rotations(const ViewGraph& g, const RotAvgConfig& cfg = {});

/// One edge per line: `i j r00 r01 r02 r10 r11 r12 r20 r21 r22 weight kind`.
void write_edge_list(std::ostream& os, const std::vector<RelRotEdge>& edges);
std::vector<RelRotEdge> read_edge_list(std::istream& is);

}  // namespace egovo

#endif  // EGOVO_ROTAVG_HPP
