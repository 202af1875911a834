#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "egovo/errors.hpp"
#include "egovo/rotavg.hpp"
#include "test_util.hpp"

using namespace egovo;
using namespace egovo::test;

namespace {

RelRotEdge edge(int i, int j, const Rotation& r, EdgeKind kind = EdgeKind::kSequential) {
  RelRotEdge e;
  e.i = i;
  e.j = j;
  e.r_ij = r;
  e.kind = kind;
  return e;
}

RelRotEdge exact_edge(const std::vector<Rotation>& truth, int i, int j,
                      EdgeKind kind = EdgeKind::kSequential) {
  return edge(i, j, truth[j] * truth[i].inverse(), kind);
}

// Node error after removing the gauge of node 0.
double gauge_free_error(const std::vector<Rotation>& est, const std::vector<Rotation>& truth, int n) {
  const Rotation g = truth[0] * est[0].inverse();
  return rot_distance(truth[n] * g.inverse(), est[n]);
}

ViewGraph graph_of(const std::vector<Rotation>& init, std::vector<RelRotEdge> edges) {
  ViewGraph g;
  for (size_t k = 0; k < init.size(); ++k) g.ids.push_back(static_cast<int>(k));
  g.rotations = init;
  g.edges = std::move(edges);
  return g;
}

Rotation noisy(std::mt19937_64& rng, const Rotation& r, double sigma) {
  std::normal_distribution<double> n(0.0, sigma / std::sqrt(3.0));
  return exp_so3(Vec3(n(rng), n(rng), n(rng))) * r;
}

}  // namespace

TEST(RotAvg, TwoNodesExactlyDetermined) {
  const Rotation r12 = exp_so3(Vec3(0.1, -0.3, 0.2));
  ViewGraph g = graph_of({Rotation(), Rotation::about_x(1.0)}, {edge(0, 1, r12)});
  const AveragingResult res = average_rotations(g);
  EXPECT_NEAR(res.report.final_cost, 0.0, 1e-18);
  EXPECT_LT(rot_distance(res.rotations[1] * res.rotations[0].inverse(), r12), 1e-9);
  EXPECT_TRUE(res.rotations[0] == g.rotations[0]);
  EXPECT_GT(res.report.initial_cost, 0.0);
}

TEST(RotAvg, ConsistentTriangle) {
  std::mt19937_64 rng(31);
  const std::vector<Rotation> truth{random_rotation(rng), random_rotation(rng), random_rotation(rng)};
  std::vector<Rotation> init = truth;
  init[1] = noisy(rng, truth[1], 0.2);
  init[2] = noisy(rng, truth[2], 0.2);
  const ViewGraph g = graph_of(init, {exact_edge(truth, 0, 1), exact_edge(truth, 1, 2), exact_edge(truth, 0, 2)});
  const AveragingResult res = average_rotations(g);
  for (int n = 0; n < 3; ++n) EXPECT_LT(gauge_free_error(res.rotations, truth, n), 1e-6);
  EXPECT_LT(res.report.final_cost, 1e-12);
  EXPECT_FALSE(res.report.solver_failed);
}

TEST(RotAvg, NoiselessGraphsRecovered) {
  std::mt19937_64 rng(32);
  for (int n = 3; n <= 10; ++n) {
    std::vector<Rotation> truth, init;
    for (int k = 0; k < n; ++k) truth.push_back(random_rotation(rng));
    for (int k = 0; k < n; ++k) init.push_back(k == 0 ? truth[0] : noisy(rng, truth[k], 0.3));
    std::vector<RelRotEdge> edges;
    for (int k = 1; k < n; ++k) edges.push_back(exact_edge(truth, k - 1, k));
    for (int k = 2; k < n; k += 2) edges.push_back(exact_edge(truth, 0, k, EdgeKind::kClosure));
    const AveragingResult res = average_rotations(graph_of(init, edges));
    for (int k = 0; k < n; ++k) EXPECT_LT(rot_distance(res.rotations[k], truth[k]), 1e-6) << n << " " << k;
  }
}

TEST(RotAvg, AnchorIsLowestIdAndHeldFixed) {
  std::mt19937_64 rng(33);
  const std::vector<Rotation> truth{random_rotation(rng), random_rotation(rng), random_rotation(rng)};
  ViewGraph g;
  g.ids = {7, 3, 5};
  g.rotations = {noisy(rng, truth[0], 0.1), noisy(rng, truth[1], 0.1), noisy(rng, truth[2], 0.1)};
  g.edges = {edge(3, 5, truth[2] * truth[1].inverse()), edge(5, 7, truth[0] * truth[2].inverse())};
  EXPECT_EQ(g.anchor_index(), 1);
  const AveragingResult res = average_rotations(g);
  EXPECT_TRUE(res.rotations[1] == g.rotations[1]);
  EXPECT_LT(res.report.final_cost, 1e-12);
}

TEST(RotAvg, MatchesBruteForceOnSmallGraphs) {
  std::mt19937_64 rng(34);
  for (int n = 2; n <= 4; ++n) {
    std::vector<Rotation> truth;
    for (int k = 0; k < n; ++k) truth.push_back(random_rotation(rng));
    std::vector<RelRotEdge> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) edges.push_back(edge(i, j, noisy(rng, truth[j] * truth[i].inverse(), 2 * kDeg)));
    const ViewGraph g = graph_of(truth, edges);
    const AveragingResult res = average_rotations(g);
    for (double r : res.report.edge_residuals) ASSERT_LT(r, 5 * kDeg);  // inside the quadratic zone

    // Random-restart Riemannian gradient descent on the same objective.
    double best_cost = 1e300;
    std::vector<Rotation> best;
    for (int restart = 0; restart < 100; ++restart) {
      ViewGraph h = g;
      for (int k = 1; k < n; ++k) h.rotations[k] = noisy(rng, truth[k], 0.5);
      double step = 0.1;
      double cost = graph_cost(h);
      for (int it = 0; it < 400 && step > 1e-12; ++it) {
        std::vector<Vec3> grad(n, Vec3::Zero());
        for (int k = 1; k < n; ++k) {
          for (int c = 0; c < 3; ++c) {
            ViewGraph p = h, m = h;
            Vec3 d = Vec3::Zero();
            d(c) = 1e-7;
            p.rotations[k] = exp_so3(d) * h.rotations[k];
            m.rotations[k] = exp_so3(-d) * h.rotations[k];
            grad[k](c) = (graph_cost(p) - graph_cost(m)) / 2e-7;
          }
        }
        ViewGraph trial = h;
        for (int k = 1; k < n; ++k) trial.rotations[k] = exp_so3(-step * grad[k]) * h.rotations[k];
        const double c2 = graph_cost(trial);
        if (c2 < cost) {
          h = trial;
          cost = c2;
          step *= 1.5;
        } else {
          step *= 0.3;
        }
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = h.rotations;
      }
    }
    EXPECT_LE(res.report.final_cost, best_cost + 1e-9);
    for (int k = 0; k < n; ++k) EXPECT_LT(rot_distance(res.rotations[k], best[k]), 1e-3) << n << " " << k;
  }
}

TEST(RotAvg, RobustToOutlierMonteCarlo) {
  int better = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 rng(100 + trial);
    const int n = 10;
    std::vector<Rotation> truth{Rotation()};
    for (int k = 1; k < n; ++k) truth.push_back(exp_so3(Vec3(0.02, 0.15, -0.01)) * truth.back());
    std::vector<RelRotEdge> edges;
    for (int k = 1; k < n; ++k) edges.push_back(edge(k - 1, k, noisy(rng, truth[k] * truth[k - 1].inverse(), 5 * kDeg)));
    for (int span = 2; span <= 3; ++span)
      for (int k = 0; k + span < n; ++k)
        edges.push_back(edge(k, k + span, noisy(rng, truth[k + span] * truth[k].inverse(), 5 * kDeg),
                             EdgeKind::kClosure));
    const std::vector<RelRotEdge> clean = edges;
    const size_t outlier = edges.size();
    edges.push_back(edge(2, 8, exp_so3(Vec3(0, 0, kPi / 2)) * truth[8] * truth[2].inverse(), EdgeKind::kClosure));

    std::vector<Rotation> chained{truth[0]};
    for (int k = 1; k < n; ++k) chained.push_back(edges[k - 1].r_ij * chained.back());
    const AveragingResult res = average_rotations(graph_of(chained, edges));
    const AveragingResult ref = average_rotations(graph_of(chained, clean));
    double before = 0.0, after = 0.0, reference = 0.0;
    for (int k = 0; k < n; ++k) {
      before += rot_distance(chained[k], truth[k]) / n;
      after += rot_distance(res.rotations[k], truth[k]) / n;
      reference += rot_distance(ref.rotations[k], truth[k]) / n;
    }
    better += after < before;
    // The outlier barely moves the solution away from the outlier-free one.
    EXPECT_LT(after, reference + 1.5 * kDeg) << "trial " << trial;

    std::vector<double> w = res.report.robust_weights;
    ASSERT_EQ(w.size(), edges.size());
    const double outlier_w = w[outlier];
    std::nth_element(w.begin(), w.begin() + w.size() / 2, w.end());
    EXPECT_LT(outlier_w, 0.2 * w[w.size() / 2]) << "trial " << trial;
    EXPECT_LE(res.report.final_robust_cost, res.report.initial_robust_cost);
    EXPECT_LE(ref.report.final_cost, ref.report.initial_cost);
  }
  EXPECT_GE(better, 19);
}

TEST(RotAvg, GraphCost) {
  EXPECT_EQ(graph_cost(graph_of({Rotation(), Rotation()}, {edge(0, 1, Rotation())})), 0.0);
  for (double theta : {0.01, 0.3, 2.0}) {
    const ViewGraph g = graph_of({Rotation(), Rotation()}, {edge(0, 1, exp_so3(Vec3(1, 2, -1).normalized() * theta))});
    EXPECT_NEAR(graph_cost(g), theta * theta, 1e-9);
  }
  std::mt19937_64 rng(35);
  std::vector<Rotation> nodes;
  for (int k = 0; k < 5; ++k) nodes.push_back(random_rotation(rng));
  std::vector<RelRotEdge> edges;
  for (int k = 1; k < 5; ++k) edges.push_back(edge(k - 1, k, random_rotation(rng, 0.5)));
  edges.push_back(edge(0, 4, random_rotation(rng, 0.5)));
  const double base = graph_cost(graph_of(nodes, edges));
  const Rotation gauge = random_rotation(rng);
  std::vector<Rotation> moved;
  for (const auto& r : nodes) moved.push_back(r * gauge);
  EXPECT_NEAR(graph_cost(graph_of(moved, edges)), base, 1e-9);
}

TEST(RotAvg, RejectsBadGraphs) {
  EXPECT_THROW(average_rotations(graph_of({Rotation()}, {})), ConfigError);
  EXPECT_THROW(average_rotations(graph_of({Rotation(), Rotation(), Rotation()}, {edge(0, 1, Rotation())})), ConfigError);
  EXPECT_THROW(average_rotations(graph_of({Rotation(), Rotation()}, {edge(0, 5, Rotation())})), ConfigError);
}

TEST(RotAvg, EdgeListRoundTrip) {
  std::mt19937_64 rng(36);
  std::vector<RelRotEdge> edges;
  for (int k = 0; k < 6; ++k) {
    RelRotEdge e = edge(k, k + 1 + k % 3, random_rotation(rng), k % 2 ? EdgeKind::kClosure : EdgeKind::kSequential);
    e.weight = 0.25 + 0.1 * k;
    edges.push_back(e);
  }
  std::stringstream ss;
  write_edge_list(ss, edges);
  const auto back = read_edge_list(ss);
  ASSERT_EQ(back.size(), edges.size());
  for (size_t k = 0; k < edges.size(); ++k) {
    EXPECT_EQ(back[k].i, edges[k].i);
    EXPECT_EQ(back[k].j, edges[k].j);
    EXPECT_EQ(back[k].kind, edges[k].kind);
    EXPECT_NEAR(back[k].weight, edges[k].weight, 1e-15);
    EXPECT_LT((back[k].r_ij.matrix() - edges[k].r_ij.matrix()).norm(), 1e-15);
  }
  std::stringstream bad("0 1 1 0 0 0 1 0 0 0\n");
  EXPECT_THROW(read_edge_list(bad), IoError);
}
