#pragma once

#include <memory>
#include <span>
#include <vector>

#include "dagbandit/augment.hpp"
#include "dagbandit/graph.hpp"

namespace dagbandit {

// co(X) or co(X†) as {x : Ax = b} intersected with the positive orthant.
// Coordinates: [vertices | edges | live bits]; `bits` is empty (zero live
// bits) for the plain flow polytope.
struct FtrlDomain {
  Dag dag;
  BitIndexMap bits;
  bool augmented = false;
  int dim = 0;
  std::vector<LinearEquality> rows;

  int num_live_bits() const { return augmented ? bits.num_live() : 0; }
};

FtrlDomain make_domain(const Dag& pruned, bool augmented);

struct LearnerSchedule {
  double eta = 0.0;
  std::vector<double> gamma;      // over V∪E
  std::vector<double> gamma_hat;  // over live bits
  int horizon = 1;
  double delta = 0.05;
  double tol = 1e-7;

  // gamma followed by gamma_hat, aligned with the domain coordinates
  std::vector<double> full_gamma() const;
};

// Default schedule: eta = 1/sqrt(T); every gamma entry
// sqrt(K log2(5(|V|+|E|+K)/delta) / (|E| T)), or log2(5(|V|+|E|)/delta)
// for the equal-length variant. tol = min(1/T^2, 1e-7).
LearnerSchedule default_schedule(const FtrlDomain& domain, int horizon, double delta);
LearnerSchedule default_schedule(int num_vertices, int num_edges, int K, int num_live_bits,
                                 bool equal_length, int horizon, double delta);

double default_tolerance(int horizon);

struct RegularizerEval {
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> hessian_diag;
};

// F(x) = -sum sqrt(x_i)
RegularizerEval regularizer_value_grad_hess(std::span<const double> x);

// Uniform branching flow: every vertex splits its mass evenly over its
// out-edges; bits are the sums of their supporting edges. Strictly positive
// on a pruned DAG.
std::vector<double> initial_point(const FtrlDomain& domain);

// max |Ax - b|
double feasibility_residual(const FtrlDomain& domain, std::span<const double> x);

struct SolveStats {
  int iterations = 0;
  int fallback_iterations = 0;
  double kkt_residual = 0.0;
  double feasibility = 0.0;
};

// argmin eta<x, L> + F(x) over the domain. Damped Newton on the KKT system
// with a fraction-to-boundary line search; falls back to projected gradient
// phases if Newton fails to make progress. Warm-starts from the previous
// call's answer.
class FtrlSolver {
 public:
  explicit FtrlSolver(const FtrlDomain& domain, int max_iterations = 10000);
  ~FtrlSolver();
  FtrlSolver(const FtrlSolver&) = delete;
  FtrlSolver& operator=(const FtrlSolver&) = delete;

  const std::vector<double>& solve(std::span<const double> cumulative, double eta, double tol);

  const SolveStats& stats() const { return stats_; }
  const std::vector<double>& point() const { return x_; }
  void set_warm_start(bool on) { warm_ = on; }
  void reset();

  // sup-norm of the nullspace projection of eta*L + grad F at x
  double kkt_residual(std::span<const double> cumulative, double eta, std::span<const double> x);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<double> x0_;
  std::vector<double> x_;
  bool warm_ = true;
  int max_iterations_;
  SolveStats stats_;
};

}  // namespace dagbandit
