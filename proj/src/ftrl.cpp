#include "dagbandit/ftrl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "dagbandit/error.hpp"

namespace dagbandit {

FtrlDomain make_domain(const Dag& pruned, bool augmented) {
  FtrlDomain d;
  d.dag = pruned;
  d.augmented = augmented;
  d.bits = interval_set(pruned);
  d.rows = flow_constraints(pruned);
  if (augmented) {
    auto extra = augmented_constraints(pruned, d.bits);
    d.rows.insert(d.rows.end(), extra.begin(), extra.end());
  }
  d.dim = pruned.num_coordinates() + d.num_live_bits();
  return d;
}

std::vector<double> LearnerSchedule::full_gamma() const {
  std::vector<double> g(gamma);
  g.insert(g.end(), gamma_hat.begin(), gamma_hat.end());
  return g;
}

double default_tolerance(int horizon) {
  const double t = static_cast<double>(horizon);
  return std::min(1.0 / (t * t), 1e-7);
}

LearnerSchedule default_schedule(int num_vertices, int num_edges, int K, int num_live_bits,
                                 bool equal_length, int horizon, double delta) {
  if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon T must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  if (num_edges < 1 || K < 1) fail(ErrorCode::InvalidArgument, "graph has no edges");
  const double T = static_cast<double>(horizon);
  const double size = equal_length ? static_cast<double>(num_vertices + num_edges)
                                   : static_cast<double>(num_vertices + num_edges + K);
  const double g = std::sqrt(static_cast<double>(K) * std::log2(5.0 * size / delta) /
                             (static_cast<double>(num_edges) * T));
  LearnerSchedule s;
  s.eta = 1.0 / std::sqrt(T);
  s.gamma.assign(static_cast<std::size_t>(num_vertices + num_edges), g);
  s.gamma_hat.assign(static_cast<std::size_t>(num_live_bits), g);
  s.horizon = horizon;
  s.delta = delta;
  s.tol = default_tolerance(horizon);
  return s;
}

LearnerSchedule default_schedule(const FtrlDomain& domain, int horizon, double delta) {
  return default_schedule(domain.dag.num_vertices(), domain.dag.num_edges(), domain.bits.K,
                          domain.num_live_bits(), !domain.augmented, horizon, delta);
}

RegularizerEval regularizer_value_grad_hess(std::span<const double> x) {
  RegularizerEval r;
  r.gradient.resize(x.size());
  r.hessian_diag.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0))
      fail(ErrorCode::NonPositiveCoordinate, "coordinate " + std::to_string(i) + " is not positive");
    const double s = std::sqrt(x[i]);
    r.value -= s;
    r.gradient[i] = -0.5 / s;
    r.hessian_diag[i] = 0.25 / (x[i] * s);
  }
  return r;
}

std::vector<double> initial_point(const FtrlDomain& domain) {
  const Dag& g = domain.dag;
  std::vector<double> x(static_cast<std::size_t>(domain.dim), 0.0);
  x[static_cast<std::size_t>(g.source())] = 1.0;
  for (VertexId v : topo_order(g)) {
    const double xv = x[static_cast<std::size_t>(v)];
    auto out = g.out_edges(v);
    if (out.empty()) continue;
    const double share = xv / static_cast<double>(out.size());
    for (EdgeId e : out) {
      x[static_cast<std::size_t>(g.edge_coordinate(e))] = share;
      x[static_cast<std::size_t>(g.edge(e).head)] += share;
    }
  }
  for (int slot = 0; slot < domain.num_live_bits(); ++slot) {
    double s = 0.0;
    for (EdgeId e : domain.bits.support[static_cast<std::size_t>(slot)])
      s += x[static_cast<std::size_t>(g.edge_coordinate(e))];
    x[static_cast<std::size_t>(g.num_coordinates() + slot)] = s;
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] > 0.0)) fail(ErrorCode::Infeasible, "domain has a coordinate that no path uses");
  return x;
}

double feasibility_residual(const FtrlDomain& domain, std::span<const double> x) {
  double worst = 0.0;
  for (const auto& row : domain.rows) {
    double s = -row.rhs;
    for (auto [i, c] : row.terms) s += c * x[static_cast<std::size_t>(i)];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct FtrlSolver::Impl {
  int n = 0;
  int rows = 0;
  SpMat A, At;
  Vec b;
  // S = A diag(d) A^T, assembled through a fixed list of contributions
  SpMat S;
  struct Contribution {
    int slot;   // index into S.valuePtr()
    int coord;  // k
    double coef;
  };
  std::vector<Contribution> contributions;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  Eigen::SimplicialLDLT<SpMat> gram;  // A A^T for Euclidean projection

  explicit Impl(const FtrlDomain& d) {
    n = d.dim;
    rows = static_cast<int>(d.rows.size());
    std::vector<Eigen::Triplet<double>> trip;
    b.resize(rows);
    for (int r = 0; r < rows; ++r) {
      b[r] = d.rows[static_cast<std::size_t>(r)].rhs;
      for (auto [i, c] : d.rows[static_cast<std::size_t>(r)].terms) trip.emplace_back(r, i, c);
    }
    A.resize(rows, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    At = A.transpose();
    At.makeCompressed();

    // pattern of S from column structure of A
    std::vector<std::vector<std::pair<int, double>>> by_col(static_cast<std::size_t>(n));
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it)
        by_col[static_cast<std::size_t>(it.col())].push_back({static_cast<int>(it.row()), it.value()});
    std::vector<Eigen::Triplet<double>> st;
    for (int k = 0; k < n; ++k)
      for (auto [ri, ci] : by_col[static_cast<std::size_t>(k)])
        for (auto [rj, cj] : by_col[static_cast<std::size_t>(k)]) st.emplace_back(ri, rj, 1.0);
    S.resize(rows, rows);
    S.setFromTriplets(st.begin(), st.end());
    S.makeCompressed();
    auto slot_of = [&](int r, int c) {
      const int* inner = S.innerIndexPtr();
      const int begin = S.outerIndexPtr()[c], end = S.outerIndexPtr()[c + 1];
      const int* p = std::lower_bound(inner + begin, inner + end, r);
      return static_cast<int>(p - inner);
    };
    for (int k = 0; k < n; ++k)
      for (auto [ri, ci] : by_col[static_cast<std::size_t>(k)])
        for (auto [rj, cj] : by_col[static_cast<std::size_t>(k)])
          contributions.push_back({slot_of(ri, rj), k, ci * cj});
    ldlt.analyzePattern(S);

    SpMat G = A * At;
    gram.compute(G);
    if (gram.info() != Eigen::Success)
      fail(ErrorCode::Infeasible, "constraint rows are linearly dependent");
  }

  void assemble(const Vec& d) {
    double* v = S.valuePtr();
    std::fill(v, v + S.nonZeros(), 0.0);
    for (const auto& c : contributions) v[c.slot] += c.coef * d[c.coord];
  }

  Vec project(const Vec& g) {
    Vec z = gram.solve(A * g);
    return g - At * z;
  }
};

FtrlSolver::FtrlSolver(const FtrlDomain& domain, int max_iterations)
    : impl_(std::make_unique<Impl>(domain)), max_iterations_(max_iterations) {
  x0_ = initial_point(domain);
  x_ = x0_;
}

FtrlSolver::~FtrlSolver() = default;

void FtrlSolver::reset() { x_ = x0_; }

namespace {

constexpr double kFloor = 1e-12;

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}
constexpr double kBoundary = 0.99;
constexpr double kArmijo = 1e-4;
constexpr int kFallbackPhase = 500;

// f(x + a dx) - f(x) without cancellation: sqrt(p) - sqrt(q) = (p - q) / (sqrt(p) + sqrt(q))
double objective_change(const Vec& x, const Vec& dx, double a, const Vec& c) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = a * dx[i];
    d += step * (c[i] - 1.0 / (std::sqrt(std::max(x[i] + step, 0.0)) + std::sqrt(x[i])));
  }
  return d;
}

double max_step(const Vec& x, const Vec& dx) {
  double a = 1.0 / kBoundary;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
  return std::min(1.0, kBoundary * a);
}

}  // namespace

double FtrlSolver::kkt_residual(std::span<const double> cumulative, double eta,
                                std::span<const double> x) {
  Vec g(impl_->n);
  for (int i = 0; i < impl_->n; ++i)
    g[i] = eta * cumulative[static_cast<std::size_t>(i)] - 0.5 / std::sqrt(x[static_cast<std::size_t>(i)]);
  return impl_->project(g).lpNorm<Eigen::Infinity>();
}

const std::vector<double>& FtrlSolver::solve(std::span<const double> cumulative, double eta,
                                             double tol) {
  Impl& m = *impl_;
  if (static_cast<int>(cumulative.size()) != m.n)
    fail(ErrorCode::DimensionMismatch, "cumulative estimate has " + std::to_string(cumulative.size()) +
                                           " entries, expected " + std::to_string(m.n));
  if (!(eta > 0.0) || !std::isfinite(eta)) fail(ErrorCode::InvalidArgument, "eta must be positive");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "tolerance must be positive");

  stats_ = {};
  Vec c(m.n);
  for (int i = 0; i < m.n; ++i) {
    c[i] = eta * cumulative[static_cast<std::size_t>(i)];
    if (!std::isfinite(c[i])) fail(ErrorCode::InvalidArgument, "non-finite cumulative estimate");
  }

  const std::vector<double>& start = warm_ ? x_ : x0_;
  Vec x(m.n);
  for (int i = 0; i < m.n; ++i) x[i] = std::max(start[static_cast<std::size_t>(i)], kFloor);

  Vec g(m.n), hinv(m.n), dx(m.n);
  auto gradient = [&](const Vec& at, Vec& out) {
    for (int i = 0; i < m.n; ++i) out[i] = c[i] - 0.5 / std::sqrt(at[i]);
  };

  int iter = 0;
  bool converged = false;
  double last_decrement = 0.0, last_step = 0.0, last_alpha = 0.0;
  while (iter < max_iterations_ && !converged) {
    bool newton_failed = false;
    while (iter < max_iterations_) {
      ++iter;
      gradient(x, g);
      for (int i = 0; i < m.n; ++i) hinv[i] = 4.0 * x[i] * std::sqrt(x[i]);
      Vec r = m.A * x - m.b;
      Vec rhs = r - m.A * (hinv.cwiseProduct(g));
      m.assemble(hinv);
      m.ldlt.factorize(m.S);
      if (m.ldlt.info() != Eigen::Success) {
        newton_failed = true;
        break;
      }
      Vec w = m.ldlt.solve(rhs);
      dx = -hinv.cwiseProduct(g + m.At * w);
      if (!dx.allFinite()) {
        newton_failed = true;
        break;
      }
      const double amax = max_step(x, dx);
      const double decrement = dx.dot(dx.cwiseQuotient(hinv));
      double alpha = amax;
      last_decrement = decrement;
      last_step = dx.lpNorm<Eigen::Infinity>();
      // g.dx is swamped by the range-space part of g near the optimum; the
      // decrement is the same quantity on the feasible manifold. Below 1e-6
      // the objective change drowns in roundoff, so take the full step.
      if (!(amax >= 1.0 && decrement <= 1e-6)) {
        const double slope = -decrement;
        while (true) {
          if (objective_change(x, dx, alpha, c) <= kArmijo * alpha * std::min(slope, 0.0)) break;
          alpha *= 0.5;
          if (alpha < 1e-12) break;
        }
        if (alpha < 1e-12) {
          newton_failed = true;
          break;
        }
      }
      last_alpha = alpha;
      x += alpha * dx;
      for (int i = 0; i < m.n; ++i) x[i] = std::max(x[i], kFloor);
      // steps cannot shrink below roundoff, whatever tol asks for; that
      // floor grows with the size of the cumulative losses
      const double step_floor = 64.0 * std::numeric_limits<double>::epsilon() *
                                std::max(1.0, x.lpNorm<Eigen::Infinity>()) * std::max(1.0, c.lpNorm<Eigen::Infinity>());
      const bool small_step = dx.lpNorm<Eigen::Infinity>() <= std::max(0.1 * tol, step_floor) || decrement <= 1e-24;
      if (alpha >= 1.0 && small_step &&
          (m.A * x - m.b).lpNorm<Eigen::Infinity>() <= 1e-10) {
        converged = true;
        break;
      }
    }
    if (converged || !newton_failed) break;

    // projected gradient phase, then hand back to Newton
    for (int k = 0; k < kFallbackPhase && iter < max_iterations_; ++k, ++iter) {
      ++stats_.fallback_iterations;
      gradient(x, g);
      Vec r = m.A * x - m.b;
      Vec corr = m.At * m.gram.solve(r);
      dx = -m.project(g) - corr;
      double alpha = max_step(x, dx);
      const double slope = g.dot(dx);
      while (alpha > 1e-16) {
        if (objective_change(x, dx, alpha, c) <= kArmijo * alpha * std::min(slope, 0.0)) break;
        alpha *= 0.5;
      }
      x += alpha * dx;
      for (int i = 0; i < m.n; ++i) x[i] = std::max(x[i], kFloor);
    }
  }
  stats_.iterations = iter;
  if (!converged)
    fail(ErrorCode::SolverStall, "FTRL solve did not converge within " + std::to_string(max_iterations_) +
                                     " iterations (tol " + format_sci(tol) + ", last Newton decrement " +
                                     format_sci(last_decrement) + ", step " + format_sci(last_step) +
                                     ", alpha " + format_sci(last_alpha) + ", fallback iterations " +
                                     std::to_string(stats_.fallback_iterations) + ")");
  x_.assign(x.data(), x.data() + m.n);
  stats_.feasibility = (m.A * x - m.b).lpNorm<Eigen::Infinity>();
  gradient(x, g);
  stats_.kkt_residual = m.project(g).lpNorm<Eigen::Infinity>();
  return x_;
}

}  // namespace dagbandit
