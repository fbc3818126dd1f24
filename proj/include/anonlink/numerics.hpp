// SPDX-License-Identifier: Apache-2.0
//
// Dense complex linear-algebra kernels and a small convex solver.
//
// The kernels wrap Eigen SVD factorizations behind a fixed rank rule:
// singular values below 1e-10 times the largest are treated as zero.
// The solver half provides the minimum-norm QP (min ||z||^2 s.t. Cz >= b)
// via the Lawson-Hanson NNLS reduction, plus a monotone bisection used for
// margin maximization under a power budget.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace anonlink::numerics {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Relative singular-value threshold deciding numerical rank.
inline constexpr double kRankRelTol = 1e-10;

namespace detail {

inline Eigen::Index rank_from_singular_values(const RealVector& sv) {
  if (sv.size() == 0) return 0;
  const double cut = kRankRelTol * sv(0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cut) ++r;
  return r;
}

}  // namespace detail

// Moore-Penrose pseudo-inverse; rank decided by the singular-value rule.
inline ComplexMatrix pseudo_inverse(const ComplexMatrix& h) {
  if (h.rows() == 0 || h.cols() == 0) {
    return ComplexMatrix::Zero(h.cols(), h.rows());
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(h,
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const Eigen::Index r = detail::rank_from_singular_values(sv);
  if (r == 0) return ComplexMatrix::Zero(h.cols(), h.rows());
  return svd.matrixV().leftCols(r) *
         sv.head(r).cwiseInverse().asDiagonal() *
         svd.matrixU().leftCols(r).adjoint();
}

// Orthonormal basis of the column space; width equals the numerical rank
// (possibly zero columns).
inline ComplexMatrix orthonormal_range_basis(const ComplexMatrix& h) {
  if (h.rows() == 0 || h.cols() == 0) return ComplexMatrix(h.rows(), 0);
  Eigen::JacobiSVD<ComplexMatrix> svd(h, Eigen::ComputeThinU);
  const Eigen::Index r = detail::rank_from_singular_values(svd.singularValues());
  return svd.matrixU().leftCols(r);
}

// Hermitian idempotent projector onto the column space of h.
inline ComplexMatrix projector(const ComplexMatrix& h) {
  const ComplexMatrix q = orthonormal_range_basis(h);
  if (q.cols() == 0) return ComplexMatrix::Zero(h.rows(), h.rows());
  return q * q.adjoint();
}

// Orthonormal basis of the null space of m; width = cols(m) - rank(m),
// possibly an empty (n x 0) matrix.
inline ComplexMatrix null_space_basis(const ComplexMatrix& m) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0 || n == 0) return ComplexMatrix::Identity(n, n);
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const Eigen::Index r = detail::rank_from_singular_values(svd.singularValues());
  return svd.matrixV().rightCols(n - r);
}

inline Eigen::Index rank(const ComplexMatrix& h) {
  if (h.rows() == 0 || h.cols() == 0) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(h);
  return detail::rank_from_singular_values(svd.singularValues());
}

// Realification: v -> [Re v; Im v], M -> [[Re M, -Im M], [Im M, Re M]].
// Satisfies realify(M v) = realify(M) * realify(v).
inline RealVector realify(const ComplexVector& v) {
  RealVector out(2 * v.size());
  out.head(v.size()) = v.real();
  out.tail(v.size()) = v.imag();
  return out;
}

inline RealMatrix realify(const ComplexMatrix& m) {
  RealMatrix out(2 * m.rows(), 2 * m.cols());
  out.topLeftCorner(m.rows(), m.cols()) = m.real();
  out.topRightCorner(m.rows(), m.cols()) = -m.imag();
  out.bottomLeftCorner(m.rows(), m.cols()) = m.imag();
  out.bottomRightCorner(m.rows(), m.cols()) = m.real();
  return out;
}

// ---------------------------------------------------------------------------
// Nonnegative least squares (Lawson-Hanson active set).

struct NnlsResult {
  RealVector x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = true;
};

inline NnlsResult nnls(const RealMatrix& a, const RealVector& y,
                       int max_iter = 0) {
  const Eigen::Index n = a.cols();
  if (max_iter <= 0) max_iter = 16 * static_cast<int>(n) + 64;

  NnlsResult res;
  res.x = RealVector::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  RealVector resid = y;
  const double wtol =
      1e-13 * std::max(1.0, a.lpNorm<Eigen::Infinity>() * y.lpNorm<Eigen::Infinity>());

  auto solve_passive = [&](const std::vector<Eigen::Index>& idx) -> RealVector {
    RealMatrix ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) ap.col(c) = a.col(idx[c]);
    return ap.colPivHouseholderQr().solve(y);
  };

  int iter = 0;
  while (iter < max_iter) {
    // Most negative gradient among active (clamped) variables.
    const RealVector w = a.transpose() * resid;
    Eigen::Index best = -1;
    double best_w = wtol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!passive[static_cast<std::size_t>(i)] && w(i) > best_w) {
        best_w = w(i);
        best = i;
      }
    }
    if (best < 0) break;  // KKT satisfied
    passive[static_cast<std::size_t>(best)] = true;

    // Inner loop: keep the passive-set least-squares solution positive.
    while (true) {
      ++iter;
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
      }
      if (idx.empty()) break;
      const RealVector z = solve_passive(idx);

      double zmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < z.size(); ++c) zmin = std::min(zmin, z(c));
      if (zmin > 0.0) {
        res.x.setZero();
        for (std::size_t c = 0; c < idx.size(); ++c) res.x(idx[c]) = z(c);
        break;
      }

      // Step toward z until the first variable hits zero, then clamp it.
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < idx.size(); ++c) {
        if (z(static_cast<Eigen::Index>(c)) <= 0.0) {
          const double xi = res.x(idx[c]);
          const double denom = xi - z(static_cast<Eigen::Index>(c));
          if (denom > 0.0) alpha = std::min(alpha, xi / denom);
        }
      }
      if (!std::isfinite(alpha)) alpha = 0.0;
      for (std::size_t c = 0; c < idx.size(); ++c) {
        const double zi = z(static_cast<Eigen::Index>(c));
        res.x(idx[c]) += alpha * (zi - res.x(idx[c]));
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        auto ui = static_cast<std::size_t>(i);
        if (passive[ui] && res.x(i) <= 1e-14) {
          res.x(i) = 0.0;
          passive[ui] = false;
        }
      }
      if (iter >= max_iter) {
        res.converged = false;
        break;
      }
    }
    resid = y - a * res.x;
  }
  if (iter >= max_iter) res.converged = false;
  res.iterations = iter;
  res.residual_norm = resid.norm();
  return res;
}

// ---------------------------------------------------------------------------
// Minimum-norm QP: find z minimizing ||z||^2 subject to C z >= b.

struct QpProblem {
  RealMatrix c;  // m x n constraint rows
  RealVector b;  // m
};

enum class QpStatus { kOptimal, kInfeasible };

struct QpSolution {
  RealVector z;
  double objective = 0.0;
  QpStatus status = QpStatus::kOptimal;
  double kkt_residual = 0.0;
  int iterations = 0;
};

// Least-distance-programming reduction: solve one NNLS on E = [C^T; b^T],
// f = e_{n+1}. A (near-)zero NNLS residual is a Farkas certificate that the
// polyhedron is empty; otherwise z = -r_{1..n} / r_{n+1} is the minimizer
// and lambda = u / ||r||^2 its multipliers.
inline QpSolution min_norm_qp(const QpProblem& p, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("min_norm_qp: tol must be positive");
  const Eigen::Index m = p.c.rows();
  const Eigen::Index n = p.c.cols();
  if (p.b.size() != m) throw std::invalid_argument("min_norm_qp: size mismatch");

  QpSolution sol;
  if (m == 0) {  // unconstrained: the origin
    sol.z = RealVector::Zero(n);
    return sol;
  }

  RealMatrix e(n + 1, m);
  e.topRows(n) = p.c.transpose();
  e.bottomRows(1) = p.b.transpose();
  RealVector f = RealVector::Zero(n + 1);
  f(n) = 1.0;

  const NnlsResult fit = nnls(e, f);
  sol.iterations = fit.iterations;

  const double feas_eps = 1e-11 * std::max(1.0, p.b.lpNorm<Eigen::Infinity>());
  if (fit.residual_norm <= feas_eps) {
    sol.status = QpStatus::kInfeasible;
    sol.z = RealVector::Zero(n);
    sol.objective = std::numeric_limits<double>::quiet_NaN();
    return sol;
  }

  const RealVector r = e * fit.x - f;
  sol.z = -r.head(n) / r(n);
  sol.objective = sol.z.squaredNorm();

  const RealVector lambda = fit.x / r.squaredNorm();
  const RealVector slack = p.c * sol.z - p.b;
  double kkt = (sol.z - p.c.transpose() * lambda).lpNorm<Eigen::Infinity>();
  for (Eigen::Index i = 0; i < m; ++i) {
    kkt = std::max(kkt, -slack(i));                       // primal feasibility
    kkt = std::max(kkt, std::abs(lambda(i) * slack(i)));  // complementarity
  }
  sol.kkt_residual = kkt;
  return sol;
}

// ---------------------------------------------------------------------------
// Monotone bisection for margin maximization under a power budget.

struct MarginProbe {
  bool feasible = false;
  double power = 0.0;
  RealVector z;
};

using MarginOracle = std::function<MarginProbe(double)>;

struct BisectionReport {
  double t_star = 0.0;
  RealVector z_star;
  std::vector<std::pair<double, double>> brackets;  // (lower, upper) history
  int evaluations = 0;
};

// Largest t (within tol) with feasible_power_at(t) <= budget. The bracket is
// grown by doubling from t_hi_seed until the budget is exceeded (cap 60
// doublings), then bisected. Requires power_at(0) <= budget.
inline BisectionReport bisect_max_margin(const MarginOracle& power_at,
                                         double budget, double t_hi_seed,
                                         double tol) {
  if (tol <= 0.0) {
    throw std::invalid_argument("bisect_max_margin: tol must be positive");
  }
  if (t_hi_seed <= 0.0) {
    throw std::invalid_argument("bisect_max_margin: seed must be positive");
  }

  BisectionReport rep;
  MarginProbe base = power_at(0.0);
  ++rep.evaluations;
  if (!base.feasible || base.power > budget) {
    throw std::invalid_argument(
        "bisect_max_margin: zero margin must be within budget");
  }
  double lo = 0.0;
  rep.z_star = std::move(base.z);

  double hi = t_hi_seed;
  int doublings = 0;
  while (true) {
    MarginProbe probe = power_at(hi);
    ++rep.evaluations;
    if (!probe.feasible || probe.power > budget) break;
    lo = hi;
    rep.z_star = std::move(probe.z);
    hi *= 2.0;
    if (++doublings > 60) {
      throw std::runtime_error("bisect_max_margin: bracket growth exceeded cap");
    }
  }
  rep.brackets.emplace_back(lo, hi);

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    MarginProbe probe = power_at(mid);
    ++rep.evaluations;
    if (probe.feasible && probe.power <= budget) {
      lo = mid;
      rep.z_star = std::move(probe.z);
    } else {
      hi = mid;
    }
    rep.brackets.emplace_back(lo, hi);
  }
  rep.t_star = lo;
  return rep;
}

}  // namespace anonlink::numerics
