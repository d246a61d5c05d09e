#pragma once
// Penalized cubic B-spline smooths, reparameterized to fixed + ridge parts.
//
// Basis: K cubic B-splines on clamped knots (boundary = data range, interior
// at quantiles).  Penalty: S = D2' D2 (second differences).  Eigendecompose
// S = U L U'; the K-2 positive-eigenvalue directions become a ridge block
// Zs = B U+ L+^{-1/2} whose coefficients are iid normal(0, sds); the penalty
// null space {constant, linear} loses its constant direction to the model
// intercept, leaving Xs = B t with t the centered, normalized index vector.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hierform/errors.hpp"
#include "hierform/math/stats.hpp"
#include "hierform/tabular/dataset.hpp"

namespace hierform {

struct SmoothBlock {
  std::string owner;
  std::string var;
  std::string label;     // e.g. "sarea_1"
  int k = 10;            // basis dimension
  Eigen::VectorXd knots; // clamped knot vector, size k + 4
  Eigen::MatrixXd Xs;    // n x 1 (linear null-space direction)
  Eigen::MatrixXd Zs;    // n x (k-2)
  Eigen::MatrixXd repar; // k x (k-2): U+ L+^{-1/2}, for newdata
  Eigen::VectorXd null_dir;  // k-vector t: Xs = B t
  double xmin = 0, xmax = 0;

  std::vector<std::string> xs_names() const { return {label}; }
};

namespace detail {

// cubic B-spline basis row at x (clamped knot vector), via de Boor recursion
inline void bspline_row(const Eigen::VectorXd& knots, int K, double x,
                        Eigen::RowVectorXd& row) {
  constexpr int p = 3;
  row.setZero(K);
  const double lo = knots[p], hi = knots[K];  // domain
  if (x < lo) x = lo;
  if (x > hi) x = hi;
  // span index i: knots[i] <= x < knots[i+1], within [p, K-1]
  int i = p;
  while (i < K - 1 && x >= knots[i + 1]) ++i;
  double N[p + 1], left[p + 1], right[p + 1];
  N[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots[i + 1 - j];
    right[j] = knots[i + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom != 0.0 ? N[r] / denom : 0.0;
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
  }
  for (int j = 0; j <= p; ++j) row[i - p + j] = N[j];
}

}  // namespace detail

inline Eigen::MatrixXd smooth_basis(const SmoothBlock& sb, const Eigen::VectorXd& x) {
  Eigen::MatrixXd B(x.size(), sb.k);
  Eigen::RowVectorXd row;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    detail::bspline_row(sb.knots, sb.k, x[i], row);
    B.row(i) = row;
  }
  return B;
}

inline SmoothBlock build_smooth(const std::string& owner, const std::string& var, int K,
                                const std::string& label, const Dataset& d) {
  if (K < 4) throw ValidationError("s(" + var + "): need k >= 4");
  const Column& c = d.col(var);
  const auto n = static_cast<Eigen::Index>(d.n_rows());
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = c.as_double(static_cast<std::size_t>(i));

  std::vector<double> vals(x.data(), x.data() + n);
  {
    std::vector<double> uniq = vals;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (static_cast<int>(uniq.size()) < K)
      throw ValidationError("s(" + var + "): fewer distinct values than basis functions");
  }

  SmoothBlock sb;
  sb.owner = owner;
  sb.var = var;
  sb.label = label;
  sb.k = K;
  sb.xmin = *std::min_element(vals.begin(), vals.end());
  sb.xmax = *std::max_element(vals.begin(), vals.end());

  // clamped knots: 4 copies of each boundary, K-4 interior quantile knots
  sb.knots.resize(K + 4);
  for (int j = 0; j < 4; ++j) {
    sb.knots[j] = sb.xmin;
    sb.knots[K + j] = sb.xmax;
  }
  const int n_interior = K - 4;
  for (int j = 1; j <= n_interior; ++j)
    sb.knots[3 + j] =
        quantile_type7(vals, static_cast<double>(j) / static_cast<double>(n_interior + 1));

  const Eigen::MatrixXd B = smooth_basis(sb, x);

  // second-difference penalty S = D2' D2
  Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(K - 2, K);
  for (int r = 0; r < K - 2; ++r) {
    D2(r, r) = 1.0;
    D2(r, r + 1) = -2.0;
    D2(r, r + 2) = 1.0;
  }
  const Eigen::MatrixXd S = D2.transpose() * D2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd lam = es.eigenvalues();   // ascending
  const Eigen::MatrixXd U = es.eigenvectors();
  const double tol = 1e-9 * lam[K - 1];

  std::vector<int> pos;
  for (int j = 0; j < K; ++j)
    if (lam[j] > tol) pos.push_back(j);

  sb.repar.resize(K, static_cast<Eigen::Index>(pos.size()));
  for (std::size_t jj = 0; jj < pos.size(); ++jj) {
    Eigen::VectorXd u = U.col(pos[jj]);
    // canonical sign: the largest-magnitude component is positive
    Eigen::Index imax;
    u.cwiseAbs().maxCoeff(&imax);
    if (u[imax] < 0) u = -u;
    sb.repar.col(static_cast<Eigen::Index>(jj)) = u / std::sqrt(lam[pos[jj]]);
  }
  sb.Zs = B * sb.repar;

  // null space of S is {constant, linear-in-index}; keep the direction
  // orthogonal to the constant (the model intercept absorbs the rest)
  Eigen::VectorXd t(K);
  for (int j = 0; j < K; ++j) t[j] = static_cast<double>(j);
  t.array() -= t.mean();
  t /= t.norm();
  sb.null_dir = t;
  sb.Xs = B * t;
  return sb;
}

// Xs/Zs for new covariate values (clamped to the training range)
inline void smooth_newdata(const SmoothBlock& sb, const Eigen::VectorXd& x,
                           Eigen::MatrixXd& Xs, Eigen::MatrixXd& Zs) {
  const Eigen::MatrixXd B = smooth_basis(sb, x);
  Xs = B * sb.null_dir;
  Zs = B * sb.repar;
}

}  // namespace hierform
