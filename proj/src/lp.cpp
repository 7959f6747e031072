#include "pvsearch/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace pvs {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

// Row-major dense tableau for  min cost^T v,  E v = rhs,  v >= 0.
// Columns: [0, m) structural (dual multipliers of the primal rows),
//          [m, m + n) artificial, last column = rhs.
class Tableau {
 public:
  Tableau(const Mat& A, const Vec& c) : m_(A.rows()), n_(A.cols()), cols_(m_ + n_ + 1) {
    t_.assign(static_cast<size_t>((n_ + 1) * cols_), 0.0);
    sign_.resize(static_cast<size_t>(n_));
    basis_.resize(static_cast<size_t>(n_));
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double s = c(i) < 0 ? -1.0 : 1.0;
      sign_[static_cast<size_t>(i)] = s;
      for (Eigen::Index j = 0; j < m_; ++j) at(i, j) = s * A(j, i);
      at(i, m_ + i) = 1.0;
      at(i, cols_ - 1) = s * c(i);
      basis_[static_cast<size_t>(i)] = m_ + i;
    }
  }

  double& at(Eigen::Index r, Eigen::Index c) { return t_[static_cast<size_t>(r * cols_ + c)]; }
  double at(Eigen::Index r, Eigen::Index c) const { return t_[static_cast<size_t>(r * cols_ + c)]; }
  Eigen::Index obj() const { return n_; }
  Eigen::Index rhs() const { return cols_ - 1; }

  // Objective row holds reduced costs; its rhs holds -objective.
  void set_objective(const std::vector<double>& cost) {
    for (Eigen::Index j = 0; j < cols_; ++j) at(obj(), j) = j < cols_ - 1 ? cost[static_cast<size_t>(j)] : 0.0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double cb = cost[static_cast<size_t>(basis_[static_cast<size_t>(i)])];
      if (cb == 0.0) continue;
      for (Eigen::Index j = 0; j < cols_; ++j) at(obj(), j) -= cb * at(i, j);
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    const double p = at(row, col);
    for (Eigen::Index j = 0; j < cols_; ++j) at(row, j) /= p;
    for (Eigen::Index i = 0; i <= n_; ++i) {
      if (i == row) continue;
      const double f = at(i, col);
      if (f == 0.0) continue;
      for (Eigen::Index j = 0; j < cols_; ++j) at(i, j) -= f * at(row, j);
      at(i, col) = 0.0;
    }
    basis_[static_cast<size_t>(row)] = col;
  }

  bool has_pivot(Eigen::Index col) const {
    for (Eigen::Index i = 0; i < n_; ++i)
      if (at(i, col) > kPivotTol) return true;
    return false;
  }

  // Smallest-index entering column. Returns false when unbounded. With a
  // bounded objective a column without pivot entries is round-off and gets
  // skipped.
  bool run(Eigen::Index allowed_cols, int& pivots, bool bounded = false) {
    long steps = 0;
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (at(obj(), j) < -kCostTol && (!bounded || has_pivot(j))) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n_; ++i) {
        const double a = at(i, enter);
        if (a > kPivotTol) best = std::min(best, std::max(at(i, rhs()), 0.0) / a);
      }
      if (!std::isfinite(best)) return false;
      // Ties go to the largest pivot element, which keeps the tableau from
      // blowing up on degenerate vertices; past the budget they go to the
      // smallest basic index so Bland's rule rules out cycling.
      const bool bland = ++steps > 20 * (n_ + cols_);
      Eigen::Index leave = -1;
      for (Eigen::Index i = 0; i < n_; ++i) {
        const double a = at(i, enter);
        if (a <= kPivotTol) continue;
        if (std::max(at(i, rhs()), 0.0) / a > best + 1e-13 * (1.0 + best)) continue;
        if (leave < 0) {
          leave = i;
        } else if (bland) {
          if (basis_[static_cast<size_t>(i)] < basis_[static_cast<size_t>(leave)]) leave = i;
        } else if (a > at(leave, enter)) {
          leave = i;
        }
      }
      pivot(leave, enter);
      ++pivots;
    }
  }

  Eigen::Index m_, n_, cols_;
  std::vector<double> t_;
  std::vector<double> sign_;
  std::vector<Eigen::Index> basis_;
};

// Polish x on the active set of structural basic columns when it is complete.
void polish(const Mat& A, const Vec& b, const Tableau& tab, Vec& x) {
  const Eigen::Index n = A.cols();
  Mat AB(n, n);
  Vec bB(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index col = tab.basis_[static_cast<size_t>(i)];
    if (col >= A.rows()) return;
    AB.row(i) = A.row(col);
    bB(i) = b(col);
  }
  Eigen::FullPivLU<Mat> lu(AB);
  if (!lu.isInvertible()) return;
  const Vec xp = lu.solve(bB);
  if (!xp.allFinite()) return;
  const double viol_old = std::max(0.0, (A * x - b).maxCoeff());
  const double viol_new = std::max(0.0, (A * xp - b).maxCoeff());
  if (viol_new <= viol_old + 1e-12) x = xp;
}

}  // namespace

bool lp_feasible(const Mat& A, const Vec& b) {
  const LpResult r = solve_lp(A, b, Vec::Zero(A.cols()));
  return r.status == LpStatus::optimal;
}

LpResult solve_lp(const Mat& A, const Vec& b, const Vec& c_in, Sense sense) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (b.size() != m || c_in.size() != n) throw InputError("solve_lp: shape mismatch");
  if (!A.allFinite() || !b.allFinite() || !c_in.allFinite()) throw InputError("solve_lp: non-finite input");

  const Vec c = sense == Sense::maximize ? c_in : Vec(-c_in);
  LpResult res;
  if (n == 0) {
    res.x = Vec(0);
    res.status = (m == 0 || b.minCoeff() >= -1e-12) ? LpStatus::optimal : LpStatus::infeasible;
    return res;
  }

  Tableau tab(A, c);

  // Phase I: minimize the sum of artificials.
  std::vector<double> cost(static_cast<size_t>(m + n), 0.0);
  for (Eigen::Index j = m; j < m + n; ++j) cost[static_cast<size_t>(j)] = 1.0;
  tab.set_objective(cost);
  tab.run(m + n, res.pivots, true);
  // Sum of the artificials read off the basis; the objective row drifts
  // after many pivots with large multipliers.
  double phase1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (tab.basis_[static_cast<size_t>(i)] >= m) phase1 += std::abs(tab.at(i, tab.rhs()));
  const double cscale = std::max(1.0, c.cwiseAbs().maxCoeff());
  // Thin bodies need huge multipliers; the residual grows with them.
  double yscale = 1.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (tab.basis_[static_cast<size_t>(i)] < m) yscale += std::abs(tab.at(i, tab.rhs()));
  if (phase1 > 1e-9 * cscale * yscale) {
    // c is outside the cone of the rows: the primal is unbounded if feasible.
    res.status = lp_feasible(A, b) ? LpStatus::unbounded : LpStatus::infeasible;
    return res;
  }

  // Drive artificials out of the basis where possible.
  for (Eigen::Index i = 0; i < n; ++i) {
    if (tab.basis_[static_cast<size_t>(i)] < m) continue;
    Eigen::Index col = -1;
    double best = 1e-9;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (std::abs(tab.at(i, j)) > best) {
        best = std::abs(tab.at(i, j));
        col = j;
      }
    }
    if (col >= 0) {
      tab.pivot(i, col);
      ++res.pivots;
    }
  }

  // Phase II: minimize b^T l over structural columns only.
  std::fill(cost.begin(), cost.end(), 0.0);
  for (Eigen::Index j = 0; j < m; ++j) cost[static_cast<size_t>(j)] = b(j);
  tab.set_objective(cost);
  if (!tab.run(m, res.pivots)) {
    res.status = LpStatus::infeasible;  // dual unbounded
    return res;
  }

  // Multipliers: reduced cost of artificial i is -sign_i * y_i.
  Vec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = -tab.at(tab.obj(), m + i) * tab.sign_[static_cast<size_t>(i)];
  polish(A, b, tab, x);

  res.status = LpStatus::optimal;
  res.x = x;
  res.value = c_in.dot(x);
  return res;
}

}  // namespace pvs
