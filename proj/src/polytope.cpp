#include "pvsearch/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pvs {

Polytope::Polytope(Mat A, Vec b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.size()) throw InputError("Polytope: row count mismatch");
  if (A_.cols() < 1) throw InputError("Polytope: dimension must be >= 1");
  if (!A_.allFinite() || !b_.allFinite()) throw InputError("Polytope: non-finite entry");
  for (Eigen::Index i = 0; i < A_.rows(); ++i) {
    const double n = A_.row(i).norm();
    if (n < 1e-300) throw InputError("Polytope: zero constraint row");
    A_.row(i) /= n;
    b_(i) /= n;
  }
}

Polytope Polytope::box(const Vec& lo, const Vec& hi) {
  const Eigen::Index d = lo.size();
  if (hi.size() != d) throw InputError("Polytope::box: dimension mismatch");
  Mat A = Mat::Zero(2 * d, d);
  Vec b(2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    A(2 * i, i) = 1.0;
    b(2 * i) = hi(i);
    A(2 * i + 1, i) = -1.0;
    b(2 * i + 1) = -lo(i);
  }
  return Polytope(std::move(A), std::move(b));
}

bool Polytope::contains(const Vec& x, double tol) const {
  if (x.size() != dim()) throw InputError("Polytope::contains: dimension mismatch");
  return rows() == 0 || (A_ * x - b_).maxCoeff() <= tol;
}

Polytope Polytope::without_rows(const std::vector<int>& drop) const {
  Polytope out;
  out.A_.resize(A_.rows() - static_cast<Eigen::Index>(drop.size()), A_.cols());
  out.b_.resize(out.A_.rows());
  size_t k = 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < A_.rows(); ++i) {
    if (k < drop.size() && drop[k] == i) {
      ++k;
      continue;
    }
    out.A_.row(r) = A_.row(i);
    out.b_(r) = b_(i);
    ++r;
  }
  return out;
}

nlohmann::json Polytope::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < A_.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < A_.cols(); ++j) row.push_back(A_(i, j));
    row.push_back(b_(i));
    rows.push_back(std::move(row));
  }
  return {{"d", dim()}, {"rows", std::move(rows)}};
}

Polytope Polytope::from_json(const nlohmann::json& j) {
  const int d = j.at("d").get<int>();
  const auto& rows = j.at("rows");
  Mat A(static_cast<Eigen::Index>(rows.size()), d);
  Vec b(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != static_cast<size_t>(d) + 1) throw InputError("Polytope JSON: row has wrong length");
    for (int k = 0; k < d; ++k) A(static_cast<Eigen::Index>(i), k) = row[static_cast<size_t>(k)].get<double>();
    b(static_cast<Eigen::Index>(i)) = row[static_cast<size_t>(d)].get<double>();
  }
  return Polytope(std::move(A), std::move(b));
}

BodyKind parse_body_kind(const std::string& name) {
  if (name == "inscribed_cube") return BodyKind::inscribed_cube;
  if (name == "unit_box_scaled") return BodyKind::unit_box_scaled;
  if (name == "custom") return BodyKind::custom;
  throw InputError("unknown body kind: " + name);
}

Polytope initial_body(BodyKind kind, int d, const Mat& A, const Vec& b) {
  if (d < 1) throw InputError("initial_body: d must be >= 1");
  const double h = 1.0 / std::sqrt(static_cast<double>(d));
  switch (kind) {
    case BodyKind::inscribed_cube:
      return Polytope::box(Vec::Constant(d, -h), Vec::Constant(d, h));
    case BodyKind::unit_box_scaled:
      return Polytope::box(Vec::Zero(d), Vec::Constant(d, h));
    case BodyKind::custom: {
      if (A.cols() != d) throw InputError("initial_body: custom body has wrong dimension");
      Polytope P(A, b);
      for (int i = 0; i < d; ++i) {
        for (double s : {1.0, -1.0}) {
          const LpResult r = lp_solve(s * Vec::Unit(d, i), P);
          if (r.status == LpStatus::unbounded) throw InputError("initial_body: custom body is unbounded");
          if (r.status == LpStatus::infeasible) throw InputError("initial_body: custom body is empty");
        }
      }
      if (chebyshev_center(P).radius <= 1e-12) throw InputError("initial_body: custom body has empty interior");
      return P;
    }
  }
  throw InputError("initial_body: unknown kind");
}

LpResult lp_solve(const Vec& c, const Polytope& P, Sense sense) {
  if (c.size() != P.dim()) throw InputError("lp_solve: dimension mismatch");
  return solve_lp(P.A(), P.b(), c, sense);
}

double support(const Polytope& P, const Vec& u) {
  const LpResult r = lp_solve(u, P);
  switch (r.status) {
    case LpStatus::optimal: return r.value;
    case LpStatus::infeasible: throw DegenerateError("support: empty polytope");
    case LpStatus::unbounded: throw InputError("support: unbounded polytope");
  }
  return 0.0;
}

std::pair<double, double> support_interval(const Polytope& P, const Vec& u) {
  return {-support(P, -u), support(P, u)};
}

double width(const Polytope& P, const Vec& u) {
  const auto [lo, hi] = support_interval(P, u);
  return std::max(hi - lo, 0.0);
}

Polytope add_halfspace(const Polytope& P, const Vec& u, double c, CutSense sense) {
  if (u.size() != P.dim()) throw InputError("add_halfspace: dimension mismatch");
  if (std::abs(u.norm() - 1.0) > 1e-9) throw InputError("add_halfspace: direction must be unit");
  if (!std::isfinite(c)) throw InputError("add_halfspace: non-finite offset");
  Mat A(P.rows() + 1, P.dim());
  Vec b(P.rows() + 1);
  A.topRows(P.rows()) = P.A();
  b.head(P.rows()) = P.b();
  if (sense == CutSense::le) {
    A.row(P.rows()) = u.transpose();
    b(P.rows()) = c;
  } else {
    A.row(P.rows()) = -u.transpose();
    b(P.rows()) = -c;
  }
  Polytope out(std::move(A), std::move(b));
  if (chebyshev_center(out).radius < 1e-12) throw DegenerateError("add_halfspace: result has empty interior");
  return out;
}

Ball chebyshev_center(const Polytope& P) {
  const int d = P.dim();
  Mat A(P.rows(), d + 1);
  A.leftCols(d) = P.A();
  A.col(d).setOnes();  // rows are unit-norm
  Vec c = Vec::Zero(d + 1);
  c(d) = 1.0;
  const LpResult r = solve_lp(A, P.b(), c);
  Ball ball;
  if (r.status != LpStatus::optimal) {
    ball.center = Vec::Zero(d);
    ball.radius = r.status == LpStatus::unbounded ? std::numeric_limits<double>::infinity() : -1.0;
    return ball;
  }
  ball.center = r.x.head(d);
  ball.radius = r.x(d);
  return ball;
}

Chord chord_from_slack(const Vec& slack, const Vec& a_dir) {
  Chord ch{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    const double a = a_dir(i);
    const double s = std::max(slack(i), 0.0);
    if (a > 1e-15) {
      ch.hi = std::min(ch.hi, s / a);
    } else if (a < -1e-15) {
      ch.lo = std::max(ch.lo, s / a);
    }
  }
  return ch;
}

Chord chord(const Polytope& P, const Vec& x, const Vec& dir) {
  if (x.size() != P.dim() || dir.size() != P.dim()) throw InputError("chord: dimension mismatch");
  if (std::abs(dir.norm() - 1.0) > 1e-9) throw InputError("chord: direction must be unit");
  const Vec s = P.slack(x);
  if (s.size() > 0 && s.minCoeff() < -1e-9) throw InputError("chord: point outside polytope");
  const Chord ch = chord_from_slack(s, P.A() * dir);
  if (!std::isfinite(ch.lo) || !std::isfinite(ch.hi)) throw InputError("chord: unbounded polytope");
  return ch;
}

std::pair<Vec, Vec> bounding_box(const Polytope& P) {
  const int d = P.dim();
  Vec lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    const auto [a, b] = support_interval(P, Vec::Unit(d, i));
    lo(i) = a;
    hi(i) = b;
  }
  return {lo, hi};
}

Polytope prune_redundant(const Polytope& P, double tol) {
  Polytope cur = P;
  int i = 0;
  while (i < cur.rows()) {
    if (cur.rows() <= P.dim() + 1) break;
    const Polytope rest = cur.without_rows({i});
    const LpResult r = lp_solve(cur.A().row(i).transpose(), rest);
    if (r.status == LpStatus::optimal && r.value < cur.b()(i) - tol) {
      cur = rest;
    } else {
      ++i;
    }
  }
  return cur;
}

Polygon2D exact_polygon(const Polytope& P) {
  if (P.dim() != 2) throw InputError("exact_polygon: body must be 2-dimensional");
  const Mat& A = P.A();
  const Vec& b = P.b();
  std::vector<Vec> pts;
  for (int i = 0; i < P.rows(); ++i) {
    for (int j = i + 1; j < P.rows(); ++j) {
      const double det = A(i, 0) * A(j, 1) - A(i, 1) * A(j, 0);
      if (std::abs(det) < 1e-14) continue;
      Vec v(2);
      v(0) = (b(i) * A(j, 1) - b(j) * A(i, 1)) / det;
      v(1) = (A(i, 0) * b(j) - A(j, 0) * b(i)) / det;
      if (!P.contains(v, 1e-9)) continue;
      bool dup = false;
      for (const Vec& q : pts) {
        if ((q - v).norm() < 1e-11) {
          dup = true;
          break;
        }
      }
      if (!dup) pts.push_back(v);
    }
  }
  if (pts.size() < 3) throw DegenerateError("exact_polygon: fewer than three vertices");

  Vec mid = Vec::Zero(2);
  for (const Vec& p : pts) mid += p;
  mid /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Vec& p, const Vec& q) {
    return std::atan2(p(1) - mid(1), p(0) - mid(0)) < std::atan2(q(1) - mid(1), q(0) - mid(0));
  });

  double area2 = 0.0;
  Vec c = Vec::Zero(2);
  for (size_t i = 0; i < pts.size(); ++i) {
    const Vec& p = pts[i];
    const Vec& q = pts[(i + 1) % pts.size()];
    const double cross = p(0) * q(1) - q(0) * p(1);
    area2 += cross;
    c += (p + q) * cross;
  }
  Polygon2D poly;
  poly.area = 0.5 * area2;
  if (poly.area < 1e-14) throw DegenerateError("exact_polygon: degenerate area");
  poly.centroid = c / (3.0 * area2);
  poly.vertices = std::move(pts);
  return poly;
}

VolumeEstimate mc_volume(const std::function<bool(const Vec&)>& inside, const Vec& lo, const Vec& hi, int n,
                         Rng& rng) {
  if (lo.size() != hi.size()) throw InputError("mc_volume: dimension mismatch");
  if (n < 1000) throw InputError("mc_volume: need n >= 1000");
  const double box_vol = (hi - lo).prod();
  Vec x(lo.size());
  long hits = 0;
  for (int s = 0; s < n; ++s) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(lo(i), hi(i));
    if (inside(x)) ++hits;
  }
  VolumeEstimate est;
  if (hits == 0) {
    est.zero_hits = true;
    est.std_error = 3.0 * box_vol / n;  // rule of three
    return est;
  }
  const double p = static_cast<double>(hits) / n;
  est.estimate = box_vol * p;
  est.std_error = box_vol * std::sqrt(p * (1.0 - p) / n);
  return est;
}

VolumeEstimate mc_volume(const Polytope& P, const Vec& lo, const Vec& hi, int n, Rng& rng) {
  if (lo.size() != P.dim() || hi.size() != P.dim()) throw InputError("mc_volume: dimension mismatch");
  return mc_volume([&P](const Vec& x) { return P.contains(x, 0.0); }, lo, hi, n, rng);
}

}  // namespace pvs
