#include "pvsearch/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pvs {

bool all_finite(const Vec& v) { return v.allFinite(); }
bool all_finite(const Mat& m) { return m.allFinite(); }

Mat OrthoBasis::matrix() const {
  Mat m(dim_, size());
  for (int i = 0; i < size(); ++i) m.col(i) = vectors_[static_cast<size_t>(i)];
  return m;
}

Vec OrthoBasis::coords(const Vec& x) const {
  if (x.size() != dim_) throw InputError("OrthoBasis::coords: dimension mismatch");
  Vec c(size());
  for (int i = 0; i < size(); ++i) c(i) = vectors_[static_cast<size_t>(i)].dot(x);
  return c;
}

Vec OrthoBasis::lift(const Vec& coords) const {
  if (coords.size() != size()) throw InputError("OrthoBasis::lift: coordinate count mismatch");
  Vec x = Vec::Zero(dim_);
  for (int i = 0; i < size(); ++i) x += coords(i) * vectors_[static_cast<size_t>(i)];
  return x;
}

bool OrthoBasis::is_orthonormal(double tol) const {
  if (size() > dim_) return false;
  for (int i = 0; i < size(); ++i) {
    const Vec& vi = vectors_[static_cast<size_t>(i)];
    if (vi.size() != dim_) return false;
    if (std::abs(vi.norm() - 1.0) > tol) return false;
    for (int j = i + 1; j < size(); ++j) {
      if (std::abs(vi.dot(vectors_[static_cast<size_t>(j)])) > tol) return false;
    }
  }
  return true;
}

bool OrthoBasis::push_back_orthogonalized(const Vec& v, double drop_tol) {
  if (v.size() != dim_) throw InputError("OrthoBasis: dimension mismatch");
  if (!v.allFinite()) throw InputError("OrthoBasis: non-finite entry");
  if (size() >= dim_) return false;
  Vec r = v;
  // Two passes of modified Gram-Schmidt ("twice is enough").
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vec& q : vectors_) r -= q.dot(r) * q;
  }
  const double n = r.norm();
  if (n < drop_tol) return false;
  vectors_.push_back(r / n);
  return true;
}

OrthoBasis OrthoBasis::concat(const OrthoBasis& other) const {
  if (other.dim_ != dim_) throw InputError("OrthoBasis::concat: dimension mismatch");
  OrthoBasis out = *this;
  for (const Vec& v : other.vectors_) out.vectors_.push_back(v);
  return out;
}

OrthoBasis gram_schmidt(std::span<const Vec> vectors, int dim) {
  OrthoBasis basis(dim);
  for (const Vec& v : vectors) basis.push_back_orthogonalized(v, 1e-10);
  return basis;
}

OrthoBasis complement_basis(const OrthoBasis& S, int dim) {
  if (S.dim() != dim) throw InputError("complement_basis: dimension mismatch");
  OrthoBasis full = S;
  OrthoBasis out(dim);
  // Greedy pivoting: add the coordinate axis with the largest residual.
  std::vector<bool> used(static_cast<size_t>(dim), false);
  while (full.size() < dim) {
    int best = -1;
    double best_norm = -1.0;
    Vec best_res;
    for (int i = 0; i < dim; ++i) {
      if (used[static_cast<size_t>(i)]) continue;
      Vec r = Vec::Unit(dim, i);
      for (int pass = 0; pass < 2; ++pass) {
        for (const Vec& q : full.vectors()) r -= q.dot(r) * q;
      }
      const double n = r.norm();
      if (n > best_norm) {
        best_norm = n;
        best = i;
        best_res = r;
      }
    }
    if (best < 0 || best_norm < 1e-10) break;
    used[static_cast<size_t>(best)] = true;
    const Vec v = best_res / best_norm;
    full.push_back_orthogonalized(v, 0.0);
    out.push_back_orthogonalized(v, 0.0);
  }
  return out;
}

Vec project_point(const Vec& x, const OrthoBasis& L) {
  if (x.size() != L.dim()) throw InputError("project_point: dimension mismatch");
  Vec p = Vec::Zero(x.size());
  for (const Vec& l : L.vectors()) p += l.dot(x) * l;
  return p;
}

EigenDecomposition symmetric_eigen(const Mat& m, double symmetry_tol) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw InputError("symmetric_eigen: matrix not square");
  if (!m.allFinite()) throw InputError("symmetric_eigen: non-finite entry");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale) {
    throw InputError("symmetric_eigen: matrix not symmetric");
  }

  Mat a = 0.5 * (m + m.transpose());
  Mat v = Mat::Identity(n, n);
  const double fro = a.norm();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * std::max(fro, 1e-300)) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  EigenDecomposition out{Vec(n), Mat(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<size_t>(k)];
    out.values(k) = a(src, src);
    Vec col = v.col(src);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) > 1e-12) {
        if (col(i) < 0) col = -col;
        break;
      }
    }
    out.vectors.col(k) = col;
  }
  return out;
}

AffineMap::AffineMap(Mat matrix, Vec offset) : matrix_(std::move(matrix)), offset_(std::move(offset)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() != offset_.size()) {
    throw InputError("AffineMap: shape mismatch");
  }
  Eigen::FullPivLU<Mat> lu(matrix_);
  if (!lu.isInvertible()) throw InputError("AffineMap: singular matrix");
  inverse_ = lu.inverse();
  if (condition_estimate() > 1e12) throw InputError("AffineMap: ill-conditioned matrix");
}

AffineMap AffineMap::identity(int dim) { return AffineMap(Mat::Identity(dim, dim), Vec::Zero(dim)); }

double AffineMap::condition_estimate() const {
  if (matrix_.size() == 0) return 1.0;
  const EigenDecomposition e = symmetric_eigen(matrix_.transpose() * matrix_, 1e-8);
  const double lo = std::max(e.values(0), 0.0);
  const double hi = e.values(e.values.size() - 1);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(hi / lo);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(splitmix64(seed) ^ splitmix64(~stream * 0xd1342543de82ef95ULL)) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() { return normal_(engine_); }

Vec Rng::gaussian(int dim) {
  Vec g(dim);
  for (int i = 0; i < dim; ++i) g(i) = normal();
  return g;
}

Vec Rng::unit_vector(int dim) {
  for (;;) {
    Vec g = gaussian(dim);
    const double n = g.norm();
    if (n > 1e-12) return g / n;
  }
}

Rng Rng::split(std::uint64_t index) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream_ + 0x632be59bd9b4e019ULL)), index);
}

Vec sample_mean(std::span<const Vec> points) {
  if (points.empty()) throw InputError("sample_mean: no points");
  Vec m = Vec::Zero(points.front().size());
  for (const Vec& p : points) m += p;
  return m / static_cast<double>(points.size());
}

Mat sample_covariance(std::span<const Vec> points, const Vec& mean) {
  if (points.size() < 2) throw InputError("sample_covariance: need at least two points");
  const Eigen::Index d = mean.size();
  Mat c = Mat::Zero(d, d);
  for (const Vec& p : points) {
    const Vec r = p - mean;
    c.noalias() += r * r.transpose();
  }
  return c / static_cast<double>(points.size() - 1);
}

}  // namespace pvs
