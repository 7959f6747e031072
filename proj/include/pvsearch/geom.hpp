#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pvs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Malformed caller input (dimension mismatch, non-finite entries, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A convex body lost its interior (empty set or numerical collapse).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

/// Orthonormal set of vectors in R^dim. May be empty.
class OrthoBasis {
 public:
  explicit OrthoBasis(int dim = 0) : dim_(dim) {}

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(vectors_.size()); }
  bool empty() const { return vectors_.empty(); }
  const Vec& operator[](int i) const { return vectors_[static_cast<size_t>(i)]; }
  const std::vector<Vec>& vectors() const { return vectors_; }

  /// dim x size matrix with the basis vectors as columns.
  Mat matrix() const;

  /// Coordinates of x in this basis (size-vector).
  Vec coords(const Vec& x) const;
  /// Point of the spanned subspace with the given coordinates.
  Vec lift(const Vec& coords) const;

  bool is_orthonormal(double tol = 1e-8) const;

  /// Appends v after orthogonalizing against the current vectors.
  /// Returns false (and leaves the basis unchanged) when the residual is
  /// below drop_tol.
  bool push_back_orthogonalized(const Vec& v, double drop_tol = 1e-10);

  OrthoBasis concat(const OrthoBasis& other) const;

 private:
  int dim_;
  std::vector<Vec> vectors_;
};

/// Orthonormal basis of span(vectors); residuals below 1e-10 are dropped.
OrthoBasis gram_schmidt(std::span<const Vec> vectors, int dim);

/// Orthonormal basis of the orthogonal complement of span(S) in R^dim.
OrthoBasis complement_basis(const OrthoBasis& S, int dim);

/// Orthogonal projection of x onto span(L), expressed in ambient coordinates.
Vec project_point(const Vec& x, const OrthoBasis& L);

struct EigenDecomposition {
  Vec values;   // ascending
  Mat vectors;  // column i pairs with values(i)
};

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Eigenvectors are
/// sign-normalized so their first non-negligible entry is positive.
EigenDecomposition symmetric_eigen(const Mat& m, double symmetry_tol = 1e-10);

/// x -> matrix * x + offset
class AffineMap {
 public:
  AffineMap() = default;
  AffineMap(Mat matrix, Vec offset);
  static AffineMap identity(int dim);

  int dim() const { return static_cast<int>(offset_.size()); }
  const Mat& matrix() const { return matrix_; }
  const Mat& inverse_matrix() const { return inverse_; }
  const Vec& offset() const { return offset_; }

  Vec apply(const Vec& x) const { return matrix_ * x + offset_; }
  Vec apply_inverse(const Vec& y) const { return inverse_ * (y - offset_); }
  /// Maps a direction of the transformed space back to the original space.
  Vec pull_back_direction(const Vec& dir) const { return inverse_ * dir; }

  double condition_estimate() const;

 private:
  Mat matrix_;
  Mat inverse_;
  Vec offset_;
};

/// Seeded pseudo-random stream. Streams derived with split() are independent
/// and reproducible from (seed, index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Vec gaussian(int dim);
  Vec unit_vector(int dim);

  Rng split(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

Mat sample_covariance(std::span<const Vec> points, const Vec& mean);
Vec sample_mean(std::span<const Vec> points);

}  // namespace pvs
