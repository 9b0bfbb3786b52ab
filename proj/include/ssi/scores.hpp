#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "ssi/rng.hpp"
#include "ssi/types.hpp"

namespace ssi {

/// Weighted atoms mu_k; the noisy density is a Gaussian mixture with isotropic variance sigma^2.
struct PointCloudScore {
  std::vector<Vector> points;
  std::vector<double> weights;

  PointCloudScore(std::vector<Vector> pts, std::vector<double> w);

  /// K uniformly weighted atoms on a circle of radius R at angles pi - 2 pi k / K, k = 0..K-1.
  /// For K = 8 this is the ordering {pi, 3pi/4, ..., -3pi/4}.
  static PointCloudScore circle(double radius, int count);
  static PointCloudScore single(Vector point);

  Eigen::Index dim() const { return points.front().size(); }
  /// Softmax responsibilities omega_k(x) at noise level sigma (log-sum-exp stabilized).
  std::vector<double> responsibilities(const Vector& x, double sigma) const;
};

/// Gaussian supported on the affine subspace b + span(A), latent covariance diag(stddevs^2).
struct SubspaceGaussianScore {
  Matrix basis;   // d x n, orthonormal columns
  Vector offset;  // b
  Vector stddevs; // n positive values
  std::optional<GridShape> grid_shape;

  SubspaceGaussianScore(Matrix a, Vector b, Vector sd, std::optional<GridShape> shape = std::nullopt);

  /// The 2D standard Gaussian on the x1-axis.
  static SubspaceGaussianScore axis();
  /// Random orthonormal basis (QR of a Gaussian matrix) drawn from `seed`.
  static SubspaceGaussianScore random(int dim, int latent_dim, Vector stddevs, Seed seed);
  /// Toy-image oracle: the n lowest-frequency separable cosine modes over (channel, row, column),
  /// orthonormalized and rotated within their span by a seeded random orthogonal matrix.
  static SubspaceGaussianScore smooth_image(GridShape shape, int latent_dim, Vector stddevs, Seed seed);

  Eigen::Index dim() const { return basis.rows(); }
  Eigen::Index latent_dim() const { return basis.cols(); }
};

/// Exact score, posterior mean and denoiser of an analytic data distribution.
class ScoreOracle {
 public:
  using Variant = std::variant<PointCloudScore, SubspaceGaussianScore>;

  ScoreOracle(PointCloudScore p) : v_(std::move(p)) {}
  ScoreOracle(SubspaceGaussianScore s) : v_(std::move(s)) {}

  const Variant& variant() const noexcept { return v_; }
  const PointCloudScore* point_cloud() const noexcept { return std::get_if<PointCloudScore>(&v_); }
  const SubspaceGaussianScore* subspace() const noexcept { return std::get_if<SubspaceGaussianScore>(&v_); }

  Eigen::Index dim() const;
  /// Dimension n of the data manifold (0 for atoms).
  Eigen::Index manifold_dim() const;
  std::optional<GridShape> grid_shape() const;
  /// Length below which the manifold looks flat: min atom separation, infinity for subspaces.
  double feature_scale() const;
  /// Spread of the data: max atom separation, or twice the RMS latent radius for subspaces.
  double data_diameter() const;

  /// grad_x log p(x; sigma). Throws InvalidArgument for sigma <= 0.
  Vector score(const Vector& x, double sigma) const;
  /// E[x0 | x] = x + sigma^2 score(x, sigma).
  Vector posterior_mean(const Vector& x, double sigma) const;
  /// D(x, sigma), identical to posterior_mean.
  Vector denoise(const Vector& x, double sigma) const { return posterior_mean(x, sigma); }
  /// log p(x; sigma) from the closed-form density.
  double log_density(const Vector& x, double sigma) const;
  /// Closest manifold point; ties between atoms go to the lowest index.
  Vector nearest_manifold_point(const Vector& x) const;
  double manifold_distance(const Vector& x) const { return (x - nearest_manifold_point(x)).norm(); }
  /// i.i.d. draws; draw i uses stream derive_seed(seed, i).
  std::vector<Vector> sample_data(Seed seed, std::size_t count) const;
  Vector sample_one(Seed seed, std::size_t index) const;

 private:
  void check(const Vector& x) const;
  Variant v_;
};

/// Score source used by the integrators: the exact oracle plus an optional
/// noise-prediction error of size eps / sigma (a score error eps * xi / sigma^2),
/// where xi(x, sigma) is a standard-normal field keyed on the exact bits of (x, sigma).
class ScoreModel {
 public:
  ScoreModel(const ScoreOracle& oracle, double perturbation = 0.0, Seed perturbation_seed = 0)
      : oracle_(&oracle), eps_(perturbation), seed_(perturbation_seed) {}

  const ScoreOracle& exact() const noexcept { return *oracle_; }
  double perturbation() const noexcept { return eps_; }
  Seed perturbation_seed() const noexcept { return seed_; }
  Eigen::Index dim() const { return oracle_->dim(); }

  Vector score(const Vector& x, double sigma) const;
  Vector denoise(const Vector& x, double sigma) const;
  /// The error field xi(x, sigma) itself.
  Vector error_field(const Vector& x, double sigma) const;

 private:
  const ScoreOracle* oracle_;
  double eps_;
  Seed seed_;
};

}  // namespace ssi
