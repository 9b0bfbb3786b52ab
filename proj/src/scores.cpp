#include "ssi/scores.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <tuple>

#include "ssi/error.hpp"

namespace ssi {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidArgument("score is undefined for sigma <= 0");
}

// Separable cosine mode over (channel, row, column); DCT-II basis along each axis.
Vector cosine_mode(const GridShape& g, int kc, int ku, int kv) {
  Vector v(static_cast<Eigen::Index>(g.size()));
  for (int c = 0; c < g.channels; ++c)
    for (int h = 0; h < g.height; ++h)
      for (int w = 0; w < g.width; ++w) {
        const double pc = std::cos(std::numbers::pi * (c + 0.5) * kc / g.channels);
        const double ph = std::cos(std::numbers::pi * (h + 0.5) * ku / g.height);
        const double pw = std::cos(std::numbers::pi * (w + 0.5) * kv / g.width);
        v[g.index(c, h, w)] = pc * ph * pw;
      }
  return v;
}

Matrix orthonormalize(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  // Fix column signs so that the factorization is unique.
  const Matrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

Matrix random_orthogonal(Eigen::Index n, Seed seed) {
  Engine eng(seed);
  std::normal_distribution<double> dist;
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = dist(eng);
  return orthonormalize(g);
}

}  // namespace

// ---------------------------------------------------------------------------

PointCloudScore::PointCloudScore(std::vector<Vector> pts, std::vector<double> w)
    : points(std::move(pts)), weights(std::move(w)) {
  if (points.empty()) throw InvalidArgument("point cloud needs at least one point");
  if (weights.size() != points.size()) throw InvalidArgument("point cloud weights must match points");
  const auto d = points.front().size();
  if (d < 1) throw InvalidArgument("point cloud points must be non-empty");
  for (const auto& p : points)
    if (p.size() != d || !p.allFinite()) throw InvalidArgument("point cloud points must be finite and equal-sized");
  double sum = 0.0;
  for (double wk : weights) {
    if (!(wk >= 0.0)) throw InvalidArgument("point cloud weights must be nonnegative");
    sum += wk;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("point cloud weights must sum to 1");
}

PointCloudScore PointCloudScore::circle(double radius, int count) {
  if (!(radius > 0.0) || count < 1) throw InvalidArgument("circle(R, K) needs R > 0 and K >= 1");
  std::vector<Vector> pts;
  for (int k = 0; k < count; ++k) {
    const double theta = std::numbers::pi - 2.0 * std::numbers::pi * k / count;
    pts.push_back((Vector(2) << radius * std::cos(theta), radius * std::sin(theta)).finished());
  }
  return {std::move(pts), std::vector<double>(static_cast<std::size_t>(count), 1.0 / count)};
}

PointCloudScore PointCloudScore::single(Vector point) { return {{std::move(point)}, {1.0}}; }

std::vector<double> PointCloudScore::responsibilities(const Vector& x, double sigma) const {
  check_sigma(sigma);
  std::vector<double> logits(points.size());
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < points.size(); ++k) {
    logits[k] = weights[k] > 0.0 ? std::log(weights[k]) - (x - points[k]).squaredNorm() * inv
                                 : -std::numeric_limits<double>::infinity();
    peak = std::max(peak, logits[k]);
  }
  double total = 0.0;
  for (auto& l : logits) {
    l = std::exp(l - peak);
    total += l;
  }
  for (auto& l : logits) l /= total;
  return logits;
}

// ---------------------------------------------------------------------------

SubspaceGaussianScore::SubspaceGaussianScore(Matrix a, Vector b, Vector sd, std::optional<GridShape> shape)
    : basis(std::move(a)), offset(std::move(b)), stddevs(std::move(sd)), grid_shape(shape) {
  if (basis.cols() < 1 || basis.rows() <= basis.cols())
    throw InvalidArgument("subspace must satisfy 1 <= n < d");
  if (offset.size() != basis.rows()) throw InvalidArgument("subspace offset must have dimension d");
  if (stddevs.size() != basis.cols()) throw InvalidArgument("subspace needs one stddev per latent dimension");
  if (!(stddevs.array() > 0.0).all() || !stddevs.allFinite())
    throw InvalidArgument("latent stddevs must be positive");
  const Matrix gram = basis.transpose() * basis;
  if ((gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidArgument("subspace basis must have orthonormal columns");
  if (grid_shape && grid_shape->size() != static_cast<std::size_t>(basis.rows()))
    throw InvalidArgument("grid shape does not match subspace dimension");
}

SubspaceGaussianScore SubspaceGaussianScore::axis() {
  Matrix a = Matrix::Zero(2, 1);
  a(0, 0) = 1.0;
  return {a, Vector::Zero(2), Vector::Ones(1)};
}

SubspaceGaussianScore SubspaceGaussianScore::random(int dim, int latent_dim, Vector sd, Seed seed) {
  if (latent_dim < 1 || dim <= latent_dim) throw InvalidArgument("subspace must satisfy 1 <= n < d");
  Engine eng(seed);
  std::normal_distribution<double> dist;
  Matrix g(dim, latent_dim);
  for (int j = 0; j < latent_dim; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = dist(eng);
  return {orthonormalize(g), Vector::Zero(dim), std::move(sd)};
}

SubspaceGaussianScore SubspaceGaussianScore::smooth_image(GridShape shape, int latent_dim, Vector sd, Seed seed) {
  const auto d = static_cast<int>(shape.size());
  if (latent_dim < 1 || d <= latent_dim) throw InvalidArgument("subspace must satisfy 1 <= n < d");
  std::vector<std::tuple<int, int, int>> modes;
  for (int kc = 0; kc < shape.channels; ++kc)
    for (int ku = 0; ku < shape.height; ++ku)
      for (int kv = 0; kv < shape.width; ++kv) modes.emplace_back(kc, ku, kv);
  std::stable_sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) {
    const auto [ac, au, av] = a;
    const auto [bc, bu, bv] = b;
    return ac + au + av < bc + bu + bv;
  });
  Matrix m(d, latent_dim);
  for (int j = 0; j < latent_dim; ++j) {
    const auto [kc, ku, kv] = modes[static_cast<std::size_t>(j)];
    m.col(j) = cosine_mode(shape, kc, ku, kv);
  }
  Matrix a = orthonormalize(m) * random_orthogonal(latent_dim, seed);
  return {a, Vector::Zero(d), std::move(sd), shape};
}

// ---------------------------------------------------------------------------

Eigen::Index ScoreOracle::dim() const {
  return std::visit([](const auto& o) { return o.dim(); }, v_);
}

Eigen::Index ScoreOracle::manifold_dim() const {
  if (const auto* s = subspace()) return s->latent_dim();
  return 0;
}

std::optional<GridShape> ScoreOracle::grid_shape() const {
  if (const auto* s = subspace()) return s->grid_shape;
  return std::nullopt;
}

double ScoreOracle::feature_scale() const {
  if (const auto* p = point_cloud()) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p->points.size(); ++i)
      for (std::size_t j = i + 1; j < p->points.size(); ++j)
        best = std::min(best, (p->points[i] - p->points[j]).norm());
    return best;
  }
  return std::numeric_limits<double>::infinity();
}

double ScoreOracle::data_diameter() const {
  if (const auto* p = point_cloud()) {
    double best = 0.0;
    for (std::size_t i = 0; i < p->points.size(); ++i)
      for (std::size_t j = i + 1; j < p->points.size(); ++j)
        best = std::max(best, (p->points[i] - p->points[j]).norm());
    return best;
  }
  return 2.0 * subspace()->stddevs.norm();
}

void ScoreOracle::check(const Vector& x) const {
  if (x.size() != dim()) throw InvalidArgument("state dimension does not match the oracle");
  if (!x.allFinite()) throw InvalidArgument("state has non-finite components");
}

Vector ScoreOracle::score(const Vector& x, double sigma) const {
  check(x);
  check_sigma(sigma);
  const double s2 = sigma * sigma;
  if (const auto* p = point_cloud()) {
    const auto w = p->responsibilities(x, sigma);
    Vector acc = Vector::Zero(x.size());
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * (p->points[k] - x);
    return acc / s2;
  }
  const auto& s = *subspace();
  const Vector r = x - s.offset;
  const Vector coeff = s.basis.transpose() * r;
  const Vector tangent = s.basis * coeff;
  const Vector lam = s.stddevs.array().square();
  const Vector scaled = (coeff.array() / (lam.array() + s2)).matrix();
  return -(s.basis * scaled) - (r - tangent) / s2;
}

Vector ScoreOracle::posterior_mean(const Vector& x, double sigma) const {
  check(x);
  check_sigma(sigma);
  if (const auto* p = point_cloud()) {
    const auto w = p->responsibilities(x, sigma);
    Vector acc = Vector::Zero(x.size());
    for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * p->points[k];
    return acc;
  }
  const auto& s = *subspace();
  const Vector coeff = s.basis.transpose() * (x - s.offset);
  const Vector lam = s.stddevs.array().square();
  const Vector shrink = (lam.array() / (lam.array() + sigma * sigma) * coeff.array()).matrix();
  return s.offset + s.basis * shrink;
}

double ScoreOracle::log_density(const Vector& x, double sigma) const {
  check(x);
  check_sigma(sigma);
  const double d = static_cast<double>(x.size());
  const double s2 = sigma * sigma;
  if (const auto* p = point_cloud()) {
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> logits(p->points.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
      logits[k] = p->weights[k] > 0.0 ? std::log(p->weights[k]) - (x - p->points[k]).squaredNorm() / (2.0 * s2)
                                      : -std::numeric_limits<double>::infinity();
      peak = std::max(peak, logits[k]);
    }
    double total = 0.0;
    for (double l : logits) total += std::exp(l - peak);
    return peak + std::log(total) - 0.5 * d * std::log(2.0 * std::numbers::pi * s2);
  }
  const auto& s = *subspace();
  const Vector r = x - s.offset;
  const Vector coeff = s.basis.transpose() * r;
  const double normal2 = (r - s.basis * coeff).squaredNorm();
  const Vector var = (s.stddevs.array().square() + s2).matrix();
  const double n = static_cast<double>(coeff.size());
  double quad = normal2 / s2;
  double logdet = (d - n) * std::log(s2);
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    quad += coeff[i] * coeff[i] / var[i];
    logdet += std::log(var[i]);
  }
  return -0.5 * (quad + logdet + d * std::log(2.0 * std::numbers::pi));
}

Vector ScoreOracle::nearest_manifold_point(const Vector& x) const {
  check(x);
  if (const auto* p = point_cloud()) {
    std::size_t best = 0;
    double best_d = (x - p->points[0]).squaredNorm();
    for (std::size_t k = 1; k < p->points.size(); ++k) {
      const double dk = (x - p->points[k]).squaredNorm();
      // Distances equal up to rounding count as ties.
      if (dk < best_d * (1.0 - 1e-12)) {
        best = k;
        best_d = dk;
      }
    }
    return p->points[best];
  }
  const auto& s = *subspace();
  return s.offset + s.basis * (s.basis.transpose() * (x - s.offset));
}

Vector ScoreOracle::sample_one(Seed seed, std::size_t index) const {
  Engine eng(derive_seed(seed, index));
  if (const auto* p = point_cloud()) {
    std::discrete_distribution<std::size_t> pick(p->weights.begin(), p->weights.end());
    return p->points[pick(eng)];
  }
  const auto& s = *subspace();
  const Vector z = standard_normal(eng, s.latent_dim());
  return s.offset + s.basis * (s.stddevs.array() * z.array()).matrix();
}

std::vector<Vector> ScoreOracle::sample_data(Seed seed, std::size_t count) const {
  if (count < 1) throw InvalidArgument("sample_data needs count >= 1");
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_one(seed, i));
  return out;
}

// ---------------------------------------------------------------------------

Vector ScoreModel::error_field(const Vector& x, double sigma) const {
  std::uint64_t h = mix64(seed_ ^ 0x243f6a8885a308d3ULL);
  for (Eigen::Index i = 0; i < x.size(); ++i) h = mix64(h ^ std::bit_cast<std::uint64_t>(x[i]));
  h = mix64(h ^ std::bit_cast<std::uint64_t>(sigma));
  return standard_normal(h, x.size());
}

Vector ScoreModel::score(const Vector& x, double sigma) const {
  Vector s = oracle_->score(x, sigma);
  if (eps_ != 0.0) s += (eps_ / (sigma * sigma)) * error_field(x, sigma);
  return s;
}

Vector ScoreModel::denoise(const Vector& x, double sigma) const { return x + sigma * sigma * score(x, sigma); }

}  // namespace ssi
