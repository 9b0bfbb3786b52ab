#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ssi/error.hpp"
#include "ssi/scores.hpp"

using namespace ssi;

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

ScoreOracle eight() { return ScoreOracle(PointCloudScore::circle(2.0, 8)); }
ScoreOracle axis() { return ScoreOracle(SubspaceGaussianScore::axis()); }

}  // namespace

TEST_CASE("eight-point layout") {
  const auto p = PointCloudScore::circle(2.0, 8);
  REQUIRE(p.points.size() == 8);
  CHECK(p.points[0][0] == doctest::Approx(-2.0));
  CHECK(std::abs(p.points[0][1]) < 1e-15);
  CHECK(p.points[4][0] == doctest::Approx(2.0));
  for (double w : p.weights) CHECK(w == 0.125);
}

TEST_CASE("score examples") {
  CHECK(eight().score(v2(0, 0), 1.0).norm() < 1e-14);
  const Vector s = axis().score(v2(1.0, 0.5), 1.0);
  CHECK(s[0] == doctest::Approx(-0.5));
  CHECK(s[1] == doctest::Approx(-0.5));

  // brute-force softmax at sigma = 0.01
  const auto p = PointCloudScore::circle(2.0, 8);
  const Vector x = v2(2.1, 0.0);
  const double sg = 0.01;
  long double num0 = 0, num1 = 0, den = 0;
  for (const auto& mu : p.points) {
    const long double w = std::exp(-static_cast<long double>((x - mu).squaredNorm()) / (2.0L * sg * sg) + 40.0L);
    num0 += w * (mu[0] - x[0]);
    num1 += w * (mu[1] - x[1]);
    den += w;
  }
  const Vector got = eight().score(x, sg);
  CHECK(std::abs(got[0] - static_cast<double>(num0 / den) / (sg * sg)) < 1e-6 * 1000.0);
  CHECK(std::abs(got[0] + 1000.0) / 1000.0 < 1e-6);
  CHECK(std::abs(got[1]) < 1e-6 * 1000.0);
}

TEST_CASE("score errors") {
  CHECK_THROWS_AS(eight().score(v2(0, 0), 0.0), InvalidArgument);
  CHECK_THROWS_AS(eight().score(v2(0, 0), -1.0), InvalidArgument);
  CHECK_THROWS_AS(eight().score(Vector::Zero(3), 1.0), InvalidArgument);
  CHECK_THROWS_AS(axis().score(v2(std::nan(""), 0), 1.0), InvalidArgument);
}

TEST_CASE("posterior mean and denoiser") {
  CHECK(eight().posterior_mean(v2(0, 0), 1.0).norm() < 1e-14);
  const Vector pm = axis().posterior_mean(v2(1.0, 0.5), 1.0);
  CHECK(pm[0] == doctest::Approx(0.5));
  CHECK(std::abs(pm[1]) < 1e-15);

  const ScoreOracle single(PointCloudScore::single(v2(3, 4)));
  for (double sg : {0.01, 1.0, 50.0}) {
    const Vector d = single.denoise(v2(-7, 2), sg);
    CHECK(d[0] == doctest::Approx(3.0));
    CHECK(d[1] == doctest::Approx(4.0));
  }
  const Vector big = axis().denoise(v2(5, 5), 100.0);
  CHECK(big.norm() < 0.01 * v2(5, 5).norm());

  const auto o = eight();
  const Vector x = v2(0.3, -1.2);
  const Vector back = (o.denoise(x, 0.7) - x) / (0.7 * 0.7);
  CHECK((back - o.score(x, 0.7)).norm() < 1e-12 * (1.0 + o.score(x, 0.7).norm()));
}

TEST_CASE("nearest manifold point") {
  const Vector a = eight().nearest_manifold_point(v2(1.9, 0.05));
  CHECK(a[0] == doctest::Approx(2.0));
  CHECK(std::abs(a[1]) < 1e-12);
  const Vector b = axis().nearest_manifold_point(v2(1.0, 0.5));
  CHECK(b[0] == 1.0);
  CHECK(b[1] == 0.0);
  const Vector c = eight().nearest_manifold_point(v2(0, 0));
  CHECK(c[0] == doctest::Approx(-2.0));
  CHECK(std::abs(c[1]) < 1e-15);
}

TEST_CASE("sample_data") {
  const ScoreOracle single(PointCloudScore::single(v2(3, 4)));
  for (const auto& s : single.sample_data(1, 3)) CHECK(s == v2(3, 4));
  CHECK_THROWS_AS(single.sample_data(1, 0), InvalidArgument);

  const auto o = eight();
  const auto& pts = o.point_cloud()->points;
  const std::size_t n = 80000;
  std::vector<int> counts(8, 0);
  for (const auto& s : o.sample_data(11, n))
    for (std::size_t k = 0; k < 8; ++k)
      if ((s - pts[k]).norm() < 1e-12) ++counts[k];
  const double sd = std::sqrt(n * 0.125 * 0.875);
  for (int c : counts) CHECK(std::abs(c - n * 0.125) < 3.0 * sd);

  const ScoreOracle sub(SubspaceGaussianScore::random(6, 2, (Vector(2) << 1.0, 2.0).finished(), 5));
  const std::size_t m = 50000;
  Vector mean = Vector::Zero(6);
  for (const auto& s : sub.sample_data(3, m)) mean += s;
  mean /= static_cast<double>(m);
  const Vector lat = sub.subspace()->basis.transpose() * mean;
  CHECK(std::abs(lat[0]) < 3.0 * 1.0 / std::sqrt(m));
  CHECK(std::abs(lat[1]) < 3.0 * 2.0 / std::sqrt(m));
  CHECK(sub.sample_one(3, 17) == sub.sample_data(3, 20)[17]);
}

TEST_CASE("construction invariants") {
  CHECK_THROWS_AS(PointCloudScore({}, {}), InvalidArgument);
  CHECK_THROWS_AS(PointCloudScore({v2(0, 0)}, {0.5}), InvalidArgument);
  CHECK_THROWS_AS(PointCloudScore({v2(0, 0), v2(1, 1)}, {1.5, -0.5}), InvalidArgument);
  Matrix a(2, 1);
  a << 1.0, 1.0;
  CHECK_THROWS_AS(SubspaceGaussianScore(a, Vector::Zero(2), Vector::Ones(1)), InvalidArgument);
  CHECK_THROWS_AS(SubspaceGaussianScore(Matrix::Identity(2, 2), Vector::Zero(2), Vector::Ones(2)), InvalidArgument);
  CHECK_THROWS_AS(SubspaceGaussianScore::random(4, 2, (Vector(2) << 1.0, 0.0).finished(), 1), InvalidArgument);

  const auto img = SubspaceGaussianScore::smooth_image({3, 8, 8}, 8, Vector::Ones(8), 42);
  CHECK(img.dim() == 192);
  CHECK((img.basis.transpose() * img.basis - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(img.grid_shape.has_value());
}

TEST_CASE("Tweedie identity on random inputs") {
  const ScoreOracle oracles[] = {eight(), axis(),
                                 ScoreOracle(SubspaceGaussianScore::random(8, 2, Vector::Ones(2), 3))};
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> logs(std::log(0.01), std::log(10.0));
  for (const auto& o : oracles) {
    for (int i = 0; i < 3400; ++i) {
      const Vector x = 3.0 * standard_normal(eng, o.dim());
      const double sg = std::exp(logs(eng));
      const Vector lhs = o.posterior_mean(x, sg);
      const Vector rhs = x + sg * sg * o.score(x, sg);
      CHECK((lhs - rhs).norm() <= 1e-10 * (1.0 + x.norm()));
    }
  }
}

TEST_CASE("score matches the gradient of log density") {
  const ScoreOracle oracles[] = {eight(), axis(),
                                 ScoreOracle(SubspaceGaussianScore::random(5, 2, (Vector(2) << 0.5, 1.5).finished(), 9))};
  std::mt19937_64 eng(2);
  for (const auto& o : oracles) {
    for (double sg : {0.05, 0.2, 1.0, 4.0, 10.0}) {
      for (int rep = 0; rep < 10; ++rep) {
        const Vector x = (1.0 + sg) * standard_normal(eng, o.dim());
        const Vector s = o.score(x, sg);
        Vector fd(x.size());
        const double h = 1e-5 * sg;
        for (Eigen::Index k = 0; k < x.size(); ++k) {
          Vector xp = x, xm = x;
          xp[k] += h;
          xm[k] -= h;
          fd[k] = (o.log_density(xp, sg) - o.log_density(xm, sg)) / (2 * h);
        }
        CHECK((fd - s).norm() <= 1e-5 * std::max(1.0, s.norm()));
      }
    }
  }
}

TEST_CASE("singularity limit of the score") {
  const ScoreOracle oracles[] = {eight(), axis(),
                                 ScoreOracle(SubspaceGaussianScore::random(8, 2, Vector::Ones(2), 3))};
  std::mt19937_64 eng(3);
  for (const auto& o : oracles) {
    for (int rep = 0; rep < 20; ++rep) {
      const Vector x = 1.5 * standard_normal(eng, o.dim());
      const Vector y = o.nearest_manifold_point(x);
      const double dist = (x - y).norm();
      const double sg = 0.001 * dist;
      const Vector lim = sg * sg * o.score(x, sg);
      CHECK((lim - (y - x)).norm() / dist < 0.01);
    }
  }
}

TEST_CASE("responsibilities are normalized") {
  const auto p = PointCloudScore::circle(2.0, 8);
  std::mt19937_64 eng(4);
  for (int i = 0; i < 500; ++i) {
    const Vector x = 3.0 * standard_normal(eng, 2);
    for (double sg : {1e-4, 0.01, 0.5, 30.0}) {
      double sum = 0.0;
      for (double w : p.responsibilities(x, sg)) sum += w;
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("perturbed score model") {
  const auto o = axis();
  const ScoreModel exact(o);
  const ScoreModel noisy(o, 0.1, 7);
  const Vector x = v2(0.4, -0.3);
  CHECK(exact.score(x, 0.5) == o.score(x, 0.5));
  const Vector diff = noisy.score(x, 0.5) - o.score(x, 0.5);
  CHECK((diff - (0.1 / 0.25) * noisy.error_field(x, 0.5)).norm() < 1e-12);
  CHECK(noisy.score(x, 0.5) == noisy.score(x, 0.5));
  CHECK(noisy.error_field(x, 0.5) != noisy.error_field(x, 0.6));
  CHECK(ScoreModel(o, 0.1, 8).error_field(x, 0.5) != noisy.error_field(x, 0.5));
  const Vector dn = noisy.denoise(x, 0.5) - o.denoise(x, 0.5);
  CHECK((dn - 0.1 * noisy.error_field(x, 0.5)).norm() < 1e-12);
}

TEST_CASE("feature scale and diameter") {
  CHECK(eight().feature_scale() == doctest::Approx(4.0 * std::sin(std::numbers::pi / 8)));
  CHECK(eight().data_diameter() == doctest::Approx(4.0));
  CHECK(std::isinf(axis().feature_scale()));
  CHECK(eight().manifold_dim() == 0);
  CHECK(axis().manifold_dim() == 1);
}
