#include <doctest.h>

#include <random>

#include "ergopattern/spectral.hpp"
#include "support.hpp"

using namespace ergo;

TEST_SUITE("spectral") {

TEST_CASE("basis construction") {
  SpectralBasis basis({1.0, 1.0}, 10);
  CHECK(basis.size() == 100);
  CHECK(basis.weights()(0) == 1.0);
  CHECK(basis.normalizers()(0) == 1.0);
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    const Mode k = basis.mode(i);
    CHECK(basis.index(k) == i);
    CHECK(basis.normalizers()(i) == doctest::Approx(oracle::normalizer(k.k1, k.k2, 1.0, 1.0)).epsilon(1e-15));
    CHECK(basis.weights()(i) == doctest::Approx(oracle::weight(k.k1, k.k2)).epsilon(1e-15));
  }
  // Strictly decreasing in |k|.
  for (Eigen::Index i = 0; i < basis.size(); ++i)
    for (Eigen::Index j = 0; j < basis.size(); ++j) {
      const Mode a = basis.mode(i), b = basis.mode(j);
      if (a.k1 * a.k1 + a.k2 * a.k2 < b.k1 * b.k1 + b.k2 * b.k2) CHECK(basis.weights()(i) > basis.weights()(j));
    }
  CHECK_THROWS_AS(SpectralBasis({1.0, 1.0}, 0), ConfigError);
  CHECK_THROWS_AS(SpectralBasis({1.0, 1.0}, 33), ConfigError);
  CHECK_THROWS_AS(SpectralBasis({0.0, 1.0}, 4), ConfigError);
}

TEST_CASE("eval_basis examples") {
  SpectralBasis basis({1.0, 1.0}, 5);
  CHECK(eval_basis<double>(basis, {0, 0}, Point(0.3, 0.9)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(eval_basis<double>(basis, {1, 0}, Point(0.5, 0.77))) < 1e-15);
  CHECK(std::abs(eval_basis<double>(basis, {2, 3}, Point(0.25, 0.1)) - oracle::basis(2, 3, 0.25, 0.1)) < 1e-12);
  CHECK_THROWS_AS(eval_basis<double>(basis, {1, 1}, Point(1.01, 0.5)), DomainError);
  CHECK_THROWS_AS(eval_basis<double>(basis, {1, 1}, Point(0.5, -1e-9)), DomainError);
  CHECK_THROWS_AS(eval_all(basis, Point(-0.1, 0.5)), DomainError);

  SpectralBasis wide({2.0, 0.5}, 6);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const Point x(2.0 * u(rng), 0.5 * u(rng));
    const CoeffVector all = eval_all(wide, x);
    const Eigen::VectorXd expect = oracle::basis_vector(6, x.x(), x.y(), 2.0, 0.5);
    CHECK((all - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gradient examples and finite differences") {
  SpectralBasis basis({1.0, 1.0}, 10);
  CHECK(eval_basis_gradient<double>(basis, {0, 0}, Point(0.2, 0.4)).norm() == 0.0);
  const Eigen::Vector2d g = eval_basis_gradient<double>(basis, {1, 0}, Point(0.5, 0.5));
  CHECK(g.x() == doctest::Approx(-std::numbers::pi / std::sqrt(0.5)).epsilon(1e-14));
  CHECK(std::abs(g.y()) < 1e-15);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::uniform_int_distribution<int> kd(0, 9);
  const double h = 1e-6;
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const Mode k{kd(rng), kd(rng)};
    const Point x(u(rng), u(rng));
    const Eigen::Vector2d grad = eval_basis_gradient<double>(basis, k, x);
    const double fx = (oracle::basis(k.k1, k.k2, x.x() + h, x.y()) - oracle::basis(k.k1, k.k2, x.x() - h, x.y())) / (2 * h);
    const double fy = (oracle::basis(k.k1, k.k2, x.x(), x.y() + h) - oracle::basis(k.k1, k.k2, x.x(), x.y() - h)) / (2 * h);
    const Eigen::Vector2d fd(fx, fy);
    // Relative to the gradient scale of the mode, so near-zero components don't dominate.
    const double scale = std::max(1.0, grad.norm());
    CHECK((grad - fd).norm() / scale < 1e-5);
    ++checked;

    const Eigen::MatrixX2d all = eval_all_gradients_unchecked(basis, x);
    CHECK((all.row(basis.index(k)).transpose() - grad).norm() < 1e-12);
  }
  CHECK(checked == 100);
}

TEST_CASE("orthonormality on a 256 x 256 grid") {
  SpectralBasis basis({1.0, 1.0}, 10);
  const int n = 256;
  Eigen::MatrixXd values(basis.size(), n * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) values.col(r * n + c) = eval_all(basis, Point((c + 0.5) / n, (r + 0.5) / n));
  const Eigen::MatrixXd gram = values * values.transpose() / double(n * n);
  const double err = (gram - Eigen::MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff();
  CHECK(err <= 1e-3);

  // Non-square extents too.
  SpectralBasis wide({2.0, 0.5}, 6);
  Eigen::MatrixXd v2(wide.size(), n * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) v2.col(r * n + c) = eval_all(wide, Point(2.0 * (c + 0.5) / n, 0.5 * (r + 0.5) / n));
  const Eigen::MatrixXd g2 = v2 * v2.transpose() * (1.0 / (n * n));
  CHECK((g2 - Eigen::MatrixXd::Identity(wide.size(), wide.size())).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("density map") {
  Eigen::MatrixXd grid(2, 3);
  grid << 1, 2, 3, 4, 5, 6;
  const DensityMap d = DensityMap::normalized(grid, {3.0, 2.0});
  CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.cell_area() == doctest::Approx(1.0));
  CHECK(d.cell_center(0, 0).x() == doctest::Approx(0.5));
  CHECK(d.cell_center(0, 0).y() == doctest::Approx(1.5));
  CHECK(d.cell_center(1, 2).y() == doctest::Approx(0.5));
  CHECK_THROWS_AS(DensityMap::normalized(Eigen::MatrixXd::Zero(3, 3), {1.0, 1.0}), NormalizationError);
  Eigen::MatrixXd neg = Eigen::MatrixXd::Ones(2, 2);
  neg(0, 1) = -1.0;
  CHECK_THROWS_AS(DensityMap(neg, {1.0, 1.0}), Error);
}

TEST_CASE("transform_density examples") {
  SpectralBasis basis({1.0, 1.0}, 8);
  SUBCASE("uniform") {
    const DensityMap d = DensityMap::normalized(Eigen::MatrixXd::Ones(64, 64), {1.0, 1.0});
    const CoeffVector phi = transform_density(basis, d);
    CHECK(phi(0) == 1.0);
    CHECK(phi.tail(phi.size() - 1).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("single cell") {
    const int n = 256;
    Eigen::MatrixXd grid = Eigen::MatrixXd::Zero(n, n);
    grid(40, 170) = 1.0;
    const DensityMap d = DensityMap::normalized(grid, {1.0, 1.0});
    const CoeffVector phi = transform_density(basis, d);
    const Point x0 = d.cell_center(40, 170);
    // The midpoint rule samples the lone cell at its center.
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
      CHECK(std::abs(phi(i) - eval_basis<double>(basis, basis.mode(i), x0)) <= 1e-12);
    }
  }
  SUBCASE("left-right gradient") {
    const int n = 100;
    Eigen::MatrixXd grid(n, n);
    for (int c = 0; c < n; ++c) grid.col(c).setConstant(1.0 - 0.9 * (c + 0.5) / n);
    const DensityMap d = DensityMap::normalized(grid, {1.0, 1.0});
    const CoeffVector phi = transform_density(basis, d);
    // Analytic: int (a + b x) cos(pi x) dx = -2 b / pi^2, so a density that
    // falls to the right has a positive (1,0) coefficient. Here b = -0.9 / 0.55
    // after normalization, times 1 / h_(1,0) = sqrt(2).
    const double analytic = std::sqrt(2.0) * 2.0 * (0.9 / 0.55) / (std::numbers::pi * std::numbers::pi);
    CHECK(phi(basis.index({1, 0})) > 0.0);
    CHECK(std::abs(phi(basis.index({1, 0})) - analytic) < 1e-4);
    CHECK(std::abs(phi(basis.index({0, 1}))) < 1e-9);
  }
  SUBCASE("matches naive quadrature, phi_0 exact") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd grid(17, 23);
    for (Eigen::Index i = 0; i < grid.size(); ++i) grid(i) = u(rng);
    SpectralBasis b2({1.5, 0.75}, 6);
    const DensityMap d = DensityMap::normalized(grid, {1.5, 0.75});
    const CoeffVector phi = transform_density(b2, d);
    CHECK(phi(0) == 1.0 / b2.normalizers()(0));
    for (Eigen::Index i = 1; i < b2.size(); ++i) {
      const Mode k = b2.mode(i);
      CHECK(std::abs(phi(i) - oracle::transform(d.grid(), k.k1, k.k2, 1.5, 0.75)) < 1e-12);
    }
  }
  SUBCASE("unnormalized") {
    const DensityMap d(Eigen::MatrixXd::Ones(4, 4) * 2.0, {1.0, 1.0});
    CHECK_THROWS_AS(transform_density(basis, d), NormalizationError);
  }
}

TEST_CASE("accumulate_trajectory") {
  SpectralBasis basis({1.0, 1.0}, 6);
  SUBCASE("stationary") {
    TrajectoryStats s;
    const Point x0(0.37, 0.81);
    for (int i = 0; i < 1000; ++i) accumulate_trajectory(basis, s, x0, 0.1);
    CHECK(s.elapsed() == doctest::Approx(100.0).epsilon(1e-14));
    CHECK((s.coefficients() - eval_all(basis, x0)).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("two samples") {
    TrajectoryStats s;
    const Point a(0.1, 0.2), b(0.7, 0.4);
    accumulate_trajectory(basis, s, a, 0.1);
    accumulate_trajectory(basis, s, b, 0.1);
    const Eigen::VectorXd expect = 0.5 * (oracle::basis_vector(6, a.x(), a.y()) + oracle::basis_vector(6, b.x(), b.y()));
    CHECK((s.coefficients() - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("random walk vs one-shot quadrature") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> step(0.0, 0.01);
    TrajectoryStats s;
    Point x(0.5, 0.5);
    std::vector<Point> log;
    for (int i = 0; i < 10000; ++i) {
      x = (x + Point(step(rng), step(rng))).cwiseMax(0.0).cwiseMin(1.0);
      log.push_back(x);
      accumulate_trajectory(basis, s, x, 0.1);
    }
    // Oracle: per-mode long double sum over the stored log.
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
      const Mode k = basis.mode(i);
      long double sum = 0.0L;
      for (const auto& p : log) sum += static_cast<long double>(oracle::basis(k.k1, k.k2, p.x(), p.y()));
      CHECK(std::abs(s.coefficients()(i) - static_cast<double>(sum / log.size())) < 1e-10);
    }
  }
  SUBCASE("linearity of merge") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TrajectoryStats a, b, ab;
    for (int i = 0; i < 300; ++i) {
      const Point x(u(rng), u(rng));
      accumulate_trajectory(basis, a, x, 0.1);
      accumulate_trajectory(basis, ab, x, 0.1);
    }
    for (int i = 0; i < 500; ++i) {
      const Point x(u(rng), u(rng));
      accumulate_trajectory(basis, b, x, 0.05);
      accumulate_trajectory(basis, ab, x, 0.05);
    }
    const CoeffVector weighted =
        (a.elapsed() * a.coefficients() + b.elapsed() * b.coefficients()) / (a.elapsed() + b.elapsed());
    CHECK((ab.coefficients() - weighted).cwiseAbs().maxCoeff() < 1e-12);
    TrajectoryStats merged = a;
    merged.merge(b);
    CHECK((merged.coefficients() - ab.coefficients()).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("long horizon stays accurate") {
    TrajectoryStats s(basis.size());
    const CoeffVector v = eval_all(basis, Point(0.2, 0.6));
    for (int i = 0; i < 1000000; ++i) s.add_sample(v, 0.1);
    CHECK((s.coefficients() - v).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(std::abs(s.elapsed() - 100000.0) < 1e-8);
  }
  SUBCASE("errors") {
    TrajectoryStats s;
    CHECK_THROWS_AS(accumulate_trajectory(basis, s, Point(1.5, 0.5), 0.1), DomainError);
    CHECK_THROWS_AS(accumulate_trajectory(basis, s, Point(0.5, 0.5), 0.0), Error);
    CHECK_THROWS(TrajectoryStats(basis.size()).coefficients());
  }
}

}
