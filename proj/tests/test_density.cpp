#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "gradchain/density.hpp"

using namespace gradchain;

namespace {
double homogeneous_density(Eigen::Index n, double omega0, double omega) {
  const double wd = 2.0 * omega0;
  return 2.0 * double(n) / (EIGEN_PI * std::sqrt(wd * wd - omega * omega));
}
}  // namespace

TEST_CASE("homogeneous chain density") {
  ChainSpec<> spec{100, 1.0, 1.0, 1.0};
  SUBCASE("lower edge is regular: rho(0+) -> 2N/(pi omega_D)") {
    CHECK(mode_density(spec, 1e-5) == doctest::Approx(100.0 / EIGEN_PI).epsilon(1e-9));
  }
  SUBCASE("matches the textbook formula pointwise to 1e-12") {
    for (double omega = 0.01; omega < 1.99; omega += 0.007) {
      CHECK(std::abs(mode_density(spec, omega) - homogeneous_density(100, 1.0, omega)) <=
            1e-12 * homogeneous_density(100, 1.0, omega));
    }
  }
  SUBCASE("dispersion-derivative route: rho = 2 (N / 2 pi) |dk/domega|") {
    // omega(k) = 2 omega0 sin(k/2); invert numerically and differentiate
    for (double k : {0.4, 1.0, 2.2}) {
      const double h = 1e-6;
      auto w = [](double kk) { return 2.0 * std::sin(kk / 2.0); };
      double dw_dk = (w(k + h) - w(k - h)) / (2.0 * h);
      double rho_route = 2.0 * (100.0 / (2.0 * EIGEN_PI)) / dw_dk;
      CHECK(rho_route == doctest::Approx(mode_density(spec, w(k))).epsilon(1e-8));
    }
  }
}

TEST_CASE("graded density values and support") {
  ChainSpec<> spec{100, 2.0, 1.0, 1.0};  // band [0.5, 1.5]
  SUBCASE("midband point where a = 0") {
    const double mid = std::sqrt((0.25 + 2.25) / 2.0);
    const double expected = 2.0 * 100.0 * mid * 2.0 / (EIGEN_PI * (2.25 - 0.25));
    CHECK(mode_density(spec, mid) == doctest::Approx(expected).epsilon(1e-13));
  }
  SUBCASE("zero outside the closed band") {
    CHECK(mode_density(spec, 0.2) == 0.0);
    CHECK(mode_density(spec, 0.0) == 0.0);
    CHECK(mode_density(spec, 1.8) == 0.0);
  }
  SUBCASE("edges raise BandEdgeSingularity") {
    CHECK_THROWS_AS(mode_density(spec, 0.5), BandEdgeSingularity);
    CHECK_THROWS_AS(mode_density(spec, 1.5), BandEdgeSingularity);
  }
  SUBCASE("positive everywhere inside") {
    for (double omega = 0.51; omega < 1.5; omega += 0.01) CHECK(mode_density(spec, omega) > 0.0);
  }
}

TEST_CASE("Green's function route equals the explicit formula") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (double xi : {0.5, 1.0, 2.0}) {
    ChainSpec<> spec{64, xi, 1.0, 1.0};
    auto [lo, hi] = band_edges(spec);
    for (int rep = 0; rep < 100; ++rep) {
      const double omega = lo + u(rng) * (hi - lo);
      const double direct = mode_density(spec, omega);
      const double via_greens = mode_density_from_greens(spec, omega);
      CAPTURE(xi);
      CAPTURE(omega);
      CHECK(std::abs(direct - via_greens) <= 1e-10 * direct);
    }
    CHECK(mode_density_from_greens(spec, hi * 1.5) == 0.0);
    if (lo > 0) CHECK(mode_density_from_greens(spec, lo * 0.5) == 0.0);
  }
}

TEST_CASE("normalization integral equals N") {
  CHECK(std::abs(normalization_integral(ChainSpec<>{100, 2.0, 1.0, 1.0}) - 100.0) < 1e-8);
  CHECK(std::abs(normalization_integral(ChainSpec<>{100, 1.0, 1.0, 1.0}) - 100.0) < 1e-8);
  CHECK(std::abs(normalization_integral(ChainSpec<>{7, 10.0, 1.0, 1.0}) - 7.0) < 1e-8);
}

TEST_CASE("adaptive quadrature reports failure honestly") {
  // endpoint-singular integrand without any transform: 1/sqrt(x) on (0, 1]
  QuadratureConfig<> cfg;
  cfg.rel_tol = 1e-12;
  cfg.max_depth = 6;
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, cfg),
                  QuadratureFailure);
  // with a realistic budget the same integral converges to 2
  cfg.max_depth = 40;
  cfg.rel_tol = 1e-6;
  auto res = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, cfg);
  CHECK(res.value == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("histogram oracle") {
  SUBCASE("total mass is exactly N") {
    auto hist = density_histogram_oracle(ChainSpec<>{1000, 2.0, 1.0, 1.0}, 32);
    CHECK(hist.counts.sum() == 1000.0);
  }
  SUBCASE("bin counts match analytic bin integrals away from the edges") {
    for (double xi : {1.0, 2.0}) {
      ChainSpec<> spec{8192, xi, 1.0, 1.0};
      auto hist = density_histogram_oracle(spec, 64);
      const double lo = spec.lower_band_edge(), hi = spec.upper_band_edge();
      const double cut = 0.05 * (hi - lo);
      double worst = 0;
      for (Eigen::Index b = 0; b < 64; ++b) {
        if (hist.bin_edges[b] < lo + cut || hist.bin_edges[b + 1] > hi - cut) continue;
        const double analytic =
            spec.n / EIGEN_PI * (band_phase(spec, hist.bin_edges[b + 1]) - band_phase(spec, hist.bin_edges[b]));
        worst = std::max(worst, std::abs(hist.counts[b] - analytic) / analytic);
      }
      CAPTURE(xi);
      CHECK(worst < 0.03);
    }
  }
}

TEST_CASE("van Hove edge behaviour") {
  ChainSpec<> spec{100, 2.0, 1.0, 1.0};
  const double lo = 0.5, hi = 1.5;
  SUBCASE("rho sqrt(omega - Omega_0) tends to a finite positive limit") {
    const double limit =
        2.0 * 100.0 * lo / (EIGEN_PI * std::sqrt((hi * hi - lo * lo) * 2.0 * lo));
    for (double delta : {1e-4, 1e-5, 1e-6}) {
      const double prod = mode_density(spec, lo + delta) * std::sqrt(delta);
      CHECK(prod == doctest::Approx(limit).epsilon(2e-3));
    }
  }
  SUBCASE("rho sqrt(Omega_D - omega) tends to a finite positive limit") {
    const double limit =
        2.0 * 100.0 * hi / (EIGEN_PI * std::sqrt((hi * hi - lo * lo) * 2.0 * hi));
    for (double delta : {1e-4, 1e-5, 1e-6}) {
      const double prod = mode_density(spec, hi - delta) * std::sqrt(delta);
      CHECK(prod == doctest::Approx(limit).epsilon(2e-3));
    }
  }
}

TEST_CASE("curve sampling keeps the configured edge margin") {
  auto curve = sample_mode_density(ChainSpec<>{50, 2.0, 1.0, 1.0}, 101, 1e-3);
  CHECK(curve.omegas.minCoeff() >= 0.5 + 1e-3 * (1.5 - 0.5) - 1e-15);
  CHECK(curve.omegas.maxCoeff() <= 1.5 - 1e-3 * (1.5 - 0.5) + 1e-15);
  CHECK(curve.rho.minCoeff() > 0.0);
}
