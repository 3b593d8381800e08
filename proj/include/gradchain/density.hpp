#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "gradchain/chain.hpp"
#include "gradchain/errors.hpp"
#include "gradchain/greens.hpp"
#include "gradchain/quadrature.hpp"

namespace gradchain {

/// Sampled vibrational mode density over a frequency grid.
template <typename Scalar = double>
struct ModeDensityCurve {
  Eigen::VectorX<Scalar> omegas;  ///< sample frequencies, strictly inside the band
  Eigen::VectorX<Scalar> rho;     ///< modes per rad/s
  Eigen::Index n{};               ///< particle count the normalization refers to
  Scalar band_lo{}, band_hi{};
};

/// rho(omega) = 2 N omega / (pi sqrt((Omega_D^2 - omega^2)(omega^2 - Omega_0^2)))
/// inside the open band, 0 outside the closed band. Band edges (|a| within
/// edge_tol of 1) raise BandEdgeSingularity: the divergence there is
/// integrable but pointwise evaluation is meaningless.
template <typename Scalar>
Scalar mode_density(const ChainSpec<Scalar>& spec, Scalar omega, Scalar edge_tol = Scalar(kEdgeTol)) {
  const auto tag = classify_regime(spec, omega, edge_tol);
  if (tag.regime != Regime::InBand) return Scalar(0);
  const Scalar lo2 = tag.lower_edge * tag.lower_edge;
  const Scalar hi2 = tag.upper_edge * tag.upper_edge;
  const Scalar w2 = omega * omega;
  return Scalar(2) * Scalar(spec.n) * omega /
         (Scalar(EIGEN_PI) * std::sqrt((hi2 - w2) * (w2 - lo2)));
}

/// Same quantity through the Green's function route,
/// rho = (2 omega / pi) Im Tr script-G = (2 omega / pi) N Im script-G_pp.
/// The epsilon -> 0+ limit is realized analytically by the closed form, so
/// the parameter is accepted for interface symmetry with the oracle and
/// ignored.
template <typename Scalar>
Scalar mode_density_from_greens(const ChainSpec<Scalar>& spec, Scalar omega, Scalar = Scalar(0),
                                Scalar edge_tol = Scalar(kEdgeTol)) {
  const auto diag = greens_closed_form(spec, FrequencyQuery<Scalar>{omega}, 0, 0,
                                       ClosedForm::Trigonometric, edge_tol);
  return Scalar(2) * omega / Scalar(EIGEN_PI) * Scalar(spec.n) * diag.value.imag();
}

/// Band phase phi(omega) = arccos(a(omega)) in [0, pi]; phi(Omega_0) = 0,
/// phi(Omega_D) = pi. The integral of rho over [w1, w2] inside the band is
/// (N/pi) (phi(w2) - phi(w1)), which the quadrature and histogram checks use.
template <typename Scalar>
Scalar band_phase(const ChainSpec<Scalar>& spec, Scalar omega) {
  Scalar a = coefficient_a(spec, omega);
  a = std::min(Scalar(1), std::max(Scalar(-1), a));
  return std::acos(a);
}

/// Integrates rho over the band with the substitution omega -> phi, under
/// which d omega * 4 omega / (Omega_D^2 - Omega_0^2) = sin(phi) d phi and both
/// square-root endpoint singularities cancel analytically. Returns a value
/// that must come out as N.
template <typename Scalar>
Scalar normalization_integral(const ChainSpec<Scalar>& spec,
                              const QuadratureConfig<Scalar>& config = {Scalar(1e-10), Scalar(0), 24}) {
  validate(spec);
  const Scalar lo = spec.lower_band_edge(), hi = spec.upper_band_edge();
  const Scalar sum2 = hi * hi + lo * lo;
  const Scalar diff2 = hi * hi - lo * lo;
  auto integrand = [&](Scalar phi) {
    const Scalar omega = std::sqrt((sum2 - diff2 * std::cos(phi)) / Scalar(2));
    const Scalar domega_dphi = diff2 * std::sin(phi) / (Scalar(4) * omega);
    return mode_density(spec, omega) * domega_dphi;
  };
  return integrate_adaptive(integrand, Scalar(0), Scalar(EIGEN_PI), config).value;
}

template <typename Scalar = double>
struct DensityHistogram {
  ModeDensityCurve<Scalar> curve;     ///< bin centers and count/width densities
  Eigen::VectorX<Scalar> bin_edges;   ///< bins + 1 edges spanning [Omega_0, Omega_D]
  Eigen::VectorX<Scalar> counts;      ///< eigenfrequencies per bin; sums to N exactly
};

/// Empirical density from the analytic eigenfrequencies: a histogram over the
/// band, normalized so the total mass is N. Converges weakly to rho as N
/// grows; useful as an independent reference for the closed form.
template <typename Scalar>
DensityHistogram<Scalar> density_histogram_oracle(const ChainSpec<Scalar>& spec, Eigen::Index bins) {
  validate(spec);
  if (bins < 1) throw std::invalid_argument("density_histogram_oracle: bins must be >= 1");
  const auto spectrum = dispersion(spec);
  const Scalar lo = spec.lower_band_edge(), hi = spec.upper_band_edge();
  const Scalar width = (hi - lo) / Scalar(bins);

  DensityHistogram<Scalar> out;
  out.bin_edges = Eigen::VectorX<Scalar>::LinSpaced(bins + 1, lo, hi);
  out.counts = Eigen::VectorX<Scalar>::Zero(bins);
  for (Eigen::Index m = 0; m < spec.n; ++m) {
    Eigen::Index b = Eigen::Index((spectrum.frequencies[m] - lo) / width);
    b = std::min(std::max(b, Eigen::Index(0)), bins - 1);
    out.counts[b] += Scalar(1);
  }
  out.curve.n = spec.n;
  out.curve.band_lo = lo;
  out.curve.band_hi = hi;
  out.curve.omegas = Eigen::VectorX<Scalar>::LinSpaced(bins, lo + width / Scalar(2), hi - width / Scalar(2));
  out.curve.rho = out.counts / width;
  return out;
}

/// Evenly sampled analytic density, keeping a configurable margin away from
/// both edges (default 1e-6 of the band width).
template <typename Scalar>
ModeDensityCurve<Scalar> sample_mode_density(const ChainSpec<Scalar>& spec, Eigen::Index count,
                                             Scalar margin_rel = Scalar(1e-6)) {
  validate(spec);
  if (count < 2) throw std::invalid_argument("sample_mode_density: count must be >= 2");
  const Scalar lo = spec.lower_band_edge(), hi = spec.upper_band_edge();
  const Scalar margin = margin_rel * (hi - lo);
  ModeDensityCurve<Scalar> curve;
  curve.n = spec.n;
  curve.band_lo = lo;
  curve.band_hi = hi;
  curve.omegas = Eigen::VectorX<Scalar>::LinSpaced(count, lo + margin, hi - margin);
  curve.rho.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) curve.rho[i] = mode_density(spec, curve.omegas[i]);
  return curve;
}

}  // namespace gradchain
