#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "gradchain/chain.hpp"
#include "gradchain/errors.hpp"
#include "gradchain/greens.hpp"

namespace gradchain {

/// Exponentially graded 1D elastic medium, the h -> 0 limit of the chain
/// under m0 = rho0 h, omega0 = Omega / h, xi = e^{beta h}, N = L / h. The
/// transformed field obeys a Klein-Gordon equation with mass term beta^2;
/// the spectrum starts at beta Omega and has no finite Debye frequency.
template <typename Scalar = double>
struct ContinuumSpec {
  Scalar length{1};     ///< L [m], kept finite
  Scalar beta{0};       ///< grading rate [1/m], >= 0
  Scalar big_omega{1};  ///< wave speed Omega [m/s]
  Scalar rho0{1};       ///< base mass density [kg/m]

  Scalar lower_band_edge() const { return beta * big_omega; }
};

template <typename Scalar>
void validate(const ContinuumSpec<Scalar>& spec) {
  if (!(spec.length > Scalar(0)) || !std::isfinite(double(spec.length)))
    throw std::invalid_argument("ContinuumSpec: length must be positive and finite");
  if (!(spec.beta >= Scalar(0)) || !std::isfinite(double(spec.beta)))
    throw std::invalid_argument("ContinuumSpec: beta must be >= 0 and finite");
  if (!(spec.big_omega > Scalar(0)) || !std::isfinite(double(spec.big_omega)))
    throw std::invalid_argument("ContinuumSpec: big_omega must be positive and finite");
  if (!(spec.rho0 > Scalar(0)) || !std::isfinite(double(spec.rho0)))
    throw std::invalid_argument("ContinuumSpec: rho0 must be positive and finite");
}

/// Sequence of chains discretizing the continuum at decreasing spacing
/// h = L/N, with xi = e^{beta h} held exactly (not its linearization) so the
/// scaling relations hold without truncation error.
template <typename Scalar = double>
struct DiscretizationLadder {
  std::vector<Scalar> h_values;
  std::vector<ChainSpec<Scalar>> chains;
};

template <typename Scalar>
DiscretizationLadder<Scalar> make_ladder(const ContinuumSpec<Scalar>& spec,
                                         const std::vector<Eigen::Index>& n_values) {
  validate(spec);
  DiscretizationLadder<Scalar> ladder;
  for (Eigen::Index n : n_values) {
    if (n < 2) throw std::invalid_argument("make_ladder: rung sizes must be >= 2");
    const Scalar h = spec.length / Scalar(n);
    ladder.h_values.push_back(h);
    ladder.chains.push_back(ChainSpec<Scalar>{n, std::exp(spec.beta * h), spec.big_omega / h,
                                              spec.rho0 * h});
  }
  return ladder;
}

/// omega(K_m) = Omega sqrt(K_m^2 + beta^2), K_m = 2 pi m / L.
template <typename Scalar>
Scalar continuum_dispersion(const ContinuumSpec<Scalar>& spec, long m) {
  validate(spec);
  const Scalar k = Scalar(2) * Scalar(EIGEN_PI) * Scalar(m) / spec.length;
  return spec.big_omega * std::sqrt(k * k + spec.beta * spec.beta);
}

enum class DomainMode {
  Infinite,  ///< formulas on the whole line
  Periodic   ///< L-periodic continuation by image sums (decaying regime only)
};

namespace detail {

// kappa^2 = omega^2/Omega^2 - beta^2; its sign separates the two continuum
// regimes. Throws on the band edge where the Green's function diverges.
template <typename Scalar>
Scalar continuum_kappa2(const ContinuumSpec<Scalar>& spec, Scalar omega, Scalar edge_tol) {
  if (!(omega >= Scalar(0)) || !std::isfinite(double(omega)))
    throw std::invalid_argument("omega must be finite and >= 0");
  const Scalar r2 = omega * omega / (spec.big_omega * spec.big_omega);
  const Scalar kappa2 = r2 - spec.beta * spec.beta;
  const Scalar scale = r2 + spec.beta * spec.beta;
  if (std::abs(kappa2) <= edge_tol * std::max(scale, Scalar(1) / (spec.length * spec.length)))
    throw BandEdgeSingularity("omega = " + std::to_string(double(omega)) +
                              " lies on the continuum band edge beta Omega");
  return kappa2;
}

}  // namespace detail

/// Propagating (omega > beta Omega) vs evanescent (omega < beta Omega); the
/// continuum has no analogue of the discrete above-band regime.
template <typename Scalar>
Regime continuum_regime(const ContinuumSpec<Scalar>& spec, Scalar omega,
                        Scalar edge_tol = Scalar(kEdgeTol)) {
  validate(spec);
  return detail::continuum_kappa2(spec, omega, edge_tol) > Scalar(0) ? Regime::InBand
                                                                     : Regime::BelowBand;
}

/// Green's function of the transformed field:
///   omega < beta Omega:  g = e^{-|x| q} / (2 Omega^2 q),  q = sqrt(beta^2 - omega^2/Omega^2)
///   omega > beta Omega:  g = i e^{i |x| kappa} / (2 Omega^2 kappa)
/// Periodic mode wraps the decaying regime with a truncated image sum; the
/// propagating image sum is only conditionally convergent and is rejected.
template <typename Scalar>
std::complex<Scalar> continuum_greens(const ContinuumSpec<Scalar>& spec, Scalar omega, Scalar x,
                                      DomainMode mode = DomainMode::Infinite,
                                      Eigen::Index image_count = 64,
                                      Scalar edge_tol = Scalar(kEdgeTol)) {
  validate(spec);
  using C = std::complex<Scalar>;
  const Scalar kappa2 = detail::continuum_kappa2(spec, omega, edge_tol);
  const Scalar pref = Scalar(1) / (Scalar(2) * spec.big_omega * spec.big_omega);
  if (kappa2 < Scalar(0)) {
    const Scalar q = std::sqrt(-kappa2);
    auto line = [&](Scalar xx) { return pref * std::exp(-std::abs(xx) * q) / q; };
    if (mode == DomainMode::Infinite) return C(line(x), 0);
    Scalar acc = line(x);
    for (Eigen::Index j = 1; j <= image_count; ++j) {
      acc += line(x + Scalar(j) * spec.length);
      acc += line(x - Scalar(j) * spec.length);
    }
    return C(acc, 0);
  }
  if (mode == DomainMode::Periodic)
    throw std::invalid_argument(
        "continuum_greens: periodic mode is unsupported in the propagating regime (the "
        "L-periodic image sum does not converge absolutely); use DomainMode::Infinite");
  const Scalar kappa = std::sqrt(kappa2);
  return C(0, pref / kappa) * std::exp(C(0, std::abs(x) * kappa));
}

/// Green's function of the physical displacement field,
/// g-tilde(x) = e^{-beta x} g(|x|).
template <typename Scalar>
std::complex<Scalar> true_displacement_greens(const ContinuumSpec<Scalar>& spec, Scalar omega,
                                              Scalar x, DomainMode mode = DomainMode::Infinite,
                                              Eigen::Index image_count = 64,
                                              Scalar edge_tol = Scalar(kEdgeTol)) {
  return std::exp(-spec.beta * x) * continuum_greens(spec, omega, x, mode, image_count, edge_tol);
}

/// rho(omega) = L omega / (pi Omega^2 sqrt(omega^2/Omega^2 - beta^2)) above
/// the edge, 0 below.
template <typename Scalar>
Scalar continuum_mode_density(const ContinuumSpec<Scalar>& spec, Scalar omega,
                              Scalar edge_tol = Scalar(kEdgeTol)) {
  validate(spec);
  const Scalar kappa2 = detail::continuum_kappa2(spec, omega, edge_tol);
  if (kappa2 < Scalar(0)) return Scalar(0);
  return spec.length * omega /
         (Scalar(EIGEN_PI) * spec.big_omega * spec.big_omega * std::sqrt(kappa2));
}

/// Same density through rho = (2 omega L / pi) Im g(0, omega).
template <typename Scalar>
Scalar continuum_mode_density_from_greens(const ContinuumSpec<Scalar>& spec, Scalar omega,
                                          Scalar edge_tol = Scalar(kEdgeTol)) {
  validate(spec);
  const std::complex<Scalar> g0 = continuum_greens(spec, omega, Scalar(0), DomainMode::Infinite,
                                                   64, edge_tol);
  return Scalar(2) * omega * spec.length / Scalar(EIGEN_PI) * g0.imag();
}

template <typename Scalar = double>
struct GradedModuli {
  Scalar rho_m;  ///< mass density [kg/m]
  Scalar mu;     ///< elastic modulus [N]
};

/// rho_M(x) = rho0 e^{2 beta x}, mu(x) = Omega^2 rho_M(x); the ratio mu/rho_M
/// is the constant Omega^2 by construction.
template <typename Scalar>
GradedModuli<Scalar> graded_moduli(const ContinuumSpec<Scalar>& spec, Scalar x) {
  validate(spec);
  if (!(x >= Scalar(0)) || !(x <= spec.length))
    throw std::invalid_argument("graded_moduli: x must lie in [0, L]");
  const Scalar rho = spec.rho0 * std::exp(Scalar(2) * spec.beta * x);
  return {rho, spec.big_omega * spec.big_omega * rho};
}

template <typename Scalar = double>
struct HelmholtzGrid {
  Eigen::Index points{2048};         ///< grid spacing = L / points
  Eigen::Index exclusion_cells{4};   ///< cells skipped around the origin
  Scalar safety{8};                  ///< multiple of the analytic truncation scale
};

template <typename Scalar = double>
struct HelmholtzReport {
  Scalar grid_spacing{};
  Scalar max_residual{};
  Scalar residual_bound{};
  std::complex<Scalar> jump{};
  Scalar jump_expected{};
  Scalar jump_error{};
  Scalar jump_tol{};
  bool passed{};
};

/// Verifies by second-order finite differences that the continuum Green's
/// function solves -Omega^2 (g'' + kappa^2 g) = delta(x): the residual away
/// from the origin stays within the O(grid^2) truncation scale, and the
/// derivative jump at 0 equals -1/Omega^2 (delta normalization).
template <typename Scalar>
HelmholtzReport<Scalar> helmholtz_residual(const ContinuumSpec<Scalar>& spec, Scalar omega,
                                           const HelmholtzGrid<Scalar>& grid = {}) {
  validate(spec);
  if (grid.points < 16 || grid.exclusion_cells < 1)
    throw std::invalid_argument("HelmholtzGrid: need points >= 16 and exclusion_cells >= 1");
  using C = std::complex<Scalar>;
  const Scalar kappa2 = detail::continuum_kappa2(spec, omega, Scalar(kEdgeTol));
  const Scalar lam_mag = std::sqrt(std::abs(kappa2));
  const Scalar delta = spec.length / Scalar(grid.points);
  const Eigen::Index half = grid.points / 2;
  const Scalar w2 = spec.big_omega * spec.big_omega;

  Eigen::VectorX<C> g(2 * half + 1);
  for (Eigen::Index i = -half; i <= half; ++i)
    g[i + half] = continuum_greens(spec, omega, Scalar(i) * delta);

  HelmholtzReport<Scalar> report;
  report.grid_spacing = delta;
  Scalar max_g = 0;
  for (Eigen::Index i = 1; i < 2 * half; ++i) {
    const Eigen::Index site = i - half;
    if (std::abs(site) < grid.exclusion_cells) continue;
    const C second = (g[i + 1] - Scalar(2) * g[i] + g[i - 1]) / (delta * delta);
    const C residual = -w2 * (second + kappa2 * g[i]);
    report.max_residual = std::max(report.max_residual, std::abs(residual));
    max_g = std::max(max_g, std::abs(g[i]));
  }
  report.residual_bound =
      grid.safety * w2 * delta * delta * lam_mag * lam_mag * lam_mag * lam_mag * max_g /
      Scalar(12);

  // one-sided second-order derivatives on both sides of the origin
  const C right =
      (Scalar(-3) * g[half] + Scalar(4) * g[half + 1] - g[half + 2]) / (Scalar(2) * delta);
  const C left =
      (Scalar(3) * g[half] - Scalar(4) * g[half - 1] + g[half - 2]) / (Scalar(2) * delta);
  report.jump = right - left;
  report.jump_expected = Scalar(-1) / w2;
  report.jump_error = std::abs(report.jump - C(report.jump_expected, 0));
  report.jump_tol = grid.safety * delta * delta * lam_mag * lam_mag / (Scalar(3) * w2);
  report.passed = report.max_residual <= report.residual_bound && report.jump_error <= report.jump_tol;
  return report;
}

/// Same kind of check for the true-displacement kernel against the graded
/// equation -Omega^2 [ (e^{2 beta x} g~')' + (omega^2/Omega^2) e^{2 beta x} g~ ] = delta(x),
/// using the conservative flux stencil.
template <typename Scalar>
HelmholtzReport<Scalar> true_displacement_residual(const ContinuumSpec<Scalar>& spec, Scalar omega,
                                                   const HelmholtzGrid<Scalar>& grid = {}) {
  validate(spec);
  if (grid.points < 16 || grid.exclusion_cells < 1)
    throw std::invalid_argument("HelmholtzGrid: need points >= 16 and exclusion_cells >= 1");
  using C = std::complex<Scalar>;
  const Scalar kappa2 = detail::continuum_kappa2(spec, omega, Scalar(kEdgeTol));
  const Scalar lam_mag = std::sqrt(std::abs(kappa2)) + spec.beta;
  const Scalar delta = spec.length / Scalar(grid.points);
  const Eigen::Index half = grid.points / 2;
  const Scalar w2 = spec.big_omega * spec.big_omega;
  const Scalar r2 = omega * omega / w2;

  Eigen::VectorX<C> g(2 * half + 1);
  for (Eigen::Index i = -half; i <= half; ++i)
    g[i + half] = true_displacement_greens(spec, omega, Scalar(i) * delta);

  HelmholtzReport<Scalar> report;
  report.grid_spacing = delta;
  Scalar max_scale = 0;
  for (Eigen::Index i = 1; i < 2 * half; ++i) {
    const Eigen::Index site = i - half;
    if (std::abs(site) < grid.exclusion_cells) continue;
    const Scalar x = Scalar(site) * delta;
    const Scalar a_plus = std::exp(Scalar(2) * spec.beta * (x + delta / Scalar(2)));
    const Scalar a_minus = std::exp(Scalar(2) * spec.beta * (x - delta / Scalar(2)));
    const Scalar a_mid = std::exp(Scalar(2) * spec.beta * x);
    const C flux = (a_plus * (g[i + 1] - g[i]) - a_minus * (g[i] - g[i - 1])) / (delta * delta);
    const C residual = -w2 * (flux + r2 * a_mid * g[i]);
    report.max_residual = std::max(report.max_residual, std::abs(residual));
    max_scale = std::max(max_scale, a_mid * std::abs(g[i]));
  }
  report.residual_bound = grid.safety * w2 * delta * delta * lam_mag * lam_mag * lam_mag * lam_mag *
                          max_scale / Scalar(3);

  // jump of e^{2 beta x} g~' at the origin equals the jump of g' there
  const C right =
      (Scalar(-3) * g[half] + Scalar(4) * g[half + 1] - g[half + 2]) / (Scalar(2) * delta);
  const C left =
      (Scalar(3) * g[half] - Scalar(4) * g[half - 1] + g[half - 2]) / (Scalar(2) * delta);
  report.jump = right - left;
  report.jump_expected = Scalar(-1) / w2;
  report.jump_error = std::abs(report.jump - C(report.jump_expected, 0));
  report.jump_tol = grid.safety * delta * delta * lam_mag * lam_mag * lam_mag * spec.length /
                    (Scalar(3) * w2);
  report.passed = report.max_residual <= report.residual_bound && report.jump_error <= report.jump_tol;
  return report;
}

/// One rung of a convergence study; observed_order compares against the
/// previous (coarser) rung and is 0 for the first one.
template <typename Scalar = double>
struct ConvergenceRow {
  Scalar h{};
  Scalar error{};
  Scalar observed_order{};
};

namespace detail {

template <typename Scalar>
void fill_orders(std::vector<ConvergenceRow<Scalar>>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    rows[i].observed_order = std::log(rows[i - 1].error / rows[i].error) /
                             std::log(rows[i - 1].h / rows[i].h);
}

}  // namespace detail

/// |omega_h(k = h K_m) - Omega sqrt(K_m^2 + beta^2)| on the ladder; O(h).
template <typename Scalar>
std::vector<ConvergenceRow<Scalar>> dispersion_convergence(const ContinuumSpec<Scalar>& spec,
                                                           long m,
                                                           const std::vector<Eigen::Index>& n_values) {
  const auto ladder = make_ladder(spec, n_values);
  const Scalar target = continuum_dispersion(spec, m);
  std::vector<ConvergenceRow<Scalar>> rows;
  for (std::size_t r = 0; r < ladder.chains.size(); ++r) {
    const auto& chain = ladder.chains[r];
    const Scalar k = Scalar(2) * Scalar(EIGEN_PI) * Scalar(m) / Scalar(chain.n);
    const Scalar lam = chain.omega0 * chain.omega0 / (chain.xi * chain.xi) *
                       ((chain.xi - std::cos(k)) * (chain.xi - std::cos(k)) +
                        std::sin(k) * std::sin(k));
    rows.push_back({ladder.h_values[r], std::abs(std::sqrt(lam) - target) / target, Scalar(0)});
  }
  detail::fill_orders(rows);
  return rows;
}

/// |(1/h) script-G(d = x/h) - g(x)| / |g(x)| on the ladder; O(h) in both
/// regimes. x must be a lattice point of every rung.
template <typename Scalar>
std::vector<ConvergenceRow<Scalar>> greens_convergence(const ContinuumSpec<Scalar>& spec,
                                                       Scalar omega, Scalar x,
                                                       const std::vector<Eigen::Index>& n_values) {
  const auto ladder = make_ladder(spec, n_values);
  const std::complex<Scalar> target = continuum_greens(spec, omega, x);
  std::vector<ConvergenceRow<Scalar>> rows;
  for (std::size_t r = 0; r < ladder.chains.size(); ++r) {
    const Scalar h = ladder.h_values[r];
    const Scalar ratio = x / h;
    const auto d = Eigen::Index(std::llround(double(ratio)));
    if (std::abs(ratio - Scalar(d)) > Scalar(1e-9) * std::max(Scalar(1), std::abs(ratio)))
      throw std::invalid_argument("greens_convergence: x must be a lattice point of every rung");
    const auto value =
        greens_closed_form(ladder.chains[r], FrequencyQuery<Scalar>{omega}, 0, d).value / h;
    rows.push_back({h, std::abs(value - target) / std::abs(target), Scalar(0)});
  }
  detail::fill_orders(rows);
  return rows;
}

/// Convergence of the matrix action sum_q L_pq y_q on samples of e^{i K_m x}
/// to the Klein-Gordon operator value Omega^2 (K_m^2 + beta^2). First order
/// in h for beta > 0 (the leading error is beta h times the operator value),
/// second order for beta = 0.
template <typename Scalar>
std::vector<ConvergenceRow<Scalar>> kg_operator_convergence(const ContinuumSpec<Scalar>& spec,
                                                            long m,
                                                            const std::vector<Eigen::Index>& n_values) {
  using C = std::complex<Scalar>;
  const auto ladder = make_ladder(spec, n_values);
  const Scalar k_cont = Scalar(2) * Scalar(EIGEN_PI) * Scalar(m) / spec.length;
  const Scalar target = spec.big_omega * spec.big_omega * (k_cont * k_cont + spec.beta * spec.beta);
  std::vector<ConvergenceRow<Scalar>> rows;
  for (std::size_t r = 0; r < ladder.chains.size(); ++r) {
    const auto& chain = ladder.chains[r];
    const Scalar h = ladder.h_values[r];
    const Eigen::MatrixX<Scalar> l = build_l_matrix(chain);
    Eigen::VectorX<C> y(chain.n);
    for (Eigen::Index p = 0; p < chain.n; ++p)
      y[p] = std::polar(Scalar(1), k_cont * Scalar(p) * h);
    const Eigen::VectorX<C> action = l.template cast<C>() * y;
    Scalar worst = 0;
    for (Eigen::Index p = 0; p < chain.n; ++p)
      worst = std::max(worst, std::abs(action[p] - target * y[p]));
    rows.push_back({h, worst / target, Scalar(0)});
  }
  detail::fill_orders(rows);
  return rows;
}

}  // namespace gradchain
