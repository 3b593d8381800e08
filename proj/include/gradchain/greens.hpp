#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "gradchain/chain.hpp"
#include "gradchain/errors.hpp"

namespace gradchain {

/// Frequency at which a response is requested. epsilon = 0 means the
/// epsilon -> 0+ limit, which the closed forms realize analytically; a
/// positive epsilon matters only for the finite-N oracle and for the
/// time-domain synthesis (see greens_closed_form_shifted).
template <typename Scalar = double>
struct FrequencyQuery {
  Scalar omega{};
  Scalar epsilon{0};
};

enum class Regime { BelowBand, InBand, AboveBand };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::BelowBand: return "ii";
    case Regime::InBand: return "i";
    case Regime::AboveBand: return "iii";
  }
  return "?";
}

template <typename Scalar = double>
struct RegimeTag {
  Regime regime{Regime::InBand};
  Scalar lower_edge{};
  Scalar upper_edge{};
};

enum class GreensKind { Symmetric, TrueDisplacement };

/// Which of the two algebraically equivalent closed-form routes to evaluate:
/// the trigonometric/hyperbolic one (via a = cos phi / cosh chi) or the
/// explicit radical one written purely in Omega_0, Omega_D.
enum class ClosedForm { Trigonometric, Radical };

template <typename Scalar = double>
struct GreensEvaluation {
  std::complex<Scalar> value;  ///< units s^2 (inverse squared frequency)
  RegimeTag<Scalar> regime;
  Eigen::Index p{}, q{};
  GreensKind kind{GreensKind::Symmetric};
};

/// a = (Omega_D^2 + Omega_0^2 - 2 omega^2) / (Omega_D^2 - Omega_0^2);
/// a in [-1, 1] exactly when omega lies in the band.
template <typename Scalar>
Scalar coefficient_a(const ChainSpec<Scalar>& spec, Scalar omega) {
  validate(spec);
  if (!(omega >= Scalar(0)) || !std::isfinite(double(omega)))
    throw std::invalid_argument("omega must be finite and >= 0");
  const Scalar lo = spec.lower_band_edge(), hi = spec.upper_band_edge();
  return (hi * hi + lo * lo - Scalar(2) * omega * omega) / (hi * hi - lo * lo);
}

/// Default half-width of the ambiguous strip around |a| = 1 within which a
/// frequency counts as sitting on a band edge.
inline constexpr double kEdgeTol = 1e-12;

/// Classifies omega against the band. Throws BandEdgeSingularity when
/// |a| is within edge_tol of 1, where the closed forms (and the mode
/// density) have their integrable divergence.
template <typename Scalar>
RegimeTag<Scalar> classify_regime(const ChainSpec<Scalar>& spec, Scalar omega,
                                  Scalar edge_tol = Scalar(kEdgeTol)) {
  const Scalar a = coefficient_a(spec, omega);
  RegimeTag<Scalar> tag{Regime::InBand, spec.lower_band_edge(), spec.upper_band_edge()};
  if (std::abs(std::abs(a) - Scalar(1)) <= edge_tol)
    throw BandEdgeSingularity("omega = " + std::to_string(double(omega)) +
                              " lies on a band edge (|a| = 1)");
  if (a > Scalar(1))
    tag.regime = Regime::BelowBand;
  else if (a < Scalar(-1))
    tag.regime = Regime::AboveBand;
  return tag;
}

namespace detail {

template <typename T>
T ipow(T base, Eigen::Index e) {
  T out(1);
  while (e > 0) {
    if (e & 1) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

// Compact trigonometric/hyperbolic route, one regime at a time.
template <typename Scalar>
std::complex<Scalar> closed_form_trig(const ChainSpec<Scalar>& spec, Regime regime, Scalar a,
                                      Eigen::Index dist) {
  using C = std::complex<Scalar>;
  const Scalar pref = spec.xi / (Scalar(2) * spec.omega0 * spec.omega0);
  const Scalar d = Scalar(dist);
  switch (regime) {
    case Regime::InBand: {
      const Scalar phi = std::acos(a);
      const Scalar sin_phi = std::sqrt(Scalar(1) - a * a);  // + root, 0 <= phi <= pi
      return C(0, pref) * std::exp(C(0, phi * d)) / sin_phi;
    }
    case Regime::BelowBand: {
      const Scalar chi = std::acosh(a);
      const Scalar sinh_chi = std::sqrt(a * a - Scalar(1));  // + root, chi > 0
      return C(pref * std::exp(-chi * d) / sinh_chi, 0);
    }
    case Regime::AboveBand: {
      const Scalar chi = std::acosh(-a);
      const Scalar sinh_chi = std::sqrt(a * a - Scalar(1));
      const Scalar sign = (dist % 2 == 0) ? Scalar(-1) : Scalar(1);  // (-1)^{p-q+1}
      return C(sign * pref * std::exp(-chi * d) / sinh_chi, 0);
    }
  }
  return {};
}

// Explicit radical route, written purely in the band edges.
template <typename Scalar>
std::complex<Scalar> closed_form_radical(const ChainSpec<Scalar>& spec, Regime regime, Scalar omega,
                                         Eigen::Index dist) {
  using C = std::complex<Scalar>;
  const Scalar lo2 = spec.lower_band_edge() * spec.lower_band_edge();
  const Scalar hi2 = spec.upper_band_edge() * spec.upper_band_edge();
  const Scalar w2 = omega * omega;
  const Scalar den = hi2 - lo2;
  switch (regime) {
    case Regime::InBand: {
      const Scalar root = std::sqrt((hi2 - w2) * (w2 - lo2));
      const C ratio((hi2 + lo2 - Scalar(2) * w2) / den, Scalar(2) * root / den);
      return C(0, Scalar(1) / root) * ipow(ratio, dist);
    }
    case Regime::BelowBand: {
      const Scalar root = std::sqrt((hi2 - w2) * (lo2 - w2));
      const Scalar ratio = (hi2 + lo2 - Scalar(2) * w2 - Scalar(2) * root) / den;
      return C(ipow(ratio, dist) / root, 0);
    }
    case Regime::AboveBand: {
      const Scalar root = std::sqrt((hi2 - w2) * (lo2 - w2));  // both factors negative
      const Scalar ratio = (hi2 + lo2 - Scalar(2) * w2 + Scalar(2) * root) / den;  // negative
      return C(-ipow(ratio, dist) / root, 0);
    }
  }
  return {};
}

template <typename Scalar>
void require_indices(const ChainSpec<Scalar>& spec, Eigen::Index p, Eigen::Index q) {
  if (p < 0 || q < 0 || p >= spec.n || q >= spec.n)
    throw std::invalid_argument("particle indices p, q must lie in [0, n)");
}

}  // namespace detail

/// Closed-form symmetric lattice Green's function entry, the N -> infinity
/// limit evaluated at real omega with the causal branch fixed analytically
/// (sin phi, sinh chi taken as positive roots, chi >= 0 so the unit-circle
/// pole sits at e^{-phi} inside |mu| = 1). Depends on the indices only
/// through |p - q|.
template <typename Scalar>
GreensEvaluation<Scalar> greens_closed_form(const ChainSpec<Scalar>& spec,
                                            const FrequencyQuery<Scalar>& query, Eigen::Index p,
                                            Eigen::Index q,
                                            ClosedForm form = ClosedForm::Trigonometric,
                                            Scalar edge_tol = Scalar(kEdgeTol)) {
  detail::require_indices(spec, p, q);
  const auto tag = classify_regime(spec, query.omega, edge_tol);
  const Eigen::Index dist = std::abs(p - q);
  std::complex<Scalar> value =
      form == ClosedForm::Trigonometric
          ? detail::closed_form_trig(spec, tag.regime, coefficient_a(spec, query.omega), dist)
          : detail::closed_form_radical(spec, tag.regime, query.omega, dist);
  return {value, tag, p, q, GreensKind::Symmetric};
}

/// Green's function of the true displacements, G_pq = xi^{-(p-q)} * script-G_pq.
/// Not symmetric for xi != 1. Throws GradingOverflow when xi^{-(p-q)} leaves
/// the floating range.
template <typename Scalar>
GreensEvaluation<Scalar> greens_true(const ChainSpec<Scalar>& spec,
                                     const FrequencyQuery<Scalar>& query, Eigen::Index p,
                                     Eigen::Index q, ClosedForm form = ClosedForm::Trigonometric,
                                     Scalar edge_tol = Scalar(kEdgeTol)) {
  auto eval = greens_closed_form(spec, query, p, q, form, edge_tol);
  detail::require_grading_range(spec.xi, double(std::abs(p - q)), "greens_true");
  eval.value *= std::pow(spec.xi, Scalar(q - p));
  eval.kind = GreensKind::TrueDisplacement;
  return eval;
}

/// Assembles the full N x N closed-form matrix. The Symmetric kind is a
/// symmetric Toeplitz matrix in the linear distance |p - q|; the
/// TrueDisplacement kind additionally carries the xi^{-(p-q)} grading.
template <typename Scalar>
Eigen::MatrixX<std::complex<Scalar>> greens_matrix(const ChainSpec<Scalar>& spec,
                                                   const FrequencyQuery<Scalar>& query,
                                                   GreensKind kind = GreensKind::Symmetric,
                                                   ClosedForm form = ClosedForm::Trigonometric,
                                                   Scalar edge_tol = Scalar(kEdgeTol)) {
  const auto tag = classify_regime(spec, query.omega, edge_tol);
  const Scalar a = coefficient_a(spec, query.omega);
  const Eigen::Index n = spec.n;
  if (kind == GreensKind::TrueDisplacement)
    detail::require_grading_range(spec.xi, double(n - 1), "greens_matrix");

  Eigen::VectorX<std::complex<Scalar>> by_dist(n);
  for (Eigen::Index d = 0; d < n; ++d)
    by_dist[d] = form == ClosedForm::Trigonometric
                     ? detail::closed_form_trig(spec, tag.regime, a, d)
                     : detail::closed_form_radical(spec, tag.regime, query.omega, d);

  Eigen::MatrixX<std::complex<Scalar>> out(n, n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q) {
      std::complex<Scalar> v = by_dist[std::abs(p - q)];
      if (kind == GreensKind::TrueDisplacement) v *= std::pow(spec.xi, Scalar(q - p));
      out(p, q) = v;
    }
  return out;
}

/// Master residue form evaluated at the complex frequency z = omega + i epsilon
/// (epsilon > 0): script-G_pq = (xi / 2 omega0^2) e^{-|p-q| phi} / sinh phi with
/// cosh phi = a(z) and Re phi > 0, which places the pole e^{-phi} inside the
/// unit circle and makes the time-domain transform causal. Reduces to the
/// three regime forms as epsilon -> 0+.
template <typename Scalar>
std::complex<Scalar> greens_closed_form_shifted(const ChainSpec<Scalar>& spec, Scalar omega,
                                                Scalar epsilon, Eigen::Index p, Eigen::Index q) {
  validate(spec);
  detail::require_indices(spec, p, q);
  if (!(epsilon > Scalar(0)))
    throw std::invalid_argument("epsilon must be > 0 for the shifted evaluation");
  using C = std::complex<Scalar>;
  const Scalar lo = spec.lower_band_edge(), hi = spec.upper_band_edge();
  const C z(omega, epsilon);
  const C a = (hi * hi + lo * lo - Scalar(2) * z * z) / (hi * hi - lo * lo);
  C phi = std::acosh(a);
  if (phi.real() < Scalar(0)) phi = -phi;
  const Scalar pref = spec.xi / (Scalar(2) * spec.omega0 * spec.omega0);
  return pref * std::exp(-Scalar(std::abs(p - q)) * phi) / std::sinh(phi);
}

}  // namespace gradchain
