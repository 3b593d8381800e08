#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "gradchain/errors.hpp"

namespace gradchain {

/// Exponentially graded harmonic ring: N particles with masses
/// m_p = m0 xi^{2p} and spring constants f_p = m_p omega0^2, closed
/// periodically in the transformed coordinates y_p = xi^p u_p.
template <typename Scalar = double>
struct ChainSpec {
  Eigen::Index n{2};  ///< particle count, N >= 2
  Scalar xi{1};       ///< grading parameter, xi > 0; xi = 1 is the homogeneous chain
  Scalar omega0{1};   ///< base angular frequency [rad/s]
  Scalar m0{1};       ///< base mass [kg]

  /// Lowest eigenfrequency Omega_0 = (omega0/xi)|1 - xi|; zero iff xi = 1.
  Scalar lower_band_edge() const { return omega0 / xi * std::abs(Scalar(1) - xi); }
  /// Debye frequency Omega_D = (omega0/xi)(1 + xi).
  Scalar upper_band_edge() const { return omega0 / xi * (Scalar(1) + xi); }
};

template <typename Scalar>
void validate(const ChainSpec<Scalar>& spec) {
  if (spec.n < 2) throw std::invalid_argument("ChainSpec: n must be >= 2");
  if (!(spec.xi > Scalar(0)) || !std::isfinite(double(spec.xi)))
    throw std::invalid_argument("ChainSpec: xi must be positive and finite");
  if (!(spec.omega0 > Scalar(0)) || !std::isfinite(double(spec.omega0)))
    throw std::invalid_argument("ChainSpec: omega0 must be positive and finite");
  if (!(spec.m0 > Scalar(0)) || !std::isfinite(double(spec.m0)))
    throw std::invalid_argument("ChainSpec: m0 must be positive and finite");
}

/// (Omega_0, Omega_D)
template <typename Scalar>
std::pair<Scalar, Scalar> band_edges(const ChainSpec<Scalar>& spec) {
  validate(spec);
  return {spec.lower_band_edge(), spec.upper_band_edge()};
}

namespace detail {

// Largest |exponent * ln xi| that still keeps xi^exponent comfortably inside
// the double range (DBL_MAX is exp(709.78); leave headroom for products).
inline constexpr double kGradingLogLimit = 690.0;

template <typename Scalar>
void require_grading_range(Scalar xi, double max_abs_exponent, const char* what) {
  const double span = max_abs_exponent * std::abs(std::log(double(xi)));
  if (span > kGradingLogLimit)
    throw GradingOverflow(std::string(what) + ": xi^k exceeds the floating-point range (|k ln xi| = " +
                          std::to_string(span) + ")");
}

// xi^(scale * p) for p = 0..n-1.
template <typename Scalar>
Eigen::ArrayX<Scalar> grading_powers(const ChainSpec<Scalar>& spec, Scalar scale) {
  require_grading_range(spec.xi, std::abs(double(scale)) * double(spec.n - 1), "grading_powers");
  Eigen::ArrayX<Scalar> out(spec.n);
  for (Eigen::Index p = 0; p < spec.n; ++p) out[p] = std::pow(spec.xi, scale * Scalar(p));
  return out;
}

}  // namespace detail

/// Mass, stiffness and symmetric dynamic matrix of the ring.
template <typename Scalar = double>
struct MatrixTriple {
  Eigen::MatrixX<Scalar> lambda_mat;  ///< Lambda_pq = delta_pq xi^{2p} (dimensionless)
  Eigen::MatrixX<Scalar> k_mat;       ///< stiffness K = Lambda^{1/2} L Lambda^{1/2} [rad^2/s^2]
  Eigen::MatrixX<Scalar> l_mat;       ///< L = Lambda^{-1/2} K Lambda^{-1/2}, symmetric [rad^2/s^2]
};

/// L_pq = (omega0^2/xi^2) [ (1+xi^2) delta_pq - xi (delta_{p+1,q} + delta_{p-1,q}) ],
/// indices mod N. The two neighbour terms accumulate, so at N = 2 both land on
/// the single off-diagonal entry.
template <typename Scalar>
Eigen::MatrixX<Scalar> build_l_matrix(const ChainSpec<Scalar>& spec) {
  validate(spec);
  const Eigen::Index n = spec.n;
  const Scalar w2 = spec.omega0 * spec.omega0 / (spec.xi * spec.xi);
  Eigen::MatrixX<Scalar> l = Eigen::MatrixX<Scalar>::Zero(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    l(p, p) += w2 * (Scalar(1) + spec.xi * spec.xi);
    l(p, (p + 1) % n) -= w2 * spec.xi;
    l(p, (p + n - 1) % n) -= w2 * spec.xi;
  }
  return l;
}

/// Full triple. K is reconstructed as Lambda^{1/2} L Lambda^{1/2}; its wrap
/// entries K_{0,N-1} = K_{N-1,0} = -omega0^2 xi^{N-2} carry the grading scale
/// of the closing bond. Throws GradingOverflow when xi^{2(N-1)} leaves the
/// floating range.
template <typename Scalar>
MatrixTriple<Scalar> build_matrices(const ChainSpec<Scalar>& spec) {
  MatrixTriple<Scalar> out;
  out.l_mat = build_l_matrix(spec);
  detail::require_grading_range(spec.xi, 2.0 * double(spec.n - 1), "build_matrices");
  const Eigen::ArrayX<Scalar> s = detail::grading_powers(spec, Scalar(1));  // xi^p
  out.lambda_mat = Eigen::MatrixX<Scalar>((s * s).matrix().asDiagonal());
  out.k_mat = s.matrix().asDiagonal() * out.l_mat * s.matrix().asDiagonal();
  return out;
}

/// Potential part of the Hamiltonian site sum,
/// (m0 omega0^2 / 2) sum_p xi^{2p} (u_p - u_{p+1})^2. The closing bond is
/// evaluated against the continuation u_N = xi^{-N} u_0 implied by
/// periodicity of the transformed coordinates y_p = xi^p u_p; this is the
/// reading under which the site sum equals the quadratic form in y.
template <typename Scalar, typename Derived>
Scalar hamiltonian_potential(const ChainSpec<Scalar>& spec, const Eigen::MatrixBase<Derived>& u) {
  validate(spec);
  if (u.size() != spec.n)
    throw std::invalid_argument("hamiltonian_potential: displacement vector must have length n");
  const Eigen::ArrayX<Scalar> weights = detail::grading_powers(spec, Scalar(2));  // xi^{2p}
  Scalar acc{};
  for (Eigen::Index p = 0; p + 1 < spec.n; ++p) {
    const Scalar step = u[p] - u[p + 1];
    acc += weights[p] * step * step;
  }
  const Scalar u_wrap = std::pow(spec.xi, Scalar(-spec.n)) * u[0];
  const Scalar step = u[spec.n - 1] - u_wrap;
  acc += weights[spec.n - 1] * step * step;
  return Scalar(0.5) * spec.m0 * spec.omega0 * spec.omega0 * acc;
}

/// Bloch spectrum in m-order (k-order), not sorted by frequency; the Bloch
/// index is what the modal initial-value solver needs.
template <typename Scalar = double>
struct SpectrumResult {
  Eigen::VectorX<Scalar> wavenumbers;  ///< k_m = 2 pi m / N
  Eigen::VectorX<Scalar> eigenvalues;  ///< lambda_m = omega_m^2 [rad^2/s^2]
  Eigen::VectorX<Scalar> frequencies;  ///< omega_m [rad/s]
  /// Bloch columns v_p^{(m)} = e^{i k_m p} / sqrt(N); left empty unless
  /// requested (the dense matrix is O(N^2) storage).
  Eigen::MatrixX<std::complex<Scalar>> eigenvectors;
};

/// Columns are the normalized Bloch eigenvectors of L.
template <typename Scalar>
Eigen::MatrixX<std::complex<Scalar>> bloch_eigenvectors(const ChainSpec<Scalar>& spec) {
  validate(spec);
  const Eigen::Index n = spec.n;
  const Scalar two_pi = Scalar(2) * Scalar(EIGEN_PI);
  const Scalar norm = Scalar(1) / std::sqrt(Scalar(n));
  Eigen::MatrixX<std::complex<Scalar>> v(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const Scalar k = two_pi * Scalar(m) / Scalar(n);
    for (Eigen::Index p = 0; p < n; ++p)
      v(p, m) = norm * std::complex<Scalar>(std::cos(k * Scalar(p)), std::sin(k * Scalar(p)));
  }
  return v;
}

/// lambda_m = (omega0^2/xi^2) [ (xi - cos k_m)^2 + sin^2 k_m ], k_m = 2 pi m / N.
template <typename Scalar>
SpectrumResult<Scalar> dispersion(const ChainSpec<Scalar>& spec, bool with_eigenvectors = false) {
  validate(spec);
  const Eigen::Index n = spec.n;
  SpectrumResult<Scalar> out;
  out.wavenumbers.resize(n);
  out.eigenvalues.resize(n);
  out.frequencies.resize(n);
  const Scalar two_pi = Scalar(2) * Scalar(EIGEN_PI);
  const Scalar scale = spec.omega0 * spec.omega0 / (spec.xi * spec.xi);
  for (Eigen::Index m = 0; m < n; ++m) {
    const Scalar k = two_pi * Scalar(m) / Scalar(n);
    const Scalar c = std::cos(k), s = std::sin(k);
    const Scalar lam = scale * ((spec.xi - c) * (spec.xi - c) + s * s);
    out.wavenumbers[m] = k;
    out.eigenvalues[m] = lam;
    out.frequencies[m] = std::sqrt(lam);
  }
  if (with_eigenvectors) out.eigenvectors = bloch_eigenvectors(spec);
  return out;
}

namespace detail {

// Dynamic matrix Lambda^{-1} K = diag(xi^{-p}) K diag(xi^{-p})^{-1}; entries
// are xi^{q-p} L_pq, so the wrap corners scale like xi^{+-(N-1)}.
template <typename Scalar>
Eigen::MatrixX<Scalar> build_dynamic_matrix(const ChainSpec<Scalar>& spec) {
  require_grading_range(spec.xi, double(spec.n - 1), "build_dynamic_matrix");
  const Eigen::MatrixX<Scalar> l = build_l_matrix(spec);
  Eigen::MatrixX<Scalar> dyn(spec.n, spec.n);
  for (Eigen::Index p = 0; p < spec.n; ++p)
    for (Eigen::Index q = 0; q < spec.n; ++q)
      dyn(p, q) = l(p, q) == Scalar(0) ? Scalar(0) : std::pow(spec.xi, Scalar(q - p)) * l(p, q);
  return dyn;
}

// Osborne balancing with radix-2 scale factors (exact diagonal similarity),
// the standard GEEV preprocessing. The dynamic matrix is diagonally similar
// to the symmetric L, so balancing restores bounded entries.
template <typename Scalar>
void balance_in_place(Eigen::MatrixX<Scalar>& a) {
  const Eigen::Index n = a.rows();
  const Scalar radix = Scalar(2);
  bool converged = false;
  int sweeps = 0;
  while (!converged && sweeps++ < 100) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar row = a.row(i).template lpNorm<1>() - std::abs(a(i, i));
      Scalar col = a.col(i).template lpNorm<1>() - std::abs(a(i, i));
      if (row == Scalar(0) || col == Scalar(0)) continue;
      Scalar f = Scalar(1);
      const Scalar s = row + col;
      while (col < row / radix) {
        col *= radix;
        row /= radix;
        f *= radix;
      }
      while (col >= row * radix) {
        col /= radix;
        row *= radix;
        f /= radix;
      }
      if (row + col < Scalar(0.95) * s) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

}  // namespace detail

/// Report of verify_spectrum. Deviations are relative to the spectral scale
/// Omega_D^2 so that the homogeneous zero mode does not blow up the quotient.
template <typename Scalar = double>
struct SpectrumCheck {
  Scalar max_abs_deviation{};      ///< analytic vs dense eigensolve of L, sorted
  Scalar max_rel_deviation{};      ///< max_abs_deviation / Omega_D^2
  Scalar dynamic_rel_deviation{};  ///< analytic vs balanced eigensolve of Lambda^{-1} K
  bool dynamic_checked{false};
  Scalar tol{};
  bool passed{false};
};

/// Cross-checks the analytic eigenvalues against a dense symmetric eigensolve
/// of L, and against the spectrum of the dynamic matrix Lambda^{-1} K. For
/// small grading spans the latter uses a balanced non-symmetric eigensolve of
/// Lambda^{-1} K directly; for wide spans (where the wrap corners make the
/// non-symmetric solve lose digits) it solves the equivalent symmetric-definite
/// pencil K x = lambda Lambda x, the standard mass-weighted formulation.
template <typename Scalar>
SpectrumCheck<Scalar> verify_spectrum(const ChainSpec<Scalar>& spec, Scalar tol = Scalar(1e-9)) {
  validate(spec);
  if (spec.n > 4096)
    throw std::invalid_argument("verify_spectrum: dense eigensolve guarded at n <= 4096");

  const auto spectrum = dispersion(spec);
  Eigen::VectorX<Scalar> analytic = spectrum.eigenvalues;
  std::sort(analytic.begin(), analytic.end());
  const Scalar scale = spec.upper_band_edge() * spec.upper_band_edge();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixX<Scalar>> es(build_l_matrix(spec),
                                                           Eigen::EigenvaluesOnly);
  const Eigen::VectorX<Scalar> dense = es.eigenvalues();  // ascending

  SpectrumCheck<Scalar> report;
  report.tol = tol;
  report.max_abs_deviation = (analytic - dense).cwiseAbs().maxCoeff();
  report.max_rel_deviation = report.max_abs_deviation / scale;
  report.passed = report.max_rel_deviation <= tol;

  const double span = double(spec.n - 1) * std::abs(std::log(double(spec.xi)));
  if (span <= 30.0) {
    Eigen::MatrixX<Scalar> dyn = detail::build_dynamic_matrix(spec);
    detail::balance_in_place(dyn);
    Eigen::EigenSolver<Eigen::MatrixX<Scalar>> ges(dyn, /*computeEigenvectors=*/false);
    Eigen::VectorX<Scalar> re = ges.eigenvalues().real();
    std::sort(re.begin(), re.end());
    report.dynamic_rel_deviation =
        ((analytic - re).cwiseAbs().maxCoeff() + ges.eigenvalues().imag().cwiseAbs().maxCoeff()) /
        scale;
    report.dynamic_checked = true;
  } else if (2.0 * span <= detail::kGradingLogLimit) {
    const auto triple = build_matrices(spec);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixX<Scalar>> ges(
        triple.k_mat, triple.lambda_mat, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    report.dynamic_rel_deviation = (analytic - ges.eigenvalues()).cwiseAbs().maxCoeff() / scale;
    report.dynamic_checked = true;
  }
  if (report.dynamic_checked) report.passed = report.passed && report.dynamic_rel_deviation <= tol;
  return report;
}

}  // namespace gradchain
