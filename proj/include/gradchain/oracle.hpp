#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "gradchain/chain.hpp"
#include "gradchain/errors.hpp"

namespace gradchain {

/// Knobs of the brute-force reference implementations.
template <typename Scalar = double>
struct OracleConfig {
  Scalar epsilon_scale{1e-6};  ///< default damping = epsilon_scale * Omega_D
  Eigen::Index max_n{4096};    ///< guard on O(N^3) dense operations
  Scalar condition_limit{1e14};

  Scalar default_epsilon(const ChainSpec<Scalar>& spec) const {
    return epsilon_scale * spec.upper_band_edge();
  }
};

/// Exact finite-N spectral representation
/// (1/N) sum_m e^{i k_m (p-q)} / (omega_m^2 - z^2) at complex frequency z.
template <typename Scalar>
std::complex<Scalar> greens_spectral_sum(const ChainSpec<Scalar>& spec, std::complex<Scalar> z,
                                         Eigen::Index p, Eigen::Index q) {
  validate(spec);
  if (p < 0 || q < 0 || p >= spec.n || q >= spec.n)
    throw std::invalid_argument("particle indices p, q must lie in [0, n)");
  const auto spectrum = dispersion(spec);
  const std::complex<Scalar> z2 = z * z;
  const Scalar d = Scalar(p - q);
  std::complex<Scalar> acc{};
  for (Eigen::Index m = 0; m < spec.n; ++m) {
    const Scalar arg = spectrum.wavenumbers[m] * d;
    acc += std::complex<Scalar>(std::cos(arg), std::sin(arg)) /
           (spectrum.eigenvalues[m] - z2);
  }
  return acc / Scalar(spec.n);
}

template <typename Scalar>
std::complex<Scalar> greens_spectral_sum(const ChainSpec<Scalar>& spec, Scalar omega, Scalar epsilon,
                                         Eigen::Index p, Eigen::Index q) {
  return greens_spectral_sum(spec, std::complex<Scalar>(omega, epsilon), p, q);
}

namespace detail {

// L - z^2 I is normal, so its 2-norm condition number is the spread of
// |lambda_m - z^2|, available analytically.
template <typename Scalar>
void require_resolvent_conditioning(const ChainSpec<Scalar>& spec, std::complex<Scalar> z,
                                    Scalar limit) {
  const auto spectrum = dispersion(spec);
  const std::complex<Scalar> z2 = z * z;
  Scalar lo = std::numeric_limits<Scalar>::max(), hi = Scalar(0);
  for (Eigen::Index m = 0; m < spec.n; ++m) {
    const Scalar dist = std::abs(spectrum.eigenvalues[m] - z2);
    lo = std::min(lo, dist);
    hi = std::max(hi, dist);
  }
  if (!(lo > Scalar(0)) || hi / lo > limit)
    throw NearSingularMatrix("resolvent conditioning " +
                             std::to_string(double(lo > Scalar(0) ? hi / lo : 0)) +
                             " exceeds the configured limit (omega at or near an eigenfrequency "
                             "with tiny epsilon)");
}

}  // namespace detail

/// Dense inverse of (L - (omega + i epsilon)^2 I). Reports near-singularity
/// instead of returning garbage when the resolvent conditioning exceeds the
/// configured limit.
template <typename Scalar>
Eigen::MatrixX<std::complex<Scalar>> greens_dense_inverse(const ChainSpec<Scalar>& spec,
                                                          Scalar omega, Scalar epsilon,
                                                          const OracleConfig<Scalar>& config = {}) {
  validate(spec);
  if (spec.n > config.max_n)
    throw std::invalid_argument("greens_dense_inverse: n exceeds the dense-operation guard");
  const std::complex<Scalar> z(omega, epsilon);
  detail::require_resolvent_conditioning(spec, z, config.condition_limit);
  Eigen::MatrixX<std::complex<Scalar>> a =
      build_l_matrix(spec).template cast<std::complex<Scalar>>();
  a.diagonal().array() -= z * z;
  return a.partialPivLu().inverse();
}

/// Dense inverse of (Lambda^{-1} K - (omega + i epsilon)^2 I), the resolvent
/// of the true displacements. Equals Lambda^{-1/2} script-G Lambda^{1/2}.
template <typename Scalar>
Eigen::MatrixX<std::complex<Scalar>> greens_true_dense(const ChainSpec<Scalar>& spec, Scalar omega,
                                                       Scalar epsilon,
                                                       const OracleConfig<Scalar>& config = {}) {
  validate(spec);
  if (spec.n > config.max_n)
    throw std::invalid_argument("greens_true_dense: n exceeds the dense-operation guard");
  const std::complex<Scalar> z(omega, epsilon);
  detail::require_resolvent_conditioning(spec, z, config.condition_limit);
  Eigen::MatrixX<std::complex<Scalar>> a =
      detail::build_dynamic_matrix(spec).template cast<std::complex<Scalar>>();
  a.diagonal().array() -= z * z;
  return a.partialPivLu().inverse();
}

template <typename Scalar = double>
struct ForceCheckReport {
  Scalar max_rel_error{};
  Scalar tol{};
  bool passed{};
};

/// Verifies the equations of motion: the matrix force -Lambda^{-1} K u must
/// match the central finite-difference gradient of the Hamiltonian site sum,
/// divided by m0 xi^{2p}. One Richardson refinement removes the leading
/// O(h^2) term of the central difference.
template <typename Scalar, typename Derived>
ForceCheckReport<Scalar> hamiltonian_force_check(const ChainSpec<Scalar>& spec,
                                                 const Eigen::MatrixBase<Derived>& u, Scalar tol,
                                                 Scalar fd_step = Scalar(1e-6)) {
  validate(spec);
  if (u.size() != spec.n)
    throw std::invalid_argument("hamiltonian_force_check: displacement vector must have length n");

  const Eigen::MatrixX<Scalar> dyn = detail::build_dynamic_matrix(spec);
  const Eigen::VectorX<Scalar> uv = u;
  const Eigen::VectorX<Scalar> f_model = -(dyn * uv);

  const Eigen::ArrayX<Scalar> mass = spec.m0 * detail::grading_powers(spec, Scalar(2));
  Eigen::VectorX<Scalar> f_fd(spec.n);
  Eigen::VectorX<Scalar> probe = uv;
  for (Eigen::Index p = 0; p < spec.n; ++p) {
    const Scalar h = fd_step * (std::abs(uv[p]) + Scalar(1));
    auto central = [&](Scalar step) {
      probe[p] = uv[p] + step;
      const Scalar plus = hamiltonian_potential(spec, probe);
      probe[p] = uv[p] - step;
      const Scalar minus = hamiltonian_potential(spec, probe);
      probe[p] = uv[p];
      return (plus - minus) / (Scalar(2) * step);
    };
    const Scalar coarse = central(h);
    const Scalar fine = central(h / Scalar(2));
    const Scalar grad = (Scalar(4) * fine - coarse) / Scalar(3);
    f_fd[p] = -grad / mass[p];
  }

  const Scalar floor = std::numeric_limits<Scalar>::epsilon() * spec.omega0 * spec.omega0 *
                       (uv.cwiseAbs().maxCoeff() + Scalar(1));
  const Scalar scale = std::max({f_model.cwiseAbs().maxCoeff(), f_fd.cwiseAbs().maxCoeff(), floor});

  ForceCheckReport<Scalar> report;
  report.tol = tol;
  report.max_rel_error = (f_model - f_fd).cwiseAbs().maxCoeff() / scale;
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace gradchain
