#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "gradchain/chain.hpp"
#include "gradchain/errors.hpp"
#include "gradchain/greens.hpp"

namespace gradchain {

template <typename Scalar = double>
struct InitialConditions {
  Eigen::VectorX<Scalar> u0;  ///< displacements [m]
  Eigen::VectorX<Scalar> v0;  ///< velocities [m/s]
};

enum class ZeroModePolicy {
  LinearDrift,  ///< evolve the zero mode as y(t) = y(0) + t ydot(0) (uniform translation)
  Reject        ///< throw ZeroModeError instead
};

/// Modal amplitudes of u_p(t) = xi^{-p}/sqrt(N) sum_m (A_m e^{i(k_m p - w_m t)}
/// + B_m e^{i(k_m p + w_m t)}). For real initial data the coefficients pair up
/// across m <-> N-m so that the reconstruction stays real.
template <typename Scalar = double>
struct ModalCoefficients {
  Eigen::VectorX<std::complex<Scalar>> a, b;
  bool has_zero_mode{false};
  std::complex<Scalar> zero_offset{}, zero_rate{};  ///< linear branch of the zero mode
};

template <typename Scalar = double>
struct TimeSignal {
  Eigen::VectorX<Scalar> times;   ///< uniformly sampled [s]
  Eigen::VectorX<Scalar> values;
};

namespace detail {

template <typename Scalar>
Scalar zero_mode_tol(const ChainSpec<Scalar>& spec) {
  return Scalar(1e-12) * spec.upper_band_edge();
}

}  // namespace detail

/// Projects the initial data onto the Bloch modes of y = Lambda^{1/2} u and
/// solves A_m + B_m = y_m(0), -i w_m (A_m - B_m) = ydot_m(0). The
/// homogeneous-chain zero mode (w_0 = 0) is kept as the uniform translation
/// y_0(t) = y_0(0) + t ydot_0(0) under the default policy.
template <typename Scalar>
ModalCoefficients<Scalar> fit_modal_coefficients(const ChainSpec<Scalar>& spec,
                                                 const InitialConditions<Scalar>& ic,
                                                 ZeroModePolicy policy = ZeroModePolicy::LinearDrift) {
  validate(spec);
  if (ic.u0.size() != spec.n || ic.v0.size() != spec.n)
    throw std::invalid_argument("InitialConditions: u0 and v0 must have length n");
  if (!ic.u0.allFinite() || !ic.v0.allFinite())
    throw std::invalid_argument("InitialConditions: entries must be finite");

  const auto spectrum = dispersion(spec);
  const auto bloch = bloch_eigenvectors(spec);
  const Eigen::ArrayX<Scalar> scale = detail::grading_powers(spec, Scalar(1));  // xi^p

  using C = std::complex<Scalar>;
  const Eigen::VectorX<C> y0 = (scale * ic.u0.array()).matrix().template cast<C>();
  const Eigen::VectorX<C> ydot0 = (scale * ic.v0.array()).matrix().template cast<C>();
  const Eigen::VectorX<C> yhat = bloch.adjoint() * y0;
  const Eigen::VectorX<C> ydothat = bloch.adjoint() * ydot0;

  ModalCoefficients<Scalar> coeffs;
  coeffs.a.setZero(spec.n);
  coeffs.b.setZero(spec.n);
  const Scalar tol = detail::zero_mode_tol(spec);
  for (Eigen::Index m = 0; m < spec.n; ++m) {
    const Scalar w = spectrum.frequencies[m];
    if (w <= tol) {
      if (policy == ZeroModePolicy::Reject)
        throw ZeroModeError("fit_modal_coefficients: zero mode at m = " + std::to_string(m) +
                            " (homogeneous chain); division by omega_m is undefined");
      coeffs.has_zero_mode = true;
      coeffs.zero_offset = yhat[m];
      coeffs.zero_rate = ydothat[m];
      continue;
    }
    const C correction = C(0, 1) * ydothat[m] / w;
    coeffs.a[m] = (yhat[m] + correction) / Scalar(2);
    coeffs.b[m] = (yhat[m] - correction) / Scalar(2);
  }
  return coeffs;
}

namespace detail {

template <typename Scalar>
Eigen::VectorX<std::complex<Scalar>> modal_amplitudes(const ChainSpec<Scalar>& spec,
                                                      const ModalCoefficients<Scalar>& coeffs,
                                                      Scalar t, bool velocity) {
  using C = std::complex<Scalar>;
  const auto spectrum = dispersion(spec);
  Eigen::VectorX<C> yhat(spec.n);
  const Scalar tol = zero_mode_tol(spec);
  for (Eigen::Index m = 0; m < spec.n; ++m) {
    const Scalar w = spectrum.frequencies[m];
    if (coeffs.has_zero_mode && w <= tol) {
      yhat[m] = velocity ? coeffs.zero_rate : coeffs.zero_offset + t * coeffs.zero_rate;
      continue;
    }
    const C backward = std::polar(Scalar(1), -w * t);  // e^{-i w t}
    const C forward = std::polar(Scalar(1), w * t);
    yhat[m] = velocity ? C(0, -w) * coeffs.a[m] * backward + C(0, w) * coeffs.b[m] * forward
                       : coeffs.a[m] * backward + coeffs.b[m] * forward;
  }
  return yhat;
}

}  // namespace detail

/// u(t); the imaginary residue is a solver diagnostic and stays below 1e-10
/// for real initial data.
template <typename Scalar>
Eigen::VectorX<std::complex<Scalar>> evolve(const ChainSpec<Scalar>& spec,
                                            const ModalCoefficients<Scalar>& coeffs, Scalar t) {
  validate(spec);
  const auto bloch = bloch_eigenvectors(spec);
  const Eigen::ArrayX<Scalar> inv_scale = detail::grading_powers(spec, Scalar(-1));  // xi^{-p}
  Eigen::VectorX<std::complex<Scalar>> y = bloch * detail::modal_amplitudes(spec, coeffs, t, false);
  return (y.array() * inv_scale.template cast<std::complex<Scalar>>()).matrix();
}

/// du/dt(t).
template <typename Scalar>
Eigen::VectorX<std::complex<Scalar>> evolve_velocity(const ChainSpec<Scalar>& spec,
                                                     const ModalCoefficients<Scalar>& coeffs,
                                                     Scalar t) {
  validate(spec);
  const auto bloch = bloch_eigenvectors(spec);
  const Eigen::ArrayX<Scalar> inv_scale = detail::grading_powers(spec, Scalar(-1));
  Eigen::VectorX<std::complex<Scalar>> y = bloch * detail::modal_amplitudes(spec, coeffs, t, true);
  return (y.array() * inv_scale.template cast<std::complex<Scalar>>()).matrix();
}

/// Evaluates the modal expansion at an arbitrary integer site index, also
/// outside [0, N): the formula continues the solution with
/// u_{p+N}(t) = xi^{-N} u_p(t).
template <typename Scalar>
std::complex<Scalar> evolve_at_site(const ChainSpec<Scalar>& spec,
                                    const ModalCoefficients<Scalar>& coeffs, Scalar t,
                                    long site) {
  validate(spec);
  using C = std::complex<Scalar>;
  const auto spectrum = dispersion(spec);
  const auto yhat = detail::modal_amplitudes(spec, coeffs, t, false);
  C acc{};
  for (Eigen::Index m = 0; m < spec.n; ++m)
    acc += yhat[m] * std::polar(Scalar(1), spectrum.wavenumbers[m] * Scalar(site));
  detail::require_grading_range(spec.xi, std::abs(double(site)), "evolve_at_site");
  return acc / std::sqrt(Scalar(spec.n)) * std::pow(spec.xi, -Scalar(site));
}

/// Total energy through the quadratic form in y = Lambda^{1/2} u,
/// H = (m0/2)(ydot.ydot + y.L.y).
template <typename Scalar, typename D1, typename D2>
Scalar total_energy(const ChainSpec<Scalar>& spec, const Eigen::MatrixBase<D1>& u,
                    const Eigen::MatrixBase<D2>& u_dot) {
  validate(spec);
  if (u.size() != spec.n || u_dot.size() != spec.n)
    throw std::invalid_argument("total_energy: vectors must have length n");
  const Eigen::ArrayX<Scalar> scale = detail::grading_powers(spec, Scalar(1));
  const Eigen::VectorX<Scalar> y = (scale * u.derived().array().template cast<Scalar>()).matrix();
  const Eigen::VectorX<Scalar> ydot =
      (scale * u_dot.derived().array().template cast<Scalar>()).matrix();
  const Eigen::MatrixX<Scalar> l = build_l_matrix(spec);
  return Scalar(0.5) * spec.m0 * (ydot.squaredNorm() + y.dot(l * y));
}

/// Same energy as the per-site sum of the Hamiltonian (kinetic + bond terms);
/// agrees with the quadratic form to rounding.
template <typename Scalar, typename D1, typename D2>
Scalar total_energy_site_sum(const ChainSpec<Scalar>& spec, const Eigen::MatrixBase<D1>& u,
                             const Eigen::MatrixBase<D2>& u_dot) {
  validate(spec);
  if (u.size() != spec.n || u_dot.size() != spec.n)
    throw std::invalid_argument("total_energy_site_sum: vectors must have length n");
  const Eigen::ArrayX<Scalar> weights = detail::grading_powers(spec, Scalar(2));
  const Scalar kinetic = Scalar(0.5) * spec.m0 *
                         (weights * u_dot.derived().array().square()).sum();
  return kinetic + hamiltonian_potential(spec, u.derived());
}

/// Sampling plan for the inverse-Fourier synthesis of the time-domain
/// Green's function. num_samples frequencies cover [0, omega_max] on the
/// positive side; the window length is T = pi num_samples / omega_max.
template <typename Scalar = double>
struct FftConfig {
  Scalar omega_max{};     ///< grid extent; must be >= 8 Omega_D
  Scalar epsilon{};       ///< damping of the sampled resolvent
  Eigen::Index num_samples{};  ///< total FFT length (power of two recommended)

  Scalar delta_omega() const { return Scalar(2) * omega_max / Scalar(num_samples); }
  Scalar window() const { return Scalar(2) * Scalar(EIGEN_PI) / delta_omega(); }

  /// Documented default trade-off: epsilon = Omega_D / 100 and a window of
  /// 50 / epsilon, so the signal decays by e^{-50} before it wraps.
  static FftConfig defaults_for(const ChainSpec<Scalar>& spec) {
    FftConfig cfg;
    const Scalar hi = spec.upper_band_edge();
    cfg.epsilon = hi / Scalar(100);
    const Scalar target_window = Scalar(50) / cfg.epsilon;
    const Scalar delta = Scalar(2) * Scalar(EIGEN_PI) / target_window;
    Eigen::Index m = 2;
    while (Scalar(m) * delta / Scalar(2) < Scalar(8) * hi) m *= 2;
    cfg.num_samples = m;
    cfg.omega_max = Scalar(m) * delta / Scalar(2);
    return cfg;
  }
};

/// Causal time-domain Green's function entry by inverse Fourier synthesis of
/// the closed form sampled at omega + i epsilon. Negative frequencies come
/// from Hermitian symmetry, so the output is real. The diagonal's free-mass
/// tail -1/(omega + i eps)^2 is subtracted before the transform and its exact
/// inverse t e^{-eps t} Theta(t) added back, which removes the slow 1/omega^2
/// truncation ringing from the t < 0 samples. Times are returned in
/// [-T/2, T/2).
template <typename Scalar>
TimeSignal<Scalar> greens_time_domain(const ChainSpec<Scalar>& spec, Eigen::Index p, Eigen::Index q,
                                      const FftConfig<Scalar>& config) {
  validate(spec);
  using C = std::complex<Scalar>;
  const Scalar hi = spec.upper_band_edge();
  if (!(config.omega_max >= Scalar(8) * hi))
    throw std::invalid_argument("FftConfig: omega_max must be >= 8 Omega_D");
  if (!(config.epsilon > Scalar(0)) || config.num_samples < 8 || config.num_samples % 2 != 0)
    throw std::invalid_argument("FftConfig: epsilon > 0 and even num_samples >= 8 required");
  const Scalar window = config.window();
  if (config.epsilon * window < Scalar(10))
    throw AliasingError("greens_time_domain: epsilon-decay time exceeds the FFT window "
                        "(epsilon * T = " +
                        std::to_string(double(config.epsilon * window)) + " < 10)");

  const Eigen::Index m = config.num_samples;
  const Scalar dw = config.delta_omega();
  const bool diagonal = (p == q);

  std::vector<C> spectrum_samples(m);
  for (Eigen::Index j = 0; j <= m / 2; ++j) {
    const Scalar w = Scalar(j) * dw;
    C val = greens_closed_form_shifted(spec, w, config.epsilon, p, q);
    if (diagonal) {
      const C z(w, config.epsilon);
      val += Scalar(1) / (z * z);  // remove the -1/z^2 free-mass asymptote
    }
    if (j == m / 2) val = C(val.real(), 0);  // Nyquist bin must be real
    spectrum_samples[std::size_t(j)] = val;
  }
  for (Eigen::Index j = m / 2 + 1; j < m; ++j)
    spectrum_samples[std::size_t(j)] = std::conj(spectrum_samples[std::size_t(m - j)]);

  // e^{-i w t} synthesis kernel == forward DFT convention
  Eigen::FFT<Scalar> fft;
  std::vector<C> transformed(m);
  fft.fwd(transformed, spectrum_samples);

  const Scalar dt = window / Scalar(m);
  TimeSignal<Scalar> signal;
  signal.times.resize(m);
  signal.values.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index n_fft = (i + m / 2) % m;           // reorder to [-T/2, T/2)
    const Scalar t = Scalar(i - m / 2) * dt;
    Scalar value = (transformed[std::size_t(n_fft)] * dw / (Scalar(2) * Scalar(EIGEN_PI))).real();
    if (diagonal && t >= Scalar(0)) value += t * std::exp(-config.epsilon * t);
    signal.times[i] = t;
    signal.values[i] = value;
  }
  return signal;
}

}  // namespace gradchain
