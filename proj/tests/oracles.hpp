// Test-side reference implementations, kept independent of the library code
// paths they are used to check.
#pragma once

#include <Eigen/Dense>
#include <functional>

namespace test_oracles {

// Classical fixed-step RK4 for u'' = A u, integrating the first-order system
// (u, v). Calls `observe(step, u)` after every step.
inline void rk4_second_order(const Eigen::MatrixXd& a, Eigen::VectorXd u, Eigen::VectorXd v,
                             double dt, long steps,
                             const std::function<void(long, const Eigen::VectorXd&,
                                                      const Eigen::VectorXd&)>& observe) {
  const auto accel = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; };
  for (long s = 1; s <= steps; ++s) {
    const Eigen::VectorXd k1u = v, k1v = accel(u);
    const Eigen::VectorXd k2u = v + 0.5 * dt * k1v, k2v = accel(u + 0.5 * dt * k1u);
    const Eigen::VectorXd k3u = v + 0.5 * dt * k2v, k3v = accel(u + 0.5 * dt * k2u);
    const Eigen::VectorXd k4u = v + dt * k3v, k4v = accel(u + dt * k3u);
    u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    observe(s, u, v);
  }
}

}  // namespace test_oracles
