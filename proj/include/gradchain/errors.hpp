#pragma once

#include <stdexcept>
#include <string>

namespace gradchain {

/// Requested evaluation sits on (or within the guard distance of) a band
/// edge, where the dispersion coefficient |a| = 1 and sin(phi) / sinh(chi)
/// vanish. Green's functions and the mode density diverge there.
struct BandEdgeSingularity : std::domain_error {
  using std::domain_error::domain_error;
};

/// A grading power xi^k left the representable floating-point range. This is
/// exact model behaviour (the grading is exponential), not a numerical bug,
/// so it is reported instead of producing silent infinities or zeros.
struct GradingOverflow : std::range_error {
  using std::range_error::range_error;
};

/// The homogeneous chain (xi = 1) carries a zero-frequency uniform
/// translation mode; operations that divide by omega_m must treat it
/// separately or reject it.
struct ZeroModeError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Adaptive quadrature could not push the error estimate below the
/// requested tolerance within the subdivision budget.
struct QuadratureFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Resolvent conditioning beyond the configured limit; expected exactly at
/// eigenfrequencies when the damping epsilon is tiny.
struct NearSingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The frequency-grid window is too short for the e^{-epsilon t} decay of
/// the synthesized signal; the inverse transform would alias.
struct AliasingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gradchain
