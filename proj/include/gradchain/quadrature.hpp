#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "gradchain/errors.hpp"

namespace gradchain {

template <typename Scalar = double>
struct QuadratureConfig {
  Scalar rel_tol{1e-10};
  Scalar abs_tol{0};
  int max_depth{24};
};

template <typename Scalar = double>
struct QuadratureResult {
  Scalar value{};
  Scalar error_estimate{};
  int evaluations{};
};

namespace detail {

// Gauss-Kronrod 7-15 pair; columns: abscissa, Gauss-7 weight, Kronrod-15 weight.
inline constexpr double kG7K15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.000000000000000, 0.204432940075298},
    {0.586087235467691, 0.000000000000000, 0.169004726639267},
    {0.864864423359769, 0.000000000000000, 0.104790010322250},
    {0.991455371120813, 0.000000000000000, 0.022935322010529},
};

template <typename Scalar, typename F>
void g7k15(F&& f, Scalar a, Scalar b, Scalar& k15, Scalar& err) {
  const Scalar mid = (a + b) / Scalar(2);
  const Scalar half = (b - a) / Scalar(2);
  const Scalar f0 = f(mid);
  Scalar g7 = Scalar(kG7K15[0][1]) * f0;
  k15 = Scalar(kG7K15[0][2]) * f0;
  for (int i = 1; i < 8; ++i) {
    const Scalar dx = half * Scalar(kG7K15[i][0]);
    const Scalar pair = f(mid + dx) + f(mid - dx);
    g7 += Scalar(kG7K15[i][1]) * pair;
    k15 += Scalar(kG7K15[i][2]) * pair;
  }
  g7 *= half;
  k15 *= half;
  err = std::abs(k15 - g7);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b]. Endpoints are never
/// evaluated (the Kronrod nodes are interior). Throws QuadratureFailure when
/// the error estimate cannot be pushed below rel_tol * |value| + abs_tol
/// within the subdivision budget.
template <typename Scalar, typename F>
QuadratureResult<Scalar> integrate_adaptive(F&& f, Scalar a, Scalar b,
                                            const QuadratureConfig<Scalar>& config = {}) {
  struct Interval {
    Scalar a, b, value, error;
    int depth;
  };

  QuadratureResult<Scalar> result;
  Scalar v0, e0;
  detail::g7k15(f, a, b, v0, e0);
  result.evaluations = 15;

  std::vector<Interval> stack{{a, b, v0, e0, 0}};
  Scalar total = v0, total_err = e0;
  while (!stack.empty()) {
    const Scalar budget =
        config.abs_tol + config.rel_tol * std::abs(total);
    if (total_err <= budget) break;

    // split the interval with the largest error estimate
    std::size_t worst = 0;
    for (std::size_t i = 1; i < stack.size(); ++i)
      if (stack[i].error > stack[worst].error) worst = i;
    Interval cur = stack[worst];
    stack[worst] = stack.back();
    stack.pop_back();

    if (cur.depth >= config.max_depth)
      throw QuadratureFailure("integrate_adaptive: depth budget exhausted with error estimate " +
                              std::to_string(double(total_err)) + " above the requested tolerance");

    const Scalar mid = (cur.a + cur.b) / Scalar(2);
    Interval left{cur.a, mid, 0, 0, cur.depth + 1};
    Interval right{mid, cur.b, 0, 0, cur.depth + 1};
    detail::g7k15(f, left.a, left.b, left.value, left.error);
    detail::g7k15(f, right.a, right.b, right.value, right.error);
    result.evaluations += 30;

    total += left.value + right.value - cur.value;
    total_err += left.error + right.error - cur.error;
    stack.push_back(left);
    stack.push_back(right);
  }

  result.value = total;
  result.error_estimate = total_err;
  if (total_err > config.abs_tol + config.rel_tol * std::abs(total))
    throw QuadratureFailure("integrate_adaptive: error estimate " +
                            std::to_string(double(total_err)) + " above the requested tolerance");
  return result;
}

}  // namespace gradchain
