#pragma once

#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "lossgame/core.hpp"

namespace lossgame {

/// Erlang-B blocking probability for an M-server loss system at offered
/// load a (erlangs), via the overflow-stable inverse recursion.
/// Conventions: B(0, a) = 1 for a > 0, B(M, 0) = 0 for M >= 1, B(0, 0) = 1.
inline double erlang_b(int servers, double load) {
  if (servers < 0)
    throw std::invalid_argument("erlang_b: server count must be non-negative");
  if (!(load >= 0.0))
    throw std::domain_error("erlang_b: load must be non-negative");
  if (servers == 0) return 1.0;
  if (load == 0.0) return 0.0;
  double inv = 1.0;
  for (int m = 1; m <= servers; ++m) inv = 1.0 + (static_cast<double>(m) / load) * inv;
  return 1.0 / inv;
}

/// Continuous-server Erlang-B via the integral representation
///   1/B = a * Integral_0^inf (1+t)^k e^{-a t} dt,
/// evaluated after the substitution u = a t in log space so the integrand
/// decays like e^{-u} uniformly in (k, a).
inline double erlang_b_real(double servers, double load) {
  if (!(servers >= 0.0))
    throw std::domain_error("erlang_b_real: servers must be non-negative");
  if (!(load >= 0.0))
    throw std::domain_error("erlang_b_real: load must be non-negative");
  if (load == 0.0) return servers > 0.0 ? 0.0 : 1.0;
  if (servers == 0.0) return 1.0;

  const double k = servers;
  const double a = load;
  const double peak = std::max(0.0, k - a);
  const double shift = k * std::log1p(peak / a) - peak;
  auto g = [&](double u) { return std::exp(k * std::log1p(u / a) - u - shift); };

  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  const double integral = integrator.integrate(g, 1e-12, &err);
  if (!std::isfinite(integral) || !(integral > 0.0) || err > 1e-8)
    throw numerical_error("erlang_b_real: quadrature did not converge");
  const double b = std::exp(-(shift + std::log(integral)));
  return b < 0.0 ? 0.0 : (b > 1.0 ? 1.0 : b);
}

}  // namespace lossgame
