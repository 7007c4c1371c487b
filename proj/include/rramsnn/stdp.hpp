#pragma once

// Exponential STDP rules and conductance-level quantization.
//
// Timing convention for the training rule: dt = t_post - t_pre, dt >= 0 is
// causal and potentiates. Magnitudes decay with |dt| on both branches.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace rramsnn {

struct StdpParams {
  double a_plus = 0.01;   // fraction of g_max
  double a_minus = 0.01;  // fraction of g_max
  double tau_plus = 50.0;  // ms
  double tau_minus = 50.0; // ms
  double p = 1.0;          // saturation exponent
  double g_max = 1.0;
  double g_min = 0.0;

  void validate() const {
    if (a_plus < 0.0 || a_minus < 0.0) throw std::invalid_argument("stdp: a_plus/a_minus must be >= 0");
    if (!(tau_plus > 0.0) || !(tau_minus > 0.0)) throw std::invalid_argument("stdp: time constants must be > 0");
    if (p < 0.0) throw std::invalid_argument("stdp: p must be >= 0");
    if (!(g_max > g_min)) throw std::invalid_argument("stdp: g_max must exceed g_min");
  }

  /// Largest single-update change, reached at dt = 0 from the far rail.
  double learning_rate() const { return std::max(a_plus, a_minus); }
};

/// Weight change of the training rule for a pairing at `dt` ms and current
/// conductance `g`. The result keeps g + dG inside [g_min, g_max].
inline double delta_g_train(double dt, double g, const StdpParams& prm) {
  if (!(g >= prm.g_min && g <= prm.g_max)) throw std::domain_error("delta_g_train: g out of range");
  const double rel = g / prm.g_max;
  double dg = 0.0;
  if (dt >= 0.0) {
    dg = prm.a_plus * prm.g_max * std::exp(-dt / prm.tau_plus) * std::pow(1.0 - rel, prm.p);
  } else {
    dg = -prm.a_minus * prm.g_max * std::exp(dt / prm.tau_minus) * std::pow(rel, prm.p);
  }
  return std::clamp(g + dg, prm.g_min, prm.g_max) - g;
}

/// Saturating bi-exponential rule used for illustration plots. Follows the
/// printed branch assignment: dt < 0 uses the positive amplitude, dt > 0 the
/// negative one.
struct BiPooParams {
  double a_plus = 1.0;
  double a_minus = -1.0;
  double tau_plus = 50.0;
  double tau_minus = 50.0;
  double sat_plus = 1.5;
  double sat_minus = 1.5;

  void validate() const {
    if (!(a_plus > 0.0 && a_minus <= 0.0)) throw std::invalid_argument("bipoo: need a_plus > 0 >= a_minus");
    if (!(tau_plus > 0.0) || !(tau_minus > 0.0)) throw std::invalid_argument("bipoo: time constants must be > 0");
  }
};

inline double saturation_plus(double g, const BiPooParams& prm) { return std::pow(1.0 - g, prm.sat_plus); }
inline double saturation_minus(double g, const BiPooParams& prm) { return std::pow(g, prm.sat_minus); }

/// dt == 0 lies on neither branch and yields 0.
inline double delta_g_bipoo(double dt, double g, const BiPooParams& prm) {
  if (!(g >= 0.0 && g <= 1.0)) throw std::domain_error("delta_g_bipoo: g out of range");
  if (dt < 0.0) return prm.a_plus * saturation_plus(g, prm) * std::exp(dt / prm.tau_plus);
  if (dt > 0.0) return prm.a_minus * saturation_minus(g, prm) * std::exp(-dt / prm.tau_minus);
  return 0.0;
}

/// Nearest of n_levels uniformly spaced levels on [g_min, g_max]; exact
/// midpoints go to the higher level.
inline double quantize(double g, std::size_t n_levels, double g_min = 0.0, double g_max = 1.0) {
  if (n_levels < 2) throw std::invalid_argument("quantize: need at least 2 levels");
  if (!(g >= g_min && g <= g_max)) throw std::domain_error("quantize: g out of range");
  const double step = (g_max - g_min) / static_cast<double>(n_levels - 1);
  auto idx = static_cast<std::size_t>(std::floor((g - g_min) / step + 0.5));
  idx = std::min(idx, n_levels - 1);
  if (idx == n_levels - 1) return g_max;
  return g_min + (g_max - g_min) * static_cast<double>(idx) / static_cast<double>(n_levels - 1);
}

}  // namespace rramsnn
