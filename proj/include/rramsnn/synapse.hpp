#pragma once

// Synapse backends behind one read/update interface:
//   Ideal         continuous conductance, training STDP rule
//   Quantized     as Ideal, rounded to one of n levels after every update
//   SingleDevice  one RRAM driven through a device interpolation table
//   MultiRram     M RRAMs read as their mean, one random device written per update
// Stored conductances are normalized to [0, 1]; read() scales by g_max.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "rramsnn/device.hpp"
#include "rramsnn/rng.hpp"
#include "rramsnn/stdp.hpp"

namespace rramsnn {

struct IdealSynapse {
  double g = 0.0;
  StdpParams params;
};

struct QuantizedSynapse {
  double g = 0.0;
  std::size_t levels = 256;
  StdpParams params;
};

struct SingleDeviceSynapse {
  double g = 0.0;
  std::shared_ptr<const DeviceTable> table;
  double g_max = 1.0;
};

struct MultiRramSynapse {
  std::vector<double> g;  // one entry per device
  std::shared_ptr<const DeviceTable> table;
  double g_max = 1.0;
};

using SynapseModel = std::variant<IdealSynapse, QuantizedSynapse, SingleDeviceSynapse, MultiRramSynapse>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Synaptic conductance in units of g_max.
inline double read(const SynapseModel& s) {
  return std::visit(overloaded{
                        [](const IdealSynapse& x) { return x.params.g_max * x.g; },
                        [](const QuantizedSynapse& x) { return x.params.g_max * x.g; },
                        [](const SingleDeviceSynapse& x) { return x.g_max * x.g; },
                        [](const MultiRramSynapse& x) {
                          return x.g_max * std::accumulate(x.g.begin(), x.g.end(), 0.0) / static_cast<double>(x.g.size());
                        },
                    },
                    s);
}

/// Number of physical devices behind the synapse (1 for the math backends).
inline std::size_t device_count(const SynapseModel& s) {
  if (const auto* m = std::get_if<MultiRramSynapse>(&s)) return m->g.size();
  return 1;
}

namespace detail {

// Ideal/quantized backends store g normalized; the rule works in absolute units.
inline double ideal_step(double g_norm, double dt, const StdpParams& p) {
  const double g_abs = std::clamp(g_norm * p.g_max, p.g_min, p.g_max);
  return std::clamp((g_abs + delta_g_train(dt, g_abs, p)) / p.g_max, 0.0, 1.0);
}

inline double device_step(double g, double dt, const DeviceTable& table) {
  return std::clamp(g + interpolate(table, dt, g), 0.0, 1.0);
}

}  // namespace detail

/// Applies one STDP pairing. Only MultiRram consumes randomness: it draws
/// the written device uniformly from its M devices.
inline void update(SynapseModel& s, double dt, Rng& rng) {
  std::visit(overloaded{
                 [&](IdealSynapse& x) { x.g = detail::ideal_step(x.g, dt, x.params); },
                 [&](QuantizedSynapse& x) {
                   x.g = quantize(detail::ideal_step(x.g, dt, x.params), x.levels);
                 },
                 [&](SingleDeviceSynapse& x) { x.g = detail::device_step(x.g, dt, *x.table); },
                 [&](MultiRramSynapse& x) {
                   const std::size_t k = uniform_index(rng, x.g.size());
                   x.g[k] = detail::device_step(x.g[k], dt, *x.table);
                 },
             },
             s);
}

/// Write index for a MultiRram update through the selection latch instead of
/// the direct uniform draw; see select_index.
inline void update_device(MultiRramSynapse& s, std::size_t k, double dt) {
  s.g.at(k) = detail::device_step(s.g[k], dt, *s.table);
}

/// Behavioral model of the write-selection circuit: global one-hot row and
/// column line sets advance periodically and each neuron's latch copies them
/// at its spike edge. The row set advances every `line_period`; the column
/// set every `col_period` (defaults to m1 * line_period, so the pair walks
/// through all m1 * m2 cross-points).
struct SelectionScheme {
  std::size_t m1 = 1;
  std::size_t m2 = 1;
  double line_period = 1.0;  // ms
  double row_phase = 0.0;    // ms
  double col_phase = 0.0;    // ms
  double col_period = 0.0;   // ms; 0 selects m1 * line_period

  static SelectionScheme for_devices(std::size_t m1, std::size_t m2, double line_period = 1.0) {
    SelectionScheme s;
    s.m1 = m1;
    s.m2 = m2;
    s.line_period = line_period;
    return s;
  }

  std::size_t devices() const { return m1 * m2; }

  double effective_col_period() const {
    return col_period > 0.0 ? col_period : line_period * static_cast<double>(m1);
  }

  void validate() const {
    if (m1 == 0 || m2 == 0) throw std::invalid_argument("selection: m1, m2 must be >= 1");
    if (!(line_period > 0.0) || col_period < 0.0) throw std::invalid_argument("selection: periods must be > 0");
  }
};

struct CrossPoint {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const CrossPoint&, const CrossPoint&) = default;
};

inline CrossPoint select_index(const SelectionScheme& s, double spike_time) {
  if (spike_time < 0.0) throw std::domain_error("select_index: spike time must be >= 0");
  const auto row_tick = static_cast<std::size_t>(std::floor((spike_time + s.row_phase) / s.line_period));
  const auto col_tick = static_cast<std::size_t>(std::floor((spike_time + s.col_phase) / s.effective_col_period()));
  return {row_tick % s.m1, col_tick % s.m2};
}

/// Flat device index of a cross-point within an m1 x m2 synapse.
inline std::size_t device_index(const SelectionScheme& s, CrossPoint p) { return p.row * s.m2 + p.col; }

}  // namespace rramsnn
