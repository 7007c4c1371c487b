#pragma once

// RRAM device model: shaped write pulses, the net voltage a synapse sees for
// a pre/post pair, threshold overdrive, the resulting conductance change, an
// emulation of the random-dt characterization loop and the gridded
// interpolation table built from it.
//
// Times are in ms (1 us = 1e-3 ms), voltages in V, conductance normalized
// to [0, 1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rramsnn/csv.hpp"
#include "rramsnn/rng.hpp"

namespace rramsnn {

/// How the negative tail of a write pulse falls off. `Normalized` subtracts
/// exp(-T_n / tau_n) so the tail reaches exactly zero at T_n; `Exponential`
/// keeps the pure exponential and truncates at T_n.
enum class TailShape { Exponential, Normalized };

struct WritePulseParams {
  double amp_pos = 1.0;     // A_p, V
  double amp_neg = -1.0;    // A_n, V
  double dur_pos = 1.0e-3;  // T_p, ms
  double dur_neg = 100.0;   // T_n, ms
  double tau_pos = 0.5e-3;  // tau_p, ms
  double tau_neg = 50.0;    // tau_n, ms
  TailShape tail = TailShape::Exponential;

  void validate() const {
    if (!(amp_pos > 0.0 && amp_neg < 0.0)) throw std::invalid_argument("write pulse: need A_p > 0 > A_n");
    if (!(dur_pos > 0.0 && dur_neg > 0.0 && tau_pos > 0.0 && tau_neg > 0.0))
      throw std::invalid_argument("write pulse: durations and decay constants must be > 0");
  }
};

/// Reference write pulse; pre and post neurons use the same shape.
inline WritePulseParams default_pulse(TailShape tail = TailShape::Exponential) {
  WritePulseParams p;
  p.tail = tail;
  return p;
}

namespace detail {

enum class Limit { Exact, FromLeft, FromRight };

// Pulse value with optional one-sided limits at the branch boundaries.
inline double pulse_value(double t, const WritePulseParams& w, Limit lim) {
  const bool in_ramp = lim == Limit::FromLeft ? (t > -w.dur_pos && t <= 0.0) : (t >= -w.dur_pos && t < 0.0);
  const bool in_tail = lim == Limit::FromLeft ? (t > 0.0 && t <= w.dur_neg)
                       : lim == Limit::FromRight ? (t >= 0.0 && t < w.dur_neg)
                                                 : (t > 0.0 && t <= w.dur_neg);
  if (in_ramp) {
    const double floor = std::exp(-w.dur_pos / w.tau_pos);
    return w.amp_pos * (std::exp(t / w.tau_pos) - floor) / (1.0 - floor);
  }
  if (in_tail) {
    if (w.tail == TailShape::Exponential) return w.amp_neg * std::exp(-t / w.tau_neg);
    const double floor = std::exp(-w.dur_neg / w.tau_neg);
    return w.amp_neg * (std::exp(-t / w.tau_neg) - floor) / (1.0 - floor);
  }
  return 0.0;
}

}  // namespace detail

/// Write-pulse voltage at time t relative to the spike: a rising exponential
/// ramp on [-T_p, 0) that reaches A_p as t -> 0-, a negative tail on
/// (0, T_n] starting at A_n, zero elsewhere.
inline double pulse_voltage(double t, const WritePulseParams& w) {
  return detail::pulse_value(t, w, detail::Limit::Exact);
}

/// Voltage across the device when the pre neuron spikes at 0 and the post
/// neuron at dt: V_pre(t) - V_post(t - dt).
inline double net_voltage(double dt, double t, const WritePulseParams& pre, const WritePulseParams& post) {
  return pulse_voltage(t, pre) - pulse_voltage(t - dt, post);
}

struct NetExtremes {
  double max_v = 0.0;
  double min_v = 0.0;
  double t_at_max = 0.0;
  double t_at_min = 0.0;
};

/// Extremes of the net waveform. Samples every branch boundary from both
/// sides plus an adaptive grid: tau_p/10 across each ramp and tau_n/100
/// over the tails.
inline NetExtremes scan_net_voltage(double dt, const WritePulseParams& pre, const WritePulseParams& post) {
  NetExtremes ex;
  auto visit = [&](double t, detail::Limit lim) {
    const double v = detail::pulse_value(t, pre, lim) - detail::pulse_value(t - dt, post, lim);
    if (v > ex.max_v) { ex.max_v = v; ex.t_at_max = t; }
    if (v < ex.min_v) { ex.min_v = v; ex.t_at_min = t; }
  };
  const double breaks[] = {-pre.dur_pos, 0.0, pre.dur_neg, dt - post.dur_pos, dt, dt + post.dur_neg};
  for (double b : breaks) {
    visit(b, detail::Limit::FromLeft);
    visit(b, detail::Limit::FromRight);
  }
  auto fine = [&](double spike, const WritePulseParams& w) {
    const double step = w.tau_pos / 10.0;
    for (double t = spike - w.dur_pos; t <= spike + 10.0 * w.tau_pos; t += step) visit(t, detail::Limit::Exact);
  };
  fine(0.0, pre);
  fine(dt, post);
  // Outside both supports the net voltage is zero, so only the supports are scanned.
  const double coarse = std::min(pre.tau_neg, post.tau_neg) / 100.0;
  for (double t = -pre.dur_pos; t <= pre.dur_neg; t += coarse) visit(t, detail::Limit::Exact);
  for (double t = dt - post.dur_pos; t <= dt + post.dur_neg; t += coarse) visit(t, detail::Limit::Exact);
  return ex;
}

/// Threshold-type RRAM. Negative device voltage above v_tn drives the
/// device towards high conductance (SET), positive voltage above v_tp
/// towards low conductance (RESET). Change is linear in the overdrive.
struct ThresholdMemristor {
  double v_tp = 1.01;
  double v_tn = 1.01;       // magnitude of the negative threshold
  double gain_set = 0.505;  // normalized conductance per volt of negative overdrive
  double gain_reset = 0.505;
  double p_dev = 1.0;
  double noise_sigma = 0.0;  // sigma of the multiplicative lognormal factor

  void validate(const WritePulseParams& pre, const WritePulseParams& post) const {
    if (!(gain_set > 0.0 && gain_reset > 0.0)) throw std::invalid_argument("memristor: gains must be > 0");
    if (p_dev < 0.0 || noise_sigma < 0.0) throw std::invalid_argument("memristor: p_dev and noise_sigma must be >= 0");
    const double peak = std::max({pre.amp_pos, post.amp_pos});
    const double trough = std::max({-pre.amp_neg, -post.amp_neg});
    if (v_tp < peak || v_tn < trough)
      throw std::invalid_argument("memristor: a single pulse must not exceed the write thresholds");
  }
};

struct Overdrive {
  double pos = 0.0;
  double neg = 0.0;
};

inline Overdrive overdrive(double dt, const WritePulseParams& pre, const WritePulseParams& post,
                           const ThresholdMemristor& mem) {
  const auto ex = scan_net_voltage(dt, pre, post);
  return {std::max(0.0, ex.max_v - mem.v_tp), std::max(0.0, -ex.min_v - mem.v_tn)};
}

/// Conductance change for a pairing at dt (ms) from conductance g. Causal
/// pairings (dt > 0) put the negative overdrive across the device and
/// potentiate. Pass `rng == nullptr` for the noise-free model.
inline double device_delta_g(double dt, double g, const ThresholdMemristor& mem, const WritePulseParams& pre,
                             const WritePulseParams& post, Rng* rng = nullptr) {
  if (!(g >= 0.0 && g <= 1.0)) throw std::domain_error("device_delta_g: g out of range");
  const auto od = overdrive(dt, pre, post, mem);
  double dg = mem.gain_set * od.neg * std::pow(1.0 - g, mem.p_dev) - mem.gain_reset * od.pos * std::pow(g, mem.p_dev);
  if (rng != nullptr && mem.noise_sigma > 0.0 && dg != 0.0)
    dg *= std::lognormal_distribution<double>(0.0, mem.noise_sigma)(*rng);
  return std::clamp(g + dg, 0.0, 1.0) - g;
}

/// Largest overdrive of either polarity over dt -> 0 (just beyond the ramp
/// overlap), i.e. what sets the device learning-rate.
inline double peak_overdrive(const WritePulseParams& pre, const WritePulseParams& post, const ThresholdMemristor& mem) {
  double best = 0.0;
  for (double dt = 1e-5; dt <= 1.0; dt *= 1.2) {
    const auto a = overdrive(dt, pre, post, mem);
    const auto b = overdrive(-dt, pre, post, mem);
    best = std::max({best, a.pos, a.neg, b.pos, b.neg});
  }
  return best;
}

/// Memristor whose largest single-update change from the far rail equals
/// `learning_rate` (fraction of the conductance range).
inline ThresholdMemristor calibrated_memristor(double learning_rate, const WritePulseParams& pre,
                                               const WritePulseParams& post, double v_threshold = 1.01,
                                               double p_dev = 1.0, double noise_sigma = 0.0) {
  ThresholdMemristor m;
  m.v_tp = m.v_tn = v_threshold;
  m.p_dev = p_dev;
  m.noise_sigma = noise_sigma;
  const double od = peak_overdrive(pre, post, m);
  if (!(od > 0.0)) throw std::invalid_argument("memristor: pulses never cross the threshold");
  m.gain_set = m.gain_reset = learning_rate / od;
  m.validate(pre, post);
  return m;
}

struct StdpRecord {
  double g_i = 0.0;
  double dt_ms = 0.0;
  double dg = 0.0;
};

/// Repeated read / random-dt write / read loop, starting from the
/// low-resistance state. Each iteration's final conductance seeds the next.
inline std::vector<StdpRecord> measure_stdp_protocol(const ThresholdMemristor& mem, const WritePulseParams& pre,
                                                     const WritePulseParams& post, std::size_t iterations, Rng& rng,
                                                     double g_start = 1.0, double dt_span_ms = 100.0) {
  if (iterations == 0) throw std::invalid_argument("measure_stdp_protocol: iterations must be >= 1");
  std::vector<StdpRecord> out;
  out.reserve(iterations);
  double g = g_start;
  for (std::size_t i = 0; i < iterations; ++i) {
    const double dt = uniform(rng, -dt_span_ms, dt_span_ms);
    const double dg = device_delta_g(dt, g, mem, pre, post, &rng);
    out.push_back({g, dt, dg});
    g = std::clamp(g + dg, 0.0, 1.0);
  }
  return out;
}

/// dG sampled on a (g, dt) grid; row-major by g then dt.
struct DeviceTable {
  std::vector<double> g_axis;
  std::vector<double> dt_axis;
  std::vector<double> dg;

  double at(std::size_t ig, std::size_t jt) const { return dg[ig * dt_axis.size() + jt]; }
  double& at(std::size_t ig, std::size_t jt) { return dg[ig * dt_axis.size() + jt]; }

  void validate() const {
    if (g_axis.empty() || dt_axis.empty()) throw std::invalid_argument("device table: empty axis");
    auto increasing = [](const std::vector<double>& a) {
      return std::adjacent_find(a.begin(), a.end(), std::greater_equal<>()) == a.end();
    };
    if (!increasing(g_axis) || !increasing(dt_axis)) throw std::invalid_argument("device table: axes must be strictly increasing");
    if (dg.size() != g_axis.size() * dt_axis.size()) throw std::invalid_argument("device table: grid size mismatch");
    for (double v : dg)
      if (!std::isfinite(v)) throw std::invalid_argument("device table: non-finite entry");
  }

  /// Largest |dG| anywhere on the grid.
  double max_abs() const {
    double m = 0.0;
    for (double v : dg) m = std::max(m, std::abs(v));
    return m;
  }
};

namespace detail {

// Bracketing index and weight along axis[lo, hi), flat outside the range.
inline std::pair<std::size_t, double> bracket(const std::vector<double>& axis, std::size_t lo, std::size_t hi, double x) {
  if (hi - lo == 1 || x <= axis[lo]) return {lo, 0.0};
  if (x >= axis[hi - 1]) return {hi - 2, 1.0};
  const auto up = static_cast<std::size_t>(std::upper_bound(axis.begin() + static_cast<std::ptrdiff_t>(lo),
                                                            axis.begin() + static_cast<std::ptrdiff_t>(hi), x) -
                                           axis.begin());
  return {up - 1, (x - axis[up - 1]) / (axis[up] - axis[up - 1])};
}

}  // namespace detail

/// Bilinear interpolation; queries outside the grid are clamped to it. The
/// STDP window is discontinuous at dt = 0, so a query never mixes nodes of
/// opposite dt sign: negative dt uses only the negative half of the axis.
inline double interpolate(const DeviceTable& table, double dt, double g) {
  const auto& ta = table.dt_axis;
  const auto split = static_cast<std::size_t>(std::lower_bound(ta.begin(), ta.end(), 0.0) - ta.begin());
  std::size_t lo = 0, hi = ta.size();
  if (split > 0 && split < ta.size()) {
    if (dt < 0.0) hi = split;
    else lo = split;
  }
  const auto [ig, wg] = detail::bracket(table.g_axis, 0, table.g_axis.size(), g);
  const auto [jt, wt] = detail::bracket(ta, lo, hi, dt);
  const std::size_t ig1 = std::min(ig + 1, table.g_axis.size() - 1);
  const std::size_t jt1 = std::min(jt + 1, hi - 1);
  const double v00 = table.at(ig, jt), v01 = table.at(ig, jt1);
  const double v10 = table.at(ig1, jt), v11 = table.at(ig1, jt1);
  return (1.0 - wg) * ((1.0 - wt) * v00 + wt * v01) + wg * ((1.0 - wt) * v10 + wt * v11);
}

/// Grid layout for build_table: `g_nodes` evenly spaced nodes on [0, 1]
/// (each owns the nearest samples) and `dt_bins` equal bins across
/// [-dt_span, dt_span] with nodes at the bin centers.
struct TableGrid {
  std::size_t g_nodes = 11;
  std::size_t dt_bins = 40;
  double dt_span_ms = 100.0;

  std::vector<double> g_axis() const {
    std::vector<double> a(g_nodes);
    for (std::size_t i = 0; i < g_nodes; ++i) a[i] = static_cast<double>(i) / static_cast<double>(g_nodes - 1);
    return a;
  }
  std::vector<double> dt_axis() const {
    std::vector<double> a(dt_bins);
    const double w = 2.0 * dt_span_ms / static_cast<double>(dt_bins);
    for (std::size_t j = 0; j < dt_bins; ++j) a[j] = -dt_span_ms + (static_cast<double>(j) + 0.5) * w;
    return a;
  }
  void validate() const {
    if (g_nodes < 2 || dt_bins < 2 || !(dt_span_ms > 0.0)) throw std::invalid_argument("table grid: need >= 2 nodes per axis");
  }
};

using DeltaGModel = std::function<double(double dt, double g)>;

/// Samples `model` at every grid node.
inline DeviceTable tabulate(const DeltaGModel& model, const TableGrid& grid) {
  grid.validate();
  DeviceTable t{grid.g_axis(), grid.dt_axis(), {}};
  t.dg.resize(t.g_axis.size() * t.dt_axis.size());
  for (std::size_t i = 0; i < t.g_axis.size(); ++i)
    for (std::size_t j = 0; j < t.dt_axis.size(); ++j) t.at(i, j) = model(t.dt_axis[j], t.g_axis[i]);
  return t;
}

/// Bins scatter onto the grid and averages each bin; bins without samples
/// take the value of `fallback` at the node.
inline DeviceTable build_table(const std::vector<StdpRecord>& scatter, const TableGrid& grid, const DeltaGModel& fallback) {
  grid.validate();
  DeviceTable t{grid.g_axis(), grid.dt_axis(), {}};
  const std::size_t ng = t.g_axis.size(), nt = t.dt_axis.size();
  std::vector<double> sum(ng * nt, 0.0);
  std::vector<std::size_t> count(ng * nt, 0);
  const double width = 2.0 * grid.dt_span_ms / static_cast<double>(nt);
  for (const auto& r : scatter) {
    const auto ig = static_cast<std::size_t>(std::clamp(std::llround(r.g_i * static_cast<double>(ng - 1)), 0LL,
                                                        static_cast<long long>(ng - 1)));
    const auto jt = static_cast<std::size_t>(std::clamp(
        static_cast<long long>(std::floor((r.dt_ms + grid.dt_span_ms) / width)), 0LL, static_cast<long long>(nt - 1)));
    sum[ig * nt + jt] += r.dg;
    ++count[ig * nt + jt];
  }
  t.dg.resize(ng * nt);
  for (std::size_t i = 0; i < ng; ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      const std::size_t k = i * nt + j;
      t.dg[k] = count[k] > 0 ? sum[k] / static_cast<double>(count[k]) : fallback(t.dt_axis[j], t.g_axis[i]);
    }
  return t;
}

/// CSV with header `g_i,dt_ms,dg`, one row per node, row-major by g then dt.
inline void write_table_csv(std::ostream& out, const DeviceTable& t) {
  out << "g_i,dt_ms,dg\n";
  for (std::size_t i = 0; i < t.g_axis.size(); ++i)
    for (std::size_t j = 0; j < t.dt_axis.size(); ++j)
      out << csv::fmt(t.g_axis[i]) << ',' << csv::fmt(t.dt_axis[j]) << ',' << csv::fmt(t.at(i, j)) << '\n';
}

/// Accepts rows in any order as long as they cover a full grid.
inline DeviceTable read_table_csv(std::istream& in) {
  const auto rows = csv::read_table(in, {"g_i", "dt_ms", "dg"});
  std::map<std::pair<double, double>, double> cells;
  std::vector<double> gs, ts;
  for (const auto& r : rows) {
    const double g = csv::to_double(r[0]), dt = csv::to_double(r[1]);
    if (!cells.emplace(std::make_pair(g, dt), csv::to_double(r[2])).second)
      throw std::runtime_error("device table: duplicate node");
    gs.push_back(g);
    ts.push_back(dt);
  }
  auto uniq = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  DeviceTable t{uniq(gs), uniq(ts), {}};
  if (cells.size() != t.g_axis.size() * t.dt_axis.size()) throw std::runtime_error("device table: incomplete grid");
  for (double g : t.g_axis)
    for (double dt : t.dt_axis) t.dg.push_back(cells.at({g, dt}));
  t.validate();
  return t;
}

inline DeviceTable load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read device table: " + path);
  return read_table_csv(in);
}

}  // namespace rramsnn
