#pragma once

// Single-layer feed-forward SNN: latency-coded inputs, LIF outputs, teacher
// forcing during training and first-spike readout.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

#include "rramsnn/dataset.hpp"
#include "rramsnn/encoding.hpp"
#include "rramsnn/rng.hpp"
#include "rramsnn/synapse.hpp"

namespace rramsnn {

struct LifParams {
  double tau_m = 200.0;  // ms
  double v_th = 1.0;
  double v_reset = 0.0;
  double k_syn = 0.0;  // per-spike current scale; 0 selects 4 / (n_in * g_max)

  void validate() const {
    if (!(tau_m > 0.0)) throw std::invalid_argument("lif: tau_m must be > 0");
    if (!(v_th > v_reset)) throw std::invalid_argument("lif: v_th must exceed v_reset");
    if (k_syn < 0.0) throw std::invalid_argument("lif: k_syn must be >= 0");
  }
};

struct NetworkParams {
  LifParams lif;
  double dt_sim = 0.1;            // ms
  double teacher_delay_ms = 10.0; // target spikes this long after the window
  double readout_tail_ms = 20.0;  // integration continues past the window

  void validate() const {
    lif.validate();
    if (!(dt_sim > 0.0 && dt_sim <= 1.0)) throw std::invalid_argument("network: dt_sim must lie in (0, 1] ms");
    if (teacher_delay_ms <= 0.0 || readout_tail_ms < 0.0) throw std::invalid_argument("network: bad teacher timing");
  }
};

enum class BackendKind { Ideal, Quantized, SingleDevice, MultiRram };

/// Everything needed to instantiate one synapse of a given backend.
struct BackendSpec {
  BackendKind kind = BackendKind::Ideal;
  StdpParams stdp;
  std::size_t levels = 256;
  std::size_t devices = 1;
  std::shared_ptr<const DeviceTable> table;

  double g_max() const { return stdp.g_max; }

  void validate() const {
    stdp.validate();
    if (kind == BackendKind::Quantized && levels < 2) throw std::invalid_argument("backend: levels must be >= 2");
    if (kind == BackendKind::MultiRram && devices < 1) throw std::invalid_argument("backend: devices must be >= 1");
    if ((kind == BackendKind::SingleDevice || kind == BackendKind::MultiRram) && !table)
      throw std::invalid_argument("backend: device table required");
  }

  /// Synapse at normalized conductance g (every device of a MultiRram
  /// synapse starts at g).
  SynapseModel make(double g) const {
    switch (kind) {
      case BackendKind::Ideal: return IdealSynapse{g, stdp};
      case BackendKind::Quantized: return QuantizedSynapse{quantize(g, levels), levels, stdp};
      case BackendKind::SingleDevice: return SingleDeviceSynapse{g, table, stdp.g_max};
      case BackendKind::MultiRram: return MultiRramSynapse{std::vector<double>(devices, g), table, stdp.g_max};
    }
    throw std::logic_error("unknown backend");
  }
};

/// One pre/post pairing: dt = t_post - t_pre in ms.
struct PairingEvent {
  std::size_t pre = 0;
  std::size_t post = 0;
  double delta_t = 0.0;
};

class Network {
 public:
  Network(std::size_t n_in, std::size_t n_out, NetworkParams params, std::vector<SynapseModel> synapses,
          std::uint64_t synapse_seed)
      : n_in_(n_in), n_out_(n_out), params_(params), synapses_(std::move(synapses)) {
    params_.validate();
    if (n_in_ == 0 || n_out_ == 0) throw std::invalid_argument("network: need inputs and outputs");
    if (synapses_.size() != n_in_ * n_out_) throw std::invalid_argument("network: synapse array not fully populated");
    streams_.reserve(synapses_.size());
    for (std::size_t s = 0; s < synapses_.size(); ++s) streams_.emplace_back(derive_seed(synapse_seed, stream::synapse, s));
  }

  /// Synapses drawn independently uniform on [0, 1] (times g_max).
  static Network random(std::size_t n_in, std::size_t n_out, const NetworkParams& params, const BackendSpec& backend,
                        std::uint64_t init_seed, std::uint64_t synapse_seed) {
    backend.validate();
    Rng rng(init_seed);
    std::vector<SynapseModel> syn;
    syn.reserve(n_in * n_out);
    for (std::size_t s = 0; s < n_in * n_out; ++s) syn.push_back(backend.make(uniform01(rng)));
    return Network(n_in, n_out, params, std::move(syn), synapse_seed);
  }

  std::size_t inputs() const noexcept { return n_in_; }
  std::size_t outputs() const noexcept { return n_out_; }
  const NetworkParams& params() const noexcept { return params_; }

  const SynapseModel& synapse(std::size_t pre, std::size_t post) const { return synapses_.at(pre * n_out_ + post); }
  SynapseModel& synapse(std::size_t pre, std::size_t post) { return synapses_.at(pre * n_out_ + post); }
  double weight(std::size_t pre, std::size_t post) const { return read(synapse(pre, post)); }

  /// Read values of every synapse, row-major (pre, post).
  std::vector<double> weights() const {
    std::vector<double> w(synapses_.size());
    for (std::size_t s = 0; s < synapses_.size(); ++s) w[s] = read(synapses_[s]);
    return w;
  }

  double g_max() const { return synapses_.empty() ? 1.0 : std::visit([](const auto& x) {
    using T = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<T, IdealSynapse> || std::is_same_v<T, QuantizedSynapse>) return x.params.g_max;
    else return x.g_max;
  }, synapses_.front()); }

  double k_syn() const {
    return params_.lif.k_syn > 0.0 ? params_.lif.k_syn : 4.0 / (static_cast<double>(n_in_) * g_max());
  }

  void apply(const PairingEvent& e) {
    const std::size_t s = e.pre * n_out_ + e.post;
    update(synapses_.at(s), e.delta_t, streams_[s]);
  }

 private:
  std::size_t n_in_;
  std::size_t n_out_;
  NetworkParams params_;
  std::vector<SynapseModel> synapses_;
  std::vector<Rng> streams_;
};

struct Presentation {
  std::vector<std::optional<double>> first_spike;  // per output, ms
  std::vector<double> final_potential;             // per output, at the end of integration
  std::vector<PairingEvent> pairings;
};

/// Runs one presentation. With a teacher label the target output is forced
/// to spike after the window and every other output at t = 0; natural
/// crossings are suppressed, so no integration is needed and pairings are
/// emitted for every input neuron that spiked. Without a teacher the LIF
/// outputs are integrated with a fixed step over the window plus the
/// readout tail.
inline Presentation present(const Network& net, const SpikeTrain& spikes, std::optional<std::size_t> teacher) {
  const std::size_t n_out = net.outputs();
  const auto& prm = net.params();
  Presentation out;
  out.first_spike.assign(n_out, std::nullopt);
  out.final_potential.assign(n_out, 0.0);
  for (const auto& e : spikes.events)
    if (e.neuron >= net.inputs() || e.t_ms < 0.0 || e.t_ms > spikes.window_ms)
      throw std::invalid_argument("present: spike outside the input range or window");

  if (teacher) {
    if (*teacher >= n_out) throw std::invalid_argument("present: teacher label out of range");
    const double t_teach = spikes.window_ms + prm.teacher_delay_ms;
    for (std::size_t j = 0; j < n_out; ++j) out.first_spike[j] = j == *teacher ? t_teach : 0.0;
    out.pairings.reserve(spikes.events.size() * n_out);
    for (const auto& e : spikes.events)
      for (std::size_t j = 0; j < n_out; ++j) {
        double dt = *out.first_spike[j] - e.t_ms;
        // The forced anti-causal spike precedes an input that also fires at t = 0.
        if (j != *teacher && dt >= 0.0) dt = -std::numeric_limits<double>::denorm_min();
        out.pairings.push_back({e.neuron, j, dt});
      }
    return out;
  }

  const double k = net.k_syn();
  const double decay = std::exp(-prm.dt_sim / prm.lif.tau_m);
  const auto steps = static_cast<std::size_t>(std::ceil((spikes.window_ms + prm.readout_tail_ms) / prm.dt_sim - 1e-9));
  const auto w = net.weights();
  std::vector<double>& v = out.final_potential;
  std::size_t next = 0;
  for (std::size_t step = 0; step <= steps; ++step) {
    const double t = static_cast<double>(step) * prm.dt_sim;
    if (step > 0)
      for (auto& x : v) x = prm.lif.v_reset + (x - prm.lif.v_reset) * decay;
    // Events in (t - dt, t] arrive at this step.
    while (next < spikes.events.size() && spikes.events[next].t_ms <= t + 1e-9) {
      const auto i = spikes.events[next].neuron;
      for (std::size_t j = 0; j < n_out; ++j) v[j] += k * w[i * n_out + j];
      ++next;
    }
    for (std::size_t j = 0; j < n_out; ++j) {
      if (v[j] >= prm.lif.v_th) {
        if (!out.first_spike[j]) out.first_spike[j] = t;
        v[j] = prm.lif.v_reset;
      }
    }
  }
  return out;
}

/// Earliest spike wins; if nothing spikes, the highest final potential.
/// Remaining ties go to the lowest class index.
inline std::size_t winner(const Presentation& p) {
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < p.first_spike.size(); ++j)
    if (p.first_spike[j] && (!best || *p.first_spike[j] < *p.first_spike[*best])) best = j;
  if (best) return *best;
  return static_cast<std::size_t>(std::max_element(p.final_potential.begin(), p.final_potential.end()) -
                                  p.final_potential.begin());
}

inline std::size_t classify(const Network& net, const SpikeTrain& spikes) {
  return winner(present(net, spikes, std::nullopt));
}

/// One pass over `train` in rng-shuffled order, one synapse update per pairing.
inline void train_epoch(Network& net, const Dataset& train, const SensorBank& bank, Rng& rng) {
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (auto idx : order) {
    const auto& s = train.samples[idx];
    const auto p = present(net, encode(s.features, bank), s.label);
    for (const auto& e : p.pairings) net.apply(e);
  }
}

/// Classification accuracy in percent.
inline double evaluate(const Network& net, const Dataset& test, const SensorBank& bank) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
  std::size_t correct = 0;
  for (const auto& s : test.samples)
    if (classify(net, encode(s.features, bank)) == s.label) ++correct;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace rramsnn
