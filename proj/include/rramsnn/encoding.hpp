#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace rramsnn {

struct SpikeEvent {
  std::size_t neuron = 0;
  double t_ms = 0.0;

  friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

/// Single-spike-per-neuron events for one presentation window, sorted by
/// time (ties by neuron id).
struct SpikeTrain {
  std::vector<SpikeEvent> events;
  double window_ms = 100.0;
};

/// Latency coding through triangular receptive fields. Each feature drives
/// `sensors_per_feature` input neurons; sensor j of feature f is neuron
/// f * k + j.
struct SensorBank {
  std::size_t sensors_per_feature = 4;
  double window_ms = 100.0;
  std::vector<double> centers;
  double width = 0.5;

  /// Centers at (j + 0.5) / k with width 2 / k, so neighbouring fields overlap.
  static SensorBank uniform(std::size_t k = 4, double window_ms = 100.0) {
    if (k == 0) throw std::invalid_argument("sensors_per_feature must be >= 1");
    SensorBank b;
    b.sensors_per_feature = k;
    b.window_ms = window_ms;
    b.width = 2.0 / static_cast<double>(k);
    for (std::size_t j = 0; j < k; ++j) b.centers.push_back((static_cast<double>(j) + 0.5) / static_cast<double>(k));
    return b;
  }

  void validate() const {
    if (sensors_per_feature == 0 || centers.size() != sensors_per_feature)
      throw std::invalid_argument("sensor bank: need one center per sensor");
    if (!(window_ms > 0.0)) throw std::invalid_argument("sensor bank: window must be positive");
    if (!(width > 0.0)) throw std::invalid_argument("sensor bank: width must be positive");
    for (std::size_t j = 0; j < centers.size(); ++j) {
      if (centers[j] < 0.0 || centers[j] > 1.0) throw std::invalid_argument("sensor bank: center outside [0,1]");
      if (j > 0 && !(centers[j] > centers[j - 1]))
        throw std::invalid_argument("sensor bank: centers must be strictly increasing");
    }
  }

  std::size_t input_count(std::size_t num_features) const { return num_features * sensors_per_feature; }

  double activation(double x, std::size_t j) const {
    return std::max(0.0, 1.0 - std::abs(x - centers[j]) / width);
  }
};

inline SpikeTrain encode(std::span<const double> features, const SensorBank& bank) {
  SpikeTrain train;
  train.window_ms = bank.window_ms;
  const std::size_t k = bank.sensors_per_feature;
  for (std::size_t f = 0; f < features.size(); ++f) {
    const double x = features[f];
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("encode: feature outside [0,1]");
    for (std::size_t j = 0; j < k; ++j) {
      const double a = bank.activation(x, j);
      if (a > 0.0) train.events.push_back({f * k + j, bank.window_ms * (1.0 - a)});
    }
  }
  std::sort(train.events.begin(), train.events.end(), [](const SpikeEvent& a, const SpikeEvent& b) {
    return a.t_ms < b.t_ms || (a.t_ms == b.t_ms && a.neuron < b.neuron);
  });
  return train;
}

}  // namespace rramsnn
