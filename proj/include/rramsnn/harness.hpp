#pragma once

// Experiment orchestration: seeded repeated training runs, parameter sweeps
// and their CSV / manifest outputs.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include "rramsnn/config.hpp"
#include "rramsnn/csv.hpp"
#include "rramsnn/dataset.hpp"
#include "rramsnn/device.hpp"
#include "rramsnn/encoding.hpp"
#include "rramsnn/network.hpp"
#include "rramsnn/rng.hpp"
#include "rramsnn/stats.hpp"

namespace rramsnn {

/// Calls fn(i) for i in [0, n) on up to `threads` workers (0: hardware
/// concurrency). The first exception thrown by any call is rethrown.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct RunStats {
  std::vector<std::vector<double>> ca;          // [run][epoch], percent
  std::vector<double> total_variation;          // per run: mean per-synapse |dG| summed over an epoch
  std::vector<std::vector<double>> trajectory;  // run 0: [epoch 0..E][synapse], normalized g

  std::size_t runs() const { return ca.size(); }
  std::size_t epochs() const { return ca.empty() ? 0 : ca.front().size(); }

  std::vector<double> at_epoch(std::size_t e) const {
    std::vector<double> v;
    for (const auto& r : ca) v.push_back(r.at(e));
    return v;
  }
  Quantiles quantiles_at(std::size_t e) const { return quantiles(at_epoch(e)); }
  std::vector<double> final_ca() const { return at_epoch(epochs() - 1); }

  /// Per-run mean of the last k epochs (all epochs if fewer).
  std::vector<double> last_means(std::size_t k = 5) const {
    std::vector<double> out;
    for (const auto& r : ca) {
      const std::size_t m = std::min(k, r.size());
      out.push_back(mean(std::span<const double>(r).last(m)));
    }
    return out;
  }
  /// Canonical summary: mean over runs of the last-5-epoch mean.
  double mean_last(std::size_t k = 5) const { return mean(last_means(k)); }

  /// Mean over runs of the within-run std of the last k epochs.
  double mean_last_std(std::size_t k = 5) const {
    std::vector<double> s;
    for (const auto& r : ca) s.push_back(stddev(std::span<const double>(r).last(std::min(k, r.size()))));
    return mean(s);
  }

  double peak() const {
    double p = 0.0;
    for (const auto& r : ca) p = std::max(p, *std::max_element(r.begin(), r.end()));
    return p;
  }

  double mean_total_variation() const { return total_variation.empty() ? 0.0 : mean(total_variation); }

  friend bool operator==(const RunStats&, const RunStats&) = default;
};

/// Normalized data set plus the shared device table for an experiment.
struct Experiment {
  ExperimentConfig cfg;
  Dataset data;
  SensorBank bank;
  std::shared_ptr<const DeviceTable> table;

  BackendSpec backend() const {
    BackendSpec b;
    b.kind = cfg.backend;
    b.stdp = cfg.stdp;
    b.levels = cfg.levels;
    b.devices = cfg.devices;
    b.table = table;
    return b;
  }
};

/// Memristor calibrated to the configured device learning-rate.
inline ThresholdMemristor configured_memristor(const DeviceConfig& d) {
  const auto pulse = default_pulse(d.tail);
  return calibrated_memristor(d.learning_rate, pulse, pulse, d.v_threshold, d.p_dev, d.noise_sigma);
}

/// Device table from the characterization protocol: random-dt scatter from
/// a noisy device, binned; bins the protocol never visited take the
/// noise-free model.
inline DeviceTable generate_device_table(const DeviceConfig& d, std::uint64_t seed) {
  const auto pulse = default_pulse(d.tail);
  const auto mem = configured_memristor(d);
  Rng rng(derive_seed(seed, stream::device, 0));
  const auto scatter = measure_stdp_protocol(mem, pulse, pulse, d.iterations, rng, 1.0, d.grid.dt_span_ms);
  auto model = [&](double dt, double g) { return device_delta_g(dt, g, mem, pulse, pulse); };
  return build_table(scatter, d.grid, model);
}

inline Dataset load_dataset(const ExperimentConfig& cfg) {
  auto d = normalize(load_csv(cfg.data_path, cfg.schema));
  if (d.num_classes < 2) throw DatasetError("need at least two classes");
  return d;
}

inline Experiment prepare(const ExperimentConfig& cfg) {
  cfg.validate();
  Experiment ex{cfg, load_dataset(cfg), SensorBank::uniform(cfg.sensors_per_feature, cfg.window_ms), nullptr};
  if (cfg.backend == BackendKind::SingleDevice || cfg.backend == BackendKind::MultiRram) {
    ex.table = std::make_shared<const DeviceTable>(
        cfg.device.table_path.empty() ? generate_device_table(cfg.device, cfg.seed) : load_table_csv(cfg.device.table_path));
  }
  return ex;
}

namespace detail {

struct RunRecord {
  std::vector<double> ca;
  double total_variation = 0.0;
  std::vector<std::vector<double>> trajectory;
};

inline std::vector<double> normalized_weights(const Network& net) {
  auto w = net.weights();
  for (auto& x : w) x /= net.g_max();
  return w;
}

inline RunRecord run_one(const Experiment& ex, const BackendSpec& backend, std::size_t run, std::uint64_t init_tag,
                         bool keep_trajectory) {
  const auto& cfg = ex.cfg;
  const auto [train, test] = split(ex.data, cfg.train_fraction, derive_seed(cfg.seed, stream::split, cfg.split_per_run ? run : 0));
  auto net = Network::random(ex.bank.input_count(ex.data.num_features), ex.data.num_classes, cfg.network, backend,
                             derive_seed(cfg.seed, init_tag, run), derive_seed(cfg.seed, stream::synapse, run));
  Rng order_rng(derive_seed(cfg.seed, stream::shuffle, run));

  std::vector<SpikeTrain> encoded;
  encoded.reserve(train.size());
  for (const auto& s : train.samples) encoded.push_back(encode(s.features, ex.bank));

  RunRecord rec;
  auto w = normalized_weights(net);
  if (keep_trajectory) rec.trajectory.push_back(w);
  double tv = 0.0;
  std::vector<std::size_t> order(train.size());
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), order_rng);
    for (auto idx : order) {
      const auto p = present(net, encoded[idx], train.samples[idx].label);
      for (const auto& ev : p.pairings) net.apply(ev);
      auto w2 = normalized_weights(net);
      for (std::size_t s = 0; s < w.size(); ++s) tv += std::abs(w2[s] - w[s]);
      w = std::move(w2);
    }
    rec.ca.push_back(evaluate(net, test, ex.bank));
    if (keep_trajectory) rec.trajectory.push_back(w);
  }
  rec.total_variation = tv / (static_cast<double>(w.size()) * static_cast<double>(cfg.epochs));
  return rec;
}

}  // namespace detail

/// Tag for the initial-condition stream; ic 0 is the default draw.
inline std::uint64_t init_stream(std::size_t ic) { return stream::init + 16 * static_cast<std::uint64_t>(ic); }

/// `cfg.runs` independent runs: initial weights, presentation order and
/// synapse noise derive from (seed, run); the split is shared unless
/// `split_per_run` is set.
inline RunStats run_training(const Experiment& ex, const BackendSpec& backend, std::size_t ic = 0) {
  backend.validate();
  const auto& cfg = ex.cfg;
  std::vector<detail::RunRecord> recs(cfg.runs);
  parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
    recs[r] = detail::run_one(ex, backend, r, init_stream(ic), cfg.record_trajectories && r == 0);
  });
  RunStats st;
  for (auto& r : recs) {
    st.ca.push_back(std::move(r.ca));
    st.total_variation.push_back(r.total_variation);
  }
  st.trajectory = std::move(recs.front().trajectory);
  return st;
}

inline RunStats run_training(const Experiment& ex) { return run_training(ex, ex.backend()); }

inline RunStats run_training(const ExperimentConfig& cfg) { return run_training(prepare(cfg)); }

// ---------------------------------------------------------------- sweeps

struct SurfacePoint {
  double a_plus = 0.0;
  double a_minus = 0.0;
  RunStats stats;
};

/// Ideal backend at each (A+, A-) of cfg.lr_grid.
inline std::vector<SurfacePoint> sweep_learning_rate(ExperimentConfig cfg) {
  if (cfg.lr_grid.empty()) throw ConfigError("sweep-lr: empty learning-rate grid");
  cfg.backend = BackendKind::Ideal;
  auto ex = prepare(cfg);
  std::vector<SurfacePoint> out;
  for (auto [ap, am] : cfg.lr_grid) {
    auto b = ex.backend();
    b.stdp.a_plus = ap;
    b.stdp.a_minus = am;
    out.push_back({ap, am, run_training(ex, b)});
  }
  return out;
}

struct LevelsPoint {
  std::size_t levels = 0;  // 0: continuous control
  RunStats stats;
};

/// Quantized backend at each level count plus the continuous control, last.
/// Uses the sweep's own epoch count and learning rate.
inline std::vector<LevelsPoint> sweep_levels(ExperimentConfig cfg) {
  if (cfg.level_set.empty()) throw ConfigError("sweep-levels: empty level set");
  for (auto l : cfg.level_set)
    if (l < 2) throw ConfigError("sweep-levels: level count must be >= 2");
  if (cfg.levels_epochs < 1) throw ConfigError("sweep-levels: epochs must be >= 1");
  cfg.backend = BackendKind::Ideal;
  cfg.epochs = cfg.levels_epochs;
  if (cfg.levels_rate > 0.0) cfg.stdp.a_plus = cfg.stdp.a_minus = cfg.levels_rate;
  auto ex = prepare(cfg);
  std::vector<LevelsPoint> out;
  for (auto l : cfg.level_set) {
    auto b = ex.backend();
    b.kind = BackendKind::Quantized;
    b.levels = l;
    out.push_back({l, run_training(ex, b)});
  }
  out.push_back({0, run_training(ex, ex.backend())});
  return out;
}

/// Training length for an n-device synapse: proportional to n with a floor.
inline std::size_t epochs_for_n(std::size_t n) {
  if (n < 1) throw std::invalid_argument("epochs_for_n: n must be >= 1");
  return std::max<std::size_t>(20, static_cast<std::size_t>(std::llround(static_cast<double>(n) / 2.0)));
}

struct NPoint {
  std::size_t n = 0;
  std::size_t epochs = 0;
  RunStats stats;
};

inline std::vector<NPoint> sweep_n(ExperimentConfig cfg) {
  if (cfg.n_set.empty()) throw ConfigError("sweep-n: empty n set");
  for (auto n : cfg.n_set)
    if (n < 1) throw ConfigError("sweep-n: n must be >= 1");
  cfg.backend = BackendKind::MultiRram;
  auto ex = prepare(cfg);
  std::vector<NPoint> out;
  for (auto n : cfg.n_set) {
    ex.cfg.epochs = epochs_for_n(n);
    auto b = ex.backend();
    b.devices = n;
    out.push_back({n, ex.cfg.epochs, run_training(ex, b)});
  }
  return out;
}

struct SingleDeviceResult {
  std::vector<RunStats> initial_conditions;  // single-device backend, one entry per IC
  RunStats ideal;                            // ideal backend control, IC 0
  RunStats multi;                            // MultiRram with `multi_devices`, IC 0
  std::size_t multi_devices = 64;
};

/// Single-device backend from two initial conductance draws, with the ideal
/// control and the multi-device comparison under the same seeds.
inline SingleDeviceResult single_device_experiment(ExperimentConfig cfg, std::size_t initial_conditions = 2,
                                                   std::size_t multi_devices = 64) {
  cfg.backend = BackendKind::SingleDevice;
  auto ex = prepare(cfg);
  SingleDeviceResult res;
  res.multi_devices = multi_devices;
  for (std::size_t ic = 0; ic < initial_conditions; ++ic) res.initial_conditions.push_back(run_training(ex, ex.backend(), ic));
  auto ideal = ex.backend();
  ideal.kind = BackendKind::Ideal;
  res.ideal = run_training(ex, ideal);
  auto multi = ex.backend();
  multi.kind = BackendKind::MultiRram;
  multi.devices = multi_devices;
  res.multi = run_training(ex, multi);
  return res;
}

// ---------------------------------------------------------------- output

inline void write_ca_csv(std::ostream& out, const RunStats& st) {
  out << "run,epoch,ca\n";
  for (std::size_t r = 0; r < st.runs(); ++r)
    for (std::size_t e = 0; e < st.ca[r].size(); ++e)
      out << r << ',' << e + 1 << ',' << csv::fmt(st.ca[r][e]) << '\n';
}

inline void write_quantiles_csv(std::ostream& out, const RunStats& st) {
  out << "epoch,q0,q25,q50,q75,q100\n";
  for (std::size_t e = 0; e < st.epochs(); ++e) {
    const auto q = st.quantiles_at(e);
    out << e + 1 << ',' << csv::fmt(q.q0) << ',' << csv::fmt(q.q25) << ',' << csv::fmt(q.q50) << ','
        << csv::fmt(q.q75) << ',' << csv::fmt(q.q100) << '\n';
  }
}

/// Epoch 0 is the initial state.
inline void write_trajectories_csv(std::ostream& out, const RunStats& st) {
  out << "epoch,synapse_id,g\n";
  for (std::size_t e = 0; e < st.trajectory.size(); ++e)
    for (std::size_t s = 0; s < st.trajectory[e].size(); ++s)
      out << e << ',' << s << ',' << csv::fmt(st.trajectory[e][s]) << '\n';
}

inline void write_smoothness_csv(std::ostream& out, const RunStats& st) {
  out << "run,total_variation\n";
  for (std::size_t r = 0; r < st.total_variation.size(); ++r)
    out << r << ',' << csv::fmt(st.total_variation[r]) << '\n';
}

inline void write_surface_csv(std::ostream& out, const std::vector<SurfacePoint>& surface) {
  out << "a_plus,a_minus,mean_ca\n";
  for (const auto& p : surface)
    out << csv::fmt(p.a_plus) << ',' << csv::fmt(p.a_minus) << ',' << csv::fmt(p.stats.mean_last()) << '\n';
}

/// Per-run mean post-training CE (last-5 mean) for every level count.
inline void write_levels_csv(std::ostream& out, const std::vector<LevelsPoint>& pts) {
  out << "backend,levels,run,ce\n";
  for (const auto& p : pts) {
    const auto m = p.stats.last_means();
    for (std::size_t r = 0; r < m.size(); ++r)
      out << (p.levels == 0 ? "ideal" : "quantized") << ',' << p.levels << ',' << r << ',' << csv::fmt(100.0 - m[r])
          << '\n';
  }
}

inline void write_n_summary_csv(std::ostream& out, const std::vector<NPoint>& pts) {
  out << "n,epochs,mean_ca,peak_ca,final_iqr,total_variation\n";
  for (const auto& p : pts)
    out << p.n << ',' << p.epochs << ',' << csv::fmt(p.stats.mean_last()) << ',' << csv::fmt(p.stats.peak()) << ','
        << csv::fmt(p.stats.quantiles_at(p.epochs - 1).iqr()) << ',' << csv::fmt(p.stats.mean_total_variation())
        << '\n';
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

template <class Writer, class T>
void write_file(const std::filesystem::path& p, Writer w, const T& v) {
  auto f = open_out(p);
  w(f, v);
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace detail

/// ca.csv, quantiles.csv, smoothness.csv and (if recorded) trajectories.csv.
inline void write_run_stats(const std::filesystem::path& dir, const RunStats& st) {
  detail::write_file(dir / "ca.csv", write_ca_csv, st);
  detail::write_file(dir / "quantiles.csv", write_quantiles_csv, st);
  detail::write_file(dir / "smoothness.csv", write_smoothness_csv, st);
  if (!st.trajectory.empty()) detail::write_file(dir / "trajectories.csv", write_trajectories_csv, st);
}

/// Inverse of write_run_stats.
inline RunStats read_run_stats(const std::filesystem::path& dir) {
  auto open = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    return f;
  };
  RunStats st;
  {
    auto f = open(dir / "ca.csv");
    for (const auto& row : csv::read_table(f, {"run", "epoch", "ca"})) {
      const auto r = csv::to_index(row[0]), e = csv::to_index(row[1]);
      if (st.ca.size() <= r) st.ca.resize(r + 1);
      if (e != st.ca[r].size() + 1) throw std::runtime_error("ca.csv: epochs out of order");
      st.ca[r].push_back(csv::to_double(row[2]));
    }
  }
  {
    auto f = open(dir / "smoothness.csv");
    for (const auto& row : csv::read_table(f, {"run", "total_variation"})) st.total_variation.push_back(csv::to_double(row[1]));
  }
  if (std::filesystem::exists(dir / "trajectories.csv")) {
    auto f = open(dir / "trajectories.csv");
    for (const auto& row : csv::read_table(f, {"epoch", "synapse_id", "g"})) {
      const auto e = csv::to_index(row[0]);
      if (st.trajectory.size() <= e) st.trajectory.resize(e + 1);
      st.trajectory[e].push_back(csv::to_double(row[2]));
    }
  }
  return st;
}

inline void write_manifest(const std::filesystem::path& dir, const std::string& command, const ExperimentConfig& cfg,
                           const nlohmann::ordered_json& summary = nlohmann::ordered_json::object()) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config"] = to_json(cfg);
  j["summary"] = summary;
  auto f = detail::open_out(dir / "manifest.json");
  f << j.dump(2) << '\n';
}

}  // namespace rramsnn
