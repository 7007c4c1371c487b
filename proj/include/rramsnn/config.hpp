#pragma once

// Experiment configuration and its key = value text format.
//
//   # comment
//   stdp.a_plus = 0.02
//   backend.kind = multi
//   backend.devices = 64
//
// Unknown keys are an error so typos do not silently fall back to defaults.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include "rramsnn/dataset.hpp"
#include "rramsnn/device.hpp"
#include "rramsnn/network.hpp"
#include "rramsnn/stdp.hpp"

namespace rramsnn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How a device table is obtained when the backend needs one.
struct DeviceConfig {
  std::string table_path;        // measured table; empty: synthesize
  double learning_rate = 0.5;    // largest single-update change, fraction of range
  double v_threshold = 1.01;     // V, both polarities
  double p_dev = 1.0;
  double noise_sigma = 0.1;
  std::size_t iterations = 1000; // characterization loop length
  TableGrid grid;
  TailShape tail = TailShape::Exponential;
};

struct ExperimentConfig {
  std::string data_path = "data/iris.csv";
  CsvSchema schema = [] {
    CsvSchema s;
    s.label_col = "class";
    return s;
  }();
  double train_fraction = 0.5;
  bool split_per_run = false;  // false: one split shared by every run

  std::size_t sensors_per_feature = 4;
  double window_ms = 100.0;

  NetworkParams network;
  StdpParams stdp;

  BackendKind backend = BackendKind::Ideal;
  std::size_t levels = 256;
  std::size_t devices = 1;
  DeviceConfig device;

  std::size_t epochs = 20;
  std::size_t runs = 10;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
  bool record_trajectories = true;

  std::vector<std::pair<double, double>> lr_grid = {{0.02, 0.02}, {0.02, 0.35}, {0.35, 0.02}, {0.35, 0.35}};
  std::vector<std::size_t> level_set = {2, 4, 16, 64, 256, 1024};
  std::size_t levels_epochs = 10;
  double levels_rate = 0.03;  // A+ = A- for the levels sweep; 0 keeps stdp.a_plus / a_minus
  std::vector<std::size_t> n_set = {2, 4, 16, 36, 64, 100};

  std::string out_dir = "out";

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0,1)");
    if (sensors_per_feature < 1) throw ConfigError("encoding.sensors must be >= 1");
    if (!(window_ms > 0.0)) throw ConfigError("encoding.window_ms must be > 0");
    if (backend == BackendKind::Quantized && levels < 2) throw ConfigError("backend.levels must be >= 2");
    if (backend == BackendKind::MultiRram && devices < 1) throw ConfigError("backend.devices must be >= 1");
    try {
      network.validate();
      stdp.validate();
      device.grid.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!(device.learning_rate > 0.0)) throw ConfigError("device.learning_rate must be > 0");
    if (device.iterations < 1) throw ConfigError("device.iterations must be >= 1");
  }
};

inline std::string to_string(BackendKind k) {
  switch (k) {
    case BackendKind::Ideal: return "ideal";
    case BackendKind::Quantized: return "quantized";
    case BackendKind::SingleDevice: return "single";
    case BackendKind::MultiRram: return "multi";
  }
  return "?";
}

inline BackendKind parse_backend(const std::string& s) {
  if (s == "ideal") return BackendKind::Ideal;
  if (s == "quantized") return BackendKind::Quantized;
  if (s == "single") return BackendKind::SingleDevice;
  if (s == "multi") return BackendKind::MultiRram;
  throw ConfigError("unknown backend '" + s + "' (ideal|quantized|single|multi)");
}

namespace detail {

inline double cfg_double(const std::string& key, const std::string& v) {
  auto d = parse_double(v);
  if (!d) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return *d;
}

inline std::size_t cfg_size(const std::string& key, const std::string& v) {
  auto d = parse_index(trim(v));
  if (!d) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return *d;
}

inline bool cfg_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

inline std::vector<std::string> cfg_list(const std::string& v) {
  std::vector<std::string> out;
  if (trim(v).empty()) return out;
  for (auto& f : split_fields(v, ',')) out.push_back(f);
  return out;
}

}  // namespace detail

/// Sets one key. Values use the same spelling as the config file.
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  const std::string v{trim(value)};
  static const std::map<std::string, std::function<void(ExperimentConfig&, const std::string&, const std::string&)>>
      setters = {
          {"data.path", [](auto& c, auto&, auto& v) { c.data_path = v; }},
          {"data.label_col", [](auto& c, auto&, auto& v) { c.schema.label_col = v; }},
          {"data.feature_cols", [](auto& c, auto&, auto& v) { c.schema.feature_cols = cfg_list(v); }},
          {"data.ignore_cols", [](auto& c, auto&, auto& v) { c.schema.ignore_cols = cfg_list(v); }},
          {"data.missing", [](auto& c, auto&, auto& v) { c.schema.missing_marker = v; }},
          {"data.header",
           [](auto& c, auto& k, auto& v) {
             if (v == "auto") c.schema.header = HeaderMode::Auto;
             else c.schema.header = cfg_bool(k, v) ? HeaderMode::Present : HeaderMode::Absent;
           }},
          {"data.train_fraction", [](auto& c, auto& k, auto& v) { c.train_fraction = cfg_double(k, v); }},
          {"data.split_per_run", [](auto& c, auto& k, auto& v) { c.split_per_run = cfg_bool(k, v); }},
          {"encoding.sensors", [](auto& c, auto& k, auto& v) { c.sensors_per_feature = cfg_size(k, v); }},
          {"encoding.window_ms", [](auto& c, auto& k, auto& v) { c.window_ms = cfg_double(k, v); }},
          {"lif.tau_m", [](auto& c, auto& k, auto& v) { c.network.lif.tau_m = cfg_double(k, v); }},
          {"lif.v_th", [](auto& c, auto& k, auto& v) { c.network.lif.v_th = cfg_double(k, v); }},
          {"lif.v_reset", [](auto& c, auto& k, auto& v) { c.network.lif.v_reset = cfg_double(k, v); }},
          {"lif.k_syn", [](auto& c, auto& k, auto& v) { c.network.lif.k_syn = cfg_double(k, v); }},
          {"net.dt_sim", [](auto& c, auto& k, auto& v) { c.network.dt_sim = cfg_double(k, v); }},
          {"net.teacher_delay_ms", [](auto& c, auto& k, auto& v) { c.network.teacher_delay_ms = cfg_double(k, v); }},
          {"net.readout_tail_ms", [](auto& c, auto& k, auto& v) { c.network.readout_tail_ms = cfg_double(k, v); }},
          {"stdp.a_plus", [](auto& c, auto& k, auto& v) { c.stdp.a_plus = cfg_double(k, v); }},
          {"stdp.a_minus", [](auto& c, auto& k, auto& v) { c.stdp.a_minus = cfg_double(k, v); }},
          {"stdp.tau_plus", [](auto& c, auto& k, auto& v) { c.stdp.tau_plus = cfg_double(k, v); }},
          {"stdp.tau_minus", [](auto& c, auto& k, auto& v) { c.stdp.tau_minus = cfg_double(k, v); }},
          {"stdp.p", [](auto& c, auto& k, auto& v) { c.stdp.p = cfg_double(k, v); }},
          {"stdp.g_max", [](auto& c, auto& k, auto& v) { c.stdp.g_max = cfg_double(k, v); }},
          {"stdp.g_min", [](auto& c, auto& k, auto& v) { c.stdp.g_min = cfg_double(k, v); }},
          {"backend.kind", [](auto& c, auto&, auto& v) { c.backend = parse_backend(v); }},
          {"backend.levels", [](auto& c, auto& k, auto& v) { c.levels = cfg_size(k, v); }},
          {"backend.devices", [](auto& c, auto& k, auto& v) { c.devices = cfg_size(k, v); }},
          {"device.table", [](auto& c, auto&, auto& v) { c.device.table_path = v; }},
          {"device.learning_rate", [](auto& c, auto& k, auto& v) { c.device.learning_rate = cfg_double(k, v); }},
          {"device.v_threshold", [](auto& c, auto& k, auto& v) { c.device.v_threshold = cfg_double(k, v); }},
          {"device.p_dev", [](auto& c, auto& k, auto& v) { c.device.p_dev = cfg_double(k, v); }},
          {"device.noise_sigma", [](auto& c, auto& k, auto& v) { c.device.noise_sigma = cfg_double(k, v); }},
          {"device.iterations", [](auto& c, auto& k, auto& v) { c.device.iterations = cfg_size(k, v); }},
          {"device.g_nodes", [](auto& c, auto& k, auto& v) { c.device.grid.g_nodes = cfg_size(k, v); }},
          {"device.dt_bins", [](auto& c, auto& k, auto& v) { c.device.grid.dt_bins = cfg_size(k, v); }},
          {"device.tail",
           [](auto& c, auto& k, auto& v) {
             if (v == "exponential") c.device.tail = TailShape::Exponential;
             else if (v == "normalized") c.device.tail = TailShape::Normalized;
             else throw ConfigError(k + ": expected exponential|normalized");
           }},
          {"run.epochs", [](auto& c, auto& k, auto& v) { c.epochs = cfg_size(k, v); }},
          {"run.runs", [](auto& c, auto& k, auto& v) { c.runs = cfg_size(k, v); }},
          {"run.seed", [](auto& c, auto& k, auto& v) { c.seed = cfg_size(k, v); }},
          {"run.threads", [](auto& c, auto& k, auto& v) { c.threads = cfg_size(k, v); }},
          {"run.trajectories", [](auto& c, auto& k, auto& v) { c.record_trajectories = cfg_bool(k, v); }},
          {"sweep.lr_grid",
           [](auto& c, auto& k, auto& v) {
             c.lr_grid.clear();
             for (const auto& item : cfg_list(v)) {
               auto colon = item.find(':');
               if (colon == std::string::npos) throw ConfigError(k + ": expected a_plus:a_minus pairs");
               c.lr_grid.emplace_back(cfg_double(k, item.substr(0, colon)), cfg_double(k, item.substr(colon + 1)));
             }
           }},
          {"sweep.levels",
           [](auto& c, auto& k, auto& v) {
             c.level_set.clear();
             for (const auto& item : cfg_list(v)) c.level_set.push_back(cfg_size(k, item));
           }},
          {"sweep.levels_epochs", [](auto& c, auto& k, auto& v) { c.levels_epochs = cfg_size(k, v); }},
          {"sweep.levels_rate", [](auto& c, auto& k, auto& v) { c.levels_rate = cfg_double(k, v); }},
          {"sweep.n",
           [](auto& c, auto& k, auto& v) {
             c.n_set.clear();
             for (const auto& item : cfg_list(v)) c.n_set.push_back(cfg_size(k, item));
           }},
          {"out", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
      };
  auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(c, key, v);
}

inline void apply_config(ExperimentConfig& c, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(c, std::string(detail::trim(std::string_view(line).substr(0, eq))), line.substr(eq + 1));
  }
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  apply_config(base, in);
  return base;
}

/// Fully resolved configuration, for the run manifest.
inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["data"] = {{"path", c.data_path},
               {"label_col", c.schema.label_col},
               {"feature_cols", c.schema.feature_cols},
               {"ignore_cols", c.schema.ignore_cols},
               {"missing", c.schema.missing_marker},
               {"train_fraction", c.train_fraction},
               {"split_per_run", c.split_per_run}};
  j["encoding"] = {{"sensors", c.sensors_per_feature}, {"window_ms", c.window_ms}};
  j["lif"] = {{"tau_m", c.network.lif.tau_m},
              {"v_th", c.network.lif.v_th},
              {"v_reset", c.network.lif.v_reset},
              {"k_syn", c.network.lif.k_syn}};
  j["net"] = {{"dt_sim", c.network.dt_sim},
              {"teacher_delay_ms", c.network.teacher_delay_ms},
              {"readout_tail_ms", c.network.readout_tail_ms}};
  j["stdp"] = {{"a_plus", c.stdp.a_plus},     {"a_minus", c.stdp.a_minus}, {"tau_plus", c.stdp.tau_plus},
               {"tau_minus", c.stdp.tau_minus}, {"p", c.stdp.p},             {"g_max", c.stdp.g_max},
               {"g_min", c.stdp.g_min}};
  j["backend"] = {{"kind", to_string(c.backend)}, {"levels", c.levels}, {"devices", c.devices}};
  j["device"] = {{"table", c.device.table_path},
                 {"learning_rate", c.device.learning_rate},
                 {"v_threshold", c.device.v_threshold},
                 {"p_dev", c.device.p_dev},
                 {"noise_sigma", c.device.noise_sigma},
                 {"iterations", c.device.iterations},
                 {"g_nodes", c.device.grid.g_nodes},
                 {"dt_bins", c.device.grid.dt_bins},
                 {"tail", c.device.tail == TailShape::Exponential ? "exponential" : "normalized"}};
  j["run"] = {{"epochs", c.epochs}, {"runs", c.runs}, {"seed", c.seed}, {"trajectories", c.record_trajectories}};
  nlohmann::ordered_json grid = nlohmann::ordered_json::array();
  for (auto [ap, am] : c.lr_grid) grid.push_back({ap, am});
  j["sweep"] = {{"lr_grid", grid},
                {"levels", c.level_set},
                {"levels_epochs", c.levels_epochs},
                {"levels_rate", c.levels_rate},
                {"n", c.n_set}};
  return j;
}

}  // namespace rramsnn
