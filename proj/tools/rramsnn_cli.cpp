// Command-line front end for the experiments.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rramsnn.hpp"

namespace fs = std::filesystem;
using namespace rramsnn;
using json = nlohmann::ordered_json;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;  // key=value
};

ExperimentConfig resolve(const Globals& g) {
  ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  for (const auto& kv : g.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.out_dir = *g.out;
  return cfg;
}

json summary_of(const RunStats& st) {
  return {{"runs", st.runs()},
          {"epochs", st.epochs()},
          {"mean_last5_ca", st.mean_last()},
          {"mean_last5_std", st.mean_last_std()},
          {"peak_ca", st.peak()},
          {"total_variation", st.mean_total_variation()}};
}

void cmd_train(const ExperimentConfig& cfg) {
  const auto st = run_training(cfg);
  write_run_stats(cfg.out_dir, st);
  write_manifest(cfg.out_dir, "train", cfg, summary_of(st));
  std::cout << "mean last-5 CA " << st.mean_last() << " %, peak " << st.peak() << " %\n";
}

void cmd_sweep_lr(const ExperimentConfig& cfg) {
  const auto surface = sweep_learning_rate(cfg);
  json summary = json::array();
  for (const auto& p : surface) {
    const fs::path dir = fs::path(cfg.out_dir) / ("lr_" + csv::fmt(p.a_plus) + "_" + csv::fmt(p.a_minus));
    write_run_stats(dir, p.stats);
    json s = summary_of(p.stats);
    s["a_plus"] = p.a_plus;
    s["a_minus"] = p.a_minus;
    summary.push_back(s);
    std::cout << "A+ " << p.a_plus << " A- " << p.a_minus << ": CA " << p.stats.mean_last() << " % (std "
              << p.stats.mean_last_std() << ")\n";
  }
  detail::write_file(fs::path(cfg.out_dir) / "surface.csv", write_surface_csv, surface);
  write_manifest(cfg.out_dir, "sweep-lr", cfg, summary);
}

void cmd_sweep_levels(const ExperimentConfig& cfg) {
  const auto pts = sweep_levels(cfg);
  json summary = json::array();
  for (const auto& p : pts) {
    const fs::path dir = fs::path(cfg.out_dir) / (p.levels == 0 ? std::string("ideal") : "levels_" + std::to_string(p.levels));
    write_run_stats(dir, p.stats);
    json s = summary_of(p.stats);
    s["levels"] = p.levels;
    s["mean_ce"] = 100.0 - p.stats.mean_last();
    summary.push_back(s);
    std::cout << (p.levels == 0 ? std::string("continuous") : std::to_string(p.levels) + " levels") << ": CE "
              << 100.0 - p.stats.mean_last() << " %\n";
  }
  detail::write_file(fs::path(cfg.out_dir) / "levels.csv", write_levels_csv, pts);
  write_manifest(cfg.out_dir, "sweep-levels", cfg, summary);
}

void cmd_sweep_n(const ExperimentConfig& cfg) {
  const auto pts = sweep_n(cfg);
  json summary = json::array();
  for (const auto& p : pts) {
    write_run_stats(fs::path(cfg.out_dir) / ("n_" + std::to_string(p.n)), p.stats);
    json s = summary_of(p.stats);
    s["n"] = p.n;
    s["final_iqr"] = p.stats.quantiles_at(p.epochs - 1).iqr();
    summary.push_back(s);
    std::cout << "n " << p.n << " (" << p.epochs << " epochs): CA " << p.stats.mean_last() << " %, peak "
              << p.stats.peak() << " %, final IQR " << s["final_iqr"].get<double>() << ", TV "
              << p.stats.mean_total_variation() << "\n";
  }
  detail::write_file(fs::path(cfg.out_dir) / "n_summary.csv", write_n_summary_csv, pts);
  write_manifest(cfg.out_dir, "sweep-n", cfg, summary);
}

void cmd_single_device(const ExperimentConfig& cfg) {
  const auto res = single_device_experiment(cfg);
  json summary;
  for (std::size_t ic = 0; ic < res.initial_conditions.size(); ++ic) {
    const auto& st = res.initial_conditions[ic];
    write_run_stats(fs::path(cfg.out_dir) / ("ic_" + std::to_string(ic)), st);
    summary["ic_" + std::to_string(ic)] = summary_of(st);
    std::cout << "single device, initial condition " << ic << ": CA " << st.mean_last() << " % (std "
              << st.mean_last_std() << ")\n";
  }
  write_run_stats(fs::path(cfg.out_dir) / "ideal", res.ideal);
  write_run_stats(fs::path(cfg.out_dir) / ("multi_" + std::to_string(res.multi_devices)), res.multi);
  summary["ideal"] = summary_of(res.ideal);
  summary["multi"] = summary_of(res.multi);
  std::cout << "ideal control: CA " << res.ideal.mean_last() << " %\n"
            << res.multi_devices << " devices: CA " << res.multi.mean_last() << " %\n";
  write_manifest(cfg.out_dir, "single-device", cfg, summary);
}

void cmd_device_gen(const ExperimentConfig& cfg) {
  const auto table = generate_device_table(cfg.device, cfg.seed);
  detail::write_file(fs::path(cfg.out_dir) / "device_table.csv", write_table_csv, table);
  json summary = {{"g_nodes", table.g_axis.size()}, {"dt_nodes", table.dt_axis.size()}, {"max_abs_dg", table.max_abs()}};
  write_manifest(cfg.out_dir, "device-gen", cfg, summary);
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "device_table.csv").string() << " (max |dG| " << table.max_abs()
            << ")\n";
}

void cmd_crossbar_plan(std::size_t n, double k_wire) {
  const auto best = best_arrangement(n, k_wire);
  std::cout << "rows,cols,sum,max_read_error,best\n";
  for (const auto& a : factorizations(n, k_wire))
    std::cout << a.rows << ',' << a.cols << ',' << a.rows + a.cols << ',' << csv::fmt(max_read_error(a)) << ','
              << (a == best ? 1 : 0) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RRAM synapse SNN experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--set", g.overrides, "override one config key (key=value); repeatable");

  auto* train = app.add_subcommand("train", "repeated training runs of the configured backend");
  auto* sweep_lr = app.add_subcommand("sweep-lr", "ideal backend over the (A+, A-) grid");
  auto* sweep_lv = app.add_subcommand("sweep-levels", "quantized backend over the level set");
  auto* sweep_nn = app.add_subcommand("sweep-n", "multi-device synapses over the n set");
  auto* single = app.add_subcommand("single-device", "single-device failure with controls");
  auto* devgen = app.add_subcommand("device-gen", "emit a device table CSV");
  auto* plan = app.add_subcommand("crossbar-plan", "R x C arrangement for an n-device synapse");
  std::size_t n = 0;
  double k_wire = 1.0;
  plan->add_option("--n", n, "devices per synapse")->required()->check(CLI::PositiveNumber);
  plan->add_option("--k-wire", k_wire, "read error per unit of r + c")->check(CLI::NonNegativeNumber);
  for (auto* sub : {train, sweep_lr, sweep_lv, sweep_nn, single, devgen, plan}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  try {
    if (plan->parsed()) {
      cmd_crossbar_plan(n, k_wire);
      return 0;
    }
    const auto cfg = resolve(g);
    if (train->parsed()) cmd_train(cfg);
    else if (sweep_lr->parsed()) cmd_sweep_lr(cfg);
    else if (sweep_lv->parsed()) cmd_sweep_levels(cfg);
    else if (sweep_nn->parsed()) cmd_sweep_n(cfg);
    else if (single->parsed()) cmd_single_device(cfg);
    else if (devgen->parsed()) cmd_device_gen(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
