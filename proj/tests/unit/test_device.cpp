#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rramsnn/device.hpp"

using namespace rramsnn;

// Reference values from tests/oracles/device_oracle.py (dense brute-force
// scan of the pulse waveforms).
namespace oracle {
constexpr double kMinNetExp50 = -1.3678794388541;
constexpr double kMinNetNorm50 = -1.268941419052654;
constexpr double kPeakOverdrive = 0.9899997976870047;
constexpr double kDgAt50Lr05 = 0.1807472282773365;
}  // namespace oracle

TEST(Pulse, Shape) {
  const auto w = default_pulse();
  EXPECT_DOUBLE_EQ(pulse_voltage(-2e-3, w), 0.0);
  EXPECT_DOUBLE_EQ(pulse_voltage(-1e-3, w), 0.0);
  EXPECT_NEAR(pulse_voltage(-1e-9, w), 1.0, 1e-5);
  EXPECT_DOUBLE_EQ(pulse_voltage(0.0, w), 0.0);
  EXPECT_NEAR(pulse_voltage(50.0, w), -std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(pulse_voltage(100.5, w), 0.0);
  const auto n = default_pulse(TailShape::Normalized);
  EXPECT_NEAR(pulse_voltage(100.0, n), 0.0, 1e-15);
  EXPECT_NEAR(pulse_voltage(1e-9, n), -1.0, 1e-9);
}

TEST(Pulse, NetVoltageExtremesMatchOracle) {
  const auto w = default_pulse();
  EXPECT_NEAR(scan_net_voltage(50.0, w, w).min_v, oracle::kMinNetExp50, 1e-6);
  EXPECT_NEAR(scan_net_voltage(-50.0, w, w).max_v, -oracle::kMinNetExp50, 1e-6);
  const auto n = default_pulse(TailShape::Normalized);
  EXPECT_NEAR(scan_net_voltage(50.0, n, n).min_v, oracle::kMinNetNorm50, 1e-6);
  // Closed form for the exponential tail: 1 + exp(-dt / tau_n).
  for (double dt : {5.0, 20.0, 75.0}) EXPECT_NEAR(scan_net_voltage(dt, w, w).min_v, -(1.0 + std::exp(-dt / 50.0)), 1e-6);
}

TEST(Device, LonePulseNeverWrites) {
  const auto w = default_pulse();
  const auto m = calibrated_memristor(0.5, w, w);
  for (double dt : {1e3, -1e3, 1e9}) {
    const auto od = overdrive(dt, w, w, m);
    EXPECT_EQ(od.pos, 0.0);
    EXPECT_EQ(od.neg, 0.0);
    EXPECT_EQ(device_delta_g(dt, 0.5, m, w, w), 0.0);
  }
}

TEST(Device, CalibrationAndKnownPoint) {
  const auto w = default_pulse();
  ThresholdMemristor probe;
  EXPECT_NEAR(peak_overdrive(w, w, probe), oracle::kPeakOverdrive, 1e-6);
  const auto m = calibrated_memristor(0.5, w, w);
  EXPECT_NEAR(device_delta_g(50.0, 0.0, m, w, w), oracle::kDgAt50Lr05, 1e-6);
  EXPECT_NEAR(device_delta_g(-50.0, 1.0, m, w, w), -oracle::kDgAt50Lr05, 1e-6);
  EXPECT_NEAR(device_delta_g(2e-3, 0.0, m, w, w), 0.5, 2e-4);
}

TEST(Device, SignsAndSaturation) {
  const auto w = default_pulse();
  const auto m = calibrated_memristor(0.5, w, w);
  EXPECT_GT(device_delta_g(10.0, 0.3, m, w, w), 0.0);
  EXPECT_LT(device_delta_g(-10.0, 0.3, m, w, w), 0.0);
  EXPECT_EQ(device_delta_g(10.0, 1.0, m, w, w), 0.0);
  EXPECT_EQ(device_delta_g(-10.0, 0.0, m, w, w), 0.0);
  EXPECT_THROW(device_delta_g(1.0, 1.5, m, w, w), std::domain_error);
}

TEST(Device, ThresholdBelowAmplitudeRejected) {
  const auto w = default_pulse();
  ThresholdMemristor m;
  m.v_tp = 0.9;
  EXPECT_THROW(m.validate(w, w), std::invalid_argument);
}

TEST(Device, NoiseIsMultiplicativeAndSeeded) {
  const auto w = default_pulse();
  const auto m = calibrated_memristor(0.2, w, w, 1.01, 1.0, 0.3);
  Rng a(5), b(5);
  const double base = device_delta_g(20.0, 0.4, m, w, w);
  double sum = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double x = device_delta_g(20.0, 0.4, m, w, w, &a);
    EXPECT_EQ(x, device_delta_g(20.0, 0.4, m, w, w, &b));
    EXPECT_GT(x, 0.0);
    sum += x;
  }
  // E[lognormal(0, s)] = exp(s^2 / 2)
  EXPECT_NEAR(sum / 2000.0 / base, std::exp(0.045), 0.03);
}

TEST(Protocol, ChainedScatter) {
  const auto w = default_pulse();
  const auto m = calibrated_memristor(0.5, w, w, 1.01, 1.0, 0.1);
  Rng rng(9);
  const auto s = measure_stdp_protocol(m, w, w, 1000, rng);
  ASSERT_EQ(s.size(), 1000u);
  EXPECT_EQ(s.front().g_i, 1.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_GE(s[i].dt_ms, -100.0);
    EXPECT_LE(s[i].dt_ms, 100.0);
    EXPECT_GE(s[i].g_i + s[i].dg, 0.0);
    EXPECT_LE(s[i].g_i + s[i].dg, 1.0);
    if (i > 0) {
      EXPECT_DOUBLE_EQ(s[i].g_i, s[i - 1].g_i + s[i - 1].dg);
    }
  }
  EXPECT_THROW(measure_stdp_protocol(m, w, w, 0, rng), std::invalid_argument);
}

TEST(Table, BilinearMidpointAndSignSplit) {
  DeviceTable t{{0.0, 1.0}, {-10.0, -5.0, 5.0, 10.0}, {-1.0, -2.0, 2.0, 1.0, -3.0, -4.0, 4.0, 3.0}};
  t.validate();
  EXPECT_DOUBLE_EQ(interpolate(t, -7.5, 0.5), (-1.0 - 2.0 - 3.0 - 4.0) / 4.0);
  EXPECT_DOUBLE_EQ(interpolate(t, 7.5, 0.5), (2.0 + 1.0 + 4.0 + 3.0) / 4.0);
  EXPECT_DOUBLE_EQ(interpolate(t, 5.0, 0.0), 2.0);
  // Inside the gap around 0 each side holds its own edge value.
  EXPECT_DOUBLE_EQ(interpolate(t, 1.0, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(interpolate(t, -1.0, 0.0), -2.0);
  // Outside the grid: clamped.
  EXPECT_DOUBLE_EQ(interpolate(t, 50.0, 2.0), 3.0);
  EXPECT_DOUBLE_EQ(interpolate(t, -50.0, -1.0), -1.0);
}

TEST(Table, NoiseFreeTableTracksModel) {
  const auto w = default_pulse();
  const auto m = calibrated_memristor(0.5, w, w);
  TableGrid grid;
  auto model = [&](double dt, double g) { return device_delta_g(dt, g, m, w, w); };
  const auto t = tabulate(model, grid);
  const double bin = 2.0 * grid.dt_span_ms / static_cast<double>(grid.dt_bins);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> udt(-100.0, 100.0), ug(0.0, 1.0);
  int checked = 0;
  while (checked < 1000) {
    const double dt = udt(rng), g = ug(rng);
    // Between 0 and the first centre, and beyond the last, the table holds its edge value.
    if (std::abs(dt) < bin || std::abs(dt) > grid.dt_span_ms - bin / 2.0) continue;
    EXPECT_NEAR(interpolate(t, dt, g), model(dt, g), 2e-3) << "dt=" << dt << " g=" << g;
    ++checked;
  }
}

TEST(Table, BuildAveragesBinsAndFallsBack) {
  TableGrid grid{3, 4, 100.0};  // g nodes 0, .5, 1; dt centers -75, -25, 25, 75
  std::vector<StdpRecord> sc = {{0.49, 30.0, 0.2}, {0.52, 40.0, 0.4}, {0.0, -80.0, -0.1}};
  const auto t = build_table(sc, grid, [](double dt, double g) { return dt * 0.001 + g; });
  EXPECT_DOUBLE_EQ(t.at(1, 2), 0.3);
  EXPECT_DOUBLE_EQ(t.at(0, 0), -0.1);
  EXPECT_DOUBLE_EQ(t.at(2, 3), 0.075 + 1.0);
}

TEST(Table, CsvRoundTrip) {
  const auto w = default_pulse();
  const auto m = calibrated_memristor(0.5, w, w, 1.01, 1.0, 0.1);
  Rng rng(2);
  const auto sc = measure_stdp_protocol(m, w, w, 1000, rng);
  const auto t = build_table(sc, TableGrid{}, [&](double dt, double g) { return device_delta_g(dt, g, m, w, w); });
  std::stringstream ss;
  write_table_csv(ss, t);
  const std::string text = ss.str();
  EXPECT_EQ(text.rfind("g_i,dt_ms,dg\n", 0), 0u);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const auto back = read_table_csv(ss);
  EXPECT_EQ(back.g_axis, t.g_axis);
  EXPECT_EQ(back.dt_axis, t.dt_axis);
  EXPECT_EQ(back.dg, t.dg);

  // Row order does not matter; a missing node does.
  std::istringstream lines(text);
  std::string header, line;
  std::getline(lines, header);
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  std::reverse(rows.begin(), rows.end());
  std::string shuffled = header + "\n";
  for (const auto& r : rows) shuffled += r + "\n";
  std::istringstream in1(shuffled);
  EXPECT_EQ(read_table_csv(in1).dg, t.dg);
  rows.pop_back();
  std::string partial = header + "\n";
  for (const auto& r : rows) partial += r + "\n";
  std::istringstream in2(partial);
  EXPECT_THROW(read_table_csv(in2), std::runtime_error);
}
