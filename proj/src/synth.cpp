#include "hiformer/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "hiformer/error.hpp"

namespace hiformer::data {

void SynthRecipe::validate() const {
  if (turbines < 1) throw ConfigError("synthetic recipe needs at least one turbine");
  if (rows < 2) throw ConfigError("synthetic recipe needs at least two rows");
  if (features < 1) throw ConfigError("synthetic recipe needs at least the wind channel");
  if (step_seconds < 1) throw ConfigError("step_seconds must be >= 1");
  if (!(diurnal_period > 0.0) || !(weekly_period > 0.0)) throw ConfigError("periods must be > 0");
  if (wind_std < 0.0 || noise_std < 0.0) throw ConfigError("standard deviations must be >= 0");
  if (!(std::abs(wind_ar) < 1.0) || !(std::abs(noise_ar) < 1.0)) {
    throw ConfigError("AR coefficients must satisfy |phi| < 1");
  }
  if (!(regional_share >= 0.0 && regional_share <= 1.0)) throw ConfigError("regional_share must lie in [0, 1]");
}

namespace {

// Stationary AR(1) path with marginal stddev `sd`.
std::vector<double> ar1(std::size_t len, double phi, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(len);
  const double innov = sd * std::sqrt(1.0 - phi * phi);
  double prev = sd * z(rng);
  for (std::size_t t = 0; t < len; ++t) {
    x[t] = prev;
    prev = phi * prev + innov * z(rng);
  }
  return x;
}

}  // namespace

RawDataset synth_generate(const SynthRecipe& r) {
  r.validate();
  const std::size_t N = r.turbines, T = r.rows, C = r.features, L = r.lag;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::mt19937_64 rng(r.seed);

  RawDataset raw;
  raw.timestamps.resize(T);
  for (std::size_t t = 0; t < T; ++t) raw.timestamps[t] = static_cast<std::int64_t>(t) * r.step_seconds;
  for (std::size_t n = 0; n < N; ++n) {
    std::string id = std::to_string(n + 1);
    raw.turbine_ids.push_back("T" + std::string(id.size() < 2 ? 2 - id.size() : 0, '0') + id);
  }
  raw.feature_names.push_back("wind_speed");
  for (std::size_t c = 1; c < C; ++c) raw.feature_names.push_back(c == 1 ? "temperature" : "aux" + std::to_string(c));

  const std::size_t cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(N))));
  for (std::size_t n = 0; n < N; ++n) {
    raw.coords.push_back({r.spacing * static_cast<double>(n % cols), r.spacing * static_cast<double>(n / cols)});
  }

  // Wind is generated from row -lag so every power row has a lagged driver.
  const auto regional = ar1(T + L, r.wind_ar, r.wind_std, rng);
  std::vector<std::vector<double>> wind(N), noise(N), temps(N * (C - 1));
  for (std::size_t n = 0; n < N; ++n) {
    const auto local = ar1(T + L, r.wind_ar, r.wind_std, rng);
    wind[n].resize(T + L);
    for (std::size_t t = 0; t < T + L; ++t) {
      wind[n][t] = std::sqrt(r.regional_share) * regional[t] + std::sqrt(1.0 - r.regional_share) * local[t];
    }
    noise[n] = ar1(T, r.noise_ar, r.noise_std, rng);
    for (std::size_t c = 1; c < C; ++c) temps[n * (C - 1) + c - 1] = ar1(T, 0.95, 1.0, rng);
  }

  raw.power.resize(T * N);
  raw.weather.resize(T * N * C);
  raw.missing.assign(T * N, 0);
  for (std::size_t t = 0; t < T; ++t) {
    const double td = static_cast<double>(t);
    for (std::size_t n = 0; n < N; ++n) {
      const double phase = r.phase_spread * static_cast<double>(n) / static_cast<double>(N);
      double p = r.base + r.diurnal_amp * std::sin(two_pi * td / r.diurnal_period + phase) +
                 r.weekly_amp * std::sin(two_pi * td / r.weekly_period) + r.coupling * wind[n][t] + noise[n][t];
      if (p < 0.0) {
        p = 0.0;
        ++raw.clamped_negative;
      }
      raw.power[t * N + n] = p;
      double* w = &raw.weather[(t * N + n) * C];
      w[0] = r.wind_mean + wind[n][t + L];
      for (std::size_t c = 1; c < C; ++c) {
        w[c] = 15.0 + 3.0 * std::sin(two_pi * td / r.diurnal_period + 1.0 + static_cast<double>(c)) +
               temps[n * (C - 1) + c - 1][t];
      }
    }
  }
  return raw;
}

double analytic_lagged_correlation(const SynthRecipe& r) {
  const double cov = r.coupling * r.wind_std * r.wind_std;
  const double var_power = 0.5 * (r.diurnal_amp * r.diurnal_amp + r.weekly_amp * r.weekly_amp) +
                           r.coupling * r.coupling * r.wind_std * r.wind_std + r.noise_std * r.noise_std;
  if (r.wind_std == 0.0 || var_power == 0.0) return 0.0;
  return cov / (r.wind_std * std::sqrt(var_power));
}

}  // namespace hiformer::data
