#pragma once

#include <cstddef>
#include <cstdint>

#include "hiformer/dataset.hpp"

namespace hiformer::data {

/// Synthetic wind farm. For turbine n at step t:
///
///   wind_n(t)  = wind_mean + s_n(t),  s_n = sqrt(share) r(t) + sqrt(1 - share) l_n(t)
///   power_n(t) = base + diurnal_amp sin(2 pi t / diurnal_period + phi_n)
///              + weekly_amp sin(2 pi t / weekly_period)
///              + coupling (wind_n(t - lag) - wind_mean) + e_n(t)
///
/// r and l_n are stationary AR(1) processes with coefficient wind_ar and
/// stddev wind_std; e_n is AR(1) with coefficient noise_ar and stddev
/// noise_std. Further weather channels are temperature-like series with their
/// own diurnal cycle and no effect on power.
struct SynthRecipe {
  std::size_t turbines = 8;
  std::size_t rows = 4000;
  std::size_t features = 2;  // channel 0 is wind speed
  std::uint64_t seed = 42;
  std::int64_t step_seconds = 600;

  double base = 6.0;
  double diurnal_amp = 1.0;
  double diurnal_period = 144.0;
  double weekly_amp = 0.5;
  double weekly_period = 1008.0;
  double phase_spread = 0.3;  // phi_n = phase_spread * n / turbines

  double wind_mean = 8.0;
  double wind_std = 1.5;
  double wind_ar = 0.9;
  double regional_share = 0.5;
  double coupling = 0.8;
  std::size_t lag = 12;

  double noise_std = 0.3;
  double noise_ar = 0.5;

  double spacing = 500.0;  // grid spacing of turbine coordinates, metres

  void validate() const;
};

RawDataset synth_generate(const SynthRecipe& recipe);

/// Population correlation between wind_n(t - lag) and power_n(t) over a time
/// span covering whole periods of both sinusoids.
double analytic_lagged_correlation(const SynthRecipe& recipe);

}  // namespace hiformer::data
