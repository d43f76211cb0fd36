#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hiformer/tensor.hpp"

namespace hiformer::vmd {

enum class InitMode { uniform, zero, random };

std::string to_string(InitMode mode);
InitMode init_mode_from_string(const std::string& name);

struct VmdConfig {
  int num_modes = 7;
  double alpha = 2000.0;  // bandwidth penalty
  double tau = 0.0;       // dual ascent step; 0 tolerates a residual
  double tol = 1e-7;      // on the largest relative squared mode change
  int max_iters = 500;
  InitMode init = InitMode::uniform;
  std::uint64_t seed = 0;  // only used by InitMode::random

  void validate() const;
};

/// Modes of one series, sorted by ascending center frequency.
struct ImfSet {
  std::vector<std::vector<double>> modes;
  std::vector<double> center_freqs;  // cycles/sample in [0, 0.5]
  std::vector<double> residual;      // input - sum(modes)
  int iterations_used = 0;
  bool converged = false;
  /// max relative mode change after each iteration
  std::vector<double> change_history;
};

/// FFT-based analytic signal x + i*H{x}. Requires at least 4 samples.
std::vector<std::complex<double>> analytic_signal(std::span<const double> x);

/// ADMM solution of the constrained bandwidth-minimization problem in the
/// frequency domain, with mirror extension at both ends of the series.
/// Requires x.size() >= 8 * num_modes and finite samples. Non-convergence is
/// reported through ImfSet::converged, not as an error.
ImfSet decompose(std::span<const double> x, const VmdConfig& cfg);

/// Decomposes every column of a [P x N] series matrix independently.
/// Returns e^IMF as [P x N x M].
ad::Tensor decompose_all(const ad::Tensor& series, const VmdConfig& cfg, unsigned threads = 1);

/// Columnar dump for plotting: t, input, imf_1..imf_M, residual, with a
/// second file `<stem>_freqs.csv` listing the center frequencies.
void write_imf_csv(const std::filesystem::path& path, std::span<const double> input, const ImfSet& imfs);

}  // namespace hiformer::vmd
