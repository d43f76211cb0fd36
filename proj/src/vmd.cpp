#include "hiformer/vmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hiformer/error.hpp"
#include "hiformer/fft.hpp"
#include "hiformer/io_util.hpp"
#include "hiformer/parallel.hpp"

namespace hiformer::vmd {

using Complex = std::complex<double>;

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::uniform: return "uniform";
    case InitMode::zero: return "zero";
    case InitMode::random: return "random";
  }
  return "uniform";
}

InitMode init_mode_from_string(const std::string& name) {
  if (name == "uniform") return InitMode::uniform;
  if (name == "zero") return InitMode::zero;
  if (name == "random") return InitMode::random;
  throw ConfigError("unknown VMD init mode '" + name + "' (expected uniform, zero or random)");
}

void VmdConfig::validate() const {
  if (num_modes < 1) throw ConfigError("VMD num_modes must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("VMD alpha must be > 0");
  if (!(tau >= 0.0)) throw ConfigError("VMD tau must be >= 0");
  if (!(tol > 0.0)) throw ConfigError("VMD tol must be > 0");
  if (max_iters < 1) throw ConfigError("VMD max_iters must be >= 1");
}

std::vector<Complex> analytic_signal(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) throw DataError("analytic_signal needs at least 4 samples, got " + std::to_string(n));
  auto spec = fft::forward(x);
  // Keep DC (and Nyquist for even n) once, double positive bins, drop negative bins.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (k < (n + 1) / 2) {
      spec[k] *= 2.0;
    } else if (!(n % 2 == 0 && k == half)) {
      spec[k] = 0.0;
    }
  }
  return fft::inverse(spec);
}

ImfSet decompose(std::span<const double> x, const VmdConfig& cfg) {
  cfg.validate();
  const std::size_t P = x.size();
  const std::size_t M = static_cast<std::size_t>(cfg.num_modes);
  if (P < 8 * M) {
    throw DataError("VMD needs at least " + std::to_string(8 * M) + " samples for " + std::to_string(M) +
                    " modes, got " + std::to_string(P));
  }
  for (std::size_t t = 0; t < P; ++t) {
    if (!std::isfinite(x[t])) throw DataError("VMD input has a non-finite sample at index " + std::to_string(t));
  }

  // Mirror extension: reflect half a window onto each end.
  const std::size_t ext = P / 2;
  std::vector<double> mirrored;
  mirrored.reserve(P + 2 * ext);
  for (std::size_t i = ext; i-- > 0;) mirrored.push_back(x[i]);
  mirrored.insert(mirrored.end(), x.begin(), x.end());
  for (std::size_t i = 0; i < ext; ++i) mirrored.push_back(x[P - 1 - i]);
  const std::size_t T = mirrored.size();

  // One-sided spectrum on bins [0, T/2), frequencies k/T in cycles/sample.
  const auto full = fft::forward(std::span<const double>(mirrored));
  const std::size_t npos = (T + 1) / 2;
  std::vector<Complex> f_plus(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(npos));
  std::vector<double> freq(npos);
  for (std::size_t k = 0; k < npos; ++k) freq[k] = static_cast<double>(k) / static_cast<double>(T);

  std::vector<double> omega(M, 0.0);
  switch (cfg.init) {
    case InitMode::uniform:
      for (std::size_t i = 0; i < M; ++i) omega[i] = 0.5 / static_cast<double>(M) * static_cast<double>(i);
      break;
    case InitMode::zero:
      break;
    case InitMode::random: {
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const double lo = std::log(1.0 / static_cast<double>(T));
      const double hi = std::log(0.5);
      for (auto& w : omega) w = std::exp(lo + (hi - lo) * u(rng));
      std::sort(omega.begin(), omega.end());
      break;
    }
  }

  std::vector<std::vector<Complex>> u(M, std::vector<Complex>(npos, Complex{}));
  std::vector<Complex> lambda(npos, Complex{});
  std::vector<Complex> total(npos, Complex{});
  std::vector<Complex> previous(npos);

  ImfSet result;
  const double two_alpha = 2.0 * cfg.alpha;
  int iter = 0;
  for (iter = 1; iter <= cfg.max_iters; ++iter) {
    double max_change = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      auto& ui = u[i];
      previous = ui;
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < npos; ++k) {
        const Complex others = total[k] - ui[k];
        const double d = freq[k] - omega[i];
        ui[k] = (f_plus[k] - others + 0.5 * lambda[k]) / (1.0 + two_alpha * d * d);
        total[k] = others + ui[k];
        const double p = std::norm(ui[k]);
        num += freq[k] * p;
        den += p;
      }
      if (den > 0.0) omega[i] = num / den;

      double diff = 0.0, base = 0.0;
      for (std::size_t k = 0; k < npos; ++k) {
        diff += std::norm(ui[k] - previous[k]);
        base += std::norm(previous[k]);
      }
      const double rel = base > 0.0 ? diff / base : (diff > 0.0 ? 1.0 : 0.0);
      max_change = std::max(max_change, rel);
    }
    if (cfg.tau > 0.0) {
      for (std::size_t k = 0; k < npos; ++k) lambda[k] += cfg.tau * (f_plus[k] - total[k]);
    }
    result.change_history.push_back(max_change);
    if (max_change < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.iterations_used = std::min(iter, cfg.max_iters);

  // Back to the time domain through the Hermitian completion of each mode.
  std::vector<std::pair<double, std::vector<double>>> modes;
  modes.reserve(M);
  for (std::size_t i = 0; i < M; ++i) {
    std::vector<Complex> spec(T, Complex{});
    spec[0] = u[i][0];
    for (std::size_t k = 1; k < npos; ++k) {
      spec[k] = u[i][k];
      spec[T - k] = std::conj(u[i][k]);
    }
    const auto time = fft::inverse(spec);
    std::vector<double> mode(P);
    for (std::size_t t = 0; t < P; ++t) mode[t] = time[ext + t].real();
    modes.emplace_back(omega[i], std::move(mode));
  }
  std::stable_sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  result.residual.assign(x.begin(), x.end());
  for (auto& [w, mode] : modes) {
    result.center_freqs.push_back(w);
    for (std::size_t t = 0; t < P; ++t) result.residual[t] -= mode[t];
    result.modes.push_back(std::move(mode));
  }
  return result;
}

ad::Tensor decompose_all(const ad::Tensor& series, const VmdConfig& cfg, unsigned threads) {
  cfg.validate();
  if (series.rank() != 2) {
    throw DimensionError("decompose_all expects a [P x N] matrix, got " + ad::shape_string(series.shape()));
  }
  const std::size_t P = series.dim(0);
  const std::size_t N = series.dim(1);
  const std::size_t M = static_cast<std::size_t>(cfg.num_modes);
  const auto v = series.data();
  std::vector<double> out(P * N * M);
  parallel_for(N, threads, [&](std::size_t n) {
    std::vector<double> column(P);
    for (std::size_t t = 0; t < P; ++t) column[t] = v[t * N + n];
    ImfSet imfs;
    try {
      imfs = decompose(column, cfg);
    } catch (const DataError& e) {
      throw DataError("turbine " + std::to_string(n) + ": " + e.what());
    }
    for (std::size_t t = 0; t < P; ++t) {
      for (std::size_t m = 0; m < M; ++m) out[(t * N + n) * M + m] = imfs.modes[m][t];
    }
  });
  return ad::Tensor(ad::Shape{P, N, M}, std::move(out));
}

void write_imf_csv(const std::filesystem::path& path, std::span<const double> input, const ImfSet& imfs) {
  io::write_file_atomic(path, [&](std::ostream& os) {
    os << "t,input";
    for (std::size_t m = 0; m < imfs.modes.size(); ++m) os << ",imf_" << (m + 1);
    os << ",residual\n";
    for (std::size_t t = 0; t < input.size(); ++t) {
      os << t << ',' << io::format_double(input[t]);
      for (const auto& mode : imfs.modes) os << ',' << io::format_double(mode[t]);
      os << ',' << io::format_double(imfs.residual[t]) << '\n';
    }
  });
  auto freq_path = path.parent_path() / (path.stem().string() + "_freqs.csv");
  io::write_file_atomic(freq_path, [&](std::ostream& os) {
    os << "mode,center_freq\n";
    for (std::size_t m = 0; m < imfs.center_freqs.size(); ++m) {
      os << (m + 1) << ',' << io::format_double(imfs.center_freqs[m]) << '\n';
    }
  });
}

}  // namespace hiformer::vmd
