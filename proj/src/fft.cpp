#include "hiformer/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "hiformer/error.hpp"

namespace hiformer::fft {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per (size, direction) and kept for the process.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<Complex> in(n), out(n);
    fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw Error("FFTW failed to create a plan of size " + std::to_string(n));
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

std::vector<Complex> run(std::span<const Complex> x, int sign) {
  const int n = static_cast<int>(x.size());
  if (n == 0) return {};
  std::vector<Complex> in(x.begin(), x.end());
  std::vector<Complex> out(x.size());
  fftw_plan plan = PlanCache::instance().get(n, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

std::vector<Complex> forward(std::span<const Complex> x) { return run(x, FFTW_FORWARD); }

std::vector<Complex> forward(std::span<const double> x) {
  std::vector<Complex> c(x.begin(), x.end());
  return run(c, FFTW_FORWARD);
}

std::vector<Complex> inverse(std::span<const Complex> spectrum) {
  auto out = run(spectrum, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(spectrum.size());
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace hiformer::fft
