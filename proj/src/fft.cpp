#include "wigjoint/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wigjoint {
namespace {

// FFTW planning is not thread-safe; plans are cached per (n, sign) and
// executed through the new-array interface.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<cd> scratch(static_cast<std::size_t>(n));
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(n, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fftw: planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void fft(std::span<cd> data, FftSign sign) {
  if (data.empty()) return;
  const int fsign = sign == FftSign::Minus ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = cache().get(static_cast<int>(data.size()), fsign);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

void centered_dft(std::span<cd> data, FftSign sign) {
  const std::size_t n = data.size();
  if (n % 4 != 0) throw std::invalid_argument("centered_dft: length must be divisible by 4");
  // (m - n/2)(j - n/2) = mj - (m + j) n/2 + n^2/4; the last term is a multiple
  // of n when 4 | n, so the centring reduces to alternating signs.
  for (std::size_t j = 1; j < n; j += 2) data[j] = -data[j];
  fft(data, sign);
  for (std::size_t m = 1; m < n; m += 2) data[m] = -data[m];
}

void centered_dft_2d(std::span<cd> data, std::size_t rows, std::size_t cols, FftSign sign) {
  if (data.size() != rows * cols) throw std::invalid_argument("centered_dft_2d: size mismatch");
  for (std::size_t r = 0; r < rows; ++r) centered_dft(data.subspan(r * cols, cols), sign);
  std::vector<cd> column(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) column[r] = data[r * cols + c];
    centered_dft(column, sign);
    for (std::size_t r = 0; r < rows; ++r) data[r * cols + c] = column[r];
  }
}

}  // namespace wigjoint
