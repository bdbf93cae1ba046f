#include "wigjoint/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "wigjoint/error.hpp"

namespace wigjoint {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Grid::Grid(std::size_t n, double length) : n_(n), length_(length) {
  if (n < 8 || !is_power_of_two(n))
    throw ValidationError("grid: n must be a power of two >= 8, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length))
    throw ValidationError("grid: length must be positive, got " + std::to_string(length));
  dx_ = length / static_cast<double>(n);
  dk_ = 2.0 * std::numbers::pi / length;
}

double Grid::momentum_fft(std::size_t m) const {
  const auto mi = static_cast<double>(m);
  return (m < n_ / 2 ? mi : mi - static_cast<double>(n_)) * dk_;
}

std::vector<double> Grid::positions() const {
  std::vector<double> out(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = position(j);
  return out;
}

std::vector<double> Grid::momenta() const {
  std::vector<double> out(n_);
  for (std::size_t m = 0; m < n_; ++m) out[m] = momentum(m);
  return out;
}

std::vector<double> Grid::momenta_fft_order() const {
  std::vector<double> out(n_);
  for (std::size_t m = 0; m < n_; ++m) out[m] = momentum_fft(m);
  return out;
}

Grid Grid::conjugate() const { return Grid(n_, 2.0 * std::numbers::pi / dx_); }

std::size_t Grid::edge_band() const { return std::max<std::size_t>(1, n_ / 16); }

bool Grid::same_as(const Grid& other, double tol) const {
  return n_ == other.n_ && std::abs(length_ - other.length_) <= tol * std::max(1.0, length_);
}

Grid symmetric_grid(std::size_t n) {
  return Grid(n, std::sqrt(2.0 * std::numbers::pi * static_cast<double>(n)));
}

}  // namespace wigjoint
