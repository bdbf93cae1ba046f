#pragma once

#include <cstddef>
#include <vector>

namespace wigjoint {

/// Uniform position lattice x_j = (j - n/2) dx with its Fourier-conjugate
/// momentum lattice p_m = (m - n/2) dk, dx dk n = 2 pi.
///
/// All lattices in the library use this centered ordering; FFT ordering is
/// only exposed on request.
class Grid {
 public:
  /// Throws ValidationError unless n is a power of two >= 8 and length > 0.
  Grid(std::size_t n, double length);

  std::size_t n() const { return n_; }
  double length() const { return length_; }
  double dx() const { return dx_; }
  double dk() const { return dk_; }

  double position(std::size_t j) const { return (static_cast<double>(j) - half()) * dx_; }
  double momentum(std::size_t m) const { return (static_cast<double>(m) - half()) * dk_; }
  /// Momentum of FFT bin m (0, dk, ..., -dk).
  double momentum_fft(std::size_t m) const;

  std::vector<double> positions() const;
  std::vector<double> momenta() const;
  std::vector<double> momenta_fft_order() const;

  double max_position() const { return position(n_ - 1); }
  double max_momentum() const { return momentum(n_ - 1); }

  /// Grid whose positions are this grid's momenta: (n, 2 pi / dx).
  Grid conjugate() const;

  /// Number of lattice points treated as the edge band on each side when
  /// checking for clipped support.
  std::size_t edge_band() const;

  bool same_as(const Grid& other, double tol = 1e-12) const;

 private:
  double half() const { return static_cast<double>(n_ / 2); }

  std::size_t n_;
  double length_;
  double dx_;
  double dk_;
};

bool is_power_of_two(std::size_t n);

/// Square phase-space grid (dx == dk): length sqrt(2 pi n).
Grid symmetric_grid(std::size_t n);

}  // namespace wigjoint
