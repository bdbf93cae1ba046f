#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace wigjoint {

using cd = std::complex<double>;

enum class FftSign { Minus, Plus };

/// Unnormalized in-place DFT: out[m] = sum_j in[j] exp(+-2 pi i m j / n).
void fft(std::span<cd> data, FftSign sign);

/// DFT on a lattice centered at index n/2 on both sides:
///   out[m] = sum_j in[j] exp(+-2 pi i (m - n/2)(j - n/2) / n).
/// Requires n divisible by 4.
void centered_dft(std::span<cd> data, FftSign sign);

/// Same as centered_dft, applied along both axes of a row-major rows x cols block.
void centered_dft_2d(std::span<cd> data, std::size_t rows, std::size_t cols, FftSign sign);

}  // namespace wigjoint
