#pragma once

#include "qoc/core.hpp"

namespace qoc {

/// In-place forward DFT, x_k -> sum_j x_j exp(-2*pi*i*j*k/N).
/// Radix-2 for power-of-two lengths, direct evaluation otherwise.
void dft(Vector& data, bool inverse = false);

Vector dft_copy(const Vector& data, bool inverse = false);

/// Magnitude-squared spectrum |u_hat(omega_k)|^2 of a real sample vector,
/// with omega_k = 2*pi*k/T for k = 0..N-1.
RealVector power_spectrum(const RealVector& samples);

/// Keep only DFT bins with |omega| inside [omega_min, omega_max]
/// (two-sided, so the output stays real).
RealVector band_filter(const RealVector& samples, double horizon, double omega_min,
                       double omega_max);

bool is_power_of_two(int n);

}  // namespace qoc
