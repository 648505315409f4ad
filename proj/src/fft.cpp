#include "qoc/fft.hpp"

#include <cmath>

namespace qoc {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

namespace {

void fft_radix2(Vector& a, bool inverse) {
  const int n = static_cast<int>(a.size());
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a(i), a(j));
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * M_PI / len * (inverse ? 1.0 : -1.0);
    const Complex wlen(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const Complex u = a(i + k);
        const Complex v = a(i + k + len / 2) * w;
        a(i + k) = u + v;
        a(i + k + len / 2) = u - v;
        w *= wlen;
      }
    }
  }
}

void dft_direct(Vector& a, bool inverse) {
  const int n = static_cast<int>(a.size());
  Vector out = Vector::Zero(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      out(k) += a(j) * std::exp(Complex(0.0, sign * 2.0 * M_PI * j * k / n));
  a = out;
}

}  // namespace

void dft(Vector& data, bool inverse) {
  if (data.size() == 0) return;
  if (is_power_of_two(static_cast<int>(data.size())))
    fft_radix2(data, inverse);
  else
    dft_direct(data, inverse);
  if (inverse) data /= static_cast<double>(data.size());
}

Vector dft_copy(const Vector& data, bool inverse) {
  Vector out = data;
  dft(out, inverse);
  return out;
}

RealVector power_spectrum(const RealVector& samples) {
  Vector z = samples.cast<Complex>();
  dft(z);
  return z.cwiseAbs2();
}

RealVector band_filter(const RealVector& samples, double horizon, double omega_min,
                       double omega_max) {
  const int n = static_cast<int>(samples.size());
  Vector z = samples.cast<Complex>();
  dft(z);
  for (int k = 0; k < n; ++k) {
    const int sym = std::min(k, n - k);
    const double omega = 2.0 * M_PI * sym / horizon;
    if (omega < omega_min || omega > omega_max) z(k) = 0.0;
  }
  dft(z, true);
  return z.real();
}

}  // namespace qoc
