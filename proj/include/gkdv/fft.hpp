#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace gkdv::fft {

using Complex = std::complex<double>;

/// Real-to-complex transform of length n (unnormalized, FFTW sign convention).
/// Plans are created once per length and shared; execution is thread-safe.
void forward(std::span<const double> in, std::span<Complex> out);

/// Complex-to-real inverse including the 1/n normalization. `in` is left intact.
void inverse(std::span<const Complex> in, std::span<double> out);

/// Scratch-owning wrapper for repeated transforms of one length.
class Transformer {
 public:
  explicit Transformer(std::size_t n);

  std::size_t size() const { return n_; }
  void forward(std::span<const double> in, std::span<Complex> out);
  void inverse(std::span<const Complex> in, std::span<double> out);

 private:
  std::size_t n_;
  std::vector<Complex> scratch_;
};

}  // namespace gkdv::fft
