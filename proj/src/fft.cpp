#include "gkdv/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>

namespace gkdv::fft {
namespace {

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

// The FFTW planner is not reentrant; plan creation is serialized here and the
// plans are then executed through the new-array interface from any thread.
PlanPair plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const int len = static_cast<int>(n);
  double* rbuf = fftw_alloc_real(n);
  fftw_complex* cbuf = fftw_alloc_complex(n / 2 + 1);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.r2c = fftw_plan_dft_r2c_1d(len, rbuf, cbuf, flags);
  p.c2r = fftw_plan_dft_c2r_1d(len, cbuf, rbuf, flags);
  fftw_free(cbuf);
  fftw_free(rbuf);
  if (p.r2c == nullptr || p.c2r == nullptr) throw std::runtime_error("fftw planning failed");
  cache.emplace(n, p);
  return p;
}

}  // namespace

void forward(std::span<const double> in, std::span<Complex> out) {
  const std::size_t n = in.size();
  if (out.size() != n / 2 + 1) throw std::invalid_argument("fft::forward: size mismatch");
  const PlanPair p = plans_for(n);
  // r2c with FFTW_ESTIMATE does not modify its input.
  fftw_execute_dft_r2c(p.r2c, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void inverse(std::span<const Complex> in, std::span<double> out) {
  std::vector<Complex> scratch(in.begin(), in.end());
  const std::size_t n = out.size();
  if (in.size() != n / 2 + 1) throw std::invalid_argument("fft::inverse: size mismatch");
  const PlanPair p = plans_for(n);
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
}

Transformer::Transformer(std::size_t n) : n_(n), scratch_(n / 2 + 1) { plans_for(n); }

void Transformer::forward(std::span<const double> in, std::span<Complex> out) {
  fft::forward(in, out);
}

void Transformer::inverse(std::span<const Complex> in, std::span<double> out) {
  if (in.size() != scratch_.size() || out.size() != n_)
    throw std::invalid_argument("Transformer::inverse: size mismatch");
  std::copy(in.begin(), in.end(), scratch_.begin());
  const PlanPair p = plans_for(n_);
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(scratch_.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= scale;
}

}  // namespace gkdv::fft
