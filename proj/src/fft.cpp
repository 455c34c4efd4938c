#include "fdl/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "fdl/errors.hpp"

namespace fdl {
namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is. Plans
// are created with FFTW_UNALIGNED so they may run on any caller array, and
// with FFTW_ESTIMATE so the chosen algorithm never depends on timing runs.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan plan_for(const std::vector<int>& dims, int sign) {
  static std::map<std::pair<std::vector<int>, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto key = std::make_pair(dims, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::size_t total = 1;
  for (int d : dims) {
    if (d <= 0) fail(ErrorKind::BadShape, "transform dimension must be positive");
    total *= static_cast<std::size_t>(d);
  }
  std::vector<fftw_complex> scratch(total);
  fftw_plan p = fftw_plan_dft(static_cast<int>(dims.size()),
                              const_cast<int*>(dims.data()), scratch.data(),
                              scratch.data(), sign,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (p == nullptr) fail(ErrorKind::BadShape, "could not plan transform");
  cache.emplace(std::move(key), p);
  return p;
}

void run(std::complex<double>* data, const std::vector<int>& dims, int sign) {
  fftw_plan p = plan_for(dims, sign);
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, raw, raw);
}

}  // namespace

void fft_forward(std::complex<double>* data, const std::vector<int>& dims) {
  run(data, dims, FFTW_FORWARD);
}

void fft_inverse(std::complex<double>* data, const std::vector<int>& dims) {
  run(data, dims, FFTW_BACKWARD);
}

}  // namespace fdl
