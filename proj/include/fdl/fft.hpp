#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace fdl {

// In-place complex DFTs over the last `dims` (row-major), unnormalized.
// Plans are cached per (dims, direction) and reused on caller buffers, so
// repeated transforms of one shape cost no planning. Thread-safe.
void fft_forward(std::complex<double>* data, const std::vector<int>& dims);
void fft_inverse(std::complex<double>* data, const std::vector<int>& dims);

inline void fft_forward(std::vector<std::complex<double>>& v) {
  fft_forward(v.data(), {static_cast<int>(v.size())});
}
inline void fft_inverse(std::vector<std::complex<double>>& v) {
  fft_inverse(v.data(), {static_cast<int>(v.size())});
}

}  // namespace fdl
