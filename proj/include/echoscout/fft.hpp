// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace echoscout {

size_t next_pow2(size_t n);

// In-place iterative radix-2 Cooley-Tukey. Size must be a power of two.
// The inverse transform includes the 1/N normalization.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// Zero-phase band-pass by zeroing FFT bins outside [f_lo_hz, f_hi_hz).
// The signal is zero-padded to the next power of two internally and the
// result truncated back to the input length.
std::vector<double> bandpass_fft(const std::vector<double>& x, double sample_rate,
                                 double f_lo_hz, double f_hi_hz);

}  // namespace echoscout
