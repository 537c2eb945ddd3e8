// Copyright 2026 the echoscout authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "echoscout/fft.hpp"

#include <map>
#include <mutex>

#include "echoscout/common.hpp"

namespace echoscout {

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

namespace {

// Twiddle tables per transform size. Guarded cache; values are identical
// regardless of which thread fills them first.
const std::vector<std::complex<double>>& twiddles(size_t n) {
    static std::mutex mu;
    static std::map<size_t, std::vector<std::complex<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<std::complex<double>> w(n / 2);
    for (size_t k = 0; k < n / 2; ++k) {
        const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        w[k] = {std::cos(ang), std::sin(ang)};
    }
    return cache.emplace(n, std::move(w)).first->second;
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    if (n <= 1) return;
    // bit reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto& w = twiddles(n);
    for (size_t len = 2; len <= n; len <<= 1) {
        const size_t stride = n / len;
        for (size_t i = 0; i < n; i += len) {
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> tw = w[k * stride];
                if (inverse) tw = std::conj(tw);
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * tw;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& c : a) c *= inv;
    }
}

std::vector<double> bandpass_fft(const std::vector<double>& x, double sample_rate,
                                 double f_lo_hz, double f_hi_hz) {
    if (x.empty()) return {};
    const size_t n = next_pow2(x.size());
    std::vector<std::complex<double>> buf(n);
    for (size_t i = 0; i < x.size(); ++i) buf[i] = x[i];
    fft_inplace(buf, false);
    // the top band absorbs the nyquist bin so that bands tile the spectrum
    const bool top = f_hi_hz >= 0.5 * sample_rate;
    for (size_t k = 0; k <= n / 2; ++k) {
        const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n);
        if (f >= f_lo_hz && (f < f_hi_hz || (top && f <= f_hi_hz))) continue;
        buf[k] = 0.0;
        if (k != 0 && k != n / 2) buf[n - k] = 0.0;
    }
    fft_inplace(buf, true);
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = buf[i].real();
    return out;
}

}  // namespace echoscout
