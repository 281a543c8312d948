#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "fnolab/grid.hpp"

namespace fnolab::detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// e^{-2pi i j/n} for j < n/2, cached per size (thread_local: transforms stay
// safe to call from concurrent dataset-generation workers).
inline const std::vector<std::complex<double>>& twiddles(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::vector<std::complex<double>>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<std::complex<double>> w(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
        const double a = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        w[j] = {std::cos(a), std::sin(a)};
    }
    return cache.emplace(n, std::move(w)).first->second;
}

// Iterative radix-2 Cooley-Tukey, unnormalized. inverse=true conjugates the
// twiddles (still unnormalized).
inline void fft_radix2(std::complex<double>* a, std::size_t n, bool inverse) {
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto& w = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> tw = w[k * stride];
                if (inverse) tw = std::conj(tw);
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * tw;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

// O(n^2) reference transform for sizes that are not powers of two.
inline void dft_reference(std::complex<double>* a, std::size_t n, bool inverse) {
    std::vector<std::complex<double>> out(n, {0.0, 0.0});
    const double sign = inverse ? 2.0 : -2.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = sign * std::numbers::pi * static_cast<double>(k * j % n) /
                               static_cast<double>(n);
            out[k] += a[j] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
    }
    for (std::size_t k = 0; k < n; ++k) a[k] = out[k];
}

inline void fft(std::vector<std::complex<double>>& a, bool inverse) {
    if (is_pow2(a.size()))
        fft_radix2(a.data(), a.size(), inverse);
    else
        dft_reference(a.data(), a.size(), inverse);
}

} // namespace fnolab::detail
