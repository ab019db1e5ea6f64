#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "mfcbf/analysis.hpp"

namespace mfcbf::oracle {

// Naive O(n^4) 2-D DFT of one component of a grid field.
inline std::vector<std::complex<double>> dft(const GridField& f, std::size_t c = 0) {
    const std::size_t n = f.resolution();
    std::vector<std::complex<double>> out(n * n);
    const double w = kTwoPi / static_cast<double>(n);
    std::vector<std::complex<double>> roots(n);
    for (std::size_t k = 0; k < n; ++k) roots[k] = std::polar(1.0, -w * static_cast<double>(k));
    for (std::size_t k1 = 0; k1 < n; ++k1) {
        for (std::size_t k2 = 0; k2 < n; ++k2) {
            std::complex<double> s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    s += f.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j), c) *
                         roots[(k1 * i + k2 * j) % n];
                }
            }
            out[k1 * n + k2] = s;
        }
    }
    return out;
}

// Signed wavenumber of DFT index k; the Nyquist mode maps to 0 so that
// odd-order derivatives stay real.
inline double wavenumber(std::size_t k, std::size_t n, bool odd) {
    if (odd && 2 * k == n) return 0.0;
    return 2 * k <= n ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

// Applies the Fourier multiplier m(k1, k2) and returns the real inverse.
inline GridField apply_multiplier(const std::vector<std::vector<std::complex<double>>>& spectra,
                                  std::size_t n,
                                  const std::function<std::complex<double>(std::size_t, double, double)>& m,
                                  bool odd) {
    std::vector<std::complex<double>> acc(n * n, 0.0);
    for (std::size_t c = 0; c < spectra.size(); ++c) {
        for (std::size_t k1 = 0; k1 < n; ++k1) {
            for (std::size_t k2 = 0; k2 < n; ++k2) {
                acc[k1 * n + k2] += m(c, wavenumber(k1, n, odd), wavenumber(k2, n, odd)) * spectra[c][k1 * n + k2];
            }
        }
    }
    GridField out(n, 1);
    const double w = kTwoPi / static_cast<double>(n);
    std::vector<std::complex<double>> roots(n);
    for (std::size_t k = 0; k < n; ++k) roots[k] = std::polar(1.0, w * static_cast<double>(k));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::complex<double> s = 0.0;
            for (std::size_t k1 = 0; k1 < n; ++k1) {
                for (std::size_t k2 = 0; k2 < n; ++k2) s += acc[k1 * n + k2] * roots[(k1 * i + k2 * j) % n];
            }
            out.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)) =
                s.real() / static_cast<double>(n * n);
        }
    }
    return out;
}

// Divergence with multiplier i k (spectral) or i sin(k h) / h (centered stencil).
inline GridField divergence(const GridField& w, bool stencil_symbol) {
    const std::size_t n = w.resolution();
    const double h = w.spacing();
    const std::vector<std::vector<std::complex<double>>> spectra = {dft(w, 0), dft(w, 1)};
    const std::complex<double> I(0.0, 1.0);
    return apply_multiplier(
        spectra, n,
        [&](std::size_t c, double k1, double k2) {
            const double k = c == 0 ? k1 : k2;
            return I * (stencil_symbol ? std::sin(k * h) / h : k);
        },
        true);
}

// Laplacian with multiplier -|k|^2 (spectral) or the five-point stencil symbol.
inline GridField laplacian(const GridField& f, bool stencil_symbol) {
    const std::size_t n = f.resolution();
    const double h = f.spacing();
    const std::vector<std::vector<std::complex<double>>> spectra = {dft(f, 0)};
    return apply_multiplier(
        spectra, n,
        [&](std::size_t, double k1, double k2) -> std::complex<double> {
            if (!stencil_symbol) return -(k1 * k1 + k2 * k2);
            const double s1 = std::sin(k1 * h / 2), s2 = std::sin(k2 * h / 2);
            return -4.0 / (h * h) * (s1 * s1 + s2 * s2);
        },
        false);
}

}  // namespace mfcbf::oracle
