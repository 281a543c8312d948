#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fnolab {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Uniform periodic grid on [0,1): x_i = i/n. The real-transform layout
// needs an unambiguous Nyquist bin, hence n even and at least 4.
struct PeriodicGrid {
    int n;

    explicit PeriodicGrid(int n_) : n(n_) {
        if (n < 4 || n % 2 != 0)
            throw Error("PeriodicGrid: n must be even and >= 4, got " + std::to_string(n_));
    }

    double spacing() const { return 1.0 / n; }
    double point(int i) const { return static_cast<double>(i) / n; }
    int nyquist() const { return n / 2; }

    friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) { return a.n == b.n; }
};

struct RealField {
    PeriodicGrid grid;
    std::vector<double> values;

    explicit RealField(PeriodicGrid g) : grid(g), values(static_cast<std::size_t>(g.n), 0.0) {}

    RealField(PeriodicGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (static_cast<int>(values.size()) != grid.n)
            throw Error("RealField: values.size() != grid.n");
    }

    template <class F>
    static RealField sample(PeriodicGrid g, F&& f) {
        RealField out(g);
        for (int i = 0; i < g.n; ++i) out.values[i] = f(g.point(i));
        return out;
    }

    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
    int n() const { return grid.n; }

    friend bool operator==(const RealField& a, const RealField& b) {
        return a.grid == b.grid && a.values == b.values;
    }
};

// Coefficients of the real-input transform: coeffs[k] = (1/n) sum_j v_j e^{-2pi i k x_j},
// k = 0..n/2. Bin 0 is the mean; bins 0 and n/2 carry zero imaginary part.
struct SpectralField {
    PeriodicGrid grid;
    std::vector<std::complex<double>> coeffs;

    explicit SpectralField(PeriodicGrid g)
        : grid(g), coeffs(static_cast<std::size_t>(g.n / 2 + 1), {0.0, 0.0}) {}

    std::complex<double>& operator[](int k) { return coeffs[static_cast<std::size_t>(k)]; }
    const std::complex<double>& operator[](int k) const {
        return coeffs[static_cast<std::size_t>(k)];
    }
    int bins() const { return grid.n / 2 + 1; }
};

inline void require_all_finite(const RealField& f, const char* what) {
    for (double v : f.values)
        if (!std::isfinite(v)) throw Error(std::string(what) + ": non-finite sample value");
}

inline double mean(const RealField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s / f.grid.n;
}

inline RealField operator+(const RealField& a, const RealField& b) {
    if (!(a.grid == b.grid)) throw Error("field +: grid mismatch");
    RealField out(a.grid);
    for (int i = 0; i < a.grid.n; ++i) out[i] = a[i] + b[i];
    return out;
}

inline RealField operator-(const RealField& a, const RealField& b) {
    if (!(a.grid == b.grid)) throw Error("field -: grid mismatch");
    RealField out(a.grid);
    for (int i = 0; i < a.grid.n; ++i) out[i] = a[i] - b[i];
    return out;
}

inline RealField operator*(double c, const RealField& a) {
    RealField out(a.grid);
    for (int i = 0; i < a.grid.n; ++i) out[i] = c * a[i];
    return out;
}

} // namespace fnolab
