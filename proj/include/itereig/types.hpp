#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace itereig {

using Complex = std::complex<double>;
using Vector = std::vector<Complex>;

// Thrown on malformed input files (Matrix Market, EIGB1).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on numerical breakdowns: singular pivots, vanishing tuning
// denominators, invalid spectral envelopes.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on inconsistent user-facing configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Complex dot(std::span<const Complex> x, std::span<const Complex> y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("dot: dimension mismatch");
    Complex s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += std::conj(x[i]) * y[i];
    return s;
}

inline double norm2(std::span<const Complex> x)
{
    double s = 0.0;
    for (const Complex& v : x)
        s += std::norm(v);
    return std::sqrt(s);
}

inline void axpy(Complex alpha, std::span<const Complex> x, std::span<Complex> y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] += alpha * x[i];
}

inline void scale(std::span<Complex> x, Complex alpha)
{
    for (Complex& v : x)
        v *= alpha;
}

inline Vector scaled(const Vector& x, Complex alpha)
{
    Vector y = x;
    scale(y, alpha);
    return y;
}

}  // namespace itereig
