#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>

#include "error.hpp"

namespace confluence {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Nonzero point with an explicit, never-normalized argument.
struct BranchedPoint {
    double modulus = 1.0;
    double argument = 0.0;

    BranchedPoint() = default;
    BranchedPoint(double m, double arg) : modulus(m), argument(arg) {
        if (!(m > 0.0) || !std::isfinite(m) || !std::isfinite(arg))
            throw Error(ErrorCode::domain, "BranchedPoint needs a finite positive modulus");
    }
    static BranchedPoint principal(cplx z) { return {std::abs(z), std::arg(z)}; }
    // z with the argument chosen closest to `near`
    static BranchedPoint nearest(cplx z, double near) {
        double a = std::arg(z);
        a += 2.0 * pi * std::round((near - a) / (2.0 * pi));
        return {std::abs(z), a};
    }

    cplx value() const { return std::polar(modulus, argument); }
    cplx log() const { return {std::log(modulus), argument}; }
    BranchedPoint turned(double dtheta) const { return {modulus, argument + dtheta}; }

    friend BranchedPoint operator*(const BranchedPoint& p, const BranchedPoint& q) {
        return {p.modulus * q.modulus, p.argument + q.argument};
    }
    friend BranchedPoint operator/(const BranchedPoint& p, const BranchedPoint& q) {
        return {p.modulus / q.modulus, p.argument - q.argument};
    }
};

inline cplx branched_pow(const BranchedPoint& x, cplx alpha) {
    return std::exp(alpha * x.log());
}

// Complex value with an a-posteriori error estimate. When the value would
// overflow (pole of a ratio) `is_reciprocal` is set and `value` holds 1/f.
struct EvalResult {
    cplx value;
    double error_estimate = 0.0;
    bool is_reciprocal = false;
};

inline bool is_nonpositive_integer(cplx z) {
    return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::round(z.real());
}

inline bool near_nonpositive_integer(cplx z, double tol) {
    double n = std::round(z.real());
    return n <= 0.0 && std::abs(z - cplx(n, 0.0)) <= tol;
}

inline bool near_integer(cplx z, double tol) {
    return std::abs(z - cplx(std::round(z.real()), 0.0)) <= tol;
}

// log(sin(pi z)) on some branch, stable for large |Im z|.
inline cplx log_sin_pi(cplx z) {
    // sin(pi z) has period 2
    z -= 2.0 * std::round(z.real() / 2.0);
    if (std::abs(z.imag()) < 8.0) return std::log(std::sin(pi * z));
    if (z.imag() > 0.0)
        return std::log(cplx(0.0, 0.5)) - I * pi * z + std::log(1.0 - std::exp(2.0 * pi * I * z));
    return std::log(cplx(0.0, -0.5)) + I * pi * z + std::log(1.0 - std::exp(-2.0 * pi * I * z));
}

namespace detail {

inline cplx stirling_tail(cplx z) {
    // B_{2k} / (2k (2k-1))
    static constexpr std::array<double, 10> c = {
        1.0 / 12.0,           -1.0 / 360.0,        1.0 / 1260.0,          -1.0 / 1680.0,
        1.0 / 1188.0,         -691.0 / 360360.0,   1.0 / 156.0,           -3617.0 / 122400.0,
        43867.0 / 244188.0,   -174611.0 / 125400.0};
    cplx zi = 1.0 / z, z2 = zi * zi, s = 0.0, p = zi;
    for (double ck : c) {
        s += ck * p;
        p *= z2;
    }
    return s;
}

inline cplx log_gamma_stirling(cplx z) {
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * pi) + stirling_tail(z);
}

}  // namespace detail

// log Gamma(z), continuous in the right half plane; some branch elsewhere.
inline cplx log_gamma(cplx z) {
    if (is_nonpositive_integer(z)) throw Error(ErrorCode::pole, "Gamma at a non-positive integer");
    if (z.real() < 0.5) return std::log(pi) - log_sin_pi(z) - log_gamma(1.0 - z);
    cplx shift = 1.0;
    cplx lphase = 0.0;
    while (std::abs(z) < 15.0) {
        shift *= z;
        z += 1.0;
        if (std::abs(shift) > 1e200) {
            lphase += std::log(shift);
            shift = 1.0;
        }
    }
    return detail::log_gamma_stirling(z) - std::log(shift) - lphase;
}

inline cplx gamma(cplx z) {
    if (is_nonpositive_integer(z)) throw Error(ErrorCode::pole, "Gamma at a non-positive integer");
    if (z.imag() == 0.0 && z.real() > 0.0 && z.real() < 171.0) return std::tgamma(z.real());
    return std::exp(log_gamma(z));
}

inline cplx reciprocal_gamma(cplx z) {
    if (is_nonpositive_integer(z)) return 0.0;
    if (z.imag() == 0.0 && z.real() > 0.0 && z.real() < 171.0) return 1.0 / std::tgamma(z.real());
    return std::exp(-log_gamma(z));
}

// log Gamma(z+d) - log Gamma(z), accurate for large |z| and moderate d.
inline cplx log_gamma_ratio(cplx z, cplx d) {
    double az = std::abs(z);
    if (az > 30.0 && std::abs(std::arg(z)) < 0.75 * pi && std::abs(d) < 0.25 * az &&
        std::abs(std::arg(z + d)) < 0.75 * pi) {
        cplx q = d / z;
        // log1p for complex arguments, accurate for small q
        cplx l1p = std::abs(q) < 1e-3 ? q * (1.0 - q * (0.5 - q * (1.0 / 3.0 - 0.25 * q)))
                                      : std::log(1.0 + q);
        return d * std::log(z) + (z + d - 0.5) * l1p - d + detail::stirling_tail(z + d) -
               detail::stirling_tail(z);
    }
    return log_gamma(z + d) - log_gamma(z);
}

inline cplx pochhammer(cplx a, std::size_t n) {
    cplx p = 1.0;
    for (std::size_t k = 0; k < n; ++k) p *= a + double(k);
    return p;
}

// prod Gamma(num) / prod Gamma(den); exact zero when a denominator sits on a pole.
template <std::size_t N, std::size_t M>
cplx gamma_quotient(const std::array<cplx, N>& num, const std::array<cplx, M>& den) {
    for (cplx d : den)
        if (is_nonpositive_integer(d)) return 0.0;
    cplx l = 0.0;
    for (cplx n : num) l += log_gamma(n);
    for (cplx d : den) l -= log_gamma(d);
    return std::exp(l);
}

}  // namespace confluence
