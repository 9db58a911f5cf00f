#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "hypergeometric.hpp"
#include "quadrature.hpp"
#include "sectors.hpp"
#include "special_functions.hpp"
#include "stokes.hpp"

namespace confluence {

// Continuation history around the origin: g, or g continued in the positive
// (plus) or negative (minus) direction into Re x < 0.
enum class LateralTag { none, plus, minus };
enum class HK { h, k };
enum class H0Side { primary, primed };

namespace detail {

// a or b a non-positive integer: the finite sum 2F0(a,b;-x)
inline std::optional<cplx> g_polynomial(cplx a, cplx b, cplx x) {
    double n = -1.0;
    if (is_nonpositive_integer(a)) n = -a.real();
    if (is_nonpositive_integer(b)) n = n < 0.0 ? -b.real() : std::min(n, -b.real());
    if (n < 0.0) return std::nullopt;
    return f20_truncated(a, b, -x, std::size_t(n)).value;
}

}  // namespace detail

// Borel transform of 2F0(a,b;-x): 2F1(a,b;1;-xi)
inline EvalResult borel_transform(cplx a, cplx b, cplx xi) {
    SeriesEval s = f21(a, b, cplx(1.0), -xi);
    return {s.value, s.truncation_bound, false};
}

inline EvalResult borel_transform(cplx a, cplx b, const BranchedPoint& xi) {
    return borel_transform(a, b, xi.value());
}

// (1/x) int_0^{inf e^{i dir}} e^{-xi/x} B(xi) dxi
inline EvalResult laplace_sum(cplx a, cplx b, cplx x, double direction) {
    double off = std::remainder(direction - pi, 2.0 * pi);
    if (std::abs(off) < 0.1)
        throw Error(ErrorCode::singular_direction, "direction too close to the singular ray");
    const cplx e = std::exp(I * direction);
    const cplx k = e / x;
    const double decay = k.real();
    if (!(decay > 0.0)) throw Error(ErrorCode::domain, "Laplace kernel does not decay along this direction");
    // polynomial: the Laplace integral reproduces the finite sum termwise
    if (auto p = detail::g_polynomial(a, b, x)) return {*p, 1e-15 * std::abs(*p), false};
    auto f = [&](double t) { return k * std::exp(-t * k) * borel_transform(a, b, t * e).value; };
    double T = 30.0 / decay;
    auto tail = [&](double t) { return std::abs(f(t)) / decay; };
    for (int i = 0; i < 60 && tail(T) > 1e-17; ++i) T *= 1.3;
    double tb = 2.0 * tail(T);
    QuadResult r = integrate(f, 0.0, T, 1e-14, 1e-13, 8000, 32);
    return {r.value, r.error + tb, false};
}

namespace detail {

// Kummer decomposition of the Borel sum on the lift x:
// g = G(b-a)/G(b) x^-a 1F1(a, a+1-b; 1/x) + G(a-b)/G(a) x^-b 1F1(b, b+1-a; 1/x).
// cancellation is (|first| + |second|) / |g|.
struct KummerEval {
    EvalResult result;
    double cancellation;
};

inline KummerEval g_kummer(cplx a, cplx b, const BranchedPoint& x) {
    if (near_integer(a - b, 1e-3))
        throw Error(ErrorCode::degenerate_parameters, "a - b is (nearly) an integer");
    const cplx lx = x.log(), zi = 1.0 / x.value();
    SeriesEval m1 = f11(a, a + 1.0 - b, zi), m2 = f11(b, b + 1.0 - a, zi);
    cplx c1 = std::exp(log_gamma(b - a) - a * lx) * reciprocal_gamma(b);
    cplx c2 = std::exp(log_gamma(a - b) - b * lx) * reciprocal_gamma(a);
    cplx t1 = c1 * m1.value, t2 = c2 * m2.value, v = t1 + t2;
    double size = std::abs(t1) + std::abs(t2);
    double err = std::abs(c1) * m1.truncation_bound + std::abs(c2) * m2.truncation_bound + 4e-16 * size;
    return {{v, err, false}, size / std::max(std::abs(v), 1e-300)};
}

// Borel sum continued to the lift x. The Kummer form is used unless a - b is
// an integer or its two terms (of size e^{1/|x|} for small x) cancel badly;
// then the Laplace integral in a direction |d| <= pi - 0.3 takes over, and
// lifts beyond its reach go through one turn of U(a, a-b+1, 1/x), where the
// M term dominates.
inline EvalResult g_lifted(cplx a, cplx b, const BranchedPoint& x) {
    const cplx xv = x.value();
    if (auto p = g_polynomial(a, b, xv)) return {*p, 1e-15 * std::abs(*p), false};
    if (!near_integer(a - b, 1e-3)) {
        KummerEval k = g_kummer(a, b, x);
        if (k.cancellation < 1e4) return k.result;
    }
    constexpr double dmax = pi - 0.3, reach = dmax + pi / 2.0 - 0.2;
    const double th = x.argument;
    if (std::abs(th) <= reach) return laplace_sum(a, b, xv, std::clamp(th, -dmax, dmax));
    if (std::abs(th) > reach + 2.0 * pi)
        throw Error(ErrorCode::domain, "lift of x beyond one turn of the Borel sum");
    const double m = th > 0.0 ? -1.0 : 1.0;  // x = x0 e^{-2 pi i m}
    const BranchedPoint x0(x.modulus, th + 2.0 * pi * m);
    EvalResult g0 = g_lifted(a, b, x0);
    const cplx c = a - b + 1.0, lx0 = x0.log();
    auto mterm = [&](cplx A, cplx C) {
        // (1 - e^{-2 pi i C m}) Gamma(1-C) / Gamma(b) = 2 pi i m e^{-i pi C m} / (Gamma(C) Gamma(b))
        SeriesEval M = f11(A, C, 1.0 / xv);
        cplx f = 2.0 * pi * I * m * std::exp(-I * pi * C * m - A * lx0) * reciprocal_gamma(C) * reciprocal_gamma(b);
        return SeriesEval{f * M.value, std::abs(f) * M.truncation_bound, 0};
    };
    SeriesEval t = near_nonpositive_integer(c, 1e-3) ? richardson([&](double h) { return mterm(a + h, c + h); })
                                                     : mterm(a, c);
    const cplx ph = std::exp(2.0 * pi * I * m * a), tw = std::exp(-2.0 * pi * I * c * m);
    cplx v = ph * (t.value + tw * g0.value);
    double err = std::abs(ph) * (t.truncation_bound + std::abs(tw) * g0.error_estimate) + 1e-16 * std::abs(v);
    return {v, err, false};
}

inline double tag_window(LateralTag t) {
    switch (t) {
    case LateralTag::none: return -pi;
    case LateralTag::plus: return 0.0;
    case LateralTag::minus: return -2.0 * pi;
    }
    return -pi;
}

}  // namespace detail

// g, g+ or g-: univalued functions of the point x. Each tag reads the closed
// form on its own 2pi window of arguments.
inline EvalResult g_closed_form(cplx a, cplx b, const BranchedPoint& x, LateralTag tag) {
    double th = reduce_arg(x.argument, detail::tag_window(tag));
    return detail::g_lifted(a, b, BranchedPoint(x.modulus, th));
}

// h(x) = g_{1-a,1-b}(-x), with -x reached by the shift +pi of the argument.
// k = e^{1/x} x^{1-a-b} h uses the lift carried by x.
inline EvalResult h_k_closed_form(cplx a, cplx b, const BranchedPoint& x, LateralTag tag, HK want) {
    double th = reduce_arg(x.argument, detail::tag_window(tag) - pi);
    EvalResult h = detail::g_lifted(1.0 - a, 1.0 - b, BranchedPoint(x.modulus, th + pi));
    if (want == HK::h) return h;
    cplx f = std::exp(1.0 / x.value() + (1.0 - a - b) * x.log());
    return {f * h.value, std::abs(f) * h.error_estimate, false};
}

// x on the slit plane of H0, arg in (-3pi/2, pi/2]; H^{eps+-} continued
// through the far field to such a lift tends to H0 there.
inline BranchedPoint h0_sheet(cplx x) { return {std::abs(x), reduce_arg(std::arg(x), -1.5 * pi)}; }

// H0 = k+/g on Re x > 0 and k/g- on Re x < 0 (cut on the positive imaginary
// axis); H0' = k-/g and k/g+ (cut on the negative imaginary axis).
inline EvalResult H0_eval(cplx a, cplx b, const BranchedPoint& x, H0Side side) {
    const cplx xv = x.value();
    // polar values never have an exactly zero real part on the axis
    const bool axis = std::abs(xv.real()) <= 1e-15 * x.modulus;
    const bool right = xv.real() > 0.0 || axis;
    if (axis && (side == H0Side::primary ? xv.imag() > 0.0 : xv.imag() < 0.0))
        throw Error(ErrorCode::on_cut, "H0 evaluated on its cut");
    LateralTag kt, gt;
    if (side == H0Side::primary) {
        kt = right ? LateralTag::plus : LateralTag::none;
        gt = right ? LateralTag::none : LateralTag::minus;
    } else {
        kt = right ? LateralTag::minus : LateralTag::none;
        gt = right ? LateralTag::none : LateralTag::plus;
    }
    EvalResult k = h_k_closed_form(a, b, x, kt, HK::k);
    EvalResult g = g_closed_form(a, b, x, gt);
    double rel = k.error_estimate / std::max(std::abs(k.value), 1e-300) +
                 g.error_estimate / std::max(std::abs(g.value), 1e-300);
    if (std::abs(g.value) < 1e-300 * std::abs(k.value) || g.value == 0.0) {
        if (k.value == 0.0) throw Error(ErrorCode::indeterminate_zero_over_zero, "k and g vanish together");
        cplx r = g.value / k.value;
        return {r, rel * std::abs(r), true};
    }
    cplx v = k.value / g.value;
    return {v, rel * std::abs(v), false};
}

}  // namespace confluence
