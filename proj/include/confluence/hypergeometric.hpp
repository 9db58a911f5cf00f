#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <optional>
#include <vector>

#include "special_functions.hpp"

namespace confluence {

struct SeriesEval {
    cplx value;
    double truncation_bound = 0.0;
    std::size_t terms_used = 0;
};

// Which family of continuations a lifted 1-z refers to: paths circling z=1
// inside |1-z| < 1, or far-field paths circling both 0 and 1.
enum class Continuation { inner, outer };

namespace detail {

inline constexpr double series_eps = 1e-16;
inline constexpr double degenerate_tol = 1e-3;
inline constexpr double series_radius = 0.9;

struct Piece {
    cplx log_scale;  // the piece is exp(log_scale) * value
    cplx value;
    double bound = 0.0;
    std::size_t terms = 0;
    double cond = 1.0;
};

struct RawSum {
    cplx value;
    double last = 0.0;
    double max_term = 0.0;
    std::size_t terms = 0;
};

// Generic ratio-driven series: term_{n+1} = term_n * ratio(n).
template <class Ratio>
RawSum sum_series(Ratio ratio, std::size_t max_terms = 200000) {
    cplx term = 1.0, sum = 1.0;
    double mx = 1.0;
    int small = 0;
    std::size_t n = 0;
    for (; n < max_terms; ++n) {
        term *= ratio(n);
        sum += term;
        double at = std::abs(term);
        mx = std::max(mx, at);
        if (at == 0.0) return {sum, 0.0, mx, n + 1};
        if (at <= series_eps * std::abs(sum)) {
            if (++small >= 10) return {sum, at, mx, n + 1};
        } else {
            small = 0;
        }
        if (!std::isfinite(at)) break;
    }
    throw Error(ErrorCode::series_unreachable, "series did not converge");
}

inline RawSum sum_2f1(cplx a, cplx b, cplx c, cplx z) {
    if (z == 0.0) return {1.0, 0.0, 1.0, 1};
    return sum_series([&](std::size_t n) {
        double k = double(n);
        return (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    });
}

inline Piece piece_of(const RawSum& s, cplx log_scale = 0.0) {
    double av = std::abs(s.value);
    return {log_scale, s.value, 10.0 * s.last + 1e-16 * s.max_term, s.terms,
            av > 0.0 ? s.max_term / av : std::numeric_limits<double>::infinity()};
}

// Direct series or its Euler-transformed twin, whichever cancels less.
inline Piece best_series(cplx A, cplx B, cplx C, cplx w) {
    if (is_nonpositive_integer(C) && !(is_nonpositive_integer(A) && A.real() > C.real()) &&
        !(is_nonpositive_integer(B) && B.real() > C.real()))
        throw Error(ErrorCode::pole, "2F1 with c at a non-positive integer");
    Piece p = piece_of(sum_2f1(A, B, C, w));
    if (p.cond < 1e2 || is_nonpositive_integer(A) || is_nonpositive_integer(B)) return p;
    cplx A2 = C - A, B2 = C - B;
    if (is_nonpositive_integer(C)) return p;
    Piece q = piece_of(sum_2f1(A2, B2, C, w), (C - A - B) * std::log(1.0 - w));
    return q.cond < p.cond ? q : p;
}

inline cplx log_gamma_coef(std::initializer_list<cplx> num, std::initializer_list<cplx> den,
                           bool& zero) {
    zero = false;
    for (cplx d : den)
        if (is_nonpositive_integer(d)) zero = true;
    if (zero) return 0.0;
    cplx l = 0.0;
    for (cplx n : num) {
        if (is_nonpositive_integer(n))
            throw Error(ErrorCode::parameter_degenerate, "connection coefficient at a Gamma pole");
        l += log_gamma(n);
    }
    for (cplx d : den) l -= log_gamma(d);
    return l;
}

inline SeriesEval combine(std::initializer_list<Piece> ps) {
    SeriesEval r{0.0, 0.0, 0};
    double mag = 0.0;
    for (const Piece& p : ps) {
        cplx s = std::exp(p.log_scale);
        r.value += s * p.value;
        r.truncation_bound += std::abs(s) * p.bound;
        mag += std::abs(s * p.value);
        r.terms_used += p.terms;
    }
    // cancellation between pieces
    r.truncation_bound += 1e-16 * mag;
    return r;
}

inline Piece scaled(Piece p, cplx extra_log) {
    p.log_scale += extra_log;
    return p;
}

inline Piece zero_piece() { return {0.0, 0.0, 0.0, 0, 1.0}; }

// 1-z transformation; logw is a (possibly lifted) log(1-z).
inline SeriesEval f21_one_minus_z(cplx a, cplx b, cplx c, cplx w, cplx logw) {
    bool z1, z2;
    cplx l1 = log_gamma_coef({c, c - a - b}, {c - a, c - b}, z1);
    cplx l2 = log_gamma_coef({c, a + b - c}, {a, b}, z2);
    Piece p1 = z1 ? zero_piece() : scaled(best_series(a, b, a + b - c + 1.0, w), l1);
    Piece p2 = z2 ? zero_piece()
                  : scaled(best_series(c - a, c - b, c - a - b + 1.0, w), l2 + (c - a - b) * logw);
    return combine({p1, p2});
}

// 1/z transformation, principal (-z)^{-a}.
inline SeriesEval f21_inv_z(cplx a, cplx b, cplx c, cplx z) {
    cplx lmz = std::log(-z), zi = 1.0 / z;
    bool z1, z2;
    cplx l1 = log_gamma_coef({c, b - a}, {b, c - a}, z1);
    cplx l2 = log_gamma_coef({c, a - b}, {a, c - b}, z2);
    Piece p1 = z1 ? zero_piece() : scaled(best_series(a, a - c + 1.0, a - b + 1.0, zi), l1 - a * lmz);
    Piece p2 = z2 ? zero_piece() : scaled(best_series(b, b - c + 1.0, b - a + 1.0, zi), l2 - b * lmz);
    return combine({p1, p2});
}

// 1/(1-z) transformation; logw is a (possibly lifted) log(1-z).
inline SeriesEval f21_inv_one_minus_z(cplx a, cplx b, cplx c, cplx w, cplx logw) {
    cplx wi = 1.0 / w;
    bool z1, z2;
    cplx l1 = log_gamma_coef({c, b - a}, {b, c - a}, z1);
    cplx l2 = log_gamma_coef({c, a - b}, {a, c - b}, z2);
    Piece p1 = z1 ? zero_piece() : scaled(best_series(a, c - b, a - b + 1.0, wi), l1 - a * logw);
    Piece p2 = z2 ? zero_piece() : scaled(best_series(b, c - a, b - a + 1.0, wi), l2 - b * logw);
    return combine({p1, p2});
}

inline SeriesEval f21_pfaff(cplx a, cplx b, cplx c, cplx z) {
    Piece p = scaled(best_series(a, c - b, c, z / (z - 1.0)), -a * std::log(1.0 - z));
    return combine({p});
}

// Local Taylor step for p(t) F'' + q(t) F' + r F = 0 with
// p = p0 + p1 t + p2 t^2 and q = q0 + q1 t, expanded at t = 0.
struct LocalOde {
    cplx p0, p1, p2, q0, q1, r;
};

struct Jet {
    cplx f, df;
    double err = 0.0;
};

inline Jet taylor_step(const LocalOde& o, Jet y, cplx h) {
    cplx fn = y.f, fn1 = y.df;  // f_n, f_{n+1}
    cplx hp = 1.0;              // h^n
    cplx val = fn + fn1 * h, der = fn1;
    double scale = std::abs(fn) + std::abs(fn1 * h);
    int small = 0;
    for (std::size_t n = 0; n < 5000; ++n) {
        double k = double(n);
        cplx fn2 = -((o.p1 * k + o.q0) * (k + 1.0) * fn1 + (o.p2 * k * (k - 1.0) + o.q1 * k + o.r) * fn) /
                   (o.p0 * (k + 2.0) * (k + 1.0));
        cplx hp1 = hp * h;       // h^{n+1}
        cplx tv = fn2 * hp1 * h; // f_{n+2} h^{n+2}
        cplx td = (k + 2.0) * fn2 * hp1;
        val += tv;
        der += td;
        hp = hp1;
        fn = fn1;
        fn1 = fn2;
        double at = std::abs(tv) + std::abs(td * h);
        scale = std::max(scale, at);
        if (at <= series_eps * (std::abs(val) + std::abs(der * h))) {
            if (++small >= 10) {
                return {val, der, y.err + 1e-16 * scale + 10.0 * at};
            }
        } else {
            small = 0;
        }
    }
    throw Error(ErrorCode::continuation_failure, "Taylor step did not converge");
}

// Continue a solution of the 2F1 (or any quadratic-coefficient) equation along
// the segment z0 -> z1, stepping at most half the distance to a singular point.
template <class Coeffs>
Jet taylor_transport(Coeffs coeffs, const std::vector<cplx>& singular, cplx z0, Jet y, cplx z1,
                     double max_step = std::numeric_limits<double>::infinity()) {
    cplx z = z0;
    for (int it = 0; it < 100000; ++it) {
        cplx rem = z1 - z;
        double lr = std::abs(rem);
        if (lr == 0.0) return y;
        double dist = std::numeric_limits<double>::infinity();
        for (cplx s : singular) dist = std::min(dist, std::abs(z - s));
        double step = std::min({lr, 0.5 * dist, max_step});
        if (step < 1e-14 * (1.0 + std::abs(z)))
            throw Error(ErrorCode::step_underflow, "continuation path hits a singular point");
        cplx h = step >= lr ? rem : rem * (step / lr);
        y = taylor_step(coeffs(z), y, h);
        z = step >= lr ? z1 : z + h;
    }
    throw Error(ErrorCode::continuation_failure, "too many Taylor steps");
}

inline auto hyp_coeffs(cplx a, cplx b, cplx c) {
    return [=](cplx z0) {
        return LocalOde{z0 * (1.0 - z0), 1.0 - 2.0 * z0, -1.0, c - (a + b + 1.0) * z0, -(a + b + 1.0),
                        -a * b};
    };
}

inline SeriesEval f21_principal(cplx a, cplx b, cplx c, cplx z, bool strict);

inline Jet f21_jet_principal(cplx a, cplx b, cplx c, cplx z, bool strict) {
    SeriesEval f = f21_principal(a, b, c, z, strict);
    cplx d = 0.0;
    double e = f.truncation_bound;
    if (a * b != 0.0) {
        SeriesEval g = f21_principal(a + 1.0, b + 1.0, c + 1.0, z, strict);
        d = a * b / c * g.value;
        e += std::abs(a * b / c) * g.truncation_bound;
    }
    return {f.value, d, e};
}

inline SeriesEval f21_taylor_from(cplx a, cplx b, cplx c, cplx z0, Jet y0, cplx z) {
    Jet y = taylor_transport(hyp_coeffs(a, b, c), {0.0, 1.0}, z0, y0, z);
    return {y.f, y.err + 1e-14 * std::abs(y.f), 0};
}

inline bool polynomial_case(cplx a, cplx b) {
    return is_nonpositive_integer(a) || is_nonpositive_integer(b);
}

inline SeriesEval f21_principal(cplx a, cplx b, cplx c, cplx z, bool strict) {
    if (is_nonpositive_integer(c) && !polynomial_case(a, b))
        throw Error(ErrorCode::pole, "2F1 with c at a non-positive integer");
    if (z == 0.0) return {1.0, 0.0, 1};
    if (polynomial_case(a, b)) {
        RawSum s = sum_2f1(a, b, c, z);
        return {s.value, 1e-16 * s.max_term * double(s.terms), s.terms};
    }
    if (z.imag() == 0.0 && z.real() > 1.0)
        throw Error(ErrorCode::on_cut, "principal 2F1 requested on the cut [1, inf)");

    const double az = std::abs(z), a1z = std::abs(1.0 - z), ap = std::abs(z / (z - 1.0));
    auto deg = [&](cplx v) { return strict && near_integer(v, degenerate_tol); };

    struct Route {
        double r;
        int kind;
    };
    std::vector<Route> routes = {{az, 0}, {ap, 1}, {a1z, 2}, {1.0 / az, 3}, {1.0 / a1z, 4}};
    std::sort(routes.begin(), routes.end(), [](const Route& x, const Route& y) { return x.r < y.r; });
    for (const Route& rt : routes) {
        if (rt.r > series_radius) break;
        switch (rt.kind) {
        case 0: return combine({best_series(a, b, c, z)});
        case 1: return f21_pfaff(a, b, c, z);
        case 2:
            if (deg(c - a - b)) continue;
            return f21_one_minus_z(a, b, c, 1.0 - z, std::log(1.0 - z));
        case 3:
            if (deg(b - a)) continue;
            return f21_inv_z(a, b, c, z);
        case 4:
            if (deg(b - a)) continue;
            return f21_inv_one_minus_z(a, b, c, 1.0 - z, std::log(1.0 - z));
        }
    }
    // gap regions and degenerate parameters: Pfaff series if it still converges
    // reasonably, otherwise continue the ODE from the disk |z| = 1/2.
    if (ap <= 0.97) return f21_pfaff(a, b, c, z);
    cplx z0 = 0.5 * z / az;
    // keep the path away from z = 1 when the ray would graze it
    cplx d = z - z0;
    double t = std::clamp(std::real((1.0 - z0) * std::conj(d)) / std::norm(d), 0.0, 1.0);
    if (std::abs(z0 + t * d - 1.0) < 0.3) {
        double s = z.imag() >= 0.0 ? 1.0 : -1.0;
        cplx p0(0.0, 0.5 * s), p1(1.0, 0.6 * s);
        Jet y = f21_jet_principal(a, b, c, p0, strict);
        y = taylor_transport(hyp_coeffs(a, b, c), {0.0, 1.0}, p0, y, p1);
        return f21_taylor_from(a, b, c, p1, y, z);
    }
    return f21_taylor_from(a, b, c, z0, f21_jet_principal(a, b, c, z0, strict), z);
}

template <class Fn>
SeriesEval richardson(Fn fn, double h0 = 1e-5) {
    SeriesEval p1 = fn(h0), p2 = fn(0.5 * h0), m1 = fn(-h0), m2 = fn(-0.5 * h0);
    cplx rp = 2.0 * p2.value - p1.value, rm = 2.0 * m2.value - m1.value;
    cplx r = 0.5 * (rp + rm);
    double spread = std::abs(rp - rm);
    if (spread > 1e-4 * (1.0 + std::abs(r)))
        throw Error(ErrorCode::extrapolation_unstable, "Richardson extrapolants disagree");
    double tb = spread + 3.0 * std::max({p1.truncation_bound, p2.truncation_bound,
                                         m1.truncation_bound, m2.truncation_bound});
    return {r, tb, p1.terms_used + p2.terms_used + m1.terms_used + m2.terms_used};
}

inline bool lift_is_principal(const BranchedPoint& w) {
    return w.argument > -pi && w.argument < pi;
}

inline SeriesEval f21_lifted_raw(cplx a, cplx b, cplx c, const BranchedPoint& w, Continuation route,
                                 bool strict) {
    if (lift_is_principal(w)) return f21_principal(a, b, c, 1.0 - w.value(), strict);
    const cplx wv = w.value(), lw = w.log();
    const double r = w.modulus;
    auto deg = [&](cplx v) { return strict && near_integer(v, degenerate_tol); };
    if (route == Continuation::inner) {
        if (r <= series_radius) {
            if (deg(c - a - b))
                return richardson([&](double h) { return f21_one_minus_z(a + h, b, c, wv, lw); });
            return f21_one_minus_z(a, b, c, wv, lw);
        }
        // beyond the inner disk: step radially outward from |1-z| = 0.85
        BranchedPoint w0(0.85, w.argument);
        SeriesEval f0 = f21_lifted_raw(a, b, c, w0, route, strict);
        SeriesEval d0 = a * b == 0.0 ? SeriesEval{0.0, 0.0, 0}
                                     : f21_lifted_raw(a + 1.0, b + 1.0, c + 1.0, w0, route, strict);
        Jet y0{f0.value, a * b / c * d0.value, f0.truncation_bound};
        return f21_taylor_from(a, b, c, 1.0 - w0.value(), y0, 1.0 - wv);
    }
    if (r >= 1.0 / series_radius) {
        if (deg(b - a))
            return richardson([&](double h) { return f21_inv_one_minus_z(a + h, b, c, wv, lw); });
        return f21_inv_one_minus_z(a, b, c, wv, lw);
    }
    BranchedPoint w0(1.15, w.argument);
    SeriesEval f0 = f21_lifted_raw(a, b, c, w0, route, strict);
    SeriesEval d0 = a * b == 0.0 ? SeriesEval{0.0, 0.0, 0}
                                 : f21_lifted_raw(a + 1.0, b + 1.0, c + 1.0, w0, route, strict);
    Jet y0{f0.value, a * b / c * d0.value, f0.truncation_bound};
    return f21_taylor_from(a, b, c, 1.0 - w0.value(), y0, 1.0 - wv);
}

}  // namespace detail

// Principal branch, cut on [1, inf).
inline SeriesEval f21(cplx a, cplx b, cplx c, cplx z) {
    return detail::f21_principal(a, b, c, z, true);
}

// Branch fixed by an explicit lift of 1-z. Principal lifts reduce to f21(z).
inline SeriesEval f21(cplx a, cplx b, cplx c, const BranchedPoint& one_minus_z,
                      Continuation route = Continuation::inner) {
    return detail::f21_lifted_raw(a, b, c, one_minus_z, route, true);
}

// Limit over a -> a + h for the degenerate cases of the connection formulas.
inline SeriesEval f21_degenerate_limit(cplx a, cplx b, cplx c, cplx z) {
    if (z == 0.0) return {1.0, 0.0, 1};
    return detail::richardson([&](double h) { return detail::f21_principal(a + h, b, c, z, false); });
}

inline SeriesEval f21_degenerate_limit(cplx a, cplx b, cplx c, const BranchedPoint& one_minus_z,
                                       Continuation route = Continuation::inner) {
    return detail::richardson(
        [&](double h) { return detail::f21_lifted_raw(a + h, b, c, one_minus_z, route, false); });
}

namespace detail {

inline RawSum sum_1f1(cplx a, cplx c, cplx z) {
    return sum_series([&](std::size_t n) {
        double k = double(n);
        return (a + k) / ((c + k) * (k + 1.0)) * z;
    });
}

// Large-|z| expansion of M(a,c,z) for Re z >= 0; empty when the least term is too big.
inline std::optional<SeriesEval> f11_asymptotic(cplx a, cplx c, cplx z) {
    auto sum = [&](cplx p, cplx q, cplx x) -> std::optional<std::pair<cplx, double>> {
        // sum_s (p)_s (q)_s / s! x^s, optimally truncated
        cplx term = 1.0, s = 1.0;
        for (int n = 0; n < 400; ++n) {
            cplx next = term * (p + double(n)) * (q + double(n)) / double(n + 1) * x;
            if (next == 0.0) return std::pair{s, 0.0};
            if (std::abs(next) >= std::abs(term)) {
                if (std::abs(term) > 1e-15 * std::abs(s)) return std::nullopt;
                return std::pair{s, std::abs(term)};
            }
            s += next;
            term = next;
            if (std::abs(term) < 1e-17 * std::abs(s)) return std::pair{s, std::abs(term)};
        }
        return std::nullopt;
    };
    auto s1 = sum(1.0 - a, c - a, 1.0 / z);
    auto s2 = sum(a, a - c + 1.0, -1.0 / z);
    if (!s1 || !s2) return std::nullopt;
    cplx lz = std::log(z);
    // e^{+i pi a} branch valid for -pi/2 < arg z < 3pi/2
    cplx sgn = z.imag() >= 0.0 ? 1.0 : -1.0;
    cplx t1 = 0.0, t2 = 0.0;
    double e1 = 0.0, e2 = 0.0;
    if (!is_nonpositive_integer(a)) {
        cplx l = log_gamma(c) - log_gamma(a) + z + (a - c) * lz;
        t1 = std::exp(l) * s1->first;
        e1 = std::abs(std::exp(l)) * 10.0 * s1->second;
    }
    if (!is_nonpositive_integer(c - a)) {
        cplx l = log_gamma(c) - log_gamma(c - a) + sgn * I * pi * a - a * lz;
        t2 = std::exp(l) * s2->first;
        e2 = std::abs(std::exp(l)) * 10.0 * s2->second;
    }
    return SeriesEval{t1 + t2, e1 + e2 + 1e-15 * (std::abs(t1) + std::abs(t2)), 0};
}

inline SeriesEval f11_right(cplx a, cplx c, cplx z) {
    if (z == 0.0) return {1.0, 0.0, 1};
    if (is_nonpositive_integer(a)) {
        RawSum s = sum_1f1(a, c, z);
        return {s.value, 1e-16 * s.max_term * double(s.terms), s.terms};
    }
    const double az = std::abs(z);
    if (az >= 35.0) {
        if (auto r = f11_asymptotic(a, c, z)) return *r;
    }
    if (az <= 60.0) {
        RawSum s = sum_1f1(a, c, z);
        double cond = s.max_term / std::abs(s.value);
        if (cond < 1e4 || az <= 1.0) return {s.value, 10.0 * s.last + 1e-16 * s.max_term, s.terms};
    }
    // step the confluent equation z F'' + (c - z) F' - a F = 0 along the ray
    cplx z0 = z / az;
    RawSum f = sum_1f1(a, c, z0), g = sum_1f1(a + 1.0, c + 1.0, z0);
    Jet y{f.value, a / c * g.value, 1e-16 * (f.max_term + g.max_term)};
    auto coeffs = [=](cplx w) { return LocalOde{w, 1.0, 0.0, c - w, -1.0, -a}; };
    y = taylor_transport(coeffs, {0.0}, z0, y, z, 1.0);
    return {y.f, y.err + 1e-13 * std::abs(y.f), 0};
}

}  // namespace detail

inline SeriesEval f11(cplx a, cplx c, cplx z) {
    if (is_nonpositive_integer(c) && !(is_nonpositive_integer(a) && a.real() > c.real()))
        throw Error(ErrorCode::pole, "1F1 with c at a non-positive integer");
    if (z.real() < 0.0 && !is_nonpositive_integer(a)) {
        // Kummer: M(a,c,z) = e^z M(c-a,c,-z)
        SeriesEval r = detail::f11_right(c - a, c, -z);
        cplx e = std::exp(z);
        return {e * r.value, std::abs(e) * r.truncation_bound, r.terms_used};
    }
    return detail::f11_right(a, c, z);
}

// Partial sums of the divergent 2F0(a,b;;z). Without N the sum stops just
// before the smallest term.
inline SeriesEval f20_truncated(cplx a, cplx b, cplx z, std::optional<std::size_t> N = std::nullopt) {
    cplx term = 1.0, sum = 0.0;
    if (N) {
        for (std::size_t n = 0; n <= *N; ++n) {
            sum += term;
            term *= (a + double(n)) * (b + double(n)) / double(n + 1) * z;
        }
        return {sum, std::abs(term), *N + 1};
    }
    // optimal truncation: locate the least term
    std::vector<cplx> terms;
    const std::size_t cap = 100000;
    std::size_t best = 0;
    double best_mag = 1.0;
    for (std::size_t n = 0; n < cap; ++n) {
        terms.push_back(term);
        double m = std::abs(term);
        if (m == 0.0) {
            best = n;
            best_mag = 0.0;
            break;
        }
        if (m <= best_mag) {
            best = n;
            best_mag = m;
        }
        // once terms grow past the current minimum for good, stop scanning
        double k = double(n);
        double ratio = std::abs((a + k) * (b + k) / (k + 1.0) * z);
        if (ratio > 1.0 && k > std::abs(a) + std::abs(b) + 2.0 && m > best_mag) break;
        term *= (a + k) * (b + k) / (k + 1.0) * z;
    }
    for (std::size_t n = 0; n < best; ++n) sum += terms[n];
    return {sum, best_mag, best};
}

}  // namespace confluence
