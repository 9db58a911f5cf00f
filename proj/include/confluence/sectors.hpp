#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "hypergeometric.hpp"
#include "special_functions.hpp"

namespace confluence {

enum class Sign { plus, minus };
enum class Which { w1, w2, w3, w4 };

inline constexpr double validity_tol = 1e-9;

struct Params {
    cplx a, b;
    BranchedPoint eps;

    cplx eps_value() const { return eps.value(); }
    cplx inv_eps() const { return 1.0 / eps.value(); }

    bool w1_valid() const { return !near_nonpositive_integer(1.0 - inv_eps(), validity_tol); }
    bool w2_valid() const { return !near_nonpositive_integer(1.0 + inv_eps(), validity_tol); }
    bool w3_valid() const { return !near_nonpositive_integer(a + b + inv_eps(), validity_tol); }
    bool w4_valid() const {
        return !near_nonpositive_integer(2.0 - inv_eps() - a - b, validity_tol);
    }
    bool valid(Which w) const {
        switch (w) {
        case Which::w1: return w1_valid();
        case Which::w2: return w2_valid();
        case Which::w3: return w3_valid();
        case Which::w4: return w4_valid();
        }
        return false;
    }
};

struct SectorConfig {
    double gamma_opening = pi / 4.0;
    double radius = default_radius(pi / 4.0);

    static double default_radius(double gamma) { return std::min(0.1, gamma / (4.0 * pi)); }
    static SectorConfig with_opening(double gamma) {
        if (!(gamma > 0.0 && gamma < pi / 2.0))
            throw Error(ErrorCode::config_invalid, "sector opening must lie in (0, pi/2)");
        return {gamma, default_radius(gamma)};
    }
};

struct SectorSet {
    bool plus = false;
    bool minus = false;
};

// reduce an angle into (lo, lo + 2pi]
inline double reduce_arg(double theta, double lo) {
    double t = std::fmod(theta - lo, 2.0 * pi);
    if (t <= 0.0) t += 2.0 * pi;
    return lo + t;
}

inline SectorSet sector_classify(const BranchedPoint& eps, const SectorConfig& cfg,
                                 bool check_radius = true) {
    if (check_radius && eps.modulus >= cfg.radius)
        throw Error(ErrorCode::out_of_disk, "|eps| is not below the sector radius");
    const double g = cfg.gamma_opening;
    double ap = reduce_arg(eps.argument, -pi);
    double am = reduce_arg(eps.argument, 0.0);
    return {ap > -pi + g && ap < pi - g, am > g && am < 2.0 * pi - g};
}

// Branch of eps used by the S+ and S- formulas. S+ takes arg in (-pi, pi].
// S- is the set gamma < arg < 2pi - gamma, but its powers of eps are taken
// one sheet down, arg in (-2pi, 0], which is the lift under which kappa- w4
// and the S- multipliers tend to the eps = 0 objects.
inline BranchedPoint sector_lift(const BranchedPoint& eps, Sign s) {
    return {eps.modulus, reduce_arg(eps.argument, s == Sign::plus ? -pi : -2.0 * pi)};
}

inline cplx log_kappa(const Params& p, Sign s) {
    double sg = s == Sign::plus ? 1.0 : -1.0;
    return (1.0 - p.a - p.b) * p.eps.log() + sg * I * pi * (p.a + p.b - 1.0 + p.inv_eps());
}

inline cplx kappa(const Params& p, Sign s) { return std::exp(log_kappa(p, s)); }

// Where a point x sits relative to the two singular points, and which family
// of continuations its explicit windings refer to.
enum class Region { lens, around_zero, around_eps, far };

// x together with lifted arguments of u = x/eps and v = 1 - x/eps.
struct SheetPoint {
    cplx x;
    double arg_u = 0.0;
    double arg_v = 0.0;
    Region region = Region::lens;

    // x = t eps on the open segment (0, eps), where both arguments vanish
    static SheetPoint on_segment(const Params& p, double t) {
        return {t * p.eps_value(), 0.0, 0.0, Region::lens};
    }
    // principal arguments; meaningful inside the lens |u| < 1, |v| < 1
    static SheetPoint lens(const Params& p, cplx x) {
        cplx u = x / p.eps_value();
        return {x, std::arg(u), std::arg(1.0 - u), Region::lens};
    }
    // start at t eps on the segment and turn by theta around 0 or eps,
    // keeping the distance to the center
    static SheetPoint turned(const Params& p, bool around_eps, double t, double theta) {
        const cplx e = p.eps_value();
        if (!around_eps) {
            cplx u = t * std::exp(I * theta);
            return {u * e, theta, std::arg(1.0 - u), Region::around_zero};
        }
        cplx v = (1.0 - t) * std::exp(I * theta);
        return {(1.0 - v) * e, std::arg(1.0 - v), theta, Region::around_eps};
    }
    // |x| > |eps| reached through the far field; x carries its own lift.
    // B+ data continue from the segment passing below eps (for real eps),
    // B- data pass above.
    static SheetPoint far_field(const Params& p, Sign s, const BranchedPoint& x) {
        const double phi = p.eps.argument;
        cplx xv = x.value();
        double lift_xe = x.argument + std::arg(1.0 - p.eps_value() / xv);
        if (s == Sign::plus) return {xv, x.argument - phi, lift_xe + pi - phi, Region::far};
        return {xv, x.argument - phi, lift_xe - pi - phi, Region::far};
    }
};

// exp(log_scale) * (f, df) with df = d/dx
struct BasisJet {
    cplx log_scale;
    cplx f;
    cplx df;
    double err = 0.0;

    cplx value() const { return std::exp(log_scale) * f; }
    cplx derivative() const { return std::exp(log_scale) * df; }
};

namespace detail {

// F = 2F1(A, B; C; z) and G = 2F1(A+1, B+1; C+1; z) for solution w at the
// lifted point x; z = u for w1, w2 and z = v for w3, w4.
struct BasisSeries {
    cplx A, B, C;
    SeriesEval F, G;
    bool at_zero;
};

inline BasisSeries basis_series(const Params& p, Which w, const SheetPoint& x) {
    if (!p.valid(w)) throw Error(ErrorCode::basis_invalid, "requested solution does not exist at this eps");
    const cplx ie = p.inv_eps(), a = p.a, b = p.b;
    const cplx u = x.x / p.eps_value(), v = 1.0 - u;
    BasisSeries r{};
    r.at_zero = w == Which::w1 || w == Which::w2;  // series in u
    switch (w) {
    case Which::w1: r.A = a, r.B = b, r.C = 1.0 - ie; break;
    case Which::w2: r.A = 1.0 - a, r.B = 1.0 - b, r.C = 1.0 + ie; break;
    case Which::w3: r.A = a, r.B = b, r.C = a + b + ie; break;
    case Which::w4: r.A = 1.0 - a, r.B = 1.0 - b, r.C = 2.0 - ie - a - b; break;
    }
    cplx om = r.at_zero ? v : u;  // 1 - z
    if (om == 0.0)
        throw Error(ErrorCode::domain, r.at_zero ? "w1, w2 are not evaluated at x = eps"
                                                 : "w3, w4 are not evaluated at x = 0");
    BranchedPoint omb(std::abs(om), r.at_zero ? x.arg_v : x.arg_u);
    Continuation route = x.region == Region::far ? Continuation::outer : Continuation::inner;
    r.F = f21(r.A, r.B, r.C, omb, route);
    r.G = r.A * r.B != 0.0 ? f21(r.A + 1.0, r.B + 1.0, r.C + 1.0, omb, route) : SeriesEval{0.0, 0.0, 0};
    return r;
}

}  // namespace detail

inline BasisJet basis_jet(const Params& p, Which w, const SheetPoint& x) {
    const cplx e = p.eps_value(), ie = p.inv_eps(), a = p.a, b = p.b;
    const cplx u = x.x / e, v = 1.0 - u;
    detail::BasisSeries S = detail::basis_series(p, w, x);
    cplx dzdx = S.at_zero ? ie : -ie;
    cplx k = S.A * S.B / S.C * dzdx;
    cplx dF = k * S.G.value;
    double err = S.F.truncation_bound + std::abs(k) * S.G.truncation_bound;

    if (w == Which::w1 || w == Which::w3) return {0.0, S.F.value, dF, err};
    if (u == 0.0 || v == 0.0)
        throw Error(ErrorCode::domain, "w2 and w4 carry powers singular at x = 0 and x = eps");
    cplx lu(std::log(std::abs(u)), x.arg_u), lv(std::log(std::abs(v)), x.arg_v);
    cplx ev = 1.0 - ie - a - b;
    cplx L = ie * lu + ev * lv;
    cplx dL = ie / x.x - ev * ie / v;
    return {L, S.F.value, dL * S.F.value + dF, err};
}

inline EvalResult basis_eval(const Params& p, Which w, const SheetPoint& x) {
    BasisJet j = basis_jet(p, w, x);
    cplx s = std::exp(j.log_scale);
    return {s * j.f, std::abs(s) * j.err, false};
}

enum class Connection { w2_in_Beps, w3_in_B0 };

// (D, E) with w2 = D w3 + E w4, or (A, B) with w3 = A w1 + B w2.
inline std::pair<cplx, cplx> connection_coeffs(const Params& p, Connection which) {
    const cplx a = p.a, b = p.b, ie = p.inv_eps();
    auto coef = [](std::initializer_list<cplx> num, std::initializer_list<cplx> den) {
        for (cplx d : den)
            if (is_nonpositive_integer(d)) return cplx(0.0);
        cplx l = 0.0;
        for (cplx n : num) {
            if (near_nonpositive_integer(n, validity_tol))
                throw Error(ErrorCode::coefficient_pole, "connection coefficient at a Gamma pole");
            l += log_gamma(n);
        }
        for (cplx d : den) l -= log_gamma(d);
        return std::exp(l);
    };
    if (which == Connection::w2_in_Beps) {
        if (!p.w4_valid()) throw Error(ErrorCode::coefficient_pole, "2 - 1/eps - a - b is a non-positive integer");
        return {coef({1.0 - ie - a - b, 1.0 + ie}, {1.0 - a, 1.0 - b}),
                coef({a + b - 1.0 + ie, 1.0 + ie}, {a + ie, b + ie})};
    }
    if (!p.w1_valid()) throw Error(ErrorCode::coefficient_pole, "1 - 1/eps is a non-positive integer");
    return {coef({ie, a + b + ie}, {b + ie, a + ie}), coef({a + b + ie, -ie}, {a, b})};
}

// Quotient kappa+ w2 / w3 on S+, kappa- w4 / w1 on S-, as a point of the sphere.
inline EvalResult H_eps(const Params& p, Sign s, const SheetPoint& x) {
    BasisJet num = basis_jet(p, s == Sign::plus ? Which::w2 : Which::w4, x);
    BasisJet den = basis_jet(p, s == Sign::plus ? Which::w3 : Which::w1, x);
    if (num.f == 0.0 && den.f == 0.0)
        throw Error(ErrorCode::indeterminate_zero_over_zero, "both basis solutions vanish");
    cplx lscale = log_kappa(p, s) + num.log_scale - den.log_scale;
    double rel = num.err / std::max(std::abs(num.f), 1e-300) + den.err / std::max(std::abs(den.f), 1e-300);
    double log_den = std::log(std::abs(den.f)) - lscale.real();
    double log_num = std::log(std::abs(num.f));
    // the denominator relative to the numerator scale
    if (den.f == 0.0 || log_den - log_num < std::log(1e-300)) {
        cplx r = std::exp(-lscale) * den.f / num.f;
        return {r, rel * std::abs(r), true};
    }
    cplx v = std::exp(lscale) * num.f / den.f;
    return {v, rel * std::abs(v), false};
}

struct Symmetric {
    Params p;
    SheetPoint x;
};

// (a, b, eps, x) -> (a, b, eps', x') with eps' = 1/(1 - a - b - 1/eps) and
// x' = eps' (1 - x/eps); S+ data go to S- data and back.
inline Symmetric lemma_symmetry(const Params& p, const SheetPoint& x, Sign from = Sign::plus) {
    cplx den = 1.0 - p.a - p.b - p.inv_eps();
    if (std::abs(den) < 1e-300) throw Error(ErrorCode::singular_transform, "eps' is undefined");
    cplx ep = 1.0 / den;
    // eps' = -eps / (1 - eps (1 - a - b)), argument tracked continuously
    double shift = from == Sign::plus ? -pi : pi;
    double arg = p.eps.argument + shift - std::arg(1.0 - p.eps_value() * (1.0 - p.a - p.b));
    Params q{p.a, p.b, BranchedPoint(std::abs(ep), arg)};
    cplx u = x.x / p.eps_value();
    Region r = x.region;
    if (r == Region::around_zero) r = Region::around_eps;
    else if (r == Region::around_eps) r = Region::around_zero;
    return {q, SheetPoint{ep * (1.0 - u), x.arg_v, x.arg_u, r}};
}

}  // namespace confluence
