#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "path_integrator.hpp"
#include "sectors.hpp"
#include "special_functions.hpp"
#include "stokes.hpp"

namespace confluence {

struct SingularPointInfo {
    State<2> location;
    cplx eigen_quotient;  // eigenvalue in y over eigenvalue in x
};

// The Jacobian of the field is lower triangular: d(xdot)/dx = 2x - eps,
// d(ydot)/dy = -1 + (1-a-b)x + 2y.
inline std::vector<SingularPointInfo> singular_points(const Params& p) {
    const cplx e = p.eps_value();
    if (e == 0.0) throw Error(ErrorCode::domain, "eps = 0 has only two singular points");
    const cplx g = 1.0 - p.a - p.b;
    const cplx y1 = 1.0 + e * (p.a + p.b - 1.0);
    std::vector<SingularPointInfo> out;
    for (State<2> z : {State<2>{0.0, 0.0}, State<2>{e, 0.0}, State<2>{0.0, 1.0}, State<2>{e, y1}}) {
        cplx lx = 2.0 * z[0] - e;
        cplx ly = -1.0 + g * z[0] + 2.0 * z[1];
        out.push_back({z, ly / lx});
    }
    return out;
}

// rho_i = -x(x-eps) w_i'/w_i. With the power factors differentiated by hand
// this is base + s x v (AB/C) G/F, where F, G are the series of w_i and its
// contiguous neighbour, base = 1 + (a+b-1)x for w2, w4 and s = +1 for series
// in u, -1 for series in v. Finite at the anchor points, where rho2(0) = 1 and
// rho3(eps) = 0.
inline EvalResult rho_eval(const Params& p, Which w, const SheetPoint& x) {
    detail::BasisSeries S = detail::basis_series(p, w, x);
    const cplx F = S.F.value;
    if (F == 0.0 || !std::isfinite(std::abs(F)))
        throw Error(ErrorCode::basis_zero, "the basis solution vanishes here");
    const cplx v = 1.0 - x.x / p.eps_value();
    const cplx base = (w == Which::w2 || w == Which::w4) ? 1.0 + (p.a + p.b - 1.0) * x.x : cplx(0.0);
    const double s = S.at_zero ? 1.0 : -1.0;
    const cplx k = s * x.x * v * S.A * S.B / S.C;
    const cplx q = S.G.value / F;
    double err = std::abs(k) * (S.G.truncation_bound + std::abs(q) * S.F.truncation_bound) / std::abs(F);
    return {base + k * q, err, false};
}

inline Which first_integral_index(Sign s, bool numerator) {
    if (s == Sign::plus) return numerator ? Which::w2 : Which::w3;
    return numerator ? Which::w4 : Which::w1;
}

// kappa (w_i/w_j)(y - rho_i)/(y - rho_j) = kappa (y w_i + P w_i')/(y w_j + P w_j')
// with P = x(x - eps); the second form has no trouble at zeros of w.
inline EvalResult first_integral_eval(const Params& p, Sign s, const SheetPoint& x, cplx y) {
    BasisJet ji = basis_jet(p, first_integral_index(s, true), x);
    BasisJet jj = basis_jet(p, first_integral_index(s, false), x);
    const cplx P = x.x * (x.x - p.eps_value());
    const cplx n = y * ji.f + P * ji.df;
    const cplx d = y * jj.f + P * jj.df;
    if (n == 0.0 && d == 0.0)
        throw Error(ErrorCode::indeterminate_zero_over_zero, "both factors of the first integral vanish");
    const cplx lscale = log_kappa(p, s) + ji.log_scale - jj.log_scale;
    auto scale = [&](const BasisJet& j) {
        return (std::abs(y) + std::abs(P)) * j.err / std::max(std::abs(y * j.f) + std::abs(P * j.df), 1e-300);
    };
    const double rel = scale(ji) + scale(jj);
    if (d == 0.0 || std::log(std::abs(d)) - lscale.real() < std::log(std::abs(n)) + std::log(1e-300)) {
        cplx r = std::exp(-lscale) * d / n;
        return {r, rel * std::abs(r), true};
    }
    cplx v = std::exp(lscale) * n / d;
    return {v, rel * std::abs(v), false};
}

// Same relations as wild_continuous_split_check, with H replaced by the first
// integral at a fixed y.
inline SplitResiduals first_integral_split_check(const Params& p, Sign s, cplx y, double t = 0.5) {
    StokesPair m = unfolded_multipliers(p, s);
    const cplx ie = p.inv_eps();
    auto J = [&](bool around_eps, double theta) {
        EvalResult r = first_integral_eval(p, s, SheetPoint::turned(p, around_eps, t, theta), y);
        return r.is_reciprocal ? 1.0 / r.value : r.value;
    };
    auto rel = [](cplx l, cplx r) { return std::abs(l - r) / (std::abs(l) + std::abs(r)); };
    const cplx wild_e = std::exp(2.0 * pi * I * (p.a + p.b - 1.0 + ie));
    const cplx wild_0 = std::exp(-2.0 * pi * I * ie);
    if (s == Sign::plus) {
        cplx je_m = J(true, -pi), je_p = J(true, pi);
        cplx j0_m = J(false, -pi), j0_p = J(false, pi);
        return {rel(je_m, wild_e * (je_p - m.mu)), rel(1.0 / j0_p, wild_0 * (1.0 / j0_m + m.lambda))};
    }
    cplx ke_m = J(true, -pi), ke_p = J(true, pi);
    cplx k0_m = J(false, -pi), k0_p = J(false, pi);
    return {rel(1.0 / ke_p, wild_e * (1.0 / ke_m + m.lambda)), rel(k0_m, wild_0 * (k0_p - m.mu))};
}

// ---- universal unfolding: xdot = x^2 - eps, singular points +-sqrt(eps) ----

struct UniversalParams {
    cplx a, b;
    BranchedPoint eps_universal;
};

struct UniversalMap {
    cplx sqrt_eps;   // the chosen branch s
    cplx c;          // 1/(2s) + (a+b+1)/2
    cplx kappa;      // (2s)^{1-a-b} e^{pi i c}
    Params mapped;   // (a, b, eps~) with eps~ = 1/(1-c)
    Sign sector;     // sector of eps~ whose lift is used
};

// branch 0 takes sqrt with half the stored argument, branch 1 the other one.
// Under x = -s + (2s/eps~) xi the equation
// (x^2 - eps) w'' + (-1 + (a+b+1)x) w' + ab w = 0 becomes the hypergeometric
// equation in xi with parameter eps~ = 1/(1-c).
inline UniversalMap universal_map(const UniversalParams& u, int branch) {
    if (u.eps_universal.modulus == 0.0) throw Error(ErrorCode::domain, "eps must be nonzero");
    const double arg = 0.5 * u.eps_universal.argument + (branch ? pi : 0.0);
    const BranchedPoint s(std::sqrt(u.eps_universal.modulus), arg);
    const cplx sv = s.value();
    const cplx c = 1.0 / (2.0 * sv) + (u.a + u.b + 1.0) / 2.0;
    const cplx lk = (1.0 - u.a - u.b) * (std::log(2.0) + s.log()) + I * pi * c;
    const cplx et = 1.0 / (1.0 - c);
    const BranchedPoint eb(std::abs(et), std::arg(et));
    // S+ when available, S- otherwise; the product is the same on both
    SectorSet in = sector_classify(eb, SectorConfig{pi / 4.0, 1.0}, false);
    Sign sg = in.plus ? Sign::plus : Sign::minus;
    return {sv, c, std::exp(lk), Params{u.a, u.b, sector_lift(eb, sg)}, sg};
}

// L = lambda+(sqrt eps) mu+(sqrt eps) on both branches against the closed form.
inline cplx L_universal(const UniversalParams& u, double tol = 1e-10) {
    const cplx L = product_L_closed_form(u.a, u.b);
    for (int br = 0; br < 2; ++br) {
        UniversalMap m = universal_map(u, br);
        cplx v = product_L(m.mapped, m.sector);
        if (std::abs(v - L) > tol * (1.0 + std::abs(L)))
            throw Error(ErrorCode::branch_disagreement, "L differs between the two square-root branches");
    }
    return L;
}

inline State<2> universal_field(const UniversalParams& u, const State<2>& z) {
    const cplx x = z[0], y = z[1], P = x * x - u.eps_universal.value();
    return {P, u.a * u.b * P + (1.0 + (1.0 - u.a - u.b) * x) * y + y * y};
}

// Monodromy around x = -s of the universal equation, integrated in x along
// the image of the keyhole loop, with seeds from the mapped basis. Returns
// the largest entry difference to monodromy_matrix of the mapped parameters,
// relative to 1 + |entry|.
inline double universal_monodromy_check(const UniversalParams& u, int branch, const Tolerance& tol = {}) {
    const UniversalMap m = universal_map(u, branch);
    const Params& q = m.mapped;
    const cplx et = q.eps_value(), s = m.sqrt_eps, alpha = 2.0 * s / et;
    const cplx ev = u.eps_universal.value(), ab = u.a * u.b, k = u.a + u.b + 1.0;
    const Path xi_loop = monodromy_loop(q, Around::zero);
    const Sign sg = m.sector;
    BasisJet j[2] = {basis_jet(q, first_integral_index(sg, true), SheetPoint::on_segment(q, 0.5)),
                     basis_jet(q, first_integral_index(sg, false), SheetPoint::on_segment(q, 0.5))};
    j[0].log_scale += log_kappa(q, sg);
    State<2> v[2], c[2];
    for (int i = 0; i < 2; ++i) {
        double n = std::hypot(std::abs(j[i].f), std::abs(j[i].df / alpha));
        v[i] = {j[i].f / n, j[i].df / alpha / n};
        j[i].log_scale += std::log(n);
        c[i] = v[i];
        for (const Segment& seg : xi_loop.segments) {
            auto f = [&](double t, const State<2>& w) -> State<2> {
                cplx x = alpha * seg.at(t) - s, dx = alpha * seg.tangent(t);
                cplx w2 = -((-1.0 + k * x) * w[1] + ab * w[0]) / (x * x - ev);
                return {w[1] * dx, w2 * dx};
            };
            double clear = std::min(seg.distance_to(0.0), seg.distance_to(et));
            double ms = std::min(1.0, 0.5 * clear / seg.length());
            c[i] = integrate_ode<2>(f, c[i], 0.0, 1.0, tol, ms).final_state;
        }
    }
    const cplx det = v[0][0] * v[1][1] - v[1][0] * v[0][1];
    if (std::abs(det) < 1e-12)
        throw Error(ErrorCode::ill_conditioned_basis, "basis Wronskian at the base point is too small");
    const Mat2 want = monodromy_matrix(q, sg, Around::zero);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        cplx x0 = (c[i][0] * v[1][1] - v[1][0] * c[i][1]) / det;
        cplx x1 = (v[0][0] * c[i][1] - c[i][0] * v[0][1]) / det;
        cplx got[2] = {x0 * std::exp(j[i].log_scale - j[0].log_scale), x1 * std::exp(j[i].log_scale - j[1].log_scale)};
        for (int l = 0; l < 2; ++l)
            worst = std::max(worst, std::abs(got[l] - want(i, l)) / (1.0 + std::abs(want(i, l))));
    }
    return worst;
}

}  // namespace confluence
