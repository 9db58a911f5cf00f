#pragma once

#include <cmath>

#include "sectors.hpp"
#include "special_functions.hpp"

namespace confluence {

struct StokesPair {
    cplx lambda;
    cplx mu;
};

enum class Around { zero, eps };

struct Mat2 {
    cplx m11, m12, m21, m22;
    Sign basis = Sign::plus;
    Around loop = Around::zero;

    cplx det() const { return m11 * m22 - m12 * m21; }
    Mat2 inverse() const {
        cplx d = det();
        return {m22 / d, -m12 / d, -m21 / d, m11 / d, basis, loop};
    }
    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.m11 * y.m11 + x.m12 * y.m21, x.m11 * y.m12 + x.m12 * y.m22,
                x.m21 * y.m11 + x.m22 * y.m21, x.m21 * y.m12 + x.m22 * y.m22, x.basis, x.loop};
    }
    cplx operator()(int i, int j) const {
        return i == 0 ? (j == 0 ? m11 : m12) : (j == 0 ? m21 : m22);
    }
};

inline StokesPair stokes_limits(cplx a, cplx b) {
    const cplx c = -2.0 * pi * I;
    return {c * std::exp(I * pi * (1.0 - a - b)) * reciprocal_gamma(a) * reciprocal_gamma(b),
            c * reciprocal_gamma(1.0 - a) * reciprocal_gamma(1.0 - b)};
}

// lambda^{+-}(eps), mu^{+-}(eps). Each sign shares one Gamma ratio between the
// two multipliers, so their product is free of eps up to rounding.
inline StokesPair unfolded_multipliers(const Params& p, Sign s) {
    const cplx a = p.a, b = p.b, ie = p.inv_eps(), c = -2.0 * pi * I;
    const cplx le = p.eps.log();
    const cplx ra = reciprocal_gamma(a) * reciprocal_gamma(b);
    const cplx rb = reciprocal_gamma(1.0 - a) * reciprocal_gamma(1.0 - b);
    if (s == Sign::plus) {
        // log [ Gamma(a+b+1/eps) / Gamma(1+1/eps) ]
        cplx lr = log_gamma_ratio(1.0 + ie, a + b - 1.0);
        cplx lam = c * std::exp(I * pi * (1.0 - a - b)) * ra * std::exp((a + b - 1.0) * le + lr);
        cplx mu = c * rb * std::exp((1.0 - a - b) * le - lr);
        return {lam, mu};
    }
    // log [ Gamma(1-1/eps) / Gamma(2-1/eps-a-b) ]
    cplx lr = -log_gamma_ratio(1.0 - ie, 1.0 - a - b);
    cplx lam = c * ra * std::exp((a + b - 1.0) * le + lr);
    cplx mu = c * rb * std::exp((1.0 - a - b) * (le + I * pi) - lr);
    return {lam, mu};
}

inline cplx product_L_closed_form(cplx a, cplx b) {
    return -(1.0 - std::exp(-2.0 * pi * I * a)) * (1.0 - std::exp(-2.0 * pi * I * b));
}

inline cplx product_L(const Params& p, Sign s) {
    StokesPair m = unfolded_multipliers(p, s);
    return m.lambda * m.mu;
}

// Monodromy in B+ = (kappa+ w2, w3) or B- = (kappa- w4, w1), acting on the
// column of basis functions: w_after = M w_before.
inline Mat2 monodromy_matrix(const Params& p, Sign s, Around around) {
    StokesPair m = unfolded_multipliers(p, s);
    const cplx ie = p.inv_eps();
    const cplx e0 = std::exp(2.0 * pi * I * ie);
    const cplx ee = std::exp(2.0 * pi * I * (1.0 - p.a - p.b - ie));
    if (s == Sign::plus) {
        if (around == Around::zero) return {e0, 0.0, m.lambda, 1.0, s, around};
        return {ee, m.mu, 0.0, 1.0, s, around};
    }
    if (around == Around::eps) return {ee, 0.0, m.lambda, 1.0, s, around};
    return {e0, m.mu, 0.0, 1.0, s, around};
}

struct LogTerms {
    bool w3_or_w1_obstructed;
    bool w2_or_w4_obstructed;
};

inline LogTerms log_terms_predicate(const Params& p, Sign s) {
    StokesPair m = unfolded_multipliers(p, s);
    return {std::abs(m.lambda) > 1e-12, std::abs(m.mu) > 1e-12};
}

struct SplitResiduals {
    double around_eps;
    double around_zero;
};

// Both sides of the wild/continuous split of H after half turns by +-pi from
// t eps around eps and around 0.
inline SplitResiduals wild_continuous_split_check(const Params& p, Sign s, double t = 0.5) {
    StokesPair m = unfolded_multipliers(p, s);
    const cplx ie = p.inv_eps();
    auto H = [&](bool around_eps, double theta) {
        EvalResult r = H_eps(p, s, SheetPoint::turned(p, around_eps, t, theta));
        return r.is_reciprocal ? 1.0 / r.value : r.value;
    };
    auto rel = [](cplx l, cplx r) { return std::abs(l - r) / (std::abs(l) + std::abs(r)); };
    const cplx wild_e = std::exp(2.0 * pi * I * (p.a + p.b - 1.0 + ie));
    const cplx wild_0 = std::exp(-2.0 * pi * I * ie);
    if (s == Sign::plus) {
        cplx he_m = H(true, -pi), he_p = H(true, pi);
        cplx h0_m = H(false, -pi), h0_p = H(false, pi);
        return {rel(he_m, wild_e * (he_p - m.mu)), rel(1.0 / h0_p, wild_0 * (1.0 / h0_m + m.lambda))};
    }
    cplx ke_m = H(true, -pi), ke_p = H(true, pi);
    cplx k0_m = H(false, -pi), k0_p = H(false, pi);
    return {rel(1.0 / ke_p, wild_e * (1.0 / ke_m + m.lambda)), rel(k0_m, wild_0 * (k0_p - m.mu))};
}

}  // namespace confluence
