#pragma once

#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "special_functions.hpp"

namespace confluence {

struct QuadResult {
    cplx value;
    double error;
    std::size_t evaluations;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes on [-1, 1]; even indices are Kronrod-only.
inline constexpr std::array<double, 8> gk_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> gk_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> g_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    cplx value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx fc = f(c);
    cplx k = gk_w[7] * fc, g = g_w[3] * fc;
    for (int j = 0; j < 7; ++j) {
        cplx s = f(c - h * gk_x[j]) + f(c + h * gk_x[j]);
        k += gk_w[j] * s;
        if (j % 2 == 1) g += g_w[j / 2] * s;
    }
    return {a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace detail

// Globally adaptive G7K15 on [a, b] for a complex integrand.
template <class F>
QuadResult integrate(F f, double a, double b, double abs_tol, double rel_tol,
                     std::size_t max_panels = 4000, int initial = 8) {
    std::priority_queue<detail::Panel> q;
    cplx total = 0.0;
    double err = 0.0;
    std::size_t evals = 0;
    for (int i = 0; i < initial; ++i) {
        double lo = a + (b - a) * i / initial, hi = a + (b - a) * (i + 1) / initial;
        detail::Panel p = detail::gk15(f, lo, hi);
        evals += 15;
        total += p.value;
        err += p.error;
        q.push(p);
    }
    while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (q.size() >= max_panels)
            throw Error(ErrorCode::quadrature_nonconvergent, "adaptive quadrature did not converge");
        detail::Panel p = q.top();
        q.pop();
        double m = 0.5 * (p.a + p.b);
        detail::Panel l = detail::gk15(f, p.a, m), r = detail::gk15(f, m, p.b);
        evals += 30;
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        q.push(l);
        q.push(r);
        if (err < 0.0) err = 0.0;
    }
    // recompute the sum to shed accumulated update rounding
    cplx s = 0.0;
    double e = 0.0;
    while (!q.empty()) {
        s += q.top().value;
        e += q.top().error;
        q.pop();
    }
    return {s, e, evals};
}

}  // namespace confluence
