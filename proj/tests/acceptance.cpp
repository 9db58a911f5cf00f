// End-to-end acceptance run: one line per criterion, exit status 1 if any fails.
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "confluence/harness.hpp"

using namespace confluence;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

struct Rng {
    std::mt19937_64 g;
    std::uniform_real_distribution<double> U{0.0, 1.0};
    explicit Rng(unsigned s) : g(s) {}
    double u() { return U(g); }
    double in(double lo, double hi) { return lo + (hi - lo) * u(); }
    cplx box(double re, double im) { return {in(-re, re), in(-im, im)}; }
};

cplx sphere(const EvalResult& r) { return r.is_reciprocal ? 1.0 / r.value : r.value; }

// 1. lambda mu against the closed form of L
Outcome product_invariant() {
    Rng r(101);
    const SectorConfig cfg;
    const double g = cfg.gamma_opening;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        cplx a = std::polar(3.0 * std::sqrt(r.u()), 2.0 * pi * r.u());
        cplx b = std::polar(3.0 * std::sqrt(r.u()), 2.0 * pi * r.u());
        const cplx L = product_L_closed_form(a, b);
        for (int j = 0; j < 20; ++j) {
            double m = cfg.radius * r.in(1e-3, 1.0);
            BranchedPoint ep(m, r.in(-pi + g, pi - g));
            BranchedPoint em = sector_lift(BranchedPoint(m, r.in(g, 2.0 * pi - g)), Sign::minus);
            worst = std::max(worst, std::abs(product_L(Params{a, b, ep}, Sign::plus) - L) / (1.0 + std::abs(L)));
            worst = std::max(worst, std::abs(product_L(Params{a, b, em}, Sign::minus) - L) / (1.0 + std::abs(L)));
        }
    }
    return {worst <= 1e-10, "worst " + sci(worst) + " (tol 1e-10)"};
}

// 2. lambda+, mu+ approach the limits along arg pi/4
Outcome stokes_limits_along_ray() {
    Rng r(102);
    bool monotone = true;
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        cplx a = r.box(2.0, 0.5), b = r.box(2.0, 0.5);
        StokesPair lim = stokes_limits(a, b);
        double pl = INFINITY, pm = INFINITY;
        for (int j = 1; j <= 4; ++j) {
            StokesPair s = unfolded_multipliers(Params{a, b, BranchedPoint(std::pow(10.0, -j), pi / 4.0)}, Sign::plus);
            double dl = std::abs(s.lambda - lim.lambda), dm = std::abs(s.mu - lim.mu);
            monotone = monotone && dl <= pl && dm <= pm;
            pl = dl, pm = dm;
        }
        worst = std::max(worst, std::max(pl, pm) / (1.0 + std::abs(lim.lambda)));
    }
    return {monotone && worst <= 1e-3,
            std::string(monotone ? "monotone" : "not monotone") + ", final " + sci(worst) + " (tol 1e-3)"};
}

// 3. closed-form monodromy matrices against integrated loops
Outcome monodromy_oracle() {
    Rng r(103);
    double worst = 0.0;
    for (Sign s : {Sign::plus, Sign::minus})
        for (int k = 0; k < 10; ++k) {
            Params p{{r.in(-2.0, 2.0), r.in(-0.5, 0.5)}, {r.in(-2.0, 2.0), r.in(-0.5, 0.5)},
                     harness::sample_monodromy_eps(r.g, s)};
            for (Around ar : {Around::zero, Around::eps})
                worst = std::max(worst, harness::entry_residual(monodromy_via_integration(p, s, ar),
                                                                monodromy_matrix(p, s, ar)));
        }
    return {worst <= 1e-6, "worst entry " + sci(worst) + " (tol 1e-6)"};
}

// 4. connection formulas at lens points. Off the segment the two terms can
// exceed the left side by many orders, so the residual is taken relative to
// the largest term; with mild cancellation it must also hold relative to the
// left side.
Outcome connection_identities() {
    Rng r(104);
    double worst = 0.0, worst_mild = 0.0;
    auto check = [&](cplx lhs, cplx t1, cplx t2) {
        double d = std::abs(lhs - t1 - t2);
        double big = std::max({std::abs(lhs), std::abs(t1), std::abs(t2)});
        worst = std::max(worst, d / big);
        if (big < 1e4 * std::abs(lhs)) worst_mild = std::max(worst_mild, d / std::abs(lhs));
    };
    for (int k = 0; k < 20; ++k) {
        Params p{{r.in(-1.5, 1.5), r.in(-0.5, 0.5)}, {r.in(-1.5, 1.5), r.in(-0.5, 0.5)},
                 BranchedPoint(r.in(0.02, 0.06), r.in(-2.0, 2.0))};
        auto [D, E] = connection_coeffs(p, Connection::w2_in_Beps);
        auto [A, B] = connection_coeffs(p, Connection::w3_in_B0);
        for (int j = 0; j < 5; ++j) {
            cplx x = p.eps_value() * (0.5 + std::polar(0.4 * r.u(), 2.0 * pi * r.u()));
            SheetPoint sx = SheetPoint::lens(p, x);
            cplx w[4];
            for (int i = 0; i < 4; ++i) w[i] = basis_eval(p, Which(i), sx).value;
            check(w[1], D * w[2], E * w[3]);
            check(w[2], A * w[0], B * w[1]);
        }
    }
    return {worst <= 1e-9 && worst_mild <= 1e-9,
            "term-relative " + sci(worst) + ", lhs-relative " + sci(worst_mild) + " (tol 1e-9)"};
}

// a, b, a - b kept 0.05 away from the integers
std::pair<cplx, cplx> divergent_pair(Rng& r) {
    for (;;) {
        cplx a{r.in(-1.5, 1.5), r.in(-0.5, 0.5)}, b{r.in(-1.5, 1.5), r.in(-0.5, 0.5)};
        if (!near_integer(a - b, 0.05) && !near_integer(a, 0.05) && !near_integer(b, 0.05)) return {a, b};
    }
}

// 5. g through the 1F1 decomposition against Laplace quadrature
Outcome borel_double_route() {
    Rng r(105);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        auto [a, b] = divergent_pair(r);
        BranchedPoint x(r.in(0.1, 1.5), (r.u() - 0.5) * 0.9 * pi);
        cplx kv = detail::g_kummer(a, b, x).result.value;
        cplx lv = laplace_sum(a, b, x.value(), 0.0).value;
        worst = std::max(worst, std::abs(kv - lv) / (1.0 + std::abs(lv)));
    }
    double euler = laplace_sum(1.0, 1.0, 0.1, 0.0).value.real();
    bool ok = worst <= 1e-8 && std::abs(euler - 0.915633) <= 1e-5;
    return {ok, "worst " + sci(worst) + " (tol 1e-8), euler g(0.1) = " + std::to_string(euler)};
}

// 6. jumps of the lateral sums
Outcome stokes_jumps() {
    Rng r(106);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        auto [a, b] = divergent_pair(r);
        StokesPair s = stokes_limits(a, b);
        BranchedPoint x(r.in(0.2, 0.4), -pi + r.in(0.2, 0.6));
        cplx gp = g_closed_form(a, b, x, LateralTag::plus).value;
        cplx gm = g_closed_form(a, b, x, LateralTag::minus).value;
        cplx kk = h_k_closed_form(a, b, x, LateralTag::none, HK::k).value;
        worst = std::max(worst, std::abs(gp - gm - s.lambda * kk) / std::abs(s.lambda * kk));
        BranchedPoint y(r.in(0.2, 0.4), r.in(-0.4, 0.4));
        cplx kp = h_k_closed_form(a, b, y, LateralTag::plus, HK::k).value;
        cplx km = h_k_closed_form(a, b, y.turned(-2.0 * pi), LateralTag::minus, HK::k).value;
        cplx gv = g_closed_form(a, b, y, LateralTag::none).value;
        cplx lhs = kp - std::exp(2.0 * pi * I * (1.0 - a - b)) * km;
        worst = std::max(worst, std::abs(lhs - s.mu * gv) / std::abs(s.mu * gv));
    }
    double term = 0.0;
    for (int n = 0; n <= 3; ++n) {
        BranchedPoint x(0.3, -pi + 0.3);
        cplx b = r.box(1.5, 0.5);
        term = std::max(term, std::abs(g_closed_form(-double(n), b, x, LateralTag::plus).value -
                                       g_closed_form(-double(n), b, x, LateralTag::minus).value));
    }
    return {worst <= 1e-6 && term <= 1e-10,
            "divergent " + sci(worst) + " (tol 1e-6), terminating " + sci(term) + " (tol 1e-10)"};
}

// 7. H^eps+ tends to H0
Outcome h_limit() {
    const cplx a{0.3, 0.2}, b{-0.45, 0.1};
    bool decreasing = true;
    double last = 0.0;
    for (cplx x : harness::h_limit_points()) {
        BranchedPoint xb = h0_sheet(x);
        cplx h0 = sphere(H0_eval(a, b, xb, H0Side::primary));
        double prev = INFINITY;
        for (int k = 0; k <= 4; ++k) {
            Params p{a, b, BranchedPoint(1e-2 * std::pow(2.0, -k), 0.0)};
            double d = std::abs(sphere(H_eps(p, Sign::plus, SheetPoint::far_field(p, Sign::plus, xb))) - h0);
            decreasing = decreasing && d < prev;
            prev = d;
        }
        last = std::max(last, prev / std::abs(h0));
    }
    return {decreasing, std::string(decreasing ? "decreasing" : "not decreasing") + " at all 5 points, last relative " + sci(last)};
}

// 8. Riccati system
Outcome riccati() {
    Rng r(108);
    double drift = 0.0, quot = 0.0, anchor = 0.0, mono = 0.0;
    for (int k = 0; k < 10; ++k) {
        Params p{{r.in(-2.0, 2.0), r.in(-1.0, 1.0)}, {r.in(-2.0, 2.0), r.in(-1.0, 1.0)},
                 BranchedPoint(r.in(0.01, 0.06), r.in(-pi, pi))};
        for (auto& s : singular_points(p))
            quot = std::max(quot, std::abs(harness::fd_eigen_quotient(p, s.location) - s.eigen_quotient) /
                                      (1.0 + std::abs(s.eigen_quotient)));
    }
    const Params base[] = {Params{0.3, 0.7, BranchedPoint(0.05, 0.0)}, Params{{0.3, 0.1}, 0.6, BranchedPoint(0.05, 0.4)},
                           Params{{0.3, 0.2}, {-1.1, 0.4}, BranchedPoint(0.03, 1.0)}};
    for (const Params& p : base) {
        anchor = std::max(anchor, std::abs(rho_eval(p, Which::w2, SheetPoint::on_segment(p, 0.0)).value - 1.0));
        anchor = std::max(anchor, std::abs(rho_eval(p, Which::w3, SheetPoint::on_segment(p, 1.0)).value));
    }
    for (int i = 0; i < 2; ++i) {
        const Params& p = base[i];
        for (int k = 0; k < 5; ++k) {
            SheetPoint x0 = SheetPoint::on_segment(p, 0.5);
            cplx y0{r.in(-1.0, 1.0), r.in(-0.5, 0.5)};
            cplx i0 = sphere(first_integral_eval(p, Sign::plus, x0, y0));
            State<2> z = transport_riccati(p, State<2>{x0.x, y0}, 1.0).final_state;
            cplx i1 = sphere(first_integral_eval(p, Sign::plus, SheetPoint::lens(p, z[0]), z[1]));
            drift = std::max(drift, std::abs(i1 - i0) / std::abs(i0));
        }
    }
    for (Sign s : {Sign::plus, Sign::minus}) {
        Params q = s == Sign::plus ? base[0] : Params{0.3, 0.7, sector_lift(BranchedPoint(0.05, 0.6 * pi), s)};
        SplitResiduals m = first_integral_split_check(q, s, 0.3);
        mono = std::max({mono, m.around_eps, m.around_zero});
    }
    bool ok = drift <= 1e-8 && quot <= 1e-10 && anchor <= 1e-12 && mono <= 1e-7;
    return {ok, "drift " + sci(drift) + ", quotients " + sci(quot) + ", anchors " + sci(anchor) + ", monodromy " + sci(mono)};
}

// 9. both square-root branches of the universal family
Outcome universal() {
    Rng r(109);
    const double g = pi / 4.0;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        cplx a{r.in(-2.0, 2.0), r.in(-0.5, 0.5)}, b{r.in(-2.0, 2.0), r.in(-0.5, 0.5)};
        UniversalParams u{a, b, BranchedPoint(std::pow(10.0, r.in(-4.0, -2.0)), r.in(g, 4.0 * pi - g))};
        const cplx L = product_L_closed_form(a, b);
        for (int br = 0; br < 2; ++br) {
            UniversalMap m = universal_map(u, br);
            worst = std::max(worst, std::abs(product_L(m.mapped, m.sector) - L) / (1.0 + std::abs(L)));
        }
    }
    return {worst <= 1e-10, "worst " + sci(worst) + " (tol 1e-10)"};
}

// 10. the eps -> eps' symmetry
Outcome symmetry() {
    Rng r(110);
    const double g = SectorConfig{}.gamma_opening;
    double inv = 0.0, w = 0.0;
    for (int k = 0; k < 20; ++k) {
        Params p{{r.in(-1.0, 1.0), r.in(-0.3, 0.3)}, {r.in(-1.0, 1.0), r.in(-0.3, 0.3)},
                 BranchedPoint(r.in(0.02, 0.06), r.in(-pi + g, pi - g))};
        SheetPoint x = SheetPoint::on_segment(p, r.in(0.2, 0.8));
        Symmetric m = lemma_symmetry(p, x, Sign::plus);
        Symmetric back = lemma_symmetry(m.p, m.x, Sign::minus);
        inv = std::max(inv, std::abs(back.p.eps_value() - p.eps_value()) / p.eps.modulus +
                                std::abs(back.p.eps.argument - p.eps.argument) + std::abs(back.x.x - x.x) / std::abs(x.x));
        cplx w3 = basis_eval(p, Which::w3, x).value, w1 = basis_eval(m.p, Which::w1, m.x).value;
        w = std::max(w, std::abs(w3 - w1) / std::abs(w3));
    }
    return {inv <= 1e-12 && w <= 1e-9, "involution " + sci(inv) + " (tol 1e-12), w3 vs mirrored w1 " + sci(w) + " (tol 1e-9)"};
}

// 11. logarithmic terms
Outcome log_terms() {
    Rng r(111);
    const double g = SectorConfig{}.gamma_opening;
    bool both = true;
    for (int k = 0; k < 20; ++k) {
        Params p{0.3, 0.7, BranchedPoint(std::pow(10.0, r.in(-4.0, -1.0)), r.in(-pi + g, pi - g))};
        LogTerms t = log_terms_predicate(p, Sign::plus);
        both = both && t.w3_or_w1_obstructed && t.w2_or_w4_obstructed;
    }
    bool first = log_terms_predicate(Params{-2.0, 0.7, BranchedPoint(0.02, 0.2)}, Sign::plus).w3_or_w1_obstructed;
    return {both && !first, std::string("(0.3, 0.7): ") + (both ? "(true, true)" : "not (true, true)") +
                                ", a = -2 first flag " + (first ? "true" : "false")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"product invariant", product_invariant},
        {"stokes limits", stokes_limits_along_ray},
        {"monodromy oracle", monodromy_oracle},
        {"connection identities", connection_identities},
        {"borel double route", borel_double_route},
        {"stokes jumps", stokes_jumps},
        {"H limit", h_limit},
        {"riccati", riccati},
        {"universal unfolding", universal},
        {"symmetry", symmetry},
        {"logarithmic terms", log_terms},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("[%s] %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%zu of %zu criteria pass\n", criteria.size() - failed, criteria.size());
    return failed ? 1 : 0;
}
