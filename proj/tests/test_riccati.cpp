#include "confluence/riccati.hpp"
#include "test_util.hpp"

using namespace confluence;
using testutil::rel;

namespace {

const Params real_eps{0.3, 0.7, BranchedPoint(0.05, 0.0)};

cplx sphere(const EvalResult& r) { return r.is_reciprocal ? 1.0 / r.value : r.value; }

// Jacobian eigenvalue quotient by central differences; exact for a quadratic field
cplx fd_quotient(const Params& p, const State<2>& z) {
    const double h = 1e-4;
    State<2> xp = z, xm = z, yp = z, ym = z;
    xp[0] += h, xm[0] -= h, yp[1] += h, ym[1] -= h;
    cplx lx = (riccati_field(p, xp)[0] - riccati_field(p, xm)[0]) / (2.0 * h);
    cplx ly = (riccati_field(p, yp)[1] - riccati_field(p, ym)[1]) / (2.0 * h);
    return ly / lx;
}

}  // namespace

TEST(RiccatiField, Examples) {
    Params p{1.0, 1.0, BranchedPoint(0.1, 0.0)};
    State<2> z = riccati_field(p, {0.0, 0.0});
    EXPECT_EQ(z[0], cplx(0.0));
    EXPECT_EQ(z[1], cplx(0.0));
    z = riccati_field(p, {0.05, 0.0});
    EXPECT_NEAR(std::abs(z[0] - (-0.0025)), 0.0, 1e-17);
    EXPECT_NEAR(std::abs(z[1] - (-0.0025)), 0.0, 1e-17);
}

TEST(RiccatiField, SecondRootAtEps) {
    Params p{{0.3, 0.2}, {-1.1, 0.4}, BranchedPoint(0.07, 1.1)};
    const cplx e = p.eps_value(), y1 = 1.0 + e * (p.a + p.b - 1.0);
    State<2> z = riccati_field(p, {e, y1});
    EXPECT_LE(std::abs(z[0]) + std::abs(z[1]), 1e-14);
    // ydot at x = eps is y (y - y1)
    for (cplx y : {cplx(0.3), cplx(-1.0, 2.0)}) EXPECT_LE(std::abs(riccati_field(p, {e, y})[1] - y * (y - y1)), 1e-14);
}

TEST(SingularPoints, TableOfQuotients) {
    Params p{{0.3, 0.2}, 0.6, BranchedPoint(0.04, 0.4)};
    const cplx ie = p.inv_eps(), s = p.a + p.b;
    auto sp = singular_points(p);
    ASSERT_EQ(sp.size(), 4u);
    EXPECT_REL(sp[0].eigen_quotient, ie, 1e-13);
    EXPECT_REL(sp[1].eigen_quotient, 1.0 - ie - s, 1e-13);
    EXPECT_REL(sp[2].eigen_quotient, -ie, 1e-13);
    EXPECT_REL(sp[3].eigen_quotient, -1.0 + ie + s, 1e-13);
    EXPECT_EQ(sp[2].location[1], cplx(1.0));
    Params z{0.3, 0.7, BranchedPoint()};
    z.eps.modulus = 0.0;
    EXPECT_THROW_CODE(singular_points(z), domain);
}

TEST(SingularPoints, QuotientsMatchDifferences) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0, field = 0.0, formal = 0.0;
    for (int k = 0; k < 50; ++k) {
        Params p{{-2.0 + 4.0 * U(rng), -1.0 + 2.0 * U(rng)}, {-2.0 + 4.0 * U(rng), -1.0 + 2.0 * U(rng)},
                 BranchedPoint(0.01 + 0.05 * U(rng), -pi + 2.0 * pi * U(rng))};
        auto sp = singular_points(p);
        for (auto& s : sp) {
            worst = std::max(worst, std::abs(fd_quotient(p, s.location) - s.eigen_quotient) / (1.0 + std::abs(s.eigen_quotient)));
            State<2> v = riccati_field(p, s.location);
            field = std::max(field, std::abs(v[0]) + std::abs(v[1]));
        }
        cplx s1 = sp[0].eigen_quotient + sp[1].eigen_quotient, s2 = sp[2].eigen_quotient + sp[3].eigen_quotient;
        formal = std::max({formal, std::abs(s1 - (1.0 - p.a - p.b)) / (1.0 + std::abs(s1)),
                           std::abs(s2 - (p.a + p.b - 1.0)) / (1.0 + std::abs(s2))});
        formal = std::max(formal, std::abs(s1 + s2) / (1.0 + std::abs(s1)));
    }
    EXPECT_LE(worst, 1e-10);
    EXPECT_LE(field, 1e-14);
    EXPECT_LE(formal, 1e-12);
}

TEST(Rho, Anchors) {
    EXPECT_LE(std::abs(rho_eval(real_eps, Which::w2, SheetPoint::on_segment(real_eps, 0.0)).value - 1.0), 1e-12);
    EXPECT_LE(std::abs(rho_eval(real_eps, Which::w3, SheetPoint::on_segment(real_eps, 1.0)).value), 1e-12);
    Params q{{0.3, 0.2}, {-1.1, 0.4}, BranchedPoint(0.03, 1.0)};
    EXPECT_LE(std::abs(rho_eval(q, Which::w2, SheetPoint::on_segment(q, 0.0)).value - 1.0), 1e-12);
    EXPECT_LE(std::abs(rho_eval(q, Which::w3, SheetPoint::on_segment(q, 1.0)).value), 1e-12);
}

TEST(Rho, OracleValues) {
    Params p{0.3, 0.7, BranchedPoint(0.08, 0.5)};
    SheetPoint x = SheetPoint::lens(p, 0.4 * p.eps_value());
    const cplx want[4] = {oracle::rho1_complex, oracle::rho2_complex, oracle::rho3_complex, oracle::rho4_complex};
    for (int i = 0; i < 4; ++i) EXPECT_LE(testutil::rel1(rho_eval(p, Which(i), x).value, want[i]), 1e-9) << "rho" << i + 1;
    SheetPoint m = SheetPoint::on_segment(real_eps, 0.5);
    EXPECT_LE(testutil::rel1(rho_eval(real_eps, Which::w2, m).value, oracle::rho2_mid), 1e-9);
    EXPECT_LE(testutil::rel1(rho_eval(real_eps, Which::w3, m).value, oracle::rho3_mid), 1e-9);
}

TEST(Rho, ThirdMatchesDifferences) {
    const Params& p = real_eps;
    const cplx e = p.eps_value(), x = 0.5 * e, h = 1e-5 * e;
    auto w3 = [&](cplx z) { return basis_eval(p, Which::w3, SheetPoint::lens(p, z)).value; };
    cplx fd = -x * (x - e) * (w3(x + h) - w3(x - h)) / (2.0 * h) / w3(x);
    cplx r = rho_eval(p, Which::w3, SheetPoint::on_segment(p, 0.5)).value;
    EXPECT_LE(std::abs(fd - r) / (std::abs(r) + std::abs(e * e)), 1e-7);
}

TEST(Rho, GraphsAreSolutions) {
    // y = rho(x) solves dy/dx = ydot / xdot
    Params p{{0.3, 0.2}, 0.6, BranchedPoint(0.05, 0.3)};
    const cplx e = p.eps_value();
    for (int i = 0; i < 4; ++i) {
        const cplx x = 0.45 * e, h = 1e-5 * e;
        auto r = [&](cplx z) { return rho_eval(p, Which(i), SheetPoint::lens(p, z)).value; };
        cplx d = (r(x + h) - r(x - h)) / (2.0 * h);
        State<2> f = riccati_field(p, {x, r(x)});
        EXPECT_LE(std::abs(d - f[1] / f[0]) / (1.0 + std::abs(d)), 1e-6) << "rho" << i + 1;
    }
}

TEST(FirstIntegral, IndexPairs) {
    EXPECT_EQ(first_integral_index(Sign::plus, true), Which::w2);
    EXPECT_EQ(first_integral_index(Sign::plus, false), Which::w3);
    EXPECT_EQ(first_integral_index(Sign::minus, true), Which::w4);
    EXPECT_EQ(first_integral_index(Sign::minus, false), Which::w1);
}

TEST(FirstIntegral, ZeroAndPoleOnTheGraphs) {
    SheetPoint x = SheetPoint::on_segment(real_eps, 0.4);
    cplx r2 = rho_eval(real_eps, Which::w2, x).value, r3 = rho_eval(real_eps, Which::w3, x).value;
    EvalResult z = first_integral_eval(real_eps, Sign::plus, x, r2);
    EXPECT_FALSE(z.is_reciprocal);
    EXPECT_LE(std::abs(z.value), 1e-10 * std::abs(sphere(first_integral_eval(real_eps, Sign::plus, x, 0.3))));
    EvalResult w = first_integral_eval(real_eps, Sign::plus, x, r3);
    EXPECT_LE(std::abs(w.is_reciprocal ? w.value : 1.0 / w.value), 1e-10);
}

TEST(FirstIntegral, OracleValue) {
    SheetPoint x = SheetPoint::on_segment(real_eps, 0.5);
    EXPECT_REL(sphere(first_integral_eval(real_eps, Sign::plus, x, 0.3)), oracle::first_integral_mid, 1e-9);
}

TEST(FirstIntegral, ConstantAlongTrajectories) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (const Params& p : {real_eps, Params{{0.3, 0.1}, 0.6, BranchedPoint(0.05, 0.4)}}) {
        for (int k = 0; k < 4; ++k) {
            SheetPoint x0 = SheetPoint::on_segment(p, 0.5);
            cplx y0 = k == 0 ? cplx(0.3) : cplx(-1.0 + 2.0 * U(rng), U(rng) - 0.5);
            cplx i0 = sphere(first_integral_eval(p, Sign::plus, x0, y0));
            State<2> z = transport_riccati(p, State<2>{x0.x, y0}, 1.0).final_state;
            cplx i1 = sphere(first_integral_eval(p, Sign::plus, SheetPoint::lens(p, z[0]), z[1]));
            EXPECT_LE(rel(i1, i0), 1e-8) << "y0 = " << y0;
        }
    }
}

TEST(FirstIntegral, MonodromyRelations) {
    SplitResiduals r = first_integral_split_check(real_eps, Sign::plus, 0.3);
    EXPECT_LE(r.around_eps, 1e-7);
    EXPECT_LE(r.around_zero, 1e-7);
    Params m{0.3, 0.7, sector_lift(BranchedPoint(0.05, 0.6 * pi), Sign::minus)};
    r = first_integral_split_check(m, Sign::minus, 0.3);
    EXPECT_LE(r.around_eps, 1e-7);
    EXPECT_LE(r.around_zero, 1e-7);
}

TEST(FirstIntegral, SameRamificationAsH) {
    for (cplx y : {cplx(0.3), cplx(-0.4, 0.2), cplx(2.0, -1.0)}) {
        Params p{{0.3, 0.1}, 0.6, BranchedPoint(0.05, 0.2)};
        SplitResiduals ri = first_integral_split_check(p, Sign::plus, y);
        SplitResiduals rh = wild_continuous_split_check(p, Sign::plus);
        EXPECT_NEAR(ri.around_eps, rh.around_eps, 1e-8);
        EXPECT_NEAR(ri.around_zero, rh.around_zero, 1e-8);
    }
}

TEST(Universal, MapExamples) {
    UniversalParams u{0.4, 0.6, BranchedPoint(0.01, 1.0)};
    UniversalMap m = universal_map(u, 0);
    EXPECT_REL(m.kappa, std::exp(I * pi * (1.0 / (2.0 * m.sqrt_eps) + 1.0)), 1e-12);
    EXPECT_REL(m.sqrt_eps, std::polar(0.1, 0.5), 1e-15);
    EXPECT_REL(universal_map(u, 1).sqrt_eps, -std::polar(0.1, 0.5), 1e-15);
    UniversalParams w{{0.2, 0.1}, 0.5, BranchedPoint(0.01, 2.0)};
    UniversalMap mw = universal_map(w, 0);
    EXPECT_REL(mw.c, oracle::universal_c, 1e-13);
    EXPECT_REL(mw.kappa, oracle::universal_kappa, 1e-12);
    EXPECT_REL(mw.mapped.eps_value(), 1.0 / (1.0 - mw.c), 1e-14);
}

TEST(Universal, FieldVanishesAtRoots) {
    UniversalParams u{{0.2, 0.1}, 0.5, BranchedPoint(0.01, 2.0)};
    for (int br = 0; br < 2; ++br) {
        cplx s = universal_map(u, br).sqrt_eps;
        EXPECT_LE(std::abs(universal_field(u, {s, 0.7})[0]), 1e-17);
    }
}

TEST(Universal, ProductExamples) {
    EXPECT_REL(L_universal({0.5, 0.5, BranchedPoint(0.01, 1.0)}), cplx(-4.0), 1e-14);
    EXPECT_LE(std::abs(L_universal({2.0, {0.3, 0.4}, BranchedPoint(0.01, 1.0)})), 1e-14);
    EXPECT_LE(std::abs(L_universal({-1.0, 0.3, BranchedPoint(0.02, 4.0)})), 1e-14);
}

TEST(Universal, BranchesAgree) {
    UniversalParams u{0.3, 0.7, BranchedPoint(0.01, pi / 3.0)};
    cplx L = product_L_closed_form(u.a, u.b);
    for (int br = 0; br < 2; ++br) {
        UniversalMap m = universal_map(u, br);
        EXPECT_LE(std::abs(product_L(m.mapped, m.sector) - L), 1e-10 * (1.0 + std::abs(L)));
    }
    EXPECT_NO_THROW(L_universal(u));
    EXPECT_THROW_CODE(L_universal(u, -1.0), branch_disagreement);
}

TEST(Universal, RandomEpsInUniversalSector) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double g = pi / 4.0;
    for (int k = 0; k < 20; ++k) {
        cplx a{-2.0 + 4.0 * U(rng), -0.5 + U(rng)}, b{-2.0 + 4.0 * U(rng), -0.5 + U(rng)};
        UniversalParams u{a, b, BranchedPoint(std::pow(10.0, -4.0 + 2.0 * U(rng)), g + (4.0 * pi - 2.0 * g) * U(rng))};
        EXPECT_NO_THROW(L_universal(u)) << "sample " << k;
    }
}

TEST(Universal, MappedMonodromy) {
    UniversalParams u{0.3, 0.7, BranchedPoint(0.01, 2.0 * pi + 0.4)};
    for (int br = 0; br < 2; ++br) EXPECT_LE(universal_monodromy_check(u, br), 1e-6) << "branch " << br;
}

TEST(Universal, ZeroEpsRejected) {
    UniversalParams u{0.3, 0.7, BranchedPoint()};
    u.eps_universal.modulus = 0.0;
    EXPECT_THROW_CODE(universal_map(u, 0), domain);
}
