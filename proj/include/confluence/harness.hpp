#pragma once

#include <algorithm>
#include <cstdint>
#include <locale>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "borel.hpp"
#include "path_integrator.hpp"
#include "riccati.hpp"
#include "sectors.hpp"
#include "stokes.hpp"

namespace confluence::harness {

using json = nlohmann::json;

// ---- configuration ----

// a(eps) = c0 + c1 eps + ...
struct Poly {
    std::vector<cplx> c{0.0};

    static Poly constant(cplx v) { return {{v}}; }
    cplx operator()(cplx e) const {
        cplx r = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * e + *it;
        return r;
    }
    bool is_constant() const { return c.size() == 1; }
};

enum class SectorChoice { plus, minus, automatic };
enum class Format { csv, json };

struct ScanConfig {
    Poly a = Poly::constant(0.3);
    Poly b = Poly::constant(0.7);
    std::vector<BranchedPoint> eps_grid;
    SectorChoice sector = SectorChoice::automatic;
    SectorConfig sectors;
    std::vector<std::string> outputs;
    Format format = Format::csv;
};

inline double parse_real(const std::string& s) {
    std::istringstream in(s);
    in.imbue(std::locale::classic());
    double v;
    in >> v;
    if (in.fail() || !in.eof()) throw Error(ErrorCode::config_invalid, "not a number: '" + s + "'");
    return v;
}

// "0.3", "-2", "0.3+0.2i", "1e-3-2i", "2i", "-i"
inline cplx parse_complex(std::string s) {
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    if (s.empty()) throw Error(ErrorCode::config_invalid, "empty complex number");
    if (s.back() != 'i') return parse_real(s);
    s.pop_back();
    // split at the last sign that does not belong to an exponent
    std::size_t cut = 0;
    for (std::size_t k = s.size(); k-- > 1;)
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            cut = k;
            break;
        }
    std::string re = s.substr(0, cut), im = s.substr(cut);
    if (im.empty() || im == "+") im = "1";
    if (im == "-") im = "-1";
    return {re.empty() ? 0.0 : parse_real(re), parse_real(im)};
}

// comma-separated coefficients, constant term first
inline Poly parse_poly(const std::string& s) {
    Poly p{{}};
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) p.c.push_back(parse_complex(item));
    if (p.c.empty()) throw Error(ErrorCode::config_invalid, "empty coefficient list");
    return p;
}

// "m@arg" for one point; "m0:m1:n@arg" for n points geometrically spaced
// from m0 to m1. A bare modulus means arg 0.
inline std::vector<BranchedPoint> parse_eps_item(const std::string& s) {
    std::string mod = s, arg = "0";
    if (auto at = s.find('@'); at != std::string::npos) {
        mod = s.substr(0, at);
        arg = s.substr(at + 1);
    }
    const double th = parse_real(arg);
    auto point = [&](double m) {
        if (!(m > 0.0)) throw Error(ErrorCode::config_invalid, "eps modulus must be positive");
        return BranchedPoint(m, th);
    };
    if (mod.find(':') == std::string::npos) return {point(parse_real(mod))};
    std::vector<std::string> f;
    std::istringstream in(mod);
    std::string item;
    while (std::getline(in, item, ':')) f.push_back(item);
    if (f.size() != 3) throw Error(ErrorCode::config_invalid, "range must read m0:m1:n@arg");
    const double m0 = parse_real(f[0]), m1 = parse_real(f[1]), n = parse_real(f[2]);
    if (!(n >= 1.0) || n != std::floor(n)) throw Error(ErrorCode::config_invalid, "range count must be a positive integer");
    std::vector<BranchedPoint> out;
    for (int k = 0; k < int(n); ++k) {
        double t = n == 1.0 ? 0.0 : k / (n - 1.0);
        out.push_back(point(m0 * std::pow(m1 / m0, t)));
    }
    return out;
}

inline std::vector<BranchedPoint> parse_eps_grid(const std::string& s) {
    std::vector<BranchedPoint> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        for (auto& e : parse_eps_item(item)) out.push_back(e);
    }
    return out;
}

inline SectorChoice parse_sector(const std::string& s) {
    if (s == "+" || s == "plus") return SectorChoice::plus;
    if (s == "-" || s == "minus") return SectorChoice::minus;
    if (s == "auto") return SectorChoice::automatic;
    throw Error(ErrorCode::config_invalid, "sector must be +, - or auto");
}

// Sign of the sector each grid point belongs to. Membership is by argument
// only; the scans deliberately run up to |eps| = 0.1.
inline Sign resolve_sector(const BranchedPoint& e, const ScanConfig& cfg) {
    SectorSet in = sector_classify(e, cfg.sectors, false);
    switch (cfg.sector) {
    case SectorChoice::plus:
        if (!in.plus) throw Error(ErrorCode::config_invalid, "grid point outside S+");
        return Sign::plus;
    case SectorChoice::minus:
        if (!in.minus) throw Error(ErrorCode::config_invalid, "grid point outside S-");
        return Sign::minus;
    case SectorChoice::automatic:
        if (in.plus) return Sign::plus;
        if (in.minus) return Sign::minus;
        throw Error(ErrorCode::config_invalid, "grid point lies in neither sector");
    }
    return Sign::plus;
}

inline Params params_at(const ScanConfig& cfg, const BranchedPoint& e, Sign s) {
    const BranchedPoint l = sector_lift(e, s);
    return {cfg.a(l.value()), cfg.b(l.value()), l};
}

// ---- tables ----

using Cell = std::variant<double, cplx, std::string>;

struct Table {
    std::vector<std::string> columns;  // complex columns expand to name_re, name_im in CSV
    std::vector<std::vector<Cell>> rows;
};

inline std::string fmt(double v) {
    std::ostringstream o;
    o.imbue(std::locale::classic());
    o.precision(17);
    o << v;
    return o.str();
}

inline void write_csv(std::ostream& os, const Table& t, const std::vector<bool>& is_complex) {
    for (std::size_t k = 0; k < t.columns.size(); ++k) {
        if (k) os << ',';
        if (is_complex[k]) os << t.columns[k] << "_re," << t.columns[k] << "_im";
        else os << t.columns[k];
    }
    os << '\n';
    for (auto& r : t.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (k) os << ',';
            if (auto d = std::get_if<double>(&r[k])) os << fmt(*d);
            else if (auto z = std::get_if<cplx>(&r[k])) os << fmt(z->real()) << ',' << fmt(z->imag());
            else os << std::get<std::string>(r[k]);
        }
        os << '\n';
    }
}

inline json cell_json(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return *d;
    if (auto z = std::get_if<cplx>(&c)) return {{"re", z->real()}, {"im", z->imag()}};
    return std::get<std::string>(c);
}

// the column kinds come from the first row; an empty table is all real
inline void write_table(std::ostream& os, const Table& t, Format f) {
    std::vector<bool> cx(t.columns.size(), false);
    if (!t.rows.empty())
        for (std::size_t k = 0; k < cx.size(); ++k) cx[k] = std::holds_alternative<cplx>(t.rows[0][k]);
    if (f == Format::csv) return write_csv(os, t, cx);
    json rows = json::array();
    for (auto& r : t.rows) {
        json o = json::object();
        for (std::size_t k = 0; k < r.size(); ++k) o[t.columns[k]] = cell_json(r[k]);
        rows.push_back(o);
    }
    os << json{{"columns", t.columns}, {"rows", rows}}.dump(2) << '\n';
}

// ---- stokes ----

inline Table cmd_stokes(const ScanConfig& cfg) {
    Table t{{"eps_modulus", "eps_argument", "sector", "lambda", "mu", "L", "lambda_error", "mu_error"}, {}};
    const StokesPair lim = stokes_limits(cfg.a(0.0), cfg.b(0.0));
    for (const BranchedPoint& e : cfg.eps_grid) {
        Sign s = resolve_sector(e, cfg);
        Params p = params_at(cfg, e, s);
        StokesPair m = unfolded_multipliers(p, s);
        t.rows.push_back({e.modulus, e.argument, std::string(s == Sign::plus ? "+" : "-"), m.lambda, m.mu,
                          m.lambda * m.mu, std::abs(m.lambda - lim.lambda), std::abs(m.mu - lim.mu)});
    }
    return t;
}

// ---- verify ----

struct Identity {
    std::string name;
    double residual;
    double tolerance;
    bool pass;
    json detail = json::object();
};

struct VerifyReport {
    std::string suite;
    std::uint64_t seed = 0;
    json parameters = json::object();
    std::vector<Identity> identities;

    bool all_pass() const {
        for (auto& i : identities)
            if (!i.pass) return false;
        return true;
    }
    json to_json() const {
        json ids = json::array();
        for (auto& i : identities)
            ids.push_back({{"name", i.name}, {"residual", i.residual}, {"tolerance", i.tolerance},
                           {"pass", i.pass}, {"detail", i.detail}});
        return {{"suite", suite}, {"seed", seed}, {"parameters", parameters}, {"identities", ids},
                {"pass", all_pass()}};
    }
    void add(std::string name, double residual, double tol, json detail = json::object()) {
        bool ok = std::isfinite(residual) && residual <= tol;
        identities.push_back({std::move(name), residual, tol, ok, std::move(detail)});
    }
    // an identity whose evaluation threw counts as failed
    template <class F>
    void check(const std::string& name, double tol, F f) {
        try {
            f();
        } catch (const std::exception& e) {
            identities.push_back({name, INFINITY, tol, false, {{"error", e.what()}}});
        }
    }
};

struct VerifyOptions {
    cplx a = 0.3, b = 0.7;
    std::uint64_t seed = 1;
    std::optional<BranchedPoint> eps;
    SectorConfig sectors;
};

inline json cjson(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline double entry_residual(const Mat2& got, const Mat2& want) {
    double w = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) w = std::max(w, std::abs(got(i, j) - want(i, j)) / (1.0 + std::abs(want(i, j))));
    return w;
}

// eps in a sector with |eps| in [0.04, 0.1] and |Im 1/eps| in [0.5, 2]: the
// integrated monodromy loses about e^{2 pi |Im 1/eps|} to cancellation, so
// this is where entrywise 1e-6 is attainable.
inline BranchedPoint sample_monodromy_eps(std::mt19937_64& g, Sign s) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double r = 0.04 + 0.06 * U(g);
    double im = (0.5 + 1.5 * U(g)) * (U(g) < 0.5 ? -1.0 : 1.0);
    double ang = std::asin(im * r);
    return sector_lift(BranchedPoint(r, s == Sign::plus ? -ang : pi + ang), s);
}

inline VerifyReport verify_monodromy(const VerifyOptions& o) {
    VerifyReport rep{"monodromy", o.seed, {{"a", cjson(o.a)}, {"b", cjson(o.b)}}, {}};
    std::mt19937_64 g(o.seed);
    for (Sign s : {Sign::plus, Sign::minus})
        for (int k = 0; k < 3; ++k) {
            Params p{o.a, o.b, sample_monodromy_eps(g, s)};
            const std::string tag = std::string(s == Sign::plus ? "+" : "-") + "#" + std::to_string(k);
            json d{{"eps", {{"modulus", p.eps.modulus}, {"argument", p.eps.argument}}}};
            for (Around ar : {Around::zero, Around::eps}) {
                std::string name = "monodromy_entries[" + tag + (ar == Around::zero ? ",0]" : ",eps]");
                rep.check(name, 1e-6, [&] {
                    rep.add(name, entry_residual(monodromy_via_integration(p, s, ar), monodromy_matrix(p, s, ar)),
                            1e-6, d);
                });
            }
            std::string name = "composition[" + tag + "]";
            rep.check(name, 1e-6, [&] {
                Path both = monodromy_loop(p, Around::zero).then(monodromy_loop(p, Around::eps));
                Mat2 got = monodromy_estimate(p, s, SheetPoint::on_segment(p, 0.5), both).matrix;
                Mat2 want = monodromy_matrix(p, s, Around::zero) * monodromy_matrix(p, s, Around::eps);
                rep.add(name, entry_residual(got, want), 1e-6, d);
            });
        }
    // a = -1: the series of g terminates and lambda+ vanishes
    rep.check("convergent_lambda_entry", 1e-8, [&] {
        Params p{-1.0, o.b, BranchedPoint(0.05, 0.1)};
        Mat2 m = monodromy_via_integration(p, Sign::plus, Around::zero);
        rep.add("convergent_lambda_entry", std::abs(m.m21), 1e-8);
    });
    return rep;
}

inline VerifyReport verify_borel(const VerifyOptions& o) {
    VerifyReport rep{"borel", o.seed, {{"a", cjson(o.a)}, {"b", cjson(o.b)}}, {}};
    std::mt19937_64 g(o.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const cplx a = o.a, b = o.b;
    for (int k = 0; k < 10; ++k) {
        BranchedPoint x(0.05 + 0.3 * U(g), (U(g) - 0.5) * 0.9 * pi);
        std::string name = "g_closed_vs_laplace#" + std::to_string(k);
        rep.check(name, 1e-8, [&] {
            cplx c = g_closed_form(a, b, x, LateralTag::none).value;
            cplx l = laplace_sum(a, b, x.value(), 0.0).value;
            rep.add(name, std::abs(c - l) / (1.0 + std::abs(c)), 1e-8,
                    {{"x", {{"modulus", x.modulus}, {"argument", x.argument}}}});
        });
    }
    rep.check("euler_value", 1e-5, [&] {
        rep.add("euler_value", std::abs(laplace_sum(1.0, 1.0, 0.1, 0.0).value - 0.915633339397881), 1e-5);
    });
    const StokesPair s = stokes_limits(a, b);
    const bool terminating = is_nonpositive_integer(a) || is_nonpositive_integer(b);
    rep.check("g_jump", 1e-6, [&] {
        BranchedPoint x(0.3, -pi + 0.3);
        cplx gp = g_closed_form(a, b, x, LateralTag::plus).value;
        cplx gm = g_closed_form(a, b, x, LateralTag::minus).value;
        cplx k = h_k_closed_form(a, b, x, LateralTag::none, HK::k).value;
        if (terminating) {
            rep.add("g_jump", std::abs(gp - gm), 1e-10, {{"branch", "lambda_zero"}});
        } else {
            double r = std::abs(gp - gm - s.lambda * k) / (std::abs(gp - gm) + std::abs(s.lambda * k));
            rep.add("g_jump", r, 1e-6, {{"branch", "divergent"}});
        }
    });
    rep.check("k_jump", 1e-6, [&] {
        BranchedPoint y(0.3, 0.4);
        cplx kp = h_k_closed_form(a, b, y, LateralTag::plus, HK::k).value;
        cplx km = h_k_closed_form(a, b, y.turned(-2.0 * pi), LateralTag::minus, HK::k).value;
        cplx gv = g_closed_form(a, b, y, LateralTag::none).value;
        cplx lhs = kp - std::exp(2.0 * pi * I * (1.0 - a - b)) * km;
        rep.add("k_jump", std::abs(lhs - s.mu * gv) / (std::abs(lhs) + std::abs(s.mu * gv) + 1e-300), 1e-6);
    });
    rep.check("lambda_from_H0", 1e-6, [&] {
        auto inv = [](EvalResult r) { return r.is_reciprocal ? r.value : 1.0 / r.value; };
        BranchedPoint x(0.3, -pi);
        cplx l = inv(H0_eval(a, b, x, H0Side::primed)) - inv(H0_eval(a, b, x, H0Side::primary));
        rep.add("lambda_from_H0", std::abs(l - s.lambda) / (1.0 + std::abs(s.lambda)), 1e-6);
    });
    rep.check("mu_from_H0", 1e-6, [&] {
        auto val = [](EvalResult r) { return r.is_reciprocal ? 1.0 / r.value : r.value; };
        cplx m = val(H0_eval(a, b, BranchedPoint(0.3, 0.0), H0Side::primary)) -
                 std::exp(2.0 * pi * I * (1.0 - a - b)) * val(H0_eval(a, b, BranchedPoint(0.3, -2.0 * pi), H0Side::primed));
        rep.add("mu_from_H0", std::abs(m - s.mu) / (1.0 + std::abs(s.mu)), 1e-6);
    });
    return rep;
}

// finite-difference quotient of the Jacobian eigenvalues; the field is
// quadratic, so central differences are exact up to rounding
inline cplx fd_eigen_quotient(const Params& p, const State<2>& z, double h = 1e-4) {
    auto f = [&](State<2> w) { return riccati_field(p, w); };
    State<2> xp = z, xm = z, yp = z, ym = z;
    xp[0] += h, xm[0] -= h, yp[1] += h, ym[1] -= h;
    cplx lx = (f(xp)[0] - f(xm)[0]) / (2.0 * h);
    cplx ly = (f(yp)[1] - f(ym)[1]) / (2.0 * h);
    return ly / lx;
}

inline VerifyReport verify_riccati(const VerifyOptions& o) {
    VerifyReport rep{"riccati", o.seed, {{"a", cjson(o.a)}, {"b", cjson(o.b)}}, {}};
    std::mt19937_64 g(o.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    BranchedPoint ep = o.eps.value_or(BranchedPoint(0.05, 0.0));
    Params p{o.a, o.b, sector_lift(ep, Sign::plus)};
    rep.parameters["eps"] = {{"modulus", ep.modulus}, {"argument", ep.argument}};

    rep.check("singular_points", 1e-10, [&] {
        double q = 0.0, f = 0.0;
        auto sp = singular_points(p);
        for (auto& s : sp) {
            q = std::max(q, std::abs(fd_eigen_quotient(p, s.location) - s.eigen_quotient) / (1.0 + std::abs(s.eigen_quotient)));
            State<2> v = riccati_field(p, s.location);
            f = std::max(f, std::abs(v[0]) + std::abs(v[1]));
        }
        rep.add("eigen_quotients_vs_jacobian", q, 1e-10);
        rep.add("field_vanishes_at_singular_points", f, 1e-14);
        cplx s1 = sp[0].eigen_quotient + sp[1].eigen_quotient, s2 = sp[2].eigen_quotient + sp[3].eigen_quotient;
        rep.add("formal_invariant_pair_0", std::abs(s1 - (1.0 - p.a - p.b)) / (1.0 + std::abs(s1)), 1e-12);
        rep.add("formal_invariant_pair_1", std::abs(s2 - (p.a + p.b - 1.0)) / (1.0 + std::abs(s2)), 1e-12);
    });
    rep.check("rho_anchors", 1e-12, [&] {
        rep.add("rho2_at_0", std::abs(rho_eval(p, Which::w2, SheetPoint::on_segment(p, 0.0)).value - 1.0), 1e-12);
        rep.add("rho3_at_eps", std::abs(rho_eval(p, Which::w3, SheetPoint::on_segment(p, 1.0)).value), 1e-12);
    });
    rep.check("rho3_vs_finite_difference", 1e-7, [&] {
        const cplx e = p.eps_value(), x = 0.5 * e, h = 1e-5 * e;
        auto w3 = [&](cplx z) { return basis_eval(p, Which::w3, SheetPoint::lens(p, z)).value; };
        cplx d = (w3(x + h) - w3(x - h)) / (2.0 * h);
        cplx fd = -x * (x - e) * d / w3(x);
        cplx r = rho_eval(p, Which::w3, SheetPoint::on_segment(p, 0.5)).value;
        rep.add("rho3_vs_finite_difference", std::abs(fd - r) / (std::abs(r) + std::abs(e * e)), 1e-7);
    });
    for (int k = 0; k < 3; ++k) {
        std::string name = "first_integral_drift#" + std::to_string(k);
        rep.check(name, 1e-8, [&] {
            SheetPoint x0 = SheetPoint::on_segment(p, 0.5);
            cplx y0 = k == 0 ? cplx(0.3) : cplx(-1.0 + 2.0 * U(g), U(g) - 0.5);
            EvalResult i0 = first_integral_eval(p, Sign::plus, x0, y0);
            TransportResult<2> r = transport_riccati(p, State<2>{x0.x, y0}, 1.0);
            EvalResult i1 = first_integral_eval(p, Sign::plus, SheetPoint::lens(p, r.final_state[0]), r.final_state[1]);
            cplx v0 = i0.is_reciprocal ? 1.0 / i0.value : i0.value;
            cplx v1 = i1.is_reciprocal ? 1.0 / i1.value : i1.value;
            rep.add(name, std::abs(v1 - v0) / std::abs(v0), 1e-8, {{"y0", cjson(y0)}});
        });
    }
    rep.check("rho3_invariant_curve", 1e-8, [&] {
        SheetPoint x0 = SheetPoint::on_segment(p, 0.5);
        cplx y0 = rho_eval(p, Which::w3, x0).value;
        // backwards in time x drifts towards eps; |x - eps| is roughly halved
        double t = -std::log(3.0) / p.eps_value().real();
        TransportResult<2> r = transport_riccati(p, State<2>{x0.x, y0}, t);
        cplx want = rho_eval(p, Which::w3, SheetPoint::lens(p, r.final_state[0])).value;
        rep.add("rho3_invariant_curve", std::abs(r.final_state[1] - want), 1e-8);
    });
    for (Sign s : {Sign::plus, Sign::minus}) {
        std::string tag = s == Sign::plus ? "+" : "-";
        Params q = s == Sign::plus ? p : Params{o.a, o.b, sector_lift(BranchedPoint(0.05, 0.6 * pi), s)};
        rep.check("I_monodromy[" + tag + "]", 1e-7, [&] {
            SplitResiduals ri = first_integral_split_check(q, s, 0.3);
            SplitResiduals rh = wild_continuous_split_check(q, s);
            rep.add("I_monodromy_around_eps[" + tag + "]", ri.around_eps, 1e-7);
            rep.add("I_monodromy_around_zero[" + tag + "]", ri.around_zero, 1e-7);
            rep.add("ramification_equivalence[" + tag + "]",
                    std::max(std::abs(ri.around_eps - rh.around_eps), std::abs(ri.around_zero - rh.around_zero)), 1e-8);
        });
    }
    return rep;
}

inline VerifyReport verify_symmetry(const VerifyOptions& o) {
    VerifyReport rep{"symmetry", o.seed, {{"a", cjson(o.a)}, {"b", cjson(o.b)}}, {}};
    std::mt19937_64 g(o.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double gm = o.sectors.gamma_opening;
    for (int k = 0; k < 20; ++k) {
        Params p{o.a, o.b, BranchedPoint(0.02 + 0.04 * U(g), (-pi + gm) + (2.0 * pi - 2.0 * gm) * U(g))};
        double t = 0.2 + 0.6 * U(g);
        std::string id = "#" + std::to_string(k);
        rep.check("symmetry" + id, 1e-9, [&] {
            SheetPoint x = SheetPoint::on_segment(p, t);
            Symmetric m = lemma_symmetry(p, x, Sign::plus);
            Symmetric back = lemma_symmetry(m.p, m.x, Sign::minus);
            double inv = std::abs(back.p.eps_value() - p.eps_value()) / p.eps.modulus +
                         std::abs(back.p.eps.argument - p.eps.argument) + std::abs(back.x.x - x.x) / std::abs(x.x);
            rep.add("involution" + id, inv, 1e-12);
            cplx w3 = basis_eval(p, Which::w3, x).value, w1 = basis_eval(m.p, Which::w1, m.x).value;
            rep.add("w3_equals_mirrored_w1" + id, std::abs(w3 - w1) / std::abs(w3), 1e-9);
            cplx lp = product_L(p, Sign::plus), lm = product_L(m.p, Sign::minus);
            rep.add("product_matches_mirror" + id, std::abs(lp - lm) / (1.0 + std::abs(lp)), 1e-10);
        });
    }
    return rep;
}

inline VerifyReport verify_universal(const VerifyOptions& o) {
    VerifyReport rep{"universal", o.seed, {{"a", cjson(o.a)}, {"b", cjson(o.b)}}, {}};
    std::mt19937_64 g(o.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double gm = o.sectors.gamma_opening;
    const cplx L = product_L_closed_form(o.a, o.b);
    for (int k = 0; k < 20; ++k) {
        UniversalParams u{o.a, o.b, BranchedPoint(std::pow(10.0, -4.0 + 2.0 * U(g)), gm + (4.0 * pi - 2.0 * gm) * U(g))};
        std::string name = "L_both_branches#" + std::to_string(k);
        rep.check(name, 1e-10, [&] {
            double r = 0.0;
            for (int br = 0; br < 2; ++br) {
                UniversalMap m = universal_map(u, br);
                r = std::max(r, std::abs(product_L(m.mapped, m.sector) - L) / (1.0 + std::abs(L)));
            }
            rep.add(name, r, 1e-10, {{"eps", {{"modulus", u.eps_universal.modulus}, {"argument", u.eps_universal.argument}}}});
        });
    }
    // near 2pi the mapped eps~ stay close to the real axis on both branches
    UniversalParams u{o.a, o.b, BranchedPoint(0.01, 2.0 * pi + 0.4)};
    for (int br = 0; br < 2; ++br) {
        std::string name = "mapped_monodromy[branch " + std::to_string(br) + "]";
        rep.check(name, 1e-6, [&] { rep.add(name, universal_monodromy_check(u, br), 1e-6); });
    }
    return rep;
}

inline VerifyReport cmd_verify(const std::string& suite, const VerifyOptions& o) {
    if (suite == "monodromy") return verify_monodromy(o);
    if (suite == "borel") return verify_borel(o);
    if (suite == "riccati") return verify_riccati(o);
    if (suite == "symmetry") return verify_symmetry(o);
    if (suite == "universal") return verify_universal(o);
    throw Error(ErrorCode::config_invalid, "unknown suite '" + suite + "'");
}

// ---- plot data ----

inline std::vector<cplx> h_limit_points() {
    return {0.2, std::polar(0.2, pi / 4.0), std::polar(0.2, -pi / 4.0), std::polar(0.3, 0.5), 0.15};
}

// H^eps continued through the far field next to H0 at fixed x
inline Table plot_h_limit_scan(const ScanConfig& cfg) {
    Table t{{"eps_modulus", "eps_argument", "x", "H_eps", "H0", "difference"}, {}};
    for (const BranchedPoint& e : cfg.eps_grid) {
        Sign s = resolve_sector(e, cfg);
        Params p = params_at(cfg, e, s);
        for (cplx x : h_limit_points()) {
            BranchedPoint xb = h0_sheet(x);
            EvalResult he = H_eps(p, s, SheetPoint::far_field(p, s, xb));
            EvalResult h0 = H0_eval(p.a, p.b, xb, H0Side::primary);
            cplx a = he.is_reciprocal ? 1.0 / he.value : he.value;
            cplx c = h0.is_reciprocal ? 1.0 / h0.value : h0.value;
            t.rows.push_back({e.modulus, e.argument, x, a, c, std::abs(a - c)});
        }
    }
    return t;
}

inline Table plot_stokes_limit_scan(const ScanConfig& cfg) {
    Table t{{"eps_modulus", "eps_argument", "lambda_eps", "mu_eps", "lambda_error", "mu_error"}, {}};
    for (const BranchedPoint& e : cfg.eps_grid) {
        Sign s = resolve_sector(e, cfg);
        Params p = params_at(cfg, e, s);
        StokesPair m = unfolded_multipliers(p, s), lim = stokes_limits(cfg.a(0.0), cfg.b(0.0));
        t.rows.push_back({e.modulus, e.argument, m.lambda, m.mu, std::abs(m.lambda - lim.lambda),
                          std::abs(m.mu - lim.mu)});
    }
    return t;
}

// Polylines in the real (x, y) plane for real eps > 0: the graphs of rho2
// and rho3 and a few trajectories. One portrait per grid point.
inline Table plot_riccati_portrait(const ScanConfig& cfg) {
    Table t{{"eps", "curve", "index", "x", "y"}, {}};
    for (const BranchedPoint& e : cfg.eps_grid) {
        if (std::abs(std::sin(e.argument)) > 1e-14 || std::cos(e.argument) < 0.0)
            throw Error(ErrorCode::config_invalid, "riccati_portrait needs real eps > 0");
        Params p{cfg.a(e.modulus), cfg.b(e.modulus), BranchedPoint(e.modulus, 0.0)};
        const int n = 40;
        for (int k = 0; k <= n; ++k) {
            double s = 0.95 * k / n;
            SheetPoint x = SheetPoint::on_segment(p, s);
            t.rows.push_back({e.modulus, std::string("rho2"), double(k), x.x, rho_eval(p, Which::w2, x).value});
        }
        for (int k = 0; k <= n; ++k) {
            double s = 0.05 + 0.95 * k / n;
            SheetPoint x = SheetPoint::on_segment(p, s);
            t.rows.push_back({e.modulus, std::string("rho3"), double(k), x.x, rho_eval(p, Which::w3, x).value});
        }
        int traj = 0;
        for (double y0 : {-0.5, 0.3, 0.8, 1.5}) {
            State<2> z{0.5 * p.eps_value(), y0};
            // unit time steps in x(t) = eps/2 -> towards 0
            for (int k = 0; k <= 20; ++k) {
                t.rows.push_back({e.modulus, "trajectory" + std::to_string(traj), double(k), z[0], z[1]});
                z = transport_riccati(p, z, 1.0 / p.eps_value().real() * 0.1).final_state;
            }
            ++traj;
        }
    }
    return t;
}

inline Table cmd_plotdata(const std::string& kind, const ScanConfig& cfg) {
    if (kind == "h_limit_scan") return plot_h_limit_scan(cfg);
    if (kind == "stokes_limit_scan") return plot_stokes_limit_scan(cfg);
    if (kind == "riccati_portrait") return plot_riccati_portrait(cfg);
    throw Error(ErrorCode::config_invalid, "unknown plot kind '" + kind + "'");
}

}  // namespace confluence::harness
