#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "sectors.hpp"
#include "special_functions.hpp"
#include "stokes.hpp"

namespace confluence {

template <std::size_t N>
using State = std::array<cplx, N>;

template <std::size_t N>
struct TransportResult {
    State<N> final_state;
    double error_estimate = 0.0;
    std::size_t steps = 0;
    bool blow_up = false;  // a pole of y was crossed in the 1/y chart
};

// Solutions can shrink by many orders along a loop, so the default is purely
// relative.
struct Tolerance {
    double rtol = 1e-12;
    double atol = 0.0;
};

namespace detail {

// Dormand-Prince 8(5,3) tableau
namespace dp {
constexpr double c2 = 0.526001519587677318785587544488e-01, c3 = 0.789002279381515978178381316732e-01,
                 c4 = 0.118350341907227396726757197510e+00, c5 = 0.281649658092772603273242802490e+00,
                 c6 = 0.333333333333333333333333333333e+00, c7 = 0.25e+00,
                 c8 = 0.307692307692307692307692307692e+00, c9 = 0.651282051282051282051282051282e+00,
                 c10 = 0.6e+00, c11 = 0.857142857142857142857142857142e+00;
constexpr double b1 = 5.42937341165687622380535766363e-2, b6 = 4.45031289275240888144113950566e0,
                 b7 = 1.89151789931450038304281599044e0, b8 = -5.8012039600105847814672114227e0,
                 b9 = 3.1116436695781989440891606237e-1, b10 = -1.52160949662516078556178806805e-1,
                 b11 = 2.01365400804030348374776537501e-1, b12 = 4.47106157277725905176885569043e-2;
constexpr double a21 = 5.26001519587677318785587544488e-2, a31 = 1.97250569845378994544595329183e-2,
                 a32 = 5.91751709536136983633785987549e-2, a41 = 2.95875854768068491816892993775e-2,
                 a43 = 8.87627564304205475450678981324e-2, a51 = 2.41365134159266685502369798665e-1,
                 a53 = -8.84549479328286085344864962717e-1, a54 = 9.24834003261792003115737966543e-1,
                 a61 = 3.7037037037037037037037037037e-2, a64 = 1.70828608729473871279604482173e-1,
                 a65 = 1.25467687566822425016691814123e-1, a71 = 3.7109375e-2,
                 a74 = 1.70252211019544039314978060272e-1, a75 = 6.02165389804559606850219397283e-2,
                 a76 = -1.7578125e-2, a81 = 3.70920001185047927108779319836e-2,
                 a84 = 1.70383925712239993810214054705e-1, a85 = 1.07262030446373284651809199168e-1,
                 a86 = -1.53194377486244017527936158236e-2, a87 = 8.27378916381402288758473766002e-3,
                 a91 = 6.24110958716075717114429577812e-1, a94 = -3.36089262944694129406857109825e0,
                 a95 = -8.68219346841726006818189891453e-1, a96 = 2.75920996994467083049415600797e1,
                 a97 = 2.01540675504778934086186788979e1, a98 = -4.34898841810699588477366255144e1,
                 a101 = 4.77662536438264365890433908527e-1, a104 = -2.48811461997166764192642586468e0,
                 a105 = -5.90290826836842996371446475743e-1, a106 = 2.12300514481811942347288949897e1,
                 a107 = 1.52792336328824235832596922938e1, a108 = -3.32882109689848629194453265587e1,
                 a109 = -2.03312017085086261358222928593e-2, a111 = -9.3714243008598732571704021658e-1,
                 a114 = 5.18637242884406370830023853209e0, a115 = 1.09143734899672957818500254654e0,
                 a116 = -8.14978701074692612513997267357e0, a117 = -1.85200656599969598641566180701e1,
                 a118 = 2.27394870993505042818970056734e1, a119 = 2.49360555267965238987089396762e0,
                 a1110 = -3.0467644718982195003823669022e0, a121 = 2.27331014751653820792359768449e0,
                 a124 = -1.05344954667372501984066689879e1, a125 = -2.00087205822486249909675718444e0,
                 a126 = -1.79589318631187989172765950534e1, a127 = 2.79488845294199600508499808837e1,
                 a128 = -2.85899827713502369474065508674e0, a129 = -8.87285693353062954433549289258e0,
                 a1210 = 1.23605671757943030647266201528e1, a1211 = 6.43392746015763530355970484046e-1;
constexpr double bhh1 = 0.244094488188976377952755905512e+00, bhh2 = 0.733846688281611857341361741547e+00,
                 bhh3 = 0.220588235294117647058823529412e-01;
constexpr double er1 = 0.1312004499419488073250102996e-01, er6 = -0.1225156446376204440720569753e+01,
                 er7 = -0.4957589496572501915214079952e+00, er8 = 0.1664377182454986536961530415e+01,
                 er9 = -0.3503288487499736816886487290e+00, er10 = 0.3341791187130174790297318841e+00,
                 er11 = 0.8192320648511571246570742613e-01, er12 = -0.2235530786388629525884427845e-01;
}  // namespace dp

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
    State<N> r = y;
    for (std::size_t i = 0; i < N; ++i) {
        cplx s = 0.0;
        for (auto& [c, k] : terms) s += c * (*k)[i];
        r[i] += h * s;
    }
    return r;
}

// One DOP853 step; returns the new state and the scaled error norm.
template <std::size_t N, class F>
std::pair<State<N>, double> dop853_step(F& f, double t, const State<N>& y, const State<N>& k1, double h,
                                        const Tolerance& tol) {
    using namespace dp;
    State<N> k2 = f(t + c2 * h, axpy<N>(y, h, {{a21, &k1}}));
    State<N> k3 = f(t + c3 * h, axpy<N>(y, h, {{a31, &k1}, {a32, &k2}}));
    State<N> k4 = f(t + c4 * h, axpy<N>(y, h, {{a41, &k1}, {a43, &k3}}));
    State<N> k5 = f(t + c5 * h, axpy<N>(y, h, {{a51, &k1}, {a53, &k3}, {a54, &k4}}));
    State<N> k6 = f(t + c6 * h, axpy<N>(y, h, {{a61, &k1}, {a64, &k4}, {a65, &k5}}));
    State<N> k7 = f(t + c7 * h, axpy<N>(y, h, {{a71, &k1}, {a74, &k4}, {a75, &k5}, {a76, &k6}}));
    State<N> k8 = f(t + c8 * h, axpy<N>(y, h, {{a81, &k1}, {a84, &k4}, {a85, &k5}, {a86, &k6}, {a87, &k7}}));
    State<N> k9 = f(t + c9 * h,
                    axpy<N>(y, h, {{a91, &k1}, {a94, &k4}, {a95, &k5}, {a96, &k6}, {a97, &k7}, {a98, &k8}}));
    State<N> k10 = f(t + c10 * h, axpy<N>(y, h,
                                          {{a101, &k1}, {a104, &k4}, {a105, &k5}, {a106, &k6},
                                           {a107, &k7}, {a108, &k8}, {a109, &k9}}));
    State<N> k11 = f(t + c11 * h, axpy<N>(y, h,
                                          {{a111, &k1}, {a114, &k4}, {a115, &k5}, {a116, &k6}, {a117, &k7},
                                           {a118, &k8}, {a119, &k9}, {a1110, &k10}}));
    State<N> k12 = f(t + h, axpy<N>(y, h,
                                    {{a121, &k1}, {a124, &k4}, {a125, &k5}, {a126, &k6}, {a127, &k7},
                                     {a128, &k8}, {a129, &k9}, {a1210, &k10}, {a1211, &k11}}));
    State<N> y1 = axpy<N>(y, h,
                          {{b1, &k1}, {b6, &k6}, {b7, &k7}, {b8, &k8}, {b9, &k9}, {b10, &k10},
                           {b11, &k11}, {b12, &k12}});
    double err = 0.0, err2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double sk = 1.0 / std::max(tol.atol + tol.rtol * std::max(std::abs(y[i]), std::abs(y1[i])), 1e-300);
        cplx hi = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] + b10 * k10[i] +
                  b11 * k11[i] + b12 * k12[i];
        cplx e3 = hi - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k12[i];
        cplx e5 = er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] + er10 * k10[i] +
                  er11 * k11[i] + er12 * k12[i];
        err2 += std::norm(e3 * sk);
        err += std::norm(e5 * sk);
    }
    double deno = err + 0.01 * err2;
    double e = std::abs(h) * err * std::sqrt(1.0 / (deno <= 0.0 ? double(N) : deno * N));
    return {y1, e};
}

}  // namespace detail

// Adaptive DOP853 for y' = f(t, y) on [t0, t1]. The reported error is the sum
// of accepted local error estimates in absolute terms.
template <std::size_t N, class F>
TransportResult<N> integrate_ode(F f, State<N> y, double t0, double t1, const Tolerance& tol = {},
                                 double max_step = 0.0) {
    TransportResult<N> res{y, 0.0, 0, false};
    const double span = std::abs(t1 - t0);
    if (span == 0.0) return res;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double hmax = max_step > 0.0 ? std::min(max_step, span) : span;
    double t = t0, h = dir * std::min(hmax, 0.01 * span), facold = 1e-4;
    bool reject = false;
    State<N> k1 = f(t, y);
    while (dir * (t1 - t) > 0.0) {
        if (std::abs(h) < 1e-14 * span)
            throw Error(ErrorCode::step_underflow, "step size underflow, path too close to a singularity");
        bool last = false;
        if (dir * (t + h - t1) >= 0.0) {
            h = t1 - t;
            last = true;
        }
        auto [y1, err] = detail::dop853_step<N>(f, t, y, k1, h, tol);
        double fac11 = std::pow(std::max(err, 1e-300), 1.0 / 8.0);
        double fac = std::clamp(fac11 / 0.9, 1.0 / 6.0, 3.0);
        double hnew = h / fac;
        if (err <= 1.0 && std::isfinite(err)) {
            facold = std::max(err, 1e-4);
            double scale = 0.0;
            for (std::size_t i = 0; i < N; ++i)
                scale = std::max(scale, tol.atol + tol.rtol * std::abs(y1[i]));
            res.error_estimate += err * scale;
            ++res.steps;
            t = last ? t1 : t + h;
            y = y1;
            k1 = f(t, y);
            if (std::abs(hnew) > hmax) hnew = dir * hmax;
            if (reject) hnew = dir * std::min(std::abs(hnew), std::abs(h));
            reject = false;
            if (last) break;
        } else {
            hnew = std::isfinite(err) ? h / std::min(3.0, fac11 / 0.9) : 0.25 * h;
            reject = true;
        }
        h = hnew;
    }
    (void)facold;
    res.final_state = y;
    return res;
}

// A path in the x-plane: straight segments and circular arcs.
struct Segment {
    bool arc = false;
    cplx a;             // line: start; arc: center
    cplx b;             // line: end; arc: start point
    double sweep = 0.0; // arc: signed angle

    cplx at(double s) const {
        if (!arc) return a + s * (b - a);
        return a + (b - a) * std::exp(I * sweep * s);
    }
    cplx tangent(double s) const {
        if (!arc) return b - a;
        return I * sweep * (b - a) * std::exp(I * sweep * s);
    }
    cplx start() const { return arc ? b : a; }
    cplx end() const { return at(1.0); }
    double length() const { return arc ? std::abs(sweep) * std::abs(b - a) : std::abs(b - a); }

    double distance_to(cplx z) const {
        if (!arc) {
            cplx d = b - a;
            double s = std::norm(d) > 0.0 ? std::clamp(std::real((z - a) * std::conj(d)) / std::norm(d), 0.0, 1.0)
                                          : 0.0;
            return std::abs(z - at(s));
        }
        double best = std::min(std::abs(z - start()), std::abs(z - end()));
        const double r = std::abs(b - a);
        if (z == a) return r;
        // angle of z as seen from the center, measured from the start direction
        double phi = std::arg((z - a) / (b - a));
        for (double k = -2.0; k <= 2.0; k += 1.0) {
            double s = (phi + 2.0 * pi * k) / sweep;
            if (s > 0.0 && s < 1.0) best = std::min(best, std::abs(std::abs(z - a) - r));
        }
        return best;
    }
};

struct Path {
    std::vector<Segment> segments;

    static Path line(cplx z0, cplx z1) { return {{Segment{false, z0, z1, 0.0}}}; }
    // turn by angle around center, starting at start
    static Path turn(cplx center, cplx start, double angle) { return {{Segment{true, center, start, angle}}}; }

    Path& then_line(cplx z1) {
        segments.push_back({false, end(), z1, 0.0});
        return *this;
    }
    Path& then_turn(cplx center, double angle) {
        segments.push_back({true, center, end(), angle});
        return *this;
    }
    Path& then(const Path& o) {
        segments.insert(segments.end(), o.segments.begin(), o.segments.end());
        return *this;
    }
    Path reversed() const {
        Path r;
        for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
            if (it->arc) r.segments.push_back({true, it->a, it->end(), -it->sweep});
            else r.segments.push_back({false, it->b, it->a, 0.0});
        }
        return r;
    }
    cplx start() const { return segments.empty() ? cplx(0.0) : segments.front().start(); }
    cplx end() const { return segments.empty() ? cplx(0.0) : segments.back().end(); }
    double distance_to(cplx z) const {
        double d = INFINITY;
        for (auto& s : segments) d = std::min(d, s.distance_to(z));
        return d;
    }
};

// base point, center and signed turn angle
struct PathSpec {
    cplx base_point;
    cplx center;
    double turn_angle;

    Path path() const { return Path::turn(center, base_point, turn_angle); }
};

inline void check_clearance(const Params& p, const Path& path) {
    const cplx e = p.eps_value();
    double lim = 0.1 * std::abs(e) * (1.0 - 1e-12);
    if (path.distance_to(0.0) < lim || path.distance_to(e) < lim)
        throw Error(ErrorCode::domain, "path passes within 0.1|eps| of a singular point");
}

// (w, w') along the path for x(x-eps) w'' + (1-eps+(a+b+1)x) w' + ab w = 0
inline TransportResult<2> transport_linear(const Params& p, const Path& path, State<2> initial,
                                           const Tolerance& tol = {}) {
    check_clearance(p, path);
    const cplx e = p.eps_value(), ab = p.a * p.b, q = p.a + p.b + 1.0;
    TransportResult<2> res{initial, 0.0, 0, false};
    for (const Segment& seg : path.segments) {
        if (seg.length() == 0.0) continue;
        auto f = [&](double s, const State<2>& y) -> State<2> {
            cplx x = seg.at(s), dx = seg.tangent(s);
            cplx w2 = -((1.0 - e + q * x) * y[1] + ab * y[0]) / (x * (x - e));
            return {y[1] * dx, w2 * dx};
        };
        // keep steps below a fraction of the distance to the nearest singularity
        double clear = std::min(seg.distance_to(0.0), seg.distance_to(e));
        double ms = std::min(1.0, 0.5 * clear / seg.length());
        auto r = integrate_ode<2>(f, res.final_state, 0.0, 1.0, tol, ms);
        res.final_state = r.final_state;
        res.error_estimate += r.error_estimate;
        res.steps += r.steps;
    }
    return res;
}

inline TransportResult<2> transport_linear(const Params& p, const PathSpec& spec, State<2> initial,
                                           const Tolerance& tol = {}) {
    return transport_linear(p, spec.path(), initial, tol);
}

// Monodromy along a closed path in the basis B+ or B-, in the convention
// w_after = M w_before. The path starts and ends at base.x and the basis is
// the one continued to base. error(i, j) bounds |M_ij| errors from the
// transport estimates and from the rounding of the seeds; it grows with the
// ratio of the basis scales.
struct MonodromyEstimate {
    Mat2 matrix;
    std::array<std::array<double, 2>, 2> error;

    double worst_error() const {
        return std::max({error[0][0], error[0][1], error[1][0], error[1][1]});
    }
};

inline MonodromyEstimate monodromy_estimate(const Params& p, Sign s, const SheetPoint& base, const Path& loop,
                                            Around tag = Around::zero, const Tolerance& tol = {}) {
    const double h = 1e-12 * std::abs(p.eps_value());
    if (std::abs(loop.start() - base.x) > h || std::abs(loop.end() - base.x) > h)
        throw Error(ErrorCode::domain, "monodromy loop must start and end at the base point");
    const Which first = s == Sign::plus ? Which::w2 : Which::w4;
    const Which second = s == Sign::plus ? Which::w3 : Which::w1;
    BasisJet j[2] = {basis_jet(p, first, base), basis_jet(p, second, base)};
    j[0].log_scale += log_kappa(p, s);
    // normalized seeds; the scales come back as exp(log_scale_i - log_scale_k)
    State<2> v[2], c[2];
    double terr[2], seed[2];
    for (int i = 0; i < 2; ++i) {
        double n = std::hypot(std::abs(j[i].f), std::abs(j[i].df));
        v[i] = {j[i].f / n, j[i].df / n};
        j[i].log_scale += std::log(n);
        seed[i] = 4e-16 + j[i].err / n;
        TransportResult<2> r = transport_linear(p, loop, v[i], tol);
        c[i] = r.final_state;
        terr[i] = r.error_estimate;
    }
    cplx det = v[0][0] * v[1][1] - v[1][0] * v[0][1];
    if (std::abs(det) < 1e-12)
        throw Error(ErrorCode::ill_conditioned_basis, "basis Wronskian at the base point is too small");
    // |V^{-1}| row sums bound the coefficient error per unit state error
    const double g0 = (std::abs(v[1][1]) + std::abs(v[1][0])) / std::abs(det);
    const double g1 = (std::abs(v[0][0]) + std::abs(v[0][1])) / std::abs(det);
    // seed rounding is carried around the loop by the transport operator
    const double growth = (std::abs(c[0][0]) + std::abs(c[0][1]) + std::abs(c[1][0]) + std::abs(c[1][1])) *
                          std::max(g0, g1);
    cplx m[2][2];
    MonodromyEstimate out{};
    for (int i = 0; i < 2; ++i) {
        // c_i = m_i0 v_0 + m_i1 v_1
        cplx x0 = (c[i][0] * v[1][1] - v[1][0] * c[i][1]) / det;
        cplx x1 = (v[0][0] * c[i][1] - c[i][0] * v[0][1]) / det;
        double r0 = std::exp(std::real(j[i].log_scale - j[0].log_scale));
        double r1 = std::exp(std::real(j[i].log_scale - j[1].log_scale));
        m[i][0] = x0 * std::exp(j[i].log_scale - j[0].log_scale);
        m[i][1] = x1 * std::exp(j[i].log_scale - j[1].log_scale);
        double ei = terr[i] + seed[i] * growth;
        out.error[i][0] = (ei + 1e-15 * std::abs(x0)) * g0 * r0;
        out.error[i][1] = (ei + 1e-15 * std::abs(x1)) * g1 * r1;
    }
    out.matrix = {m[0][0], m[0][1], m[1][0], m[1][1], s, tag};
    return out;
}

// One positive turn around 0 or eps, based at eps/2. The turn runs on the
// circle |u / (1 - u)| = c (or |(1 - u) / u| = c around eps), u = x/eps, on
// which the power factors u^{1/eps} (1-u)^{-1/eps} of the two local solutions
// keep their ratio; a circle through eps/2 centered at 0 would make it swing
// by 3^{Re 1/eps}. A radial leg joins eps/2 to the circle and back.
inline Path monodromy_loop(const Params& p, Around around, double c = 0.8) {
    const cplx e = p.eps_value();
    const double center = -c * c / (1.0 - c * c), near = c / (1.0 + c);
    if (around == Around::zero)
        return Path::line(0.5 * e, near * e).then_turn(center * e, 2.0 * pi).then_line(0.5 * e);
    return Path::line(0.5 * e, (1.0 - near) * e).then_turn((1.0 - center) * e, 2.0 * pi).then_line(0.5 * e);
}

// Loop based at eps/2, or at -eps/2 (3eps/2 for eps) reached from the
// segment by a half turn of +-pi. Moving the base by a half turn rescales
// the basis solutions against each other by e^{+-pi Im 1/eps}, which can
// rescue a component that the seeds at eps/2 cannot resolve.
enum class LoopBase { midpoint, half_turn_plus, half_turn_minus };

inline MonodromyEstimate monodromy_estimate(const Params& p, Sign s, Around around, LoopBase where,
                                            const Tolerance& tol = {}) {
    if (where == LoopBase::midpoint)
        return monodromy_estimate(p, s, SheetPoint::on_segment(p, 0.5), monodromy_loop(p, around), around, tol);
    const bool ae = around == Around::eps;
    const SheetPoint base = SheetPoint::turned(p, ae, 0.5, where == LoopBase::half_turn_plus ? pi : -pi);
    // the circle |u/(1-u)| = 1/3 through -eps/2, or its mirror through 3eps/2
    const cplx e = p.eps_value();
    const cplx center = ae ? (1.0 + 1.0 / 8.0) * e : (-1.0 / 8.0) * e;
    return monodromy_estimate(p, s, base, Path::turn(center, base.x, 2.0 * pi), around, tol);
}

inline Mat2 monodromy_along(const Params& p, Sign s, const Path& loop, Around tag = Around::zero) {
    return monodromy_estimate(p, s, SheetPoint::on_segment(p, 0.5), loop, tag).matrix;
}

// All three bases describe the same operator; each entry is taken from the
// base whose error bound for it is smallest.
inline MonodromyEstimate monodromy_best(const Params& p, Sign s, Around around, const Tolerance& tol = {}) {
    MonodromyEstimate best{};
    cplx m[2][2];
    bool have = false;
    for (LoopBase w : {LoopBase::midpoint, LoopBase::half_turn_plus, LoopBase::half_turn_minus}) {
        try {
            MonodromyEstimate e = monodromy_estimate(p, s, around, w, tol);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    if (!have || e.error[i][j] < best.error[i][j]) {
                        best.error[i][j] = e.error[i][j];
                        m[i][j] = e.matrix(i, j);
                    }
            have = true;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ill_conditioned_basis && e.code() != ErrorCode::basis_invalid) throw;
        }
    }
    if (!have) throw Error(ErrorCode::ill_conditioned_basis, "no base point gives a usable basis");
    best.matrix = {m[0][0], m[0][1], m[1][0], m[1][1], s, around};
    return best;
}

inline Mat2 monodromy_via_integration(const Params& p, Sign s, Around around) {
    return monodromy_best(p, s, around).matrix;
}

// Riccati system xdot = x(x-eps), ydot = ab x(x-eps) + (-1+(1-a-b)x) y + y^2
inline State<2> riccati_field(const Params& p, const State<2>& z) {
    const cplx x = z[0], y = z[1], P = x * (x - p.eps_value());
    return {P, p.a * p.b * P + (-1.0 + (1.0 - p.a - p.b) * x) * y + y * y};
}

namespace detail {

constexpr double chart_switch = 1e6;

// integrates a Riccati solution through poles: y in the chart |y| <= 1e6,
// Y = 1/y beyond. field(t, x, y) gives (dx/dt, dy/dt) in the y chart and
// (dx/dt, dY/dt) through field_inv.
template <class Fy, class FY>
TransportResult<2> riccati_charts(Fy fy, FY fY, State<2> z, double t0, double t1, const Tolerance& tol,
                                  double max_step) {
    TransportResult<2> res{z, 0.0, 0, false};
    bool inv = std::abs(z[1]) > chart_switch;
    if (inv) z[1] = 1.0 / z[1];
    double t = t0;
    const double span = std::abs(t1 - t0), dir = t1 > t0 ? 1.0 : -1.0;
    // integrate in slices, switching chart between slices. A slice that
    // runs into a pole of the current chart is retried in the other chart,
    // or halved when the state is not yet large there.
    const double slice = std::max(span / 64.0, 1e-300);
    double h = slice;
    while (dir * (t1 - t) > 0.0) {
        double tn = dir > 0 ? std::min(t + h, t1) : std::max(t - h, t1);
        TransportResult<2> r;
        try {
            r = inv ? integrate_ode<2>(fY, z, t, tn, tol, max_step) : integrate_ode<2>(fy, z, t, tn, tol, max_step);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::step_underflow) throw;
            if (std::abs(z[1]) > 1.0) {
                inv = !inv;
                z[1] = 1.0 / z[1];
                if (!inv) res.blow_up = true;
            } else if (h > 1e-9 * slice) {
                h *= 0.5;
            } else {
                throw;
            }
            continue;
        }
        z = r.final_state;
        res.error_estimate += r.error_estimate;
        res.steps += r.steps;
        if (!inv && std::abs(z[1]) > chart_switch) {
            inv = true;
            z[1] = 1.0 / z[1];
        } else if (inv && std::abs(z[1]) > 1.0) {
            inv = false;
            z[1] = 1.0 / z[1];
            res.blow_up = true;
        }
        t = tn;
        h = slice;
    }
    if (inv) {
        if (z[1] == 0.0) throw Error(ErrorCode::blow_up, "trajectory ends on a pole of y");
        z[1] = 1.0 / z[1];
        res.blow_up = true;
    }
    res.final_state = z;
    return res;
}

}  // namespace detail

// in time: initial (x, y) at t = 0 up to t
inline TransportResult<2> transport_riccati(const Params& p, State<2> initial, double t,
                                            const Tolerance& tol = {}) {
    const cplx ab = p.a * p.b, e = p.eps_value(), g = 1.0 - p.a - p.b;
    auto fy = [&](double, const State<2>& z) { return riccati_field(p, z); };
    auto fY = [&](double, const State<2>& z) -> State<2> {
        const cplx x = z[0], Y = z[1], P = x * (x - e);
        return {P, -(ab * P * Y * Y + (-1.0 + g * x) * Y + 1.0)};
    };
    return detail::riccati_charts(fy, fY, initial, 0.0, t, tol, 0.0);
}

// along an x-path: dy/dx = ydot/xdot. The state returned is (x_end, y).
inline TransportResult<2> transport_riccati(const Params& p, const Path& path, cplx y0,
                                            const Tolerance& tol = {}) {
    check_clearance(p, path);
    const cplx ab = p.a * p.b, e = p.eps_value(), g = 1.0 - p.a - p.b;
    TransportResult<2> res{{path.start(), y0}, 0.0, 0, false};
    for (const Segment& seg : path.segments) {
        if (seg.length() == 0.0) continue;
        auto fy = [&](double s, const State<2>& z) -> State<2> {
            cplx x = seg.at(s), dx = seg.tangent(s), P = x * (x - e), y = z[1];
            return {dx, (ab + ((-1.0 + g * x) * y + y * y) / P) * dx};
        };
        auto fY = [&](double s, const State<2>& z) -> State<2> {
            cplx x = seg.at(s), dx = seg.tangent(s), P = x * (x - e), Y = z[1];
            return {dx, -(ab * Y * Y + ((-1.0 + g * x) * Y + 1.0) / P) * dx};
        };
        double clear = std::min(seg.distance_to(0.0), seg.distance_to(e));
        double ms = std::min(1.0, 0.5 * clear / seg.length());
        State<2> z{seg.start(), res.final_state[1]};
        auto r = detail::riccati_charts(fy, fY, z, 0.0, 1.0, tol, ms);
        res.final_state = {seg.end(), r.final_state[1]};
        res.error_estimate += r.error_estimate;
        res.steps += r.steps;
        res.blow_up = res.blow_up || r.blow_up;
    }
    return res;
}

}  // namespace confluence
