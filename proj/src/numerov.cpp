#include "thresh/numerov.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace thresh {

namespace {

constexpr double kRescaleLimit = 1e250;
constexpr double kRescaleFactor = 1e-250;
constexpr double kRescaleLog = 575.6462732485114; // ln(1e250)

// 5-point Gauss-Legendre on [a, b].
template <typename F>
double gauss5(F&& f, double a, double b) {
    static const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double ws[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += ws[i] * f(mid + half * xs[i]);
    return acc * half;
}

double taylor_step(double r, double u, double du, double s,
                   const std::function<double(double)>& q) {
    const double d = std::fabs(s);
    const double q0 = q(r);
    const double qp = (q(r + d) - q(r - d)) / (2.0 * d);
    const double qpp = (q(r + d) - 2.0 * q0 + q(r - d)) / (d * d);
    const double u2 = q0 * u;
    const double u3 = qp * u + q0 * du;
    const double u4 = qpp * u + 2.0 * qp * du + q0 * u2;
    return u + s * (du + s * (0.5 * u2 + s * (u3 / 6.0 + s * u4 / 24.0)));
}

} // namespace

double ExteriorModel::norm_tail_sq(double, double) const {
    return std::numeric_limits<double>::infinity();
}

FreeExterior::FreeExterior(double kappa) : kappa_(kappa) {
    if (!(kappa > 0)) throw std::invalid_argument("FreeExterior: kappa must be > 0");
}
double FreeExterior::logderiv(double) const { return -kappa_; }
double FreeExterior::ratio(double r_small, double r_big) const {
    return std::exp(kappa_ * (r_big - r_small));
}
double FreeExterior::norm_tail_sq(double, double u_n) const {
    return u_n * u_n / (2.0 * kappa_);
}

PowerExterior::PowerExterior(double a) : a_(a) {
    if (!(a > 0)) throw std::invalid_argument("PowerExterior: a must be > 0");
}
double PowerExterior::logderiv(double r) const { return -a_ / r; }
double PowerExterior::ratio(double r_small, double r_big) const {
    return std::pow(r_big / r_small, a_);
}
double PowerExterior::norm_tail_sq(double r_n, double u_n) const {
    if (a_ <= 0.5) return std::numeric_limits<double>::infinity();
    return u_n * u_n * r_n / (2.0 * a_ - 1.0);
}

BesselKExterior::BesselKExterior(double a_eff, double kappa)
    : nu_(a_eff + 0.5), kappa_(kappa) {
    if (!(a_eff >= 0) || !(kappa > 0)) throw std::invalid_argument("BesselKExterior: bad args");
}

double BesselKExterior::bessel_k(double z) const {
    // cyl_bessel_k underflows near z ~ 700; callers needing larger z go
    // through the asymptotic ratio path instead.
    return std::cyl_bessel_k(nu_, z);
}

double BesselKExterior::logderiv(double r) const {
    const double z = kappa_ * r;
    if (z > 600.0) {
        // from K_nu(z) ~ sqrt(pi/2z) e^{-z} (1 + c/z), c = (4 nu^2 - 1)/8:
        // d/dr ln[sqrt(r) K_nu(kappa r)] = -kappa (1 + c / (z (z + c)))
        const double c = (4.0 * nu_ * nu_ - 1.0) / 8.0;
        return -kappa_ * (1.0 + c / (z * (z + c)));
    }
    const double km = std::cyl_bessel_k(nu_ - 1.0, z);
    const double kp = std::cyl_bessel_k(nu_ + 1.0, z);
    const double k0 = bessel_k(z);
    return 0.5 / r - kappa_ * 0.5 * (km + kp) / k0;
}

double BesselKExterior::ratio(double r_small, double r_big) const {
    const double zs = kappa_ * r_small, zb = kappa_ * r_big;
    if (zs > 600.0) {
        const double c = (4.0 * nu_ * nu_ - 1.0) / 8.0;
        return std::sqrt(r_small / r_big) * std::sqrt(zb / zs) * std::exp(zb - zs) *
               (1.0 + c / zs) / (1.0 + c / zb);
    }
    return std::sqrt(r_small / r_big) * bessel_k(zs) / bessel_k(zb);
}

double BesselKExterior::norm_tail_sq(double r_n, double u_n) const {
    // Exterior mass is exponentially small once kappa r_n >> 1; the free-decay
    // estimate with the leading 1/r correction is enough at that point.
    const double z = kappa_ * r_n;
    const double corr = 1.0 + (nu_ * nu_ - 0.25) / std::max(z, 1.0);
    return u_n * u_n / (2.0 * kappa_) * corr;
}

WkbExterior::WkbExterior(std::function<double(double)> q) : q_(std::move(q)) {}

double WkbExterior::logderiv(double r) const {
    const double d = 1e-5 * r;
    const double q0 = q_(r);
    if (!(q0 > 0)) throw std::domain_error("WkbExterior: q must be positive at the boundary");
    const double qp = (q_(r + d) - q_(r - d)) / (2.0 * d);
    return -std::sqrt(q0) - 0.25 * qp / q0;
}

double WkbExterior::ratio(double r_small, double r_big) const {
    const double phase = gauss5([&](double r) { return std::sqrt(q_(r)); }, r_small, r_big);
    return std::pow(q_(r_big) / q_(r_small), 0.25) * std::exp(phase);
}

double WkbExterior::norm_tail_sq(double r_n, double u_n) const {
    return u_n * u_n / (2.0 * std::sqrt(q_(r_n)));
}

double Shot::value(std::size_t i, std::size_t i_ref) const {
    const std::size_t a = i - i_begin, b = i_ref - i_begin;
    const double arg = log_scale[a] - log_scale[b];
    if (arg < -700.0) return 0.0;
    return u[a] * std::exp(arg);
}

QSampled sample_q(const RadialGrid& grid, const std::function<double(double)>& q) {
    QSampled s;
    s.on_nodes.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) s.on_nodes[i] = q(grid.r[i]);
    s.eval = q;
    return s;
}

Shot shoot_outward(const RadialGrid& grid, const QSampled& q, int l, double c2,
                   std::size_t i_end) {
    if (i_end + 1 >= grid.inner_count)
        throw std::invalid_argument("shoot_outward: terminal node must lie inside the uniform zone");
    const std::size_t last = i_end + 1; // one extra node for the derivative
    const double h = grid.h;
    const double h2_12 = h * h / 12.0;

    Shot s;
    s.i_begin = 0;
    s.i_end = last;
    s.u.resize(last + 1);
    s.log_scale.assign(last + 1, 0.0);

    const auto& r = grid.r;
    const auto& f = q.on_nodes;

    // Seed from the power series, scaled so the second node is O(1).
    const double p0 = std::pow(r[0] / r[1], l + 1);
    double ua = p0 * (1.0 + c2 * r[0] * r[0]);
    double ub = 1.0 + c2 * r[1] * r[1];
    s.u[0] = ua;
    s.u[1] = ub;

    double ls = 0.0;
    for (std::size_t i = 2; i <= last; ++i) {
        const double un = (2.0 * ub * (1.0 + 5.0 * h2_12 * f[i - 1]) -
                           ua * (1.0 - h2_12 * f[i - 2])) /
                          (1.0 - h2_12 * f[i]);
        ua = ub;
        ub = un;
        if (std::fabs(ub) > kRescaleLimit) {
            ua *= kRescaleFactor;
            ub *= kRescaleFactor;
            ls += kRescaleLog;
        }
        s.u[i] = ub;
        s.log_scale[i] = ls;
    }

    for (std::size_t i = 0; i + 1 <= i_end; ++i)
        if (s.u[i] != 0.0 && s.u[i + 1] != 0.0 &&
            std::signbit(s.u[i]) != std::signbit(s.u[i + 1]))
            ++s.sign_changes;

    s.u_at = s.value(i_end, i_end);
    if (i_end == 0) {
        s.du_at = (s.value(1, 0) - s.u_at) / h;
    } else {
        const double up = s.value(i_end + 1, i_end);
        const double um = s.value(i_end - 1, i_end);
        s.du_at = (up - um) / (2.0 * h) - (h / 12.0) * (f[i_end + 1] * up - f[i_end - 1] * um);
    }
    return s;
}

Shot shoot_inward(const RadialGrid& grid, const QSampled& q, const ExteriorModel& ext,
                  std::size_t i_end, std::size_t i_start) {
    const std::size_t n = grid.size();
    const std::size_t m = grid.inner_count;
    if (i_start >= n) i_start = n - 1;
    if (n < m + 3) throw std::invalid_argument("shoot_inward: outer zone too short");
    if (i_start < m + 2) throw std::invalid_argument("shoot_inward: start node too low");
    if (i_end + 2 > i_start) throw std::invalid_argument("shoot_inward: bad terminal node");
    if (i_end == m - 1)
        throw std::invalid_argument("shoot_inward: terminal node may not be the seam node");

    const std::size_t i_lo = i_end == 0 ? 0 : i_end - 1; // extra node for the derivative
    const double dx = grid.dx;
    const double dx2_12 = dx * dx / 12.0;
    const double h = grid.h;
    const double h2_12 = h * h / 12.0;

    Shot s;
    s.i_begin = i_lo;
    s.i_end = n - 1;
    s.u.assign(n - i_lo, 0.0);
    s.log_scale.assign(n - i_lo, 0.0);
    const auto& r = grid.r;
    const auto& f = q.on_nodes;
    auto store = [&](std::size_t i, double val, double ls) {
        s.u[i - i_lo] = val;
        s.log_scale[i - i_lo] = ls;
    };
    auto big_f = [&](std::size_t i) {
        const double bf = r[i] * r[i] * f[i] + 0.25;
        if (dx2_12 * std::fabs(bf) > 0.9)
            throw std::domain_error("shoot_inward: grid too coarse at r=" +
                                    std::to_string(r[i]));
        return bf;
    };

    // Seed the top two nodes from the exterior solution.
    double ls = 0.0;
    double vb = 1.0 / std::sqrt(r[i_start]);                                   // v at x_start
    double va = ext.ratio(r[i_start - 1], r[i_start]) / std::sqrt(r[i_start - 1]);
    store(i_start, vb * std::sqrt(r[i_start]), ls);
    store(i_start - 1, va * std::sqrt(r[i_start - 1]), ls);

    // March down the logarithmic zone. va tracks the lower of the two carried
    // nodes. Stop index: the seam node m-1 belongs to this zone; when the
    // terminal node is here, the extra derivative node i_lo is too.
    const std::size_t x_stop = std::max(i_lo, m - 1);
    double fb = big_f(i_start), fa = big_f(i_start - 1);
    for (std::size_t j = i_start - 1; j-- > x_stop;) {
        const double fj = big_f(j);
        const double vn =
            (2.0 * va * (1.0 + 5.0 * dx2_12 * fa) - vb * (1.0 - dx2_12 * fb)) /
            (1.0 - dx2_12 * fj);
        vb = va;
        fb = fa;
        va = vn;
        fa = fj;
        if (std::fabs(va) > kRescaleLimit) {
            va *= kRescaleFactor;
            vb *= kRescaleFactor;
            ls += kRescaleLog;
        }
        store(j, va * std::sqrt(r[j]), ls);
    }

    if (i_end >= m - 1) {
        // Terminal node sits in the logarithmic zone.
        const std::size_t t = i_end;
        s.u_at = s.value(t, t);
        if (t >= m && t + 1 <= i_start) {
            const double vp = s.value(t + 1, t) / std::sqrt(r[t + 1]);
            const double vm = s.value(t - 1, t) / std::sqrt(r[t - 1]);
            const double v0 = s.u_at / std::sqrt(r[t]);
            const double dvdx = (vp - vm) / (2.0 * dx) -
                                (dx / 12.0) * (big_f(t + 1) * vp - big_f(t - 1) * vm);
            s.du_at = (dvdx + 0.5 * v0) / std::sqrt(r[t]);
        } else {
            s.du_at = s.u_at * ext.logderiv(r[t]); // start-node fallback
        }
        return s;
    }

    // Cross the seam: one virtual x-node below x0 gives the centered
    // derivative of v at the seam, then a Taylor restart enters the r-zone.
    {
        const double r_virtual = grid.r_join * std::exp(-dx);
        const double f_virtual =
            r_virtual * r_virtual * q.eval(r_virtual) + 0.25;
        const double v0 = va, v1 = vb;
        const double f0 = fa, f1 = fb;
        const double v_virtual =
            (2.0 * v0 * (1.0 + 5.0 * dx2_12 * f0) - v1 * (1.0 - dx2_12 * f1)) /
            (1.0 - dx2_12 * f_virtual);
        const double dvdx =
            (v1 - v_virtual) / (2.0 * dx) - (dx / 12.0) * (f1 * v1 - f_virtual * v_virtual);
        const double sr = std::sqrt(grid.r_join);
        double u0 = v0 * sr;                 // u at node m-1
        double du0 = (dvdx + 0.5 * v0) / sr; // du/dr there

        double ub = u0;
        double ua = taylor_step(grid.r_join, u0, du0, -h, q.eval); // node m-2
        store(m - 2, ua, ls);

        for (std::size_t i = m - 2; i-- > i_lo;) {
            const double un =
                (2.0 * ua * (1.0 + 5.0 * h2_12 * f[i + 1]) - ub * (1.0 - h2_12 * f[i + 2])) /
                (1.0 - h2_12 * f[i]);
            ub = ua;
            ua = un;
            if (std::fabs(ua) > kRescaleLimit) {
                ua *= kRescaleFactor;
                ub *= kRescaleFactor;
                ls += kRescaleLog;
            }
            store(i, ua, ls);
        }
    }

    s.u_at = s.value(i_end, i_end);
    if (i_end >= 1) {
        const double up = s.value(i_end + 1, i_end);
        const double um = s.value(i_end - 1, i_end);
        s.du_at = (up - um) / (2.0 * h) - (h / 12.0) * (f[i_end + 1] * up - f[i_end - 1] * um);
    } else {
        s.du_at = (s.value(1, 0) - s.u_at) / h;
    }
    return s;
}

} // namespace thresh
