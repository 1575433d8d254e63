#include "thresh/greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "thresh/envelope.hpp"
#include "thresh/kernels.hpp"

namespace thresh {

double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }
double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double legendre_p(int l, double x) {
    if (l == 0) return 1.0;
    if (l == 1) return x;
    double pm2 = 1.0, pm1 = x, p = x;
    for (int n = 2; n <= l; ++n) {
        p = ((2 * n - 1) * x * pm1 - (n - 1) * pm2) / n;
        pm2 = pm1;
        pm1 = p;
    }
    return p;
}

namespace {

void require_nonnegative_tail(const TailSpec& tail) {
    // Kernel positivity and the domination machinery assume V >= 0.
    for (int i = 1; i <= 2000; ++i) {
        const double r = 1e-3 * std::pow(10.0, 6.0 * i / 2000.0);
        if (tail.eval(r) < 0.0)
            throw std::domain_error("greens: tail must be nonnegative, got " + tail.describe());
    }
}

QSampled tail_q(const TailSpec& tail, double k, int l, const RadialGrid& grid) {
    const double k2 = k * k;
    const double cf = static_cast<double>(l) * (l + 1);
    QSampled q;
    q.on_nodes.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid.r[i];
        // Two-sided sample centers a tail jump landing exactly on a node.
        q.on_nodes[i] =
            0.5 * (tail.eval(r * (1.0 - 1e-9)) + tail.eval(r * (1.0 + 1e-9))) + k2 + cf / (r * r);
    }
    q.eval = [tail, k2, cf](double r) { return tail.eval(r) + k2 + cf / (r * r); };
    return q;
}

std::unique_ptr<ExteriorModel> tail_exterior(const TailSpec& tail, double k, int l) {
    RadialPotential pot{CoreSpec::none(), tail, 1.0};
    return make_exterior(pot, l, -k * k);
}

} // namespace

std::shared_ptr<const RadialGrid> make_profile_grid(const TailSpec& tail, double k,
                                                    std::size_t inner_points,
                                                    std::size_t points_per_decade,
                                                    double r_max_floor) {
    const double r0 = std::max(tail.outer_radius(), 0.5);
    double r_max = k > 0 ? std::max(60.0 / k, 100.0 * r0) : std::max(r_max_floor, 100.0 * r0);
    r_max = std::min(r_max, 3e7);
    return RadialGrid::make(2.0 * r0, r_max, inner_points, points_per_decade);
}

double KernelProfile::ghat_at(double r) const {
    if (r < 0) throw std::domain_error("ghat_at: r must be >= 0");
    if (constant_branch) return 1.0;
    return hermite_interp(interp_r_, interp_g_, r);
}

double KernelProfile::kernel_at(double r) const {
    if (!(r > 0)) throw std::domain_error("kernel_at: r must be > 0");
    return ghat_at(r) / (4.0 * M_PI * r);
}

KernelProfile gk_profile(const TailSpec& tail, double k, std::shared_ptr<const RadialGrid> grid) {
    if (!(k >= 0)) throw std::domain_error("gk_profile: k must be >= 0");
    require_nonnegative_tail(tail);

    KernelProfile prof;
    prof.grid = std::move(grid);
    prof.tail = tail;
    prof.k = k;

    auto ext = tail_exterior(tail, k, 0);
    if (dynamic_cast<ConstantExterior*>(ext.get()) != nullptr) {
        prof.constant_branch = true;
        prof.ghat.assign(prof.grid->size(), 1.0);
        return prof;
    }

    const QSampled q = tail_q(tail, k, 0, *prof.grid);
    const Shot shot = shoot_inward(*prof.grid, q, *ext, 0);

    // ghat(0) from the bounded-potential series ghat = c0 (1 + q0 r^2/2)
    // + c1 r (1 + q0 r^2/6) through the two innermost nodes.
    const double r0 = prof.grid->r[0], r1 = prof.grid->r[1];
    const double q0 = q.eval(r0);
    auto phi0 = [&](double r) { return 1.0 + 0.5 * q0 * r * r; };
    auto phi1 = [&](double r) { return r * (1.0 + q0 * r * r / 6.0); };
    const double u0 = shot.value(0, 0), u1 = shot.value(1, 0);
    const double det = phi0(r0) * phi1(r1) - phi0(r1) * phi1(r0);
    const double c0 = (u0 * phi1(r1) - u1 * phi1(r0)) / det;
    if (!(c0 > 0) || !std::isfinite(c0))
        throw std::runtime_error("gk_profile: origin extrapolation failed");

    prof.ghat.resize(prof.grid->size());
    for (std::size_t i = 0; i < prof.grid->size(); ++i)
        prof.ghat[i] = shot.value(i, 0) / c0;
    // Strictly positive by theory; tolerate underflow to 0 where k r is so
    // large that the true value sits below the smallest double.
    for (double v : prof.ghat)
        if (v < 0 || !std::isfinite(v))
            throw std::runtime_error("gk_profile: positivity violated (integration failure)");

    prof.interp_r_.reserve(prof.grid->size() + 1);
    prof.interp_g_.reserve(prof.grid->size() + 1);
    prof.interp_r_.push_back(0.0);
    prof.interp_g_.push_back(1.0);
    prof.interp_r_.insert(prof.interp_r_.end(), prof.grid->r.begin(), prof.grid->r.end());
    prof.interp_g_.insert(prof.interp_g_.end(), prof.ghat.begin(), prof.ghat.end());
    return prof;
}

double free_kernel_r(double k, double dist) {
    if (!(dist > 0)) throw std::domain_error("free_kernel: singular at x == y");
    return std::exp(-k * dist) / (4.0 * M_PI * dist);
}

double free_kernel(double k, const Vec3& x, const Vec3& y) {
    return free_kernel_r(k, norm(x - y));
}

PartialWaveKernel::PartialWaveKernel(TailSpec tail, double k, int l_max,
                                     std::shared_ptr<const RadialGrid> grid)
    : tail_(std::move(tail)), k_(k), l_max_(l_max), grid_(std::move(grid)) {
    if (!(k > 0)) throw std::domain_error("PartialWaveKernel: requires k > 0");
    if (l_max < 0) throw std::invalid_argument("PartialWaveKernel: l_max must be >= 0");
    require_nonnegative_tail(tail_);

    const std::size_t m = grid_->inner_count;
    const std::size_t n = grid_->size();
    const double h = grid_->h;
    // Wronskian anchor inside the uniform zone, away from both ends.
    const double r_anchor = std::max(tail_.outer_radius(), 0.5);
    const std::size_t ia = std::clamp<std::size_t>(grid_->locate(r_anchor), 4, m - 4);
    const std::size_t ib = std::max<std::size_t>(ia / 2, 2);

    modes_.reserve(l_max + 1);
    for (int l = 0; l <= l_max; ++l) {
        const QSampled q = tail_q(tail_, k_, l, *grid_);
        const double c2 = (tail_.eval(grid_->r[0]) + k_ * k_) / (4.0 * l + 6.0);
        const Shot reg = shoot_outward(*grid_, q, l, c2, m - 2);
        auto ext = tail_exterior(tail_, k_, l);
        const Shot dec = shoot_inward(*grid_, q, *ext, 0);

        Mode mode;
        mode.u.resize(m);
        for (std::size_t i = 0; i < m; ++i) mode.u[i] = reg.value(i, ia);
        mode.w.resize(n);
        for (std::size_t i = 0; i < n; ++i) mode.w[i] = dec.value(i, ia);

        auto wronskian_at = [&](std::size_t i) {
            const double up = mode.u[i + 1], um = mode.u[i - 1];
            const double wp = mode.w[i + 1], wm = mode.w[i - 1];
            const double du = (up - um) / (2.0 * h) -
                              (h / 12.0) * (q.on_nodes[i + 1] * up - q.on_nodes[i - 1] * um);
            const double dw = (wp - wm) / (2.0 * h) -
                              (h / 12.0) * (q.on_nodes[i + 1] * wp - q.on_nodes[i - 1] * wm);
            return du * mode.w[i] - mode.u[i] * dw;
        };
        mode.wronskian = wronskian_at(ia);
        const double w2 = wronskian_at(ib);
        mode.drift = std::fabs(w2 - mode.wronskian) /
                     std::max(std::fabs(mode.wronskian), 1e-300);
        if (!(mode.wronskian != 0.0) || !std::isfinite(mode.wronskian))
            throw std::runtime_error("PartialWaveKernel: degenerate Wronskian at l=" +
                                     std::to_string(l));
        modes_.push_back(std::move(mode));
    }
}

double PartialWaveKernel::radial_factor(int l, double r, double rp) const {
    if (l < 0 || l > l_max_) throw std::invalid_argument("radial_factor: l out of range");
    const double r_min = std::min(r, rp), r_max = std::max(r, rp);
    if (!(r_min > 0)) throw std::domain_error("radial_factor: radii must be > 0");
    if (r_min > grid_->r[grid_->inner_count - 2])
        throw std::domain_error(
            "radial_factor: inner radius beyond the uniform zone (|y| <= R0 regime only)");
    if (r_max > grid_->r_max()) throw std::domain_error("radial_factor: radius beyond the grid");
    const Mode& mode = modes_[static_cast<std::size_t>(l)];
    std::span<const double> rs(grid_->r.data(), grid_->inner_count);
    std::span<const double> us(mode.u.data(), grid_->inner_count);
    const double u = hermite_interp(rs, us, r_min);
    const double w = hermite_interp(grid_->r, mode.w, r_max);
    return u * w / mode.wronskian;
}

double PartialWaveKernel::wronskian_drift(int l) const {
    return modes_.at(static_cast<std::size_t>(l)).drift;
}

PartialWaveKernel::Value PartialWaveKernel::evaluate(double r, double rp,
                                                     double cos_theta) const {
    if (!(r > 0) || rp < 0) throw std::domain_error("evaluate: bad radii");
    if (std::fabs(cos_theta) > 1.0 + 1e-12)
        throw std::domain_error("evaluate: cos_theta out of range");
    cos_theta = std::clamp(cos_theta, -1.0, 1.0);

    // y -> 0: only l = 0 survives; u(r')/r' tends to the regular slope.
    if (rp < 1e-12) {
        const Mode& m0 = modes_[0];
        const double slope = m0.u[0] / grid_->r[0];
        const double w = hermite_interp(grid_->r, m0.w, r);
        return Value{slope * w / (m0.wronskian * 4.0 * M_PI * r), 0.0};
    }

    const double dist2 = r * r + rp * rp - 2.0 * r * rp * cos_theta;
    if (!(dist2 > 0)) throw std::domain_error("evaluate: singular at x == y");

    const double rho = std::min(r, rp) / std::max(r, rp);
    double pm2 = 1.0, pm1 = cos_theta;
    double sum = 0.0, last = 0.0;
    for (int l = 0; l <= l_max_; ++l) {
        double pl;
        if (l == 0)
            pl = 1.0;
        else if (l == 1)
            pl = cos_theta;
        else {
            pl = ((2 * l - 1) * cos_theta * pm1 - (l - 1) * pm2) / l;
            pm2 = pm1;
            pm1 = pl;
        }
        const double gl = radial_factor(l, r, rp);
        last = (2.0 * l + 1.0) / (4.0 * M_PI) * gl / (r * rp);
        sum += last * pl;
    }
    Value v;
    v.value = sum;
    v.truncation = rho < 1.0 ? std::fabs(last) * rho / (1.0 - rho)
                             : std::numeric_limits<double>::infinity();
    return v;
}

PartialWaveKernel::Value PartialWaveKernel::evaluate(const Vec3& x, const Vec3& y) const {
    const double r = norm(x), rp = norm(y);
    if (rp < 1e-12) return evaluate(r, 0.0, 1.0);
    const double ct = dot(x, y) / (r * rp);
    return evaluate(r, rp, ct);
}

PartialWaveKernel::Value offcenter_kernel(const TailSpec& tail, double k, const Vec3& x,
                                          const Vec3& y, int l_max,
                                          std::shared_ptr<const RadialGrid> grid) {
    PartialWaveKernel pw(tail, k, l_max, std::move(grid));
    return pw.evaluate(x, y);
}

DominationReport domination_check(const TailSpec& v1, const TailSpec& v2, double k,
                                  const std::vector<KernelSample>& samples, int l_max,
                                  double rel_tol) {
    for (int i = 0; i <= 4000; ++i) {
        const double r = 1e-3 * std::pow(10.0, 7.0 * i / 4000.0);
        if (v1.eval(r) > v2.eval(r) + 1e-14)
            throw std::invalid_argument("domination_check: V1 <= V2 violated at r=" +
                                        std::to_string(r));
    }
    const double rmf = std::max(v1.outer_radius(), v2.outer_radius()) * 200.0 + 100.0;
    auto g1 = make_profile_grid(v1, k, 1500, 1200, rmf);
    auto g2 = make_profile_grid(v2, k, 1500, 1200, rmf);

    const KernelProfile p1 = gk_profile(v1, k, g1);
    const KernelProfile p2 = gk_profile(v2, k, g2);
    std::unique_ptr<PartialWaveKernel> pw1, pw2;
    const bool need_pw =
        std::any_of(samples.begin(), samples.end(), [](const auto& s) { return s.rp > 0; });
    if (need_pw) {
        if (!(k > 0))
            throw std::invalid_argument("domination_check: off-center samples need k > 0");
        pw1 = std::make_unique<PartialWaveKernel>(v1, k, l_max, g1);
        pw2 = std::make_unique<PartialWaveKernel>(v2, k, l_max, g2);
    }

    DominationReport rep;
    rep.worst_ratio = 0.0;
    for (const auto& s : samples) {
        double k1, k2;
        if (s.rp > 0) {
            k1 = pw1->evaluate(s.r, s.rp, s.cos_theta).value;
            k2 = pw2->evaluate(s.r, s.rp, s.cos_theta).value;
        } else {
            k1 = p1.kernel_at(s.r);
            k2 = p2.kernel_at(s.r);
        }
        const double ratio = k2 / k1;
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_sample = s;
        }
    }
    rep.holds = rep.worst_ratio <= 1.0 + rel_tol;
    return rep;
}

MonotonicityReport monotonicity_in_k_check(const TailSpec& tail, const std::vector<double>& k_list,
                                           std::shared_ptr<const RadialGrid> grid,
                                           double r_limit) {
    if (k_list.size() < 2)
        throw std::invalid_argument("monotonicity_in_k_check: need at least two momenta");
    for (std::size_t i = 0; i + 1 < k_list.size(); ++i)
        if (!(k_list[i] > k_list[i + 1]) || !(k_list[i + 1] >= 0))
            throw std::invalid_argument(
                "monotonicity_in_k_check: momenta must decrease strictly toward 0");

    MonotonicityReport rep;
    std::vector<double> prev;
    std::vector<double> last;
    for (double k : k_list) {
        const KernelProfile prof = gk_profile(tail, k, grid);
        if (!prev.empty()) {
            for (std::size_t i = 0; i < prof.ghat.size(); ++i) {
                const double allowed = prev[i] * (1.0 - 1e-12);
                if (prof.ghat[i] < allowed) {
                    ++rep.violations;
                    rep.worst_violation = std::min(
                        rep.worst_violation, (prof.ghat[i] - prev[i]) / std::max(prev[i], 1e-300));
                }
            }
        }
        prev = prof.ghat;
        last = prof.ghat;
    }
    rep.monotone = rep.violations == 0;

    if (tail.kind == TailSpec::Kind::InverseSquare && tail.strength > 0) {
        std::vector<double> fh, gv;
        for (std::size_t i = 0; i < grid->size(); ++i) {
            if (grid->r[i] > r_limit) break;
            fh.push_back(F_hat(tail.strength, tail.r0, grid->r[i]));
            gv.push_back(last[i]);
        }
        rep.limit_deviation = kernels::max_rel_deviation(gv, fh, 1e-300);
        rep.limit_checked = true;
    }
    return rep;
}

double integral_equation_residual(double A, double R0, double r, double exponent_shift,
                                  double quad_tol) {
    if (!(A > 0) || !(R0 > 0) || !(r > 0))
        throw std::domain_error("integral_equation_residual: bad arguments");
    const double a = positive_root_a(A);
    const double ap = a + exponent_shift;
    const double c_ext = std::pow(R0, ap) / (1.0 + a);

    auto Fhat = [&](double s) {
        if (s <= R0) return 1.0 - a / ((a + 1.0) * R0) * s;
        return c_ext * std::pow(s, -ap);
    };
    auto F = [&](double s) { return Fhat(s) / (4.0 * M_PI * s); };

    double inner = 0.0; // (1/r) int_0^r s^2 eta F ds, eta = A/s^2 beyond R0
    if (r > R0)
        inner = adaptive_simpson([&](double s) { return A * F(s); }, R0, r, quad_tol) / r;
    const double start = std::max(r, R0);
    const double S = std::max(1e5, 1e3 * r);
    double outer = adaptive_simpson([&](double s) { return A * F(s) / s; }, start, S, quad_tol);
    outer += A * c_ext / (4.0 * M_PI) * std::pow(S, -1.0 - ap) / (1.0 + ap);

    const double T = F(r) + inner + outer - 1.0 / (4.0 * M_PI * r);
    return std::fabs(T);
}

double resolvent_identity_residual(const KernelProfile& profile, double A, double R0, double r,
                                   double quad_tol) {
    const double k = profile.k;
    if (!(k > 0)) throw std::domain_error("resolvent_identity_residual: requires k > 0");
    if (!(r > 0)) throw std::domain_error("resolvent_identity_residual: r must be > 0");
    const double rn = profile.grid->r_max();
    if (k * rn < 30.0)
        throw std::domain_error("resolvent_identity_residual: grid too short for the remainder");

    // int dy' G0_k(x,y') eta(y') G_k(y',0)
    //   = (1/(8 pi k r)) int_{R0}^inf eta(s) ghat(s) [e^{-k|r-s|} - e^{-k(r+s)}] ds,
    // the angular integral of the free propagator over the sphere |y'| = s
    // being [e^{-k|r-s|} - e^{-k(r+s)}] / (2 k r s).
    auto integrand = [&](double s) {
        const double eta = s < R0 ? 0.0 : A / (s * s);
        if (eta == 0.0) return 0.0;
        const double ang = std::exp(-k * std::fabs(r - s)) - std::exp(-k * (r + s));
        return eta * profile.ghat_at(s) * ang;
    };
    double acc = 0.0;
    if (r > R0) {
        acc += adaptive_simpson(integrand, R0, r, quad_tol);
        acc += adaptive_simpson(integrand, r, rn, quad_tol);
    } else {
        acc += adaptive_simpson(integrand, R0, rn, quad_tol);
    }
    const double I = acc / (8.0 * M_PI * k * r);
    const double T = profile.kernel_at(r) + I - free_kernel_r(k, r);
    return std::fabs(T);
}

} // namespace thresh
