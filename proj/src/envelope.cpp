#include "thresh/envelope.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace thresh {

double positive_root_a(double A) {
    if (!(A > 0)) throw std::domain_error("positive_root_a: A must be > 0");
    return 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * A));
}

double F_hat(double A, double R0, double r) {
    if (!(A > 0) || !(R0 > 0)) throw std::domain_error("F_hat: need A > 0, R0 > 0");
    if (!(r > 0)) throw std::domain_error("F_hat: r must be > 0");
    const double a = positive_root_a(A);
    if (r <= R0) return 1.0 - a / ((a + 1.0) * R0) * r;
    return std::pow(R0, a) / (1.0 + a) * std::pow(r, -a);
}

double F_eval(double A, double R0, double r) { return F_hat(A, R0, r) / (4.0 * M_PI * r); }

double Fc_hat(double a, double R0, double r) {
    if (!(a > 0) || !(R0 > 0)) throw std::domain_error("Fc_hat: need a > 0, R0 > 0");
    if (!(r > 0)) throw std::domain_error("Fc_hat: r must be > 0");
    const double sq = std::sqrt(R0);
    if (r <= R0) return 1.0 - r / (R0 + 2.0 * sq / a);
    return std::exp(a * sq) / (1.0 + 0.5 * a * sq) * std::exp(-a * std::sqrt(r));
}

double Fc_eval(double a, double R0, double r) { return Fc_hat(a, R0, r) / (4.0 * M_PI * r); }

EnvelopeParams translated_params(double A, double R0, double s_norm, double beta) {
    if (!(beta >= 1.0)) throw std::invalid_argument("translated_params: beta must be >= 1");
    if (!(s_norm >= 0.0)) throw std::invalid_argument("translated_params: |s| must be >= 0");
    EnvelopeParams ep;
    ep.s_norm = s_norm;
    ep.radius = std::max(beta * R0, R0 + s_norm);
    const double q = ep.radius / (ep.radius + s_norm);
    ep.strength = A * q * q;
    return ep;
}

EnvelopeParams coulomb_translated_params(double a, double R0, double s_norm, double beta) {
    if (!(beta >= 1.0)) throw std::invalid_argument("coulomb_translated_params: beta must be >= 1");
    if (!(s_norm >= 0.0)) throw std::invalid_argument("coulomb_translated_params: |s| >= 0");
    EnvelopeParams ep;
    ep.s_norm = s_norm;
    ep.radius = std::max(beta * R0, R0 + s_norm);
    ep.strength = a * std::pow(ep.radius / (ep.radius + s_norm), 1.5);
    return ep;
}

double envelope_upper(double A, double R0, double y_norm, double x_minus_y_norm, double beta) {
    if (y_norm > R0)
        throw std::invalid_argument("envelope_upper: bound is only claimed for |y| <= R0");
    const EnvelopeParams ep = translated_params(A, R0, y_norm, beta);
    return F_eval(ep.strength, ep.radius, x_minus_y_norm);
}

CorollaryBound corollary_bound(double A, double R0, std::optional<double> r0_tilde) {
    if (!(A > 0.75)) throw std::domain_error("corollary_bound: requires A > 3/4");
    if (!(R0 > 0)) throw std::domain_error("corollary_bound: R0 must be > 0");

    CorollaryBound cb;
    auto strength_at = [&](double rt) {
        const double q = rt / (rt + R0);
        return A * q * q;
    };
    if (r0_tilde.has_value()) {
        cb.R0_tilde = *r0_tilde;
        if (!(cb.R0_tilde >= 2.0 * R0))
            throw std::domain_error("corollary_bound: R0~ must be >= 2 R0");
        cb.A_tilde = strength_at(cb.R0_tilde);
        if (!(cb.A_tilde > 0.75))
            throw std::domain_error("corollary_bound: supplied R0~ gives A~ <= 3/4");
    } else {
        double rt = 2.0 * R0;
        int guard = 0;
        while (strength_at(rt) <= 0.75) {
            rt *= 2.0;
            if (++guard > 60) throw std::domain_error("corollary_bound: no admissible R0~");
        }
        cb.R0_tilde = rt;
        cb.A_tilde = strength_at(rt);
    }
    cb.a_tilde = positive_root_a(cb.A_tilde);
    cb.delta = cb.a_tilde - 0.5;
    cb.R = cb.R0_tilde + R0;
    cb.C = std::pow(cb.R0_tilde, cb.a_tilde) / (4.0 * M_PI * (1.0 + cb.a_tilde));
    cb.C_certified = cb.C * std::pow(cb.R / cb.R0_tilde, 1.0 + cb.a_tilde);
    return cb;
}

LowerBoundProfile lower_bound_profile(double A, double V0, double R0, double k,
                                      std::shared_ptr<const RadialGrid> grid) {
    if (!(k > 0)) throw std::domain_error("lower_bound_profile: requires k > 0");
    LowerBoundProfile lb;
    lb.a = A > 0 ? positive_root_a(A) : 0.0;
    lb.fhat = gk_profile(TailSpec::inverse_square_with_core(V0, A, R0), k, std::move(grid));

    const auto& r = lb.fhat.grid->r;
    lb.g.assign(r.size(), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < R0) continue;
        lb.g[i] = lb.fhat.ghat[i] * std::exp(k * r[i]) * std::pow(r[i], lb.a);
    }
    lb.C0 = lb.fhat.ghat_at(R0) * std::exp(k * R0) * std::pow(R0, lb.a);

    lb.worst_g_increment = 0.0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        if (!(r[i] >= R0)) continue;
        const double slope = (lb.g[i + 1] - lb.g[i]) / (r[i + 1] - r[i]);
        lb.worst_g_increment = std::min(lb.worst_g_increment, slope);
    }
    lb.monotone = lb.worst_g_increment >= -1e-8;
    return lb;
}

namespace {

double w_minus_unit(const RadialPotential& p, double r) { return std::max(0.0, -p.eval_W(r)); }

// J(r) = int_{|y| <= R0} |x-y|^{-2} W_-^2(y) dy
//      = (2 pi / r) int_0^{R0} s W_-^2(s) ln((r+s)/|r-s|) ds,
// with the logarithmic point s = r patched analytically when r < R0.
double schwarz_integral(const RadialPotential& p, double R0, double r, double tol) {
    if (std::fabs(r - R0) < 1e-9 * R0) r = R0 * (1.0 + 1e-6); // dodge the endpoint log
    auto f = [&](double s) {
        const double wm = w_minus_unit(p, s);
        if (wm == 0.0 || s == 0.0) return 0.0;
        return s * wm * wm * std::log((r + s) / std::fabs(r - s));
    };
    if (r < 1e-8 * R0) {
        auto f0 = [&](double s) {
            const double wm = w_minus_unit(p, s);
            return 2.0 * wm * wm;
        };
        return 4.0 * M_PI * 0.5 * adaptive_simpson(f0, 0.0, R0, tol);
    }
    double acc = 0.0;
    if (r >= R0) {
        acc = adaptive_simpson(f, 0.0, R0, tol);
    } else {
        const double d = 1e-4 * std::min(r, R0 - r);
        acc += adaptive_simpson(f, 0.0, r - d, tol);
        acc += adaptive_simpson(f, r + d, R0, tol);
        // middle patch: integrand ~ s W^2 ln(2r/|r-s|)
        const double wm = w_minus_unit(p, r);
        acc += r * wm * wm * 2.0 * d * (std::log(2.0 * r / d) + 1.0);
    }
    return 2.0 * M_PI / r * acc;
}

} // namespace

double DominatingEnvelope::value(double r) const {
    if (!(r > 0)) throw std::domain_error("DominatingEnvelope::value: r must be > 0");
    if (r >= R) return C1 * std::pow(r, -1.5 - delta);
    return C2 * std::sqrt(schwarz_integral(potential, R0, r, 1e-12));
}

double DominatingEnvelope::tail_norm_sq() const {
    return 4.0 * M_PI * C1 * C1 * std::pow(R, -2.0 * delta) / (2.0 * delta);
}

DominatingEnvelope assemble_envelope(const RadialPotential& p, double lambda_cr, double A,
                                     double R0, const RadialFunction& state) {
    RadialPotential q = p;
    q.lambda = lambda_cr;
    const auto hyp = check_theorem3_hypothesis(q, A, R0, *state.grid);
    if (!hyp.holds) {
        std::ostringstream os;
        os << "assemble_envelope: lambda W_+ >= eta(A=" << A << ", R0=" << R0
           << ") fails (worst margin " << hyp.worst_margin << " at r=" << hyp.worst_r << ")";
        throw std::invalid_argument(os.str());
    }
    const CorollaryBound cb = corollary_bound(A, R0);

    DominatingEnvelope env;
    env.R = cb.R;
    env.R0 = R0;
    env.delta = cb.delta;
    env.lambda_cr = lambda_cr;
    env.potential = q;
    // Schwarz split of the source integral: the L2 norm of W_- over the ball
    // makes the constants state independent (any normalized state qualifies).
    auto w2 = [&](double s) {
        const double wm = w_minus_unit(q, s);
        return 4.0 * M_PI * s * s * wm * wm;
    };
    const double w_minus_l2 = std::sqrt(adaptive_simpson(w2, 0.0, R0, 1e-13));
    env.C1 = 2.0 * lambda_cr * cb.C_certified * w_minus_l2;
    env.C2 = 2.0 * lambda_cr / (4.0 * M_PI);
    if (!(env.delta > 0)) throw std::domain_error("assemble_envelope: delta <= 0, envelope not L2");
    return env;
}

} // namespace thresh
