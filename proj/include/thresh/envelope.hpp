#pragma once

// Closed-form upper bounds on the tail Green's functions, the translated-tail
// parameter construction, the far-field power bound, the lower-bound profile
// for the inverse-square tail with a bounded core, and the assembled
// square-integrable envelope that dominates near-threshold states.

#include <optional>

#include "thresh/greens.hpp"

namespace thresh {

// Positive root of a(a+1) = A; domain error for A <= 0.
double positive_root_a(double A);

// Zero-energy profile bound for the inverse-square tail (includes 1/(4 pi r)):
//   F = (4 pi r)^{-1} (1 - a/((a+1) R0) r)        r <= R0
//       (4 pi r)^{-1} R0^a (1+a)^{-1} r^{-a}      r >= R0
double F_eval(double A, double R0, double r);
double F_hat(double A, double R0, double r); // 4 pi r F

// Coulomb-dominant analogue:
//   F^c = (4 pi r)^{-1} (1 - r / (R0 + 2 sqrt(R0)/a))                 r <= R0
//         (4 pi r)^{-1} e^{a sqrt(R0)} (1 + (a/2) sqrt(R0))^{-1} e^{-a sqrt(r)}  r >= R0
double Fc_eval(double a, double R0, double r);
double Fc_hat(double a, double R0, double r);

struct EnvelopeParams {
    double strength = 0.0; // translated A (or a for the coulomb tail)
    double radius = 0.0;   // translated R0
    double s_norm = 0.0;
};

// Translated-tail parameters for a translation by |s|: R0~ = max(beta R0,
// R0 + s) and the largest admissible strength A~ = A R0~^2 / (R0~ + s)^2.
EnvelopeParams translated_params(double A, double R0, double s_norm, double beta);
// Coulomb version with a~ = a (R0~ / (R0~ + s))^{3/2}.
EnvelopeParams coulomb_translated_params(double a, double R0, double s_norm, double beta);

// F(A~(|y|), R0~(|y|); |x-y|): upper bound on the off-center kernel for
// |y| <= R0 at any k. Precondition error for |y| > R0.
double envelope_upper(double A, double R0, double y_norm, double x_minus_y_norm, double beta);

struct CorollaryBound {
    double A_tilde = 0.0;
    double R0_tilde = 0.0;
    double a_tilde = 0.0;
    double delta = 0.0; // a~ - 1/2 > 0
    double R = 0.0;     // validity radius R0~ + R0
    // Prefactor of the far-field power bound as the construction arithmetic
    // gives it: C = R0~^a~ / (4 pi (1 + a~)); this multiplies
    // |x|^{-1} |x-y|^{-a~}.
    double C = 0.0;
    // Smallest constant making C' |x|^{-3/2-delta} dominate the translated
    // envelope for every |y| <= R0, |x| >= R including the aligned corner
    // |x-y| = |x| - R0: C' = C ((R0~ + R0)/R0~)^{1+a~}.
    double C_certified = 0.0;
};

// Far-field bound parameters for A > 3/4. Picks the smallest power-of-two
// multiple of R0 with A~ > 3/4 unless an explicit R0~ is supplied.
CorollaryBound corollary_bound(double A, double R0, std::optional<double> r0_tilde = {});

struct LowerBoundProfile {
    KernelProfile fhat; // profile of the inverse-square tail with bounded core
    double a = 0.0;     // positive root of a(a+1) = A
    // g_k(r) = fhat(r) e^{k r} r^a on r >= R0 (0 stored inside R0).
    std::vector<double> g;
    double C0 = 0.0;               // g_k(R0)
    double worst_g_increment = 0.0; // most negative finite-difference g'
    bool monotone = true;           // g' >= -1e-8 everywhere on r >= R0
};

// Lemma-style lower-bound machinery for the tail xi = V0 inside R0, A/r^2
// outside, at momentum k > 0.
LowerBoundProfile lower_bound_profile(double A, double V0, double R0, double k,
                                      std::shared_ptr<const RadialGrid> grid);

struct DominatingEnvelope {
    double R = 0.0;
    double R0 = 0.0;
    double delta = 0.0;
    double C1 = 0.0; // outer coefficient: g_> = C1 |x|^{-3/2-delta}
    double C2 = 0.0; // inner coefficient in front of the Schwarz integral
    double lambda_cr = 0.0;
    RadialPotential potential; // carries W_- for the inner integral
    double value(double r) const;
    // Closed-form outer mass: int_R^inf g_>^2 4 pi x^2 dx.
    double tail_norm_sq() const;
};

// Builds the state-independent envelope g (Schwarz constants, certified
// far-field bound) for a family whose positive part dominates eta(A, R0).
// Throws when the hypothesis fails on the state's grid or delta <= 0.
DominatingEnvelope assemble_envelope(const RadialPotential& p, double lambda_cr, double A,
                                     double R0, const RadialFunction& state);

} // namespace thresh
