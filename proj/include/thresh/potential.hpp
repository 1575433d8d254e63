#pragma once

#include <memory>
#include <string>

#include "thresh/grid.hpp"

namespace thresh {

// Long-range part of the interaction. Radii are > 0 and strengths >= 0.
//
//   None                  : 0 everywhere
//   InverseSquare         : 0 for r < R0, A/r^2 for r >= R0
//   InverseSquareWithCore : V0 for r < R0, A/r^2 for r >= R0
//   CoulombDominant       : 0 for r < R0, (a^2/4)/r + (a/4) r^{-3/2} for r >= R0
//   ExponentialEnvelope   : -A_e * exp(-a_e r) everywhere (attractive; the
//                           envelope |tail| <= A_e exp(-a_e r) is saturated)
//   HardCutoff            : inner tail for r < Rc, 0 beyond
struct TailSpec {
    enum class Kind {
        None,
        InverseSquare,
        InverseSquareWithCore,
        CoulombDominant,
        ExponentialEnvelope,
        HardCutoff
    };

    Kind kind = Kind::None;
    double strength = 0.0; // A (inverse square) / a (coulomb) / A_e (exponential)
    double r0 = 0.0;       // R0
    double v0 = 0.0;       // inner height of the InverseSquareWithCore variant
    double rate = 0.0;     // a_e of the exponential envelope
    double rc = 0.0;       // cutoff radius
    std::shared_ptr<const TailSpec> inner; // HardCutoff payload

    static TailSpec none();
    static TailSpec inverse_square(double A, double R0);
    static TailSpec inverse_square_with_core(double V0, double A, double R0);
    static TailSpec coulomb_dominant(double a, double R0);
    static TailSpec exponential_envelope(double amplitude, double rate);
    static TailSpec hard_cutoff(TailSpec inner, double Rc);

    double eval(double r) const; // r > 0 required
    // Radius beyond which the tail follows its asymptotic law with no further
    // branch switches (R0, or Rc for a cutoff).
    double outer_radius() const;
    std::string describe() const;
};

struct CoreSpec {
    enum class Kind { None, SquareWell };
    Kind kind = Kind::None;
    double depth = 0.0;  // well depth (> 0 means attractive, evaluates to -depth)
    double radius = 0.0; // support radius

    static CoreSpec none();
    static CoreSpec square_well(double depth, double radius);
    double eval(double r) const;
};

// W(r) = core(r) + tail(r); the Hamiltonian is H = H0 + lambda * W in units
// hbar = 1, m = 1/2 (so H0 = p^2 and the reduced radial equation reads
// u'' = [lambda W + l(l+1)/r^2 - E] u).
struct RadialPotential {
    CoreSpec core;
    TailSpec tail;
    double lambda = 1.0;

    double eval_W(double r) const; // core + tail, no coupling
    // Radius bounding the core support and the tail's inner region.
    double r0() const;
    void validate() const;
};

// lambda * W(r); domain error for r <= 0.
double eval_potential(const RadialPotential& p, double r);

struct SplitParts {
    double plus;
    double minus;
};
// Positive/negative parts of lambda*W at r: plus - minus = lambda*W,
// plus*minus = 0.
SplitParts split_parts(const RadialPotential& p, double r);

struct HypothesisReport {
    bool holds = false;
    double worst_margin = 0.0;
    double worst_r = 0.0;
    bool meaningful = true; // Theorem-3 check: false when A <= 3/4
    std::string note;
};

// Checks lambda*W_+(r) >= eta(A, R0; r) on the grid restricted to r >= R0,
// plus the closed-form tail comparison beyond the grid.
HypothesisReport check_theorem3_hypothesis(const RadialPotential& p, double A, double R0,
                                           const RadialGrid& grid);

// Checks lambda*W(r) <= (3/4) r^{-2} for grid r >= R0 plus the closed-form
// tail comparison beyond the grid.
HypothesisReport check_theorem4_hypothesis(const RadialPotential& p, double R0,
                                           const RadialGrid& grid);

} // namespace thresh
