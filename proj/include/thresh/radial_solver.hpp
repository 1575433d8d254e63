#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "thresh/numerov.hpp"
#include "thresh/potential.hpp"

namespace thresh {

// Exception taxonomy of the solver layer.
struct NoBoundState : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BracketTooNarrow : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ExteriorNotDecaying : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverOptions {
    std::size_t inner_points = 2000;
    std::size_t points_per_decade = 1500;
    double zero_energy_r_max = 1e4; // grid extent for E = 0 work
    double r_max_cap = 1e6;
    double tol_match = 1e-9;  // relative log-derivative mismatch
    double tol_lambda = 1e-8; // coupling bisection width
    int max_iter = 200;
};

// Grid sized for states near energy E (E <= 0): r_max = max(50/kappa, 100 r0)
// capped; tail-exact boundary conditions cover the remainder.
std::shared_ptr<const RadialGrid> make_solver_grid(const RadialPotential& p, double E,
                                                   const SolverOptions& opt);

// Decaying-exterior model for the reduced equation at energy E = -kappa^2
// (kappa = 0 for threshold work). Null when the tail has no decaying branch
// at E = 0 (the flagged constant branch).
std::unique_ptr<ExteriorModel> make_exterior(const RadialPotential& p, int l, double E);

// Effective inverse-square strength of the exterior equation at threshold:
// lambda * A_tail + l(l+1) for inverse-square tails, l(l+1) otherwise;
// nullopt for the coulomb-dominant tail (stretched-exponential class).
std::optional<double> exterior_inverse_square_strength(const RadialPotential& p, int l);

struct ShootingOutcome {
    RadialFunction outward;
    RadialFunction inward;
    double mismatch = 0.0; // relative log-derivative difference at the match radius
    double match_radius = 0.0;
    std::size_t i_match = 0;
    int nodes = 0; // sign changes of the outward solution
};

ShootingOutcome integrate_radial(const RadialPotential& p, int l, double E,
                                 std::shared_ptr<const RadialGrid> grid);

struct BoundStateResult {
    double lambda = 0.0;
    int l = 0;
    int n_nodes = 0;
    double E = 0.0;
    double kappa = 0.0;
    RadialFunction u;
    double mismatch = 0.0;
    double h0_expectation = 0.0;   // <H0>
    double absW_expectation = 0.0; // <|W|> (W without the coupling)
};

BoundStateResult find_bound_state(const RadialPotential& p, int l, int n_nodes,
                                  std::pair<double, double> e_bracket,
                                  const SolverOptions& opt = {});

// Bisection on the coupling with the zero-energy mismatch existence test.
double critical_coupling(const RadialPotential& p, int l, int n_nodes, double lambda_lo,
                         double lambda_hi, const SolverOptions& opt = {});

// Expands [lo, hi] around p.lambda until the critical coupling is bracketed.
std::pair<double, double> bracket_critical_coupling(const RadialPotential& p, int l, int n_nodes,
                                                    const SolverOptions& opt = {});

// Zero-energy solution at the critical coupling carried by p.lambda. Throws
// ExteriorNotDecaying when the tail admits no square-integrable zero-energy
// branch; with allow_nonnormalizable the branch is returned unnormalized
// instead.
RadialFunction threshold_solution(const RadialPotential& p, int l,
                                  const SolverOptions& opt = {},
                                  bool allow_nonnormalizable = false);

double probability_within(const RadialFunction& u, double R);
double expectation_H0(const RadialFunction& u);
double expectation_absW(const RadialFunction& u, const RadialPotential& p);
double expectation_W(const RadialFunction& u, const RadialPotential& p); // signed, no coupling

struct CurveRow {
    double lambda = 0.0;
    double E = 0.0;
    double kappa = 0.0;
    double p_within = 0.0;
    int nodes = 0;
    double hf_residual = 0.0;
    bool converged = false;
    std::string error;
    BoundStateResult state; // populated when converged
};

// One row per coupling in the strictly decreasing schedule; solver failures
// annotate the row instead of aborting the sweep.
std::vector<CurveRow> energy_curve(const RadialPotential& p, int l,
                                   const std::vector<double>& lambda_schedule, double r_probe,
                                   const SolverOptions& opt = {});

// Finds lambda with E(lambda) = e_target (monotone bisection); the bracket
// must satisfy E(lo) > e_target > E(hi) in the bound sense.
struct LambdaSolve {
    double lambda;
    BoundStateResult state;
};
LambdaSolve find_lambda_for_energy(const RadialPotential& p, int l, int n_nodes, double e_target,
                                   double lambda_lo, double lambda_hi,
                                   const SolverOptions& opt = {}, double rel_tol = 1e-4);

} // namespace thresh
