#pragma once

// Green's-function profiles and off-center kernels for positive tail
// potentials: the integral kernel of [H0 + k^2 + tail]^{-1}.

#include <memory>
#include <vector>

#include "thresh/potential.hpp"
#include "thresh/radial_solver.hpp"

namespace thresh {

struct Vec3 {
    double x = 0, y = 0, z = 0;
};
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
double norm(const Vec3& v);
double dot(const Vec3& a, const Vec3& b);

// Profile ghat(r) with G_k(x, 0) = ghat(r) / (4 pi r); ghat(0) = 1 and ghat
// decays through the tail's exact asymptotic branch.
struct KernelProfile {
    std::shared_ptr<const RadialGrid> grid;
    TailSpec tail;
    double k = 0.0;
    std::vector<double> ghat;
    bool constant_branch = false; // k = 0 with no decaying branch: ghat == 1

    double ghat_at(double r) const;   // interpolated, ghat_at(0) == 1
    double kernel_at(double r) const; // ghat(r) / (4 pi r)

  private:
    friend KernelProfile gk_profile(const TailSpec&, double, std::shared_ptr<const RadialGrid>);
    std::vector<double> interp_r_, interp_g_;
};

// Grid sized for profile work at momentum k (k >= 0).
std::shared_ptr<const RadialGrid> make_profile_grid(const TailSpec& tail, double k,
                                                    std::size_t inner_points = 1500,
                                                    std::size_t points_per_decade = 1200,
                                                    double r_max_floor = 1e4);

// Solves -ghat'' + (tail + k^2) ghat = 0 with ghat(0) = 1 and the decaying
// condition at the outer edge. For k = 0 and a tail with no decaying branch
// the constant profile is returned flagged, not an error.
KernelProfile gk_profile(const TailSpec& tail, double k, std::shared_ptr<const RadialGrid> grid);

// exp(-k|x-y|) / (4 pi |x-y|); singularity error at x == y.
double free_kernel(double k, const Vec3& x, const Vec3& y);
double free_kernel_r(double k, double dist);

// Partial-wave resolvent kernel: per-l radial factors from the regular and
// decaying solutions and their Wronskian,
//   G_k(x, y) = sum_l (2l+1)/(4 pi) P_l(cos theta) g_l(r, r') / (r r').
class PartialWaveKernel {
  public:
    PartialWaveKernel(TailSpec tail, double k, int l_max,
                      std::shared_ptr<const RadialGrid> grid);

    struct Value {
        double value = 0.0;
        double truncation = 0.0; // free-kernel style geometric tail estimate
    };

    Value evaluate(double r, double rp, double cos_theta) const;
    Value evaluate(const Vec3& x, const Vec3& y) const;
    // Reduced radial Green's function g_l(r, r'), symmetric by construction.
    double radial_factor(int l, double r, double rp) const;
    // Relative drift of the Wronskian between two well-separated nodes.
    double wronskian_drift(int l) const;
    int l_max() const { return l_max_; }
    const RadialGrid& grid() const { return *grid_; }

  private:
    struct Mode {
        std::vector<double> u; // regular solution, absolute scale
        std::vector<double> w; // decaying solution, absolute scale
        double wronskian = 0.0;
        double drift = 0.0;
    };
    TailSpec tail_;
    double k_;
    int l_max_;
    std::shared_ptr<const RadialGrid> grid_;
    std::vector<Mode> modes_;
};

// One-shot evaluation (builds the partial-wave table internally; reuse
// PartialWaveKernel for many points).
PartialWaveKernel::Value offcenter_kernel(const TailSpec& tail, double k, const Vec3& x,
                                          const Vec3& y, int l_max,
                                          std::shared_ptr<const RadialGrid> grid);

struct KernelSample {
    double r;         // |x|
    double rp;        // |y| (0 selects the profile route)
    double cos_theta; // angle between x and y
};

struct DominationReport {
    bool ordering_ok = true;  // potential precondition V1 <= V2
    bool holds = false;       // kernel(V2) <= kernel(V1) (1 + tol) at all samples
    double worst_ratio = 0.0; // max kernel(V2)/kernel(V1)
    KernelSample worst_sample{};
};

// Lemma-style kernel domination check; throws on an ordering violation of
// the potentials themselves.
DominationReport domination_check(const TailSpec& v1, const TailSpec& v2, double k,
                                  const std::vector<KernelSample>& samples, int l_max = 48,
                                  double rel_tol = 1e-6);

struct MonotonicityReport {
    bool monotone = true;
    int violations = 0;
    double worst_violation = 0.0; // most negative increment, relative
    double limit_deviation = 0.0; // max rel deviation of the smallest-k profile from F_hat
    bool limit_checked = false;
};

// Profiles must be pointwise nondecreasing as k decreases; for inverse-square
// tails the smallest-k profile is also compared against the closed-form k->0
// limit on r <= r_limit.
MonotonicityReport monotonicity_in_k_check(const TailSpec& tail,
                                           const std::vector<double>& k_list,
                                           std::shared_ptr<const RadialGrid> grid,
                                           double r_limit = 10.0);

// Static integral-equation residual of the closed-form zero-energy profile
// for the inverse-square tail:
//   T(r) = F(r) + (1/r) int_0^r s^2 eta F ds + int_r^inf s eta F ds - (4 pi r)^{-1}
// evaluated by adaptive quadrature (angular integral done analytically).
// exponent_shift perturbs the exterior falloff exponent (negative control).
double integral_equation_residual(double A, double R0, double r, double exponent_shift = 0.0,
                                  double quad_tol = 1e-9);

// k > 0 resolvent-identity residual of a computed profile at radius r:
//   G_k(r) + int dy' G0_k(x, y') eta(y') G_k(y') - G0_k(r), reduced to a 1-D
// integral with the exact angular factor.
double resolvent_identity_residual(const KernelProfile& profile, double A, double R0, double r,
                                   double quad_tol = 1e-8);

// Legendre polynomial P_l(x) by the three-term recurrence.
double legendre_p(int l, double x);

} // namespace thresh
