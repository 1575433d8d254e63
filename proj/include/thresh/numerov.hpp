#pragma once

// Fourth-order three-term (Numerov) integration of u'' = q(r) u on the
// two-zone radial mesh: the recurrence runs in r on the uniform zone and in
// x = ln r (with v = u / sqrt(r), v'' = [r^2 q + 1/4] v) on the logarithmic
// zone. Inward shots cross the seam through a fifth-order Taylor restart.

#include <functional>
#include <memory>
#include <vector>

#include "thresh/grid.hpp"

namespace thresh {

// Closed-form description of the decaying solution in the far exterior,
// used to seed inward integration and to account for the norm beyond the
// last grid node.
class ExteriorModel {
  public:
    virtual ~ExteriorModel() = default;
    virtual double logderiv(double r) const = 0;
    // w(r_small) / w(r_big) for tail radii r_small < r_big.
    virtual double ratio(double r_small, double r_big) const = 0;
    // integral of w^2 dr over [rN, infinity) for w scaled so w(rN) = u_n;
    // +infinity when the branch is not square integrable.
    virtual double norm_tail_sq(double r_n, double u_n) const;
    virtual bool square_integrable() const { return true; }
};

// w = exp(-kappa r)
class FreeExterior final : public ExteriorModel {
  public:
    explicit FreeExterior(double kappa);
    double logderiv(double r) const override;
    double ratio(double r_small, double r_big) const override;
    double norm_tail_sq(double r_n, double u_n) const override;

  private:
    double kappa_;
};

// w = r^{-a} (zero-energy branch of an inverse-square tail)
class PowerExterior final : public ExteriorModel {
  public:
    explicit PowerExterior(double a);
    double logderiv(double r) const override;
    double ratio(double r_small, double r_big) const override;
    double norm_tail_sq(double r_n, double u_n) const override;
    bool square_integrable() const override { return a_ > 0.5; }

  private:
    double a_;
};

// w = 1 (zero-energy s-wave branch of a finite-range potential)
class ConstantExterior final : public ExteriorModel {
  public:
    double logderiv(double) const override { return 0.0; }
    double ratio(double, double) const override { return 1.0; }
    bool square_integrable() const override { return false; }
};

// w = sqrt(r) K_nu(kappa r), nu = a_eff + 1/2: the exact decaying solution of
// u'' = (A_eff / r^2 + kappa^2) u.
class BesselKExterior final : public ExteriorModel {
  public:
    BesselKExterior(double a_eff, double kappa);
    double logderiv(double r) const override;
    double ratio(double r_small, double r_big) const override;
    double norm_tail_sq(double r_n, double u_n) const override;

  private:
    double bessel_k(double z) const; // K_nu with large-z fallback
    double nu_;
    double kappa_;
};

// First-order WKB envelope w = q^{-1/4} exp(-int sqrt(q)); exact for the
// coulomb-dominant tail at zero energy.
class WkbExterior final : public ExteriorModel {
  public:
    explicit WkbExterior(std::function<double(double)> q);
    double logderiv(double r) const override;
    double ratio(double r_small, double r_big) const override;
    double norm_tail_sq(double r_n, double u_n) const override;

  private:
    std::function<double(double)> q_;
};

// One-directional integration result. Values cover grid indices
// [i_begin, i_end]; stored values carry per-node log scales so that the true
// solution is u[i - i_begin] * exp(log_scale[i - i_begin] - log_scale[ref]).
struct Shot {
    std::vector<double> u;
    std::vector<double> log_scale;
    std::size_t i_begin = 0;
    std::size_t i_end = 0;
    double u_at = 0.0;  // u at the requested terminal node (same scale as du_at)
    double du_at = 0.0; // du/dr at the terminal node
    int sign_changes = 0;

    // Value at global index i rescaled so the terminal node keeps its stored
    // value. Underflows to 0 far from the terminal node.
    double value(std::size_t i, std::size_t i_ref) const;
};

// q sampled on the grid nodes plus a callable for off-node evaluations.
struct QSampled {
    std::vector<double> on_nodes;
    std::function<double(double)> eval;
};

QSampled sample_q(const RadialGrid& grid, const std::function<double(double)>& q);

// Outward shot from the origin to node i_end (must lie in the uniform zone).
// Seeds u ~ r^{l+1} (1 + c2 r^2).
Shot shoot_outward(const RadialGrid& grid, const QSampled& q, int l, double c2,
                   std::size_t i_end);

// Inward shot from node i_start (default: the last node) down to node i_end,
// seeded by the exterior model at i_start; crosses the seam when i_end lies
// in the uniform zone. Starting mid-grid is exact for tail-region radii and
// keeps the x-zone step within its stability budget for deep energies.
Shot shoot_inward(const RadialGrid& grid, const QSampled& q, const ExteriorModel& ext,
                  std::size_t i_end, std::size_t i_start = static_cast<std::size_t>(-1));

} // namespace thresh
