#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fbl/angular_modes.hpp"
#include "fbl/numerics.hpp"

namespace fbl::weiss {

using num::cplx;

// ------------------------------------------------------------- PolarGrid ----

// Annular cell grid on the unit disk: log-spaced shells below 0.1 (geometric
// refinement toward the origin), uniform shells on [0.1, 1].  Cells are
// (shell i) x (angle j) with centers (r[i], theta_j), theta_j = (j+1/2) dtheta.
struct PolarGrid {
    int n_r = 0;
    int n_theta = 0;
    double r_min = 1e-3;
    std::vector<double> r;       // cell-center radii, size n_r
    std::vector<double> r_edge;  // shell edges, size n_r+1, r_edge[0] = r_min
    double dtheta = 0.0;

    [[nodiscard]] double theta(int j) const { return (j + 0.5) * dtheta; }
    [[nodiscard]] int nearest_shell(double radius) const;

    static PolarGrid make(int n_r, int n_theta, double r_min = 1e-3);
};

// -------------------------------------------------------------- DiskField ----

enum class MaskRule : std::uint8_t { thresholded, full, angular_intervals };

// Scalar field sampled on a PolarGrid with a support mask and cached
// finite-difference derivatives.  Stencils never straddle the support
// boundary: windows shrink to the largest run of same-mask cells (up to five
// nodes), which keeps |laplacian|^2 clean next to free lines.
class DiskField {
  public:
    static DiskField from_function(const PolarGrid& grid,
                                   const std::function<double(double, double)>& u,
                                   MaskRule rule = MaskRule::full,
                                   double tau_supp = 10.0);
    static DiskField from_profile(const PolarGrid& grid,
                                  const modes::HomogeneousProfile& profile);
    static DiskField from_samples(const PolarGrid& grid, std::vector<double> values,
                                  double tau_supp = 10.0);
    // samples with the mask forced to the whole disk (no thresholding)
    static DiskField from_samples_full(const PolarGrid& grid,
                                       std::vector<double> values, bool center_flat);

    [[nodiscard]] const PolarGrid& grid() const { return grid_; }
    [[nodiscard]] double value(int i, int j) const { return vals_[idx(i, j)]; }
    [[nodiscard]] bool mask(int i, int j) const { return mask_[idx(i, j)] != 0; }
    [[nodiscard]] bool center_flat() const { return center_flat_; }
    [[nodiscard]] double tau_supp() const { return tau_supp_; }

    // derivative arrays (lazily built, cached)
    [[nodiscard]] const std::vector<double>& dr() const;
    [[nodiscard]] const std::vector<double>& dth() const;
    [[nodiscard]] const std::vector<double>& drr() const;
    [[nodiscard]] const std::vector<double>& drth() const;
    [[nodiscard]] const std::vector<double>& dthth() const;
    [[nodiscard]] const std::vector<double>& laplacian() const;  // polar identity

    [[nodiscard]] std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * grid_.n_theta + j;
    }
    // area of the support inside D_radius (cells clipped radially)
    [[nodiscard]] double support_area(double radius) const;

    void set_center_flat(bool flag) { center_flat_ = flag; }

  private:
    DiskField() = default;
    void build_mask_thresholded();
    void build_derivatives() const;

    PolarGrid grid_;
    std::vector<double> vals_;
    std::vector<std::uint8_t> mask_;
    double tau_supp_ = 10.0;
    bool center_flat_ = false;
    mutable bool derivs_built_ = false;
    mutable std::vector<double> dr_, dth_, drr_, drth_, dthth_, lap_;
};

// ---------------------------------------------------------- BoundaryTrace ----

// Fourier data of (u, du/dr, d2u/dr2) on the circle of given radius, with the
// convention c_n[f] = (1/2pi) int f(theta) e^{-in theta} dtheta.  Real fields
// satisfy c_{-n} = conj(c_n).
struct BoundaryTrace {
    double radius = 1.0;
    int n_max = 64;
    std::vector<cplx> fourier_u, fourier_ur, fourier_urr;  // index n + n_max

    [[nodiscard]] cplx u(int n) const { return fourier_u[n + n_max]; }
    [[nodiscard]] cplx ur(int n) const { return fourier_ur[n + n_max]; }
    [[nodiscard]] cplx urr(int n) const { return fourier_urr[n + n_max]; }
    // Parseval sums: ||f||^2_{L2(circle)} = 2pi sum |c_n|^2.
    [[nodiscard]] double parseval_u() const;

    static BoundaryTrace from_field(const DiskField& field, double radius,
                                    int n_max = 64);
    static BoundaryTrace from_functions(const std::function<double(double)>& u,
                                        const std::function<double(double)>& ur,
                                        const std::function<double(double)>& urr,
                                        int n_max = 64, int samples = 4096,
                                        double radius = 1.0);
};

// ----------------------------------------------------- GoursatCoefficients ----

// Biharmonic field on the punctured plane written as
//   u = sum_n (a_n r^{|n|+2} + b_n r^{|n|}) e^{in theta}.
struct GoursatCoefficients {
    int n_max = 0;
    std::vector<cplx> a, b;  // index n + n_max

    explicit GoursatCoefficients(int n_max_ = 0)
        : n_max(n_max_), a(2 * n_max_ + 1), b(2 * n_max_ + 1) {}

    [[nodiscard]] cplx& a_at(int n) { return a[n + n_max]; }
    [[nodiscard]] cplx& b_at(int n) { return b[n + n_max]; }
    [[nodiscard]] cplx a_at(int n) const { return a[n + n_max]; }
    [[nodiscard]] cplx b_at(int n) const { return b[n + n_max]; }

    [[nodiscard]] bool center_flat() const;
    // enforce c_{-n} = conj(c_n) so the field is real
    void symmetrize();
    [[nodiscard]] double evaluate(double r, double theta) const;
    [[nodiscard]] DiskField to_field(const PolarGrid& grid) const;
    // coefficient transport under u_s(z) = u(sz)/s^2:
    // a_n -> s^{|n|} a_n, b_n -> s^{|n|-2} b_n.
    [[nodiscard]] GoursatCoefficients rescaled(double s) const;
};

// ------------------------------------------------------------ energies ----

// E_lambda(u; D_radius) = int |laplacian u|^2 + lambda |{u != 0}|, cellwise with
// the support mask for the area term and radial clipping at the rim.
double energy(const DiskField& field, double lambda, double radius);

// Weiss quantity W(u,r) = r^{-2} E(u;D_r) + D(u,r), with the boundary
// corrector D averaged over a 3-cell radial shell.  Errors if r is inside the
// innermost three shells or beyond the outermost three.
double weiss_w(const DiskField& field, double radius, double lambda = 1.0);

// Boundary quantities on the circle of radius r for the rescaled trace
// u_r = u(r.)/r^2: N = int r^2 (du_r/dr)^2 + (d_theta u_r)^2 + u_r^2,
// R = 2 int (d_theta u_r)^2 - (d_rho u_r)^2 + 2 u_r^2 - u_r d_rho u_r.
double n_functional(const DiskField& field, double radius);
double r_functional(const DiskField& field, double radius);
// dN/dr by the closed-form trace expression (cross-check for the centered
// finite-difference route used in tests).
double n_prime_closed(const DiskField& field, double radius);

// Closed-form Weiss quantity of a Goursat field at lambda = 0 and its
// r-derivative (each n-term is a positive-semidefinite Hermitian form, so the
// derivative is nonnegative wherever defined).
double w0_goursat(const GoursatCoefficients& coeffs, double r);
double w0_goursat_prime(const GoursatCoefficients& coeffs, double r);

// Trace -> Goursat: a_n = (c_n[ur] - |n| c_n[u])/2, b_n = c_n[u] - a_n.
GoursatCoefficients goursat_from_boundary(const BoundaryTrace& trace);

// Energy (lambda = 1, full-disk area convention) of the biharmonic extension
// of the trace: pi + 2pi sum 2(|n|+1) |c_n[ur] - |n| c_n[u]|^2.
double biharmonic_extension_energy(const BoundaryTrace& trace);

// -------------------------------------------------------- CylinderField ----

// v(t, theta) = e^{2t} u(e^{-t} e^{i theta}) on a uniform t-grid [0, T_max].
struct CylinderField {
    int n_t = 0;
    int n_theta = 0;
    double t_max = 0.0;
    double dt = 0.0;
    std::vector<double> vals;           // t-major
    std::vector<std::uint8_t> mask;     // support
    double growth_constant = 0.0;       // max_t ||v||_{H2(strip t..t+1)} / (t+1)

    [[nodiscard]] std::size_t idx(int k, int j) const {
        return static_cast<std::size_t>(k) * n_theta + j;
    }
    static CylinderField from_disk(const DiskField& field, double t_max, int n_t);
    static CylinderField from_function(const std::function<double(double, double)>& v,
                                       double t_max, int n_t, int n_theta);
};

// G(v,tau): weighted cylinder energy on [tau, T_max]; past the grid the final
// cross-section is frozen and integrated analytically, so profiles that have
// settled in t are handled exactly.
double cylinder_g(const CylinderField& v, double tau);
// W(v,tau) = G(v,tau) + 2 int v_t (v_t - v_tt) dtheta at t = tau;
// satisfies W(v, -log r) = W(u, r).
double cylinder_w(const CylinderField& v, double tau);
// dW/dtau = -4 int (v_tt^2 + v_ttheta^2) dtheta at t = tau.
double cylinder_w_prime(const CylinderField& v, double tau);

}  // namespace fbl::weiss
