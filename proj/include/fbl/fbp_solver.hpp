#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fbl/weiss_energy.hpp"

namespace fbl::solver {

enum class SupportUpdateRule : std::uint8_t { cellwise_threshold, radial_exact };

struct SolverConfig {
    double lambda = 1.0;
    int n_r = 128;      // polar grid for W quadrature / output field
    int n_theta = 256;  // Cartesian solve runs at 2*n_r cells across [-1,1]
    int max_outer_iters = 40;
    SupportUpdateRule support_update_rule = SupportUpdateRule::cellwise_threshold;
    double tol_energy = 1e-10;
    std::uint64_t seed = 1234;
};

struct SolveResult {
    explicit SolveResult(weiss::DiskField f) : field(std::move(f)) {}

    weiss::DiskField field;  // polar resample of the Cartesian solution
    std::vector<double> energy_history;  // accepted steps, nonincreasing
    double energy = 0.0;
    double lambda = 0.0;
    double support_area = 0.0;
    bool converged = false;
    std::vector<std::pair<double, double>> w_profile;  // (r, W(u,r))
    // Cartesian internals (kept for blow-ups and diagnostics): cell-centered
    // n_cart x n_cart array covering [-1,1]^2 plus a two-cell clamp margin,
    // so cell (ix,iy) sits at (-1 + (ix-1.5) h_cart, -1 + (iy-1.5) h_cart)
    int n_cart = 0;
    double h_cart = 0.0;
    std::vector<double> u_cart;
    std::vector<std::uint8_t> mask_cart;   // support indicator (interior cells)
    std::string notes;                     // labeled "candidate minimizer"
};

// Alternating minimization of E_lambda with clamped data u = g(theta),
// du/dr = h(theta) on the outer boundary: (a) least-squares biharmonic solve
// on the current support, (b) greedy cellwise support update with hysteresis.
SolveResult minimize_energy(const SolverConfig& config,
                            const std::function<double(double)>& g,
                            const std::function<double(double)>& h);

// u_{p,r}(z) = u(p + r z) / r^2 resampled by cubic interpolation
struct BlowUpStep {
    BlowUpStep(double r, weiss::DiskField f) : radius(r), field(std::move(f)) {}

    double radius = 0.0;
    weiss::DiskField field;
    double w_tag = 0.0;  // W(u_{p,r}, r_tag) at the largest admissible shell
};
std::vector<BlowUpStep> blow_up_sequence(const SolveResult& result, double px,
                                         double py,
                                         const std::vector<double>& radii,
                                         int n_r = 128, int n_theta = 256);

struct MonotonicityReport {
    std::vector<double> r;
    std::vector<double> w;
    std::vector<double> slack;  // allowed backslide at each step
    int violations = 0;
    double worst = 0.0;  // most negative (W_{i+1} + slack - W_i)
    bool passed = false;
};
// checks W(u, r_i) <= W(u, r_{i+1}) + slack(h, r) on the given radii;
// requires a center-flat field
MonotonicityReport monotonicity_experiment(const SolveResult& result,
                                           const std::vector<double>& r_grid);

// exact minimizer among radial fields for boundary data (g0, h0):
// support is the full disk or an annulus rho < r < 1, with
// u = A + B r^2 + C log r + D r^2 log r clamped at rho
struct RadialSolution {
    double g0 = 0.0, h0 = 0.0, lambda = 0.0;
    double rho = 0.0;  // inner free radius; 0 = full disk
    bool full_disk = true;
    double coeff_a = 0.0, coeff_b = 0.0, coeff_c = 0.0, coeff_d = 0.0;
    double energy = 0.0;
    double support_area = 0.0;
    [[nodiscard]] double u(double r) const;
    [[nodiscard]] double du(double r) const;
};
RadialSolution radial_oracle(double g0, double h0, double lambda,
                             int rho_scan = 2048);

// Calibrated smallness threshold for the vanishing experiment: boundary data
// with sup|g| + sup|h| below this collapses the support under the cellwise
// rule (zeroing a single cell of the near-constant solve already pays its
// bending toll), so the minimizer vanishes on the inner half-disk
double vanishing_threshold(const SolverConfig& config);

}  // namespace fbl::solver
