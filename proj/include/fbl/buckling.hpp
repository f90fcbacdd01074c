#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fbl/numerics.hpp"

namespace fbl::buckling {

// --------------------------------------------------------------- domains ----

// Star-shaped domain given by a positive boundary radius R(theta); the grid
// maps (rho, theta) in [0,1] x [0,2pi) to rho R(theta) e^{i theta}.
struct PlateDomain {
    enum class Kind : int { disk, ellipse, star };
    Kind kind = Kind::disk;
    double axis_a = 1.0, axis_b = 1.0;      // ellipse semi-axes
    std::vector<double> star_coeffs;        // R(th) = r0 (1 + sum_k c_k cos(k th))
    double star_r0 = 1.0;
    double area = 0.0;                      // computed to 1e-8 at construction

    [[nodiscard]] double boundary_radius(double theta) const;
    [[nodiscard]] double boundary_radius_d1(double theta) const;

    static PlateDomain disk(double radius = 1.0);
    static PlateDomain ellipse(double a, double b);
    static PlateDomain star(double r0, const std::vector<double>& coeffs);
};

// ------------------------------------------------------------ eigenvalue ----

struct EigResult {
    double lambda1 = 0.0;
    int mesh = 0;  // rho cells (theta cells = 2 * mesh)
    // normwise backward error |A u - l1 B u| / ((|A| + l1 |B|) |u|) of the
    // eigenpair in the equilibrated pencil
    double rayleigh_residual = 0.0;
    std::vector<double> eigenfield;  // mapped-grid samples, rho-major
    int n_rho = 0, n_theta = 0;
};

// First buckling eigenvalue of the clamped unit disk: sqrt(L) is the first
// positive zero of the Bessel function J1 (radial eigenfunction
// J0(sqrt(L) r) - J0(sqrt(L))).
double lambda1_disk(double tol = 1e-12);

// independent 1-D radial oracle: generalized eigenproblem for
// int (u'' + u'/r)^2 r dr vs int u'^2 r dr on radial nodes, clamped by a
// reflected ghost
double lambda1_disk_oracle(int points = 10000);

// 2-D pencil A u = Lambda B u on the mapped polar grid; shifted inverse
// iteration with shift 0.9x the disk value
EigResult lambda1_numeric(const PlateDomain& domain, int mesh);

// ------------------------------------------------------------------ scan ----

struct ScanRow {
    std::string family;
    double family_param = 0.0;
    double area = 0.0;
    double lambda1 = 0.0;
    double area_lambda1 = 0.0;
    int mesh = 0;
    double residual = 0.0;
};
// ellipses of the given axis ratios, area-normalized reporting via |Omega| L1
std::vector<ScanRow> disk_optimality_scan(const std::vector<double>& ratios,
                                          int mesh);

// -------------------------------------------------------- quasiminimality ----

struct QuasiminRow {
    double scale = 0.0;     // bump width parameter
    double cx = 0.0, cy = 0.0;
    double rbar = 0.0;      // disk radius the inequality is tested on
    double s = 0.0;         // perturbation amplitude
    double margin = 0.0;    // E(u) - E(v) - mu ||v - u||_{L2}  (<= 0 wanted)
};
struct QuasiminReport {
    double mu = 0.0;        // quasiminimality constant used (= Lambda1 scale)
    std::vector<QuasiminRow> rows;
    double worst_margin = 0.0;
    bool passed = false;
    // first-order criticality: margin(s)/s bounded as s -> 0 (slope estimate)
    double slope_estimate = 0.0;
};
// tests E(u; D) <= E(v; D) + mu ||v-u||_{L2(D)} for bump perturbations of the
// normalized disk eigenfunction rescaled around interior points
QuasiminReport quasiminimality_check(const EigResult& eig,
                                     const std::vector<double>& rbars,
                                     int bumps_per_rbar = 15);

}  // namespace fbl::buckling
