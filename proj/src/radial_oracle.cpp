#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "fbl/fbp_solver.hpp"
#include "fbl/numerics.hpp"

namespace fbl::solver {

using num::pi;

namespace {

// radial biharmonic span on an annulus: u = A + B r^2 + C log r + D r^2 log r,
// Delta u = (4B + 4D) + 4D log r
struct AnnulusFit {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    double energy = std::numeric_limits<double>::infinity();
};

AnnulusFit fit_annulus(double g0, double h0, double lambda, double rho) {
    AnnulusFit fit;
    if (rho <= 0.0 || rho >= 1.0) return fit;
    const double lr = std::log(rho);
    Eigen::Matrix4d m;
    // rows: u(1)=g0, u'(1)=h0, u(rho)=0, u'(rho)=0
    m << 1.0, 1.0, 0.0, 0.0,                                   //
        0.0, 2.0, 1.0, 1.0,                                    //
        1.0, rho * rho, lr, rho * rho * lr,                    //
        0.0, 2.0 * rho, 1.0 / rho, rho * (2.0 * lr + 1.0);
    Eigen::Vector4d rhs(g0, h0, 0.0, 0.0);
    const Eigen::Vector4d sol = m.fullPivLu().solve(rhs);
    fit.a = sol[0];
    fit.b = sol[1];
    fit.c = sol[2];
    fit.d = sol[3];
    // bending: 2 pi int_rho^1 (p + q log r)^2 r dr in closed form
    const double p = 4.0 * (fit.b + fit.d);
    const double q = 4.0 * fit.d;
    const double r2 = rho * rho;
    const double i0 = 0.5 * (1.0 - r2);
    const double i1 = -0.25 - (0.5 * r2 * lr - 0.25 * r2);
    const double i2 = 0.25 - (0.5 * r2 * lr * lr - 0.5 * r2 * lr + 0.25 * r2);
    const double bend = 2.0 * pi * (p * p * i0 + 2.0 * p * q * i1 + q * q * i2);
    fit.energy = bend + lambda * pi * (1.0 - r2);
    return fit;
}

}  // namespace

double RadialSolution::u(double r) const {
    if (!full_disk && r <= rho) return 0.0;
    if (r <= 0.0) return coeff_a;
    const double lr = std::log(r);
    double val = coeff_a + coeff_b * r * r;
    if (!full_disk) val += coeff_c * lr + coeff_d * r * r * lr;
    return val;
}

double RadialSolution::du(double r) const {
    if (!full_disk && r <= rho) return 0.0;
    if (r <= 0.0) return 0.0;
    const double lr = std::log(r);
    double val = 2.0 * coeff_b * r;
    if (!full_disk) val += coeff_c / r + coeff_d * r * (2.0 * lr + 1.0);
    return val;
}

RadialSolution radial_oracle(double g0, double h0, double lambda,
                             int rho_scan) {
    if (lambda < 0.0)
        throw std::invalid_argument("radial_oracle: lambda must be >= 0");
    RadialSolution best;
    best.g0 = g0;
    best.h0 = h0;
    best.lambda = lambda;

    if (g0 == 0.0 && h0 == 0.0) {  // the zero field is admissible and free
        best.full_disk = false;
        best.rho = 1.0;
        best.energy = 0.0;
        best.support_area = 0.0;
        return best;
    }

    // candidate 1: supported on the whole disk, u = A + B r^2
    best.full_disk = true;
    best.rho = 0.0;
    best.coeff_b = 0.5 * h0;
    best.coeff_a = g0 - best.coeff_b;
    best.energy = 4.0 * h0 * h0 * pi + lambda * pi;
    best.support_area = pi;

    // candidate 2: clamp to zero on r <= rho, scan the free radius.
    // (an interior island of support with zero data only adds energy, so the
    // minimizing support among radial fields is a disk or a boundary annulus)
    if (rho_scan < 8) rho_scan = 8;
    double best_rho = -1.0;
    double best_e = best.energy;
    for (int j = 1; j < rho_scan; ++j) {
        const double rho = static_cast<double>(j) / rho_scan;
        const double e = fit_annulus(g0, h0, lambda, rho).energy;
        if (e < best_e) {
            best_e = e;
            best_rho = rho;
        }
    }
    if (best_rho > 0.0) {
        // golden-section polish inside the bracketing cells
        double lo = std::max(1e-12, best_rho - 1.5 / rho_scan);
        double hi = std::min(1.0 - 1e-12, best_rho + 1.5 / rho_scan);
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = fit_annulus(g0, h0, lambda, x1).energy;
        double f2 = fit_annulus(g0, h0, lambda, x2).energy;
        for (int it = 0; it < 80; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = fit_annulus(g0, h0, lambda, x1).energy;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = fit_annulus(g0, h0, lambda, x2).energy;
            }
        }
        const double rho = f1 < f2 ? x1 : x2;
        const auto fit = fit_annulus(g0, h0, lambda, rho);
        if (fit.energy < best.energy) {
            best.full_disk = false;
            best.rho = rho;
            best.coeff_a = fit.a;
            best.coeff_b = fit.b;
            best.coeff_c = fit.c;
            best.coeff_d = fit.d;
            best.energy = fit.energy;
            best.support_area = pi * (1.0 - rho * rho);
        }
    }
    return best;
}

}  // namespace fbl::solver
