#pragma once

#include <array>
#include <functional>
#include <vector>

#include "fbl/numerics.hpp"

namespace fbl::modes {

// First fixed point of tan above pi (unique root of sin t - t cos t in
// (pi, 2pi), where the function is strictly decreasing).
double solve_t1(double tol = 1e-14);

// Openings omega in (0, 2pi] for which the clamped sector problem
// b'''' + 4 b'' = 0 admits a nontrivial solution:
// sin(omega) (omega cos(omega) - sin(omega)) = 0  =>  {pi, t1, 2pi}.
std::vector<double> admissible_openings(double tol = 1e-14);

// ------------------------------------------------------------ eigenbasis ----

// n-th eigenvalue of the clamped buckling problem b'''' = -mu b'' on [0,omega],
// normalized so that on [0,pi]: odd n gives mu = (n+1)^2 exactly and even n is
// the root of sin(pi sqrt(mu)/2)(pi sqrt(mu) cos(pi sqrt(mu)/2) - 2 sin(pi
// sqrt(mu)/2)) inside (n^2, (n+2)^2).  General omega scales by (pi/omega)^2.
double buckling_eigenvalue(int n, double omega);

enum class Parity { odd, even };

// One basis element b_{n,omega}, clamped at 0 and omega and normalized in the
// gradient inner product: int_0^omega (b')^2 = 1.  Evaluators are closed-form
// and vanish outside [0, omega].
struct BucklingMode {
    int n = 0;
    double omega = num::pi;
    double mu = 0.0;          // eigenvalue at this opening
    Parity parity = Parity::odd;
    double beta = 0.0;        // slope parameter of even base modes (0 for odd)
    double norm_check = 0.0;  // |int (b')^2 - 1| by independent Simpson
    int grid = 4096;
    std::vector<double> samples;  // cached values on theta_j = j*omega/grid

    [[nodiscard]] double value(double theta) const;
    [[nodiscard]] double d1(double theta) const;
    [[nodiscard]] double d2(double theta) const;
    [[nodiscard]] double d4(double theta) const;  // for ODE residual checks

  private:
    // base-segment data (opening pi); scaled evaluation maps through s=pi*theta/omega
    double amp_ = 0.0;       // normalization of the base mode
    double mu_base_ = 0.0;   // eigenvalue at opening pi
    friend BucklingMode buckling_mode(int, double, int);
};

BucklingMode buckling_mode(int n, double omega, int grid = 4096);

// Index of the mode whose eigenvalue at opening Theta equals 4:
// 1 for Theta=pi, 2 for Theta=t1, 3 for Theta=2pi.
int critical_mode_index(double Theta);

// ---------------------------------------------------------------- profiles ----

enum class ProfileKind { flat, angular, nodal, isolated };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] double length() const { return hi - lo; }
};

struct ProfileParams {
    double sign = 1.0;      // flat / angular
    double rotation = 0.0;  // flat / angular / nodal
    double lambda = 1.0;    // nodal, |lambda| >= 1
    double a = 0.0, b = 0.0, c = 0.0;  // isolated: a(x^2+y^2)+b(x^2-y^2)+2cxy
};

// A 2-homogeneous profile u(r,theta) = r^2 b(theta) with exact angular support.
struct HomogeneousProfile {
    ProfileKind kind = ProfileKind::flat;
    ProfileParams params;
    std::vector<Interval> support;  // sorted by decreasing length, then lo

    std::function<double(double)> b, db, d2b;

    [[nodiscard]] double u(double r, double theta) const {
        return r * r * b(theta);
    }
    [[nodiscard]] bool in_support(double theta) const;
    [[nodiscard]] double support_measure() const;
};

HomogeneousProfile homogeneous_profile(ProfileKind kind, const ProfileParams& params = {});

// -------------------------------------------------------------- decompose ----

struct AngularDecomposition {
    std::vector<Interval> components;          // sorted as in HomogeneousProfile
    std::vector<std::vector<double>> coeffs;   // coeffs[k][n-1] on component k
    double gradient_norm_sq = 0.0;             // int over components of (f')^2
    double parseval_ratio = 0.0;               // sum of coeff^2 / gradient_norm_sq
};

// Expand f against the gradient-orthonormal basis of each support component:
// coeff = int f'(theta) b'_{n,omega_k}(theta - lo_k) dtheta.
AngularDecomposition decompose_on_support(const std::function<double(double)>& fprime,
                                          std::vector<Interval> support,
                                          int n_max = 64, int grid = 4096);

}  // namespace fbl::modes
