#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "fbl/angular_modes.hpp"
#include "fbl/numerics.hpp"
#include "fbl/weiss_energy.hpp"

namespace fbl::epi {

using num::cplx;

// ---------------------------------------------------------- DecayProfile ----

// Scalar profile on [0, inf) with C^2 evaluators.  support_end is the time T
// past which the profile is constant (zero when compact_support is set).
struct DecayProfile {
    std::function<double(double)> f, d1, d2;
    double f0 = 1.0;   // f(0)
    double fp0 = 0.0;  // f'(0)
    bool compact_support = false;
    double support_end = 0.0;  // constant (or zero) beyond this time; 0 = never
};

// Q_lambda(f) = int_0^inf e^{-2t} (c0 f''^2 + 2 f'^2 + lambda f^2) dt evaluated
// with the exponential-weight product rule on [0, max(support_end, t_end)];
// the tail past the rule freezes f at its final value.
double q_form(const DecayProfile& profile, double lambda, double c0,
              double t_end = 40.0, int nodes = 4097);

// C0 = sup_omega sum_n ||b_{n,omega}||_{L2}^2 over the omega grid, truncated at
// n_max with an analytic tail bound from ||b_{n,omega}||^2 <= 8 omega^2/(pi^2 mu_n).
struct C0Result {
    double value = 0.0;        // truncated sup plus the tail bound
    double tail_margin = 0.0;  // the tail bound that was added
    double omega_at_sup = 0.0;
    int n_max = 0;
};
C0Result compute_c0(const std::vector<double>& omega_grid, int n_max);
double default_c0();  // cached compute_c0 on omega in [pi/2, 2pi], n_max = 64

// ------------------------------------------------------ sector modulation ----

// chi_eps(t) = (1 - 9 eps) + 9 eps (1 + t) e^{-t}: starts at 1 with flat slope,
// decays to 1 - 9 eps, and balances int e^{-2t} (chi_eps - (1-eps)) dt = 0.
struct ChiEps {
    double eps = 0.0;
    explicit ChiEps(double e);
    [[nodiscard]] double value(double t) const;
    [[nodiscard]] double d1(double t) const;
    [[nodiscard]] double d2(double t) const;
    // exact closed-form value of the balance integral (should be ~1e-16)
    [[nodiscard]] double equilibrium_residual() const;
    [[nodiscard]] DecayProfile as_profile() const;
};

// ------------------------------------------------------- competitor field ----

// Sampled realization of a constructed competitor with its boundary data and
// the checks the construction promises.
struct CompetitorField {
    std::string construction;  // which builder made it
    weiss::CylinderField field;
    std::vector<double> boundary_u, boundary_v;  // data at t = 0, theta samples
    double boundary_value_error = 0.0;  // max |U(0,.) - u|
    double boundary_slope_error = 0.0;  // max |dt U(0,.) - v|
};

// ------------------------------------------------------ single/double mode ----

// Support-modulated competitor for data a * b_{i(Theta), omega}:
// U(t, theta) = a sqrt(1 + delta0) * b_{i,Theta}(theta / (1 + delta0 chi_eps(t))).
struct SingleModeResult {
    double theta_opening = 0.0;
    double omega = 0.0;  // input opening, delta0 = omega/Theta - 1
    double a = 0.0;
    double eps = 0.0;
    double delta0 = 0.0;
    double g_input = 0.0;       // G(u,0) of the t-constant input (closed form)
    double g_competitor = 0.0;  // G(U,0), exact theta reduction + t quadrature
    double gap = 0.0;           // g_competitor - g_input (<= 0 expected)
    double gap_fraction = 0.0;  // (g_input - g_comp) / (g_input - Theta/2)+
    double f_dd_numeric = 0.0;  // F_eps''(0) by central differences
    double f_dd_closed = 0.0;   // -20 eps (1 - 45 eps/16)
};
SingleModeResult single_mode_energy_gap(double theta_opening, double a,
                                        double omega, double eps,
                                        const num::ExpWeightedRule& rule);
// sampled realization of the same competitor (for boundary/growth checks)
CompetitorField single_mode_competitor_field(double theta_opening, double a,
                                             double omega, double eps, int n_t,
                                             int n_theta, double t_max);

// Two sectors of openings omega1/omega2 separated by a gap beta, each carrying
// a * b_{1, omega_i} data, both modulated by chi_eps.  Supports must stay
// disjoint: (2pi - w1 - w2) chi_eps(t) >= 2pi - w1 - w2 - beta for all t.
struct DoubleSectorResult {
    double omega1 = 0.0, omega2 = 0.0, beta = 0.0;
    double a1 = 0.0, a2 = 0.0;
    double eps = 0.0;
    bool supports_disjoint = false;
    double g_input = 0.0;
    double g_competitor = 0.0;
    double g_part1 = 0.0, g_part2 = 0.0;  // additivity: g_comp = part1 + part2
    double gap = 0.0;
    double gap_fraction = 0.0;  // against pi (half-plane density)
    CompetitorField field;
};
DoubleSectorResult double_sector_competitor(double a1, double a2, double omega1,
                                            double omega2, double beta, double eps,
                                            const num::ExpWeightedRule& rule);

// ------------------------------------------------------ deletion profiles ----

DecayProfile positive_removal_profile(double eps);  // (1 + eps t) e^{-eps t}
DecayProfile negative_removal_profile(double eps);  // eps t + e^{-eps t}
// freeze (to_zero = false) or kill (to_zero = true) the profile across
// [T-1, T] with a quintic smoothstep; C^2 everywhere
DecayProfile cutoff_profile(const DecayProfile& base, double T, bool to_zero);

struct ProfileSearchRow {
    double lambda = 0.0;
    double q_value = 0.0;
    double q_constant = 0.0;  // Q_lambda(1) = lambda/2
    double margin = 0.0;      // q_constant - q_value (>= 0 wanted)
};
struct PositiveSearchResult {
    double eps = 0.0, t_cut = 0.0;
    double eta = 0.0;  // Q_lambda(f) <= (1 - eta) lambda/2 across the grid
    DecayProfile profile;
    std::vector<ProfileSearchRow> rows;
    // sub-estimate (i): Q_1(f_eps) <= (1 - eps^2/4) Q_1(1)
    double sub_i_lhs = 0.0, sub_i_rhs = 0.0;
    // sub-estimate (ii): Q_1(f_{eps,T}) <= (1 + C e^{-2T}) Q_1(f_eps)
    double sub_ii_lhs = 0.0, sub_ii_rhs = 0.0, sub_ii_c = 0.0;
};
PositiveSearchResult positive_profile_search(const num::ExpWeightedRule& rule);

struct NegativeSearchResult {
    double eps = 0.0, t_cut = 0.0;
    DecayProfile profile;
    std::vector<ProfileSearchRow> rows;  // lambda in {-1,-2,-4,-8}
    double mass = 0.0;                   // int e^{-2t} f^2 (exact, untruncated)
    double mass_expansion = 0.0;         // 1/2 + eps^2/4
    double mass_lower_bound = 0.0;       // (1/2)(1 + eps^2/3)
};
NegativeSearchResult negative_profile_search(const num::ExpWeightedRule& rule);

// ---------------------------------------------------- derivative removal ----

// f_{n,omega}(t) = t e^{-mu_{n,omega}^{1/3} t}: kills slope data at cost O(1)
DecayProfile removal_profile(int n, double omega);

// chi_omega: C^2 cutoff equal to 1 near 0 and 0 past 7/8 built from a quintic
// base minus three polynomial bumps at t = 1/4, 2/4, 3/4 whose amplitudes
// solve int_0^inf t e^{-(2 + mu_{n,omega}^{1/3}) t} chi(t) dt = 0, n = 1,2,3.
// For omega < pi/2 the fixed chi_{pi/2} is reused (fallback).
struct ChiOmega {
    double omega = 0.0;           // requested opening
    double omega_used = 0.0;      // pi/2 when the fallback triggered
    std::array<double, 3> bump_amplitudes{};
    std::array<double, 3> exponents{};  // 2 + mu_{n,omega_used}^{1/3}
    DecayProfile profile;
    // exact moment int t e^{-exponents[n-1] t} chi(t) dt (closed form)
    [[nodiscard]] double moment_residual(int n) const;
};
ChiOmega make_chi_omega(double omega);

// Competitor U = sum_n (u_n + chi_omega(t) f_{n,omega}(t) v_n) b_{n,omega}:
// matches (u, v) data at t = 0 and removes the slope.  Energies are exact
// spectral sums; the bound splits into Q-forms plus the surviving cross terms.
struct DerivativeRemovalResult {
    double omega = 0.0;
    double g_input = 0.0;       // t-constant extension of u (equality case)
    double g_competitor = 0.0;  // exact spectral G(U,0)
    double gap = 0.0;           // g_competitor - g_input
    double gap_bound = 0.0;     // sum v_n^2 Q_{mu_n - 4}(g_n) + cross terms
    double bound_general = 0.0;   // g_input + C_general * (|u''||v'| + |v'|^2)
    double bound_improved = 0.0;  // low modes removed from the u-norm
    double c_general = 0.0;
    double c_improved = 0.0;  // NaN when no admissible opening is near omega
};
DerivativeRemovalResult derivative_removal_gap(const std::vector<double>& u_coeffs,
                                               const std::vector<double>& v_coeffs,
                                               double omega,
                                               const num::ExpWeightedRule& rule);
CompetitorField derivative_removal_competitor_field(
    const std::vector<double>& u_coeffs, const std::vector<double>& v_coeffs,
    double omega, int n_t, int n_theta, double t_max);

// ------------------------------------------------- biharmonic comparison ----

// Fourier-side comparison for the biharmonic extension of cylinder data
// (x_n = c_n[v(0,.)], y_n = c_n[dt v(0,.)]).
struct BiharmonicRow {
    int n = 0;
    double lhs = 0.0;    // L_n = 4n^2(|n|-2)|x|^2 + 4|n|(|n|-2)Re(xy) + 4(|n|-1)|y|^2
    double rhs = 0.0;    // 0.9 n^2(n^2-4)|x|^2 + (12|n|-4)|y|^2   (|n| >= 2)
    double ratio = 0.0;  // lhs/rhs when rhs > 0
};
struct BiharmonicComparison {
    int n_max = 0;
    std::vector<BiharmonicRow> rows;
    double g_extension_minus_pi = 0.0;  // pi sum L_n (upper bound on G(v,0)-pi)
    double g_trace_minus_pi = 0.0;      // pi sum n^2(n^2-4)|x_n|^2
    double delta_l = 0.0;               // pi sum (L_n - n^2(n^2-4)|x_n|^2)
    double rhs_total = 0.0;  // -0.1 (g_trace-pi)+ + 6||dt dth v||^2 - 2||dt v||^2
    bool inequality_holds = false;
};
// x, y sized 2K+1 with index n + K
BiharmonicComparison biharmonic_comparison(const std::vector<cplx>& x,
                                           const std::vector<cplx>& y);

// --------------------------------------------------------- stitched report ----

// Support condition with tolerance c = 0.05 Theta: the support of the data
// must contain the shrunken model support and stay inside the inflated one.
struct SupportCondition {
    bool holds = false;
    double c = 0.0;
    std::vector<modes::Interval> support;  // measured support components
    std::string violation;                 // empty when the condition holds
};
SupportCondition check_support_condition(const std::vector<double>& u_samples,
                                         double theta_opening);

struct EpiReport {
    double theta_opening = 0.0;
    SupportCondition support;
    double g_input = 0.0;       // G of the t-constant extension of the data
    double g_competitor = 0.0;  // stitched competitor energy
    double eta_hat = 0.0;       // (g_input - g_comp) / (g_input - Theta/2)+
    double w_at_1 = 0.0, w_at_e_inv = 0.0;  // taken as inputs
    bool hypothesis_w_at_1 = false;         // W(u,1) >= Theta/2
    double decay_lhs = 0.0;  // W(u, 1/e) - Theta/2
    double decay_rhs = 0.0;  // (1 - eta_hat) (W(u,1) - Theta/2)
    bool decay_holds = false;
    CompetitorField competitor;
    std::string notes;
};
// u, v: angular data at the unit circle (v = dt of the cylinder lift at t=0)
EpiReport epiperimetric_report(const std::function<double(double)>& u,
                               const std::function<double(double)>& v,
                               double theta_opening, double w_at_1,
                               double w_at_e_inv, const num::ExpWeightedRule& rule);

}  // namespace fbl::epi
