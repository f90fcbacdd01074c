#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fbl/epiperimetric.hpp"

namespace fbl::epi {

using num::pi;

// ------------------------------------------------------------------ q_form ----

double q_form(const DecayProfile& profile, double lambda, double c0, double t_end,
              int nodes) {
    double T = std::max(profile.support_end, t_end);
    if (nodes % 2 == 0) ++nodes;
    const auto rule = num::make_exp_rule(2.0, T, nodes);
    const double body = rule.integrate([&](double t) {
        return c0 * num::sq(profile.d2(t)) + 2.0 * num::sq(profile.d1(t)) +
               lambda * num::sq(profile.f(t));
    });
    // past T the profile is constant: only the lambda f^2 term survives
    const double tail = rule.tail_unit() * lambda * num::sq(profile.f(T));
    return body + tail;
}

// -------------------------------------------------------------- compute_c0 ----

C0Result compute_c0(const std::vector<double>& omega_grid, int n_max) {
    if (n_max < 32) throw std::invalid_argument("compute_c0: n_max must be >= 32");
    // base-opening norms ||b_n||^2 on (0, pi); openings scale by (omega/pi)^2
    std::vector<double> base_norm(n_max + 1, 0.0);
    double c_bound = 8.0;  // ||b_n||^2 mu_n <= c observed; tail uses the max
    for (int n = 1; n <= n_max; ++n) {
        const auto mode = modes::buckling_mode(n, pi);
        std::vector<double> sq(mode.samples.size());
        for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = num::sq(mode.samples[k]);
        const double h = pi / (static_cast<double>(sq.size()) - 1.0);
        base_norm[n] = num::simpson_samples(sq, h);
        c_bound = std::max(c_bound, base_norm[n] * modes::buckling_eigenvalue(n, pi));
    }
    double partial = 0.0;
    for (int n = 1; n <= n_max; ++n) partial += base_norm[n];
    // sum_{n > n_max} ||b_n||^2 <= c sum 1/mu_n <= c sum_{n>n_max} 1/n^2 <= c/n_max
    const double base_tail = c_bound / n_max;

    C0Result out;
    out.n_max = n_max;
    for (double omega : omega_grid) {
        if (!(omega > 0.0) || omega > 2.0 * pi + 1e-12)
            throw std::invalid_argument("compute_c0: omega outside (0, 2pi]");
        const double s = num::sq(omega / pi) * (partial + base_tail);
        if (s > out.value) {
            out.value = s;
            out.omega_at_sup = omega;
            out.tail_margin = num::sq(omega / pi) * base_tail;
        }
    }
    return out;
}

double default_c0() {
    static const double cached = [] {
        std::vector<double> grid;
        for (int k = 0; k <= 15; ++k)
            grid.push_back(0.5 * pi + (1.5 * pi) * k / 15.0);
        return compute_c0(grid, 64).value;
    }();
    return cached;
}

// ----------------------------------------------------------------- ChiEps ----

ChiEps::ChiEps(double e) : eps(e) {
    if (!(e > 0.0) || e >= 1.0 / 9.0)
        throw std::invalid_argument("ChiEps: eps must lie in (0, 1/9)");
}
double ChiEps::value(double t) const {
    return (1.0 - 9.0 * eps) + 9.0 * eps * (1.0 + t) * std::exp(-t);
}
double ChiEps::d1(double t) const { return -9.0 * eps * t * std::exp(-t); }
double ChiEps::d2(double t) const { return -9.0 * eps * (1.0 - t) * std::exp(-t); }

double ChiEps::equilibrium_residual() const {
    // int e^{-2t}(chi - (1-eps)) = 9 eps int (1+t) e^{-3t} - 8 eps int e^{-2t};
    // both factors are polynomial against their weights, so the product rule
    // reproduces them to machine precision
    const auto rule3 = num::make_exp_rule(3.0, 40.0, 401);
    const auto rule2 = num::make_exp_rule(2.0, 40.0, 401);
    const double first = rule3.integrate([](double t) { return 1.0 + t; });
    const double second = rule2.integrate([](double) { return 1.0; });
    return 9.0 * eps * first - 8.0 * eps * second;
}

DecayProfile ChiEps::as_profile() const {
    DecayProfile p;
    const double e = eps;
    p.f = [e](double t) {
        return (1.0 - 9.0 * e) + 9.0 * e * (1.0 + t) * std::exp(-t);
    };
    p.d1 = [e](double t) { return -9.0 * e * t * std::exp(-t); };
    p.d2 = [e](double t) { return -9.0 * e * (1.0 - t) * std::exp(-t); };
    p.f0 = 1.0;
    p.fp0 = 0.0;
    p.compact_support = false;
    p.support_end = 0.0;
    return p;
}

// ------------------------------------------------------------- single mode ----

namespace {

struct SectorConstants {
    double k1 = 0.0;  // int (b'' s + b')^2
    double k2 = 0.0;  // int s^2 (b'' s + 2 b')^2
    double k3 = 0.0;  // int s^2 (b'' s + 2 b') b'
    double k4 = 0.0;  // int s^2 b'^2
    double grad = 0.0;  // int b'^2 (should be 1)
    double curv = 0.0;  // int b''^2 (= mu at the critical opening)
};

SectorConstants sector_constants(const modes::BucklingMode& mode) {
    const int n_pts = 4097;
    const double h = mode.omega / (n_pts - 1);
    std::vector<double> a1(n_pts), a2(n_pts), a3(n_pts), a4(n_pts), g(n_pts),
        c(n_pts);
    for (int k = 0; k < n_pts; ++k) {
        const double s = k * h;
        const double b1 = mode.d1(s);
        const double b2 = mode.d2(s);
        a1[k] = num::sq(b2 * s + b1);
        a2[k] = num::sq(s) * num::sq(b2 * s + 2.0 * b1);
        a3[k] = num::sq(s) * (b2 * s + 2.0 * b1) * b1;
        a4[k] = num::sq(s * b1);
        g[k] = num::sq(b1);
        c[k] = num::sq(b2);
    }
    SectorConstants sc;
    sc.k1 = num::simpson_samples(a1, h);
    sc.k2 = num::simpson_samples(a2, h);
    sc.k3 = num::simpson_samples(a3, h);
    sc.k4 = num::simpson_samples(a4, h);
    sc.grad = num::simpson_samples(g, h);
    sc.curv = num::simpson_samples(c, h);
    return sc;
}

double f_of_delta(double theta, double d) {
    return theta * d + 4.0 * (std::pow(1.0 + d, -3.0) - std::pow(1.0 + d, -1.0));
}

}  // namespace

SingleModeResult single_mode_energy_gap(double theta_opening, double a,
                                        double omega, double eps,
                                        const num::ExpWeightedRule& rule) {
    const int icrit = modes::critical_mode_index(theta_opening);
    const double delta0 = omega / theta_opening - 1.0;
    const ChiEps chi(eps);
    const auto mode = modes::buckling_mode(icrit, theta_opening);
    const SectorConstants sc = sector_constants(mode);

    SingleModeResult res;
    res.theta_opening = theta_opening;
    res.omega = omega;
    res.a = a;
    res.eps = eps;
    res.delta0 = delta0;

    const double mu_omega = modes::buckling_eigenvalue(icrit, omega);
    res.g_input = 0.5 * (omega + a * a * (mu_omega - 4.0));

    const double amp2 = a * a * (1.0 + delta0);  // A^2
    res.g_competitor = rule.integrate([&](double t) {
        const double d = delta0 * chi.value(t);
        const double d1 = delta0 * chi.d1(t);
        const double d2 = delta0 * chi.d2(t);
        const double w = 1.0 + d;
        const double tt = amp2 * (num::sq(d1) * num::sq(d1) * sc.k2 / (w * w * w) -
                                  2.0 * num::sq(d1) * d2 * sc.k3 / (w * w) +
                                  num::sq(d2) * sc.k4 / w);
        const double tth = 2.0 * amp2 * num::sq(d1) * sc.k1 / (w * w * w);
        const double angular =
            amp2 * (sc.curv / (w * w * w) - 4.0 * sc.grad / w);
        return tt + tth + angular + w * theta_opening;
    });
    // tail: chi has settled, integrand constant
    {
        const double d = delta0 * chi.value(rule.t_end);
        const double w = 1.0 + d;
        res.g_competitor += rule.tail_unit() *
                            (amp2 * (sc.curv / (w * w * w) - 4.0 * sc.grad / w) +
                             w * theta_opening);
    }

    res.gap = res.g_competitor - res.g_input;
    const double excess = res.g_input - 0.5 * theta_opening;
    res.gap_fraction = excess > 0.0 ? (res.g_input - res.g_competitor) / excess : 0.0;

    // F_eps''(0) by central differences on the closed-form reduction
    {
        const auto dense = num::make_exp_rule(2.0, 40.0, 32769);
        auto f_eps = [&](double d) {
            const double fd = f_of_delta(theta_opening, d);
            return dense.integrate([&](double t) {
                       return f_of_delta(theta_opening, d * chi.value(t));
                   }) -
                   (1.0 - eps) * fd * 0.5;
        };
        const double h = 1e-3;
        res.f_dd_numeric = (f_eps(h) - 2.0 * f_eps(0.0) + f_eps(-h)) / (h * h);
        res.f_dd_closed = -20.0 * eps * (1.0 - 45.0 * eps / 16.0);
    }
    return res;
}

CompetitorField single_mode_competitor_field(double theta_opening, double a,
                                             double omega, double eps, int n_t,
                                             int n_theta, double t_max) {
    const int icrit = modes::critical_mode_index(theta_opening);
    const double delta0 = omega / theta_opening - 1.0;
    const ChiEps chi(eps);
    const auto mode = modes::buckling_mode(icrit, theta_opening);
    const double amp = a * std::sqrt(1.0 + delta0);

    auto eval = [&](double t, double theta) {
        const double w = 1.0 + delta0 * chi.value(t);
        const double s = theta / w;
        if (s <= 0.0 || s >= theta_opening) return 0.0;
        return amp * mode.value(s);
    };
    CompetitorField cf;
    cf.construction = "single-mode";
    cf.field = weiss::CylinderField::from_function(eval, t_max, n_t, n_theta);

    const auto data_mode = modes::buckling_mode(icrit, omega);
    cf.boundary_u.resize(n_theta);
    cf.boundary_v.assign(n_theta, 0.0);
    const double dth = 2.0 * pi / n_theta;
    double verr = 0.0;
    for (int j = 0; j < n_theta; ++j) {
        const double th = (j + 0.5) * dth;
        const double want =
            (th > 0.0 && th < omega) ? a * data_mode.value(th) : 0.0;
        cf.boundary_u[j] = want;
        verr = std::max(verr, std::abs(eval(0.0, th) - want));
    }
    cf.boundary_value_error = verr;
    // slope: chi'(0) = 0, so dt U(0,.) = 0 analytically; measure discretely
    double serr = 0.0;
    const double dtb = 1e-5;
    for (int j = 0; j < n_theta; ++j) {
        const double th = (j + 0.5) * dth;
        serr = std::max(serr, std::abs(eval(dtb, th) - eval(0.0, th)) / dtb);
    }
    cf.boundary_slope_error = serr;
    return cf;
}

DoubleSectorResult double_sector_competitor(double a1, double a2, double omega1,
                                            double omega2, double beta, double eps,
                                            const num::ExpWeightedRule& rule) {
    if (omega1 + omega2 > 2.0 * pi + 1e-12 || beta < 0.0 ||
        omega1 + omega2 + beta > 2.0 * pi + 1e-12)
        throw std::invalid_argument("double_sector: sectors do not fit the circle");
    const double gap_arc = 2.0 * pi - omega1 - omega2;
    // chi_eps is decreasing, so the limit value is the worst case
    const double chi_inf = 1.0 - 9.0 * eps;
    const bool disjoint = gap_arc * chi_inf >= gap_arc - beta - 1e-14;
    if (!disjoint)
        throw std::runtime_error(
            "double_sector: supports overlap (eps too large for this gap)");

    DoubleSectorResult res;
    res.omega1 = omega1;
    res.omega2 = omega2;
    res.beta = beta;
    res.a1 = a1;
    res.a2 = a2;
    res.eps = eps;
    res.supports_disjoint = disjoint;

    const auto part1 = single_mode_energy_gap(pi, a1, omega1, eps, rule);
    const auto part2 = single_mode_energy_gap(pi, a2, omega2, eps, rule);
    res.g_part1 = part1.g_competitor;
    res.g_part2 = part2.g_competitor;
    res.g_competitor = part1.g_competitor + part2.g_competitor;
    res.g_input = part1.g_input + part2.g_input;
    res.gap = res.g_competitor - res.g_input;
    const double excess = res.g_input - pi;
    res.gap_fraction = excess > 0.0 ? (res.g_input - res.g_competitor) / excess : 0.0;

    // sampled stitched field: sector 2 reflected about its far edge
    const int icrit = modes::critical_mode_index(pi);
    const auto mode = modes::buckling_mode(icrit, pi);
    const ChiEps chi(eps);
    const double d01 = omega1 / pi - 1.0, d02 = omega2 / pi - 1.0;
    const double A1 = a1 * std::sqrt(1.0 + d01), A2 = a2 * std::sqrt(1.0 + d02);
    const double pivot = omega1 + beta + omega2;
    auto eval = [&, A1, A2](double t, double theta) {
        const double c = chi.value(t);
        const double w1 = 1.0 + d01 * c, w2 = 1.0 + d02 * c;
        const double s1 = theta / w1;
        if (s1 > 0.0 && s1 < pi) return A1 * mode.value(s1);
        const double s2 = (pivot - theta) / w2;
        if (s2 > 0.0 && s2 < pi) return A2 * mode.value(s2);
        return 0.0;
    };
    res.field.construction = "double-sector";
    res.field.field = weiss::CylinderField::from_function(eval, 8.0, 257, 512);
    const int n_theta = 512;
    const double dth = 2.0 * pi / n_theta;
    res.field.boundary_u.resize(n_theta);
    res.field.boundary_v.assign(n_theta, 0.0);
    double verr = 0.0;
    const auto m1 = modes::buckling_mode(icrit, omega1);
    const auto m2 = modes::buckling_mode(icrit, omega2);
    for (int j = 0; j < n_theta; ++j) {
        const double th = (j + 0.5) * dth;
        double want = 0.0;
        if (th > 0.0 && th < omega1) want = a1 * m1.value(th);
        const double mirrored = pivot - th;
        if (mirrored > 0.0 && mirrored < omega2) want = a2 * m2.value(mirrored);
        res.field.boundary_u[j] = want;
        verr = std::max(verr, std::abs(eval(0.0, th) - want));
    }
    res.field.boundary_value_error = verr;
    double serr = 0.0;
    for (int j = 0; j < n_theta; ++j) {
        const double th = (j + 0.5) * dth;
        serr = std::max(serr, std::abs(eval(1e-5, th) - eval(0.0, th)) / 1e-5);
    }
    res.field.boundary_slope_error = serr;
    return res;
}

// -------------------------------------------------------- deletion profiles ----

DecayProfile positive_removal_profile(double eps) {
    if (!(eps > 0.0) || eps >= 1.0)
        throw std::invalid_argument("positive_removal_profile: eps in (0,1)");
    DecayProfile p;
    p.f = [eps](double t) { return (1.0 + eps * t) * std::exp(-eps * t); };
    p.d1 = [eps](double t) { return -eps * eps * t * std::exp(-eps * t); };
    p.d2 = [eps](double t) {
        return -eps * eps * (1.0 - eps * t) * std::exp(-eps * t);
    };
    p.f0 = 1.0;
    p.fp0 = 0.0;
    return p;
}

DecayProfile negative_removal_profile(double eps) {
    if (!(eps > 0.0) || eps >= 1.0)
        throw std::invalid_argument("negative_removal_profile: eps in (0,1)");
    DecayProfile p;
    p.f = [eps](double t) { return eps * t + std::exp(-eps * t); };
    p.d1 = [eps](double t) { return eps * (1.0 - std::exp(-eps * t)); };
    p.d2 = [eps](double t) { return eps * eps * std::exp(-eps * t); };
    p.f0 = 1.0;
    p.fp0 = 0.0;
    return p;
}

DecayProfile cutoff_profile(const DecayProfile& base, double T, bool to_zero) {
    if (!(T > 1.0)) throw std::invalid_argument("cutoff_profile: need T > 1");
    // c(t): 1 before T-1, quintic smoothstep down to 0 at T
    auto c0 = [T](double t) {
        if (t <= T - 1.0) return 1.0;
        if (t >= T) return 0.0;
        return 1.0 - num::smoothstep5(t - (T - 1.0));
    };
    auto c1 = [T](double t) {
        if (t <= T - 1.0 || t >= T) return 0.0;
        return -num::smoothstep5_d1(t - (T - 1.0));
    };
    auto c2 = [T](double t) {
        if (t <= T - 1.0 || t >= T) return 0.0;
        return -num::smoothstep5_d2(t - (T - 1.0));
    };
    DecayProfile p;
    const auto f = base.f;
    const auto f1 = base.d1;
    const auto f2 = base.d2;
    if (to_zero) {
        p.f = [=](double t) { return c0(t) * f(t); };
        p.d1 = [=](double t) { return c1(t) * f(t) + c0(t) * f1(t); };
        p.d2 = [=](double t) {
            return c2(t) * f(t) + 2.0 * c1(t) * f1(t) + c0(t) * f2(t);
        };
        p.compact_support = true;
    } else {
        p.f = [=](double t) { return 1.0 + c0(t) * (f(t) - 1.0); };
        p.d1 = [=](double t) { return c1(t) * (f(t) - 1.0) + c0(t) * f1(t); };
        p.d2 = [=](double t) {
            return c2(t) * (f(t) - 1.0) + 2.0 * c1(t) * f1(t) + c0(t) * f2(t);
        };
        p.compact_support = false;
    }
    p.f0 = base.f0;
    p.fp0 = base.fp0;
    p.support_end = T;
    return p;
}

PositiveSearchResult positive_profile_search(const num::ExpWeightedRule& rule) {
    (void)rule;
    const double c0 = default_c0();
    const std::vector<double> eps_grid = {0.05, 0.1, 0.2};
    const std::vector<double> t_grid = {8.0, 10.0, 12.0};
    const std::vector<double> lambda_grid = {1.0, 2.0, 5.0, 10.0, 100.0, 1e4};

    PositiveSearchResult best;
    best.eta = -std::numeric_limits<double>::infinity();
    for (double eps : eps_grid) {
        // admit only rates whose uncut profile meets the quadratic
        // improvement estimate; for aggressive rates the bending term
        // (~ c0 eps^4) eats the mass gain (~ eps^2/4) and the certificate
        // below would be reported false
        const double q1_uncut = q_form(positive_removal_profile(eps), 1.0, c0);
        if (q1_uncut > (1.0 - num::sq(eps) / 4.0) * 0.5) continue;
        for (double T : t_grid) {
            const auto profile = cutoff_profile(positive_removal_profile(eps), T,
                                                /*to_zero=*/true);
            double eta = std::numeric_limits<double>::infinity();
            std::vector<ProfileSearchRow> rows;
            for (double lam : lambda_grid) {
                ProfileSearchRow row;
                row.lambda = lam;
                row.q_value = q_form(profile, lam, c0);
                row.q_constant = 0.5 * lam;
                row.margin = row.q_constant - row.q_value;
                eta = std::min(eta, row.margin / row.q_constant);
                rows.push_back(row);
            }
            if (eta > best.eta) {
                best.eta = eta;
                best.eps = eps;
                best.t_cut = T;
                best.profile = profile;
                best.rows = std::move(rows);
            }
        }
    }
    if (best.rows.empty())
        throw std::runtime_error(
            "positive_profile_search: no decay rate passes the quadratic "
            "improvement estimate");
    // sub-estimate (i): untruncated profile at lambda = 1
    const auto raw = positive_removal_profile(best.eps);
    const double q1_raw = q_form(raw, 1.0, c0);
    best.sub_i_lhs = q1_raw;
    best.sub_i_rhs = (1.0 - num::sq(best.eps) / 4.0) * 0.5;
    // sub-estimate (ii): truncation cost is exponentially small in T
    double c_est = 0.0;
    for (double T : t_grid) {
        const auto prof = cutoff_profile(raw, T, true);
        const double ratio = q_form(prof, 1.0, c0) / q1_raw;
        c_est = std::max(c_est, std::abs(ratio - 1.0) * std::exp(2.0 * T));
    }
    best.sub_ii_c = c_est;
    best.sub_ii_lhs = q_form(cutoff_profile(raw, best.t_cut, true), 1.0, c0);
    best.sub_ii_rhs = (1.0 + c_est * std::exp(-2.0 * best.t_cut)) * q1_raw;
    return best;
}

NegativeSearchResult negative_profile_search(const num::ExpWeightedRule& rule) {
    (void)rule;
    const double c0 = default_c0();
    const std::vector<double> eps_grid = {0.02, 0.05, 0.1};
    const std::vector<double> lambda_grid = {-1.0, -2.0, -4.0, -8.0};
    const double T = 12.0;

    NegativeSearchResult best;
    double best_min = -std::numeric_limits<double>::infinity();
    for (double eps : eps_grid) {
        const auto profile =
            cutoff_profile(negative_removal_profile(eps), T, /*to_zero=*/true);
        double worst = std::numeric_limits<double>::infinity();
        std::vector<ProfileSearchRow> rows;
        for (double lam : lambda_grid) {
            ProfileSearchRow row;
            row.lambda = lam;
            row.q_value = q_form(profile, lam, c0);
            row.q_constant = 0.5 * lam;
            row.margin = row.q_constant - row.q_value;
            worst = std::min(worst, row.margin);
            rows.push_back(row);
        }
        if (worst > best_min) {
            best_min = worst;
            best.eps = eps;
            best.t_cut = T;
            best.profile = profile;
            best.rows = std::move(rows);
        }
    }
    const double e = best.eps;
    best.mass = e * e / 4.0 + 2.0 * e / num::sq(2.0 + e) + 1.0 / (2.0 + 2.0 * e);
    best.mass_expansion = 0.5 + e * e / 4.0;
    best.mass_lower_bound = 0.5 * (1.0 + e * e / 3.0);
    return best;
}

// ------------------------------------------------------- derivative removal ----

DecayProfile removal_profile(int n, double omega) {
    const double mu = modes::buckling_eigenvalue(n, omega);
    const double c = std::cbrt(mu);
    DecayProfile p;
    p.f = [c](double t) { return t * std::exp(-c * t); };
    p.d1 = [c](double t) { return (1.0 - c * t) * std::exp(-c * t); };
    p.d2 = [c](double t) { return c * (c * t - 2.0) * std::exp(-c * t); };
    p.f0 = 0.0;
    p.fp0 = 1.0;
    return p;
}

namespace {

// dense polynomials, ascending coefficients
using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

// p((t - a)/w) expanded in t
Poly poly_shift_scale(const Poly& p, double a, double w) {
    const Poly lin = {-a / w, 1.0 / w};
    Poly out = {0.0};
    Poly pw = {1.0};
    for (double coeff : p) {
        Poly term = pw;
        for (double& c : term) c *= coeff;
        if (term.size() > out.size()) out.resize(term.size(), 0.0);
        for (std::size_t i = 0; i < term.size(); ++i) out[i] += term[i];
        pw = poly_mul(pw, lin);
    }
    return out;
}

double poly_eval(const Poly& p, double x) {
    double acc = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

Poly poly_derivative(const Poly& p) {
    if (p.size() <= 1) return {0.0};
    Poly out(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i)
        out[i - 1] = p[i] * static_cast<double>(i);
    return out;
}

// int_lo^hi t * p(t) * e^{-k t} dt via exact exponential moments
double weighted_first_moment(const Poly& p, double lo, double hi, double k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
        acc += p[j] * num::exp_moment(static_cast<int>(j) + 1, lo, hi, k);
    return acc;
}

struct ChiOmegaPieces {
    // base plateau [0, 1/8], descent polynomial on [1/8, 7/8], zero beyond;
    // bumps are polynomials supported on [c_i - 1/8, c_i + 1/8]
    Poly descent, descent_d1, descent_d2;
    std::array<Poly, 3> bump, bump_d1, bump_d2;
    std::array<double, 3> center{};
};

ChiOmegaPieces make_pieces() {
    ChiOmegaPieces pc;
    const Poly s5 = {0.0, 0.0, 0.0, 10.0, -15.0, 6.0};
    Poly descent_in_x = {1.0};  // 1 - s5(x)
    descent_in_x.resize(s5.size(), 0.0);
    for (std::size_t i = 0; i < s5.size(); ++i) descent_in_x[i] -= s5[i];
    pc.descent = poly_shift_scale(descent_in_x, 0.125, 0.75);
    pc.descent_d1 = poly_derivative(pc.descent);
    pc.descent_d2 = poly_derivative(pc.descent_d1);
    const Poly b_of_s = {1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0};  // (1 - s^2)^3
    for (int i = 0; i < 3; ++i) {
        pc.center[i] = 0.25 * (i + 1);
        pc.bump[i] = poly_shift_scale(b_of_s, pc.center[i], 0.125);
        pc.bump_d1[i] = poly_derivative(pc.bump[i]);
        pc.bump_d2[i] = poly_derivative(pc.bump_d1[i]);
    }
    return pc;
}

const ChiOmegaPieces& pieces() {
    static const ChiOmegaPieces pc = make_pieces();
    return pc;
}

double chi_moment(const ChiOmegaPieces& pc, const std::array<double, 3>& amps,
                  double k) {
    double acc = num::exp_moment(1, 0.0, 0.125, k);
    acc += weighted_first_moment(pc.descent, 0.125, 0.875, k);
    for (int i = 0; i < 3; ++i)
        acc -= amps[i] * weighted_first_moment(pc.bump[i], pc.center[i] - 0.125,
                                               pc.center[i] + 0.125, k);
    return acc;
}

}  // namespace

double ChiOmega::moment_residual(int n) const {
    if (n < 1 || n > 3)
        throw std::invalid_argument("moment_residual: n must be 1, 2, or 3");
    return chi_moment(pieces(), bump_amplitudes, exponents[n - 1]);
}

ChiOmega make_chi_omega(double omega) {
    if (!(omega > 0.0) || omega > 2.0 * pi + 1e-12)
        throw std::invalid_argument("make_chi_omega: omega outside (0, 2pi]");
    ChiOmega out;
    out.omega = omega;
    out.omega_used = std::max(omega, 0.5 * pi);

    const auto& pc = pieces();
    Eigen::Matrix3d m;
    Eigen::Vector3d rhs;
    for (int n = 1; n <= 3; ++n) {
        const double mu = modes::buckling_eigenvalue(n, out.omega_used);
        const double k = 2.0 + std::cbrt(mu);
        out.exponents[n - 1] = k;
        rhs(n - 1) = num::exp_moment(1, 0.0, 0.125, k) +
                     weighted_first_moment(pc.descent, 0.125, 0.875, k);
        for (int i = 0; i < 3; ++i)
            m(n - 1, i) = weighted_first_moment(pc.bump[i], pc.center[i] - 0.125,
                                                pc.center[i] + 0.125, k);
    }
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
    if (!lu.isInvertible())
        throw std::runtime_error("make_chi_omega: singular moment system");
    const Eigen::Vector3d a = lu.solve(rhs);
    for (int i = 0; i < 3; ++i) out.bump_amplitudes[i] = a(i);

    const std::array<double, 3> amps = out.bump_amplitudes;
    auto raw = [&pc, amps](double t, int deriv) {
        double acc = 0.0;
        if (t < 0.125) {
            acc = (deriv == 0) ? 1.0 : 0.0;
        } else if (t < 0.875) {
            const Poly& p = (deriv == 0)   ? pc.descent
                            : (deriv == 1) ? pc.descent_d1
                                           : pc.descent_d2;
            acc = poly_eval(p, t);
        }
        for (int i = 0; i < 3; ++i) {
            if (t <= pc.center[i] - 0.125 || t >= pc.center[i] + 0.125) continue;
            const Poly& p = (deriv == 0)   ? pc.bump[i]
                            : (deriv == 1) ? pc.bump_d1[i]
                                           : pc.bump_d2[i];
            acc -= amps[i] * poly_eval(p, t);
        }
        return acc;
    };
    out.profile.f = [raw](double t) { return t < 0.875 ? raw(t, 0) : 0.0; };
    out.profile.d1 = [raw](double t) { return t < 0.875 ? raw(t, 1) : 0.0; };
    out.profile.d2 = [raw](double t) { return t < 0.875 ? raw(t, 2) : 0.0; };
    out.profile.f0 = 1.0;
    out.profile.fp0 = 0.0;
    out.profile.compact_support = true;
    out.profile.support_end = 0.875;
    return out;
}

// --------------------------------------------------- derivative removal gap ----

namespace {

// L2 Gram of the base modes on (0, pi); openings rescale it by (omega/pi)^2
const Eigen::MatrixXd& base_gram(int n_modes) {
    static Eigen::MatrixXd cached;
    if (cached.rows() < n_modes) {
        const int n_pts = 4097;
        const double h = pi / (n_pts - 1);
        std::vector<std::vector<double>> samp(n_modes);
        for (int n = 1; n <= n_modes; ++n) {
            const auto mode = modes::buckling_mode(n, pi, n_pts - 1);
            samp[n - 1] = mode.samples;
        }
        cached.resize(n_modes, n_modes);
        std::vector<double> prod(n_pts);
        for (int a = 0; a < n_modes; ++a) {
            for (int b = a; b < n_modes; ++b) {
                for (int k = 0; k < n_pts; ++k) prod[k] = samp[a][k] * samp[b][k];
                cached(a, b) = cached(b, a) = num::simpson_samples(prod, h);
            }
        }
    }
    return cached;
}

// exponential-weight integration split at the cutoff's polynomial breakpoints
double integrate_exp2_breakpoints(const std::function<double(double)>& f,
                                  double t_last, int nodes_per_piece = 257) {
    static const std::array<double, 8> breaks = {0.0,   0.125, 0.25, 0.375,
                                                 0.5,   0.625, 0.75, 0.875};
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const auto rule =
            num::make_exp_rule(2.0, breaks[i + 1] - breaks[i], nodes_per_piece);
        const double lo = breaks[i];
        acc += std::exp(-2.0 * lo) *
               rule.integrate([&](double s) { return f(lo + s); });
    }
    const auto tail_rule = num::make_exp_rule(2.0, t_last - 0.875, 513);
    acc += std::exp(-2.0 * 0.875) *
           tail_rule.integrate([&](double s) { return f(0.875 + s); });
    return acc;
}

}  // namespace

DerivativeRemovalResult derivative_removal_gap(const std::vector<double>& u_coeffs,
                                               const std::vector<double>& v_coeffs,
                                               double omega,
                                               const num::ExpWeightedRule& rule) {
    const int n_modes =
        static_cast<int>(std::max(u_coeffs.size(), v_coeffs.size()));
    if (n_modes == 0)
        throw std::invalid_argument("derivative_removal_gap: empty data");
    auto uc = [&](int n) {
        return n <= static_cast<int>(u_coeffs.size()) ? u_coeffs[n - 1] : 0.0;
    };
    auto vc = [&](int n) {
        return n <= static_cast<int>(v_coeffs.size()) ? v_coeffs[n - 1] : 0.0;
    };

    const auto chi = make_chi_omega(omega);
    std::vector<double> mu(n_modes + 1, 0.0);
    std::vector<DecayProfile> g(n_modes + 1);
    for (int n = 1; n <= n_modes; ++n) {
        mu[n] = modes::buckling_eigenvalue(n, omega);
        const auto fn = removal_profile(n, omega);
        const auto cf = chi.profile.f, cd1 = chi.profile.d1, cd2 = chi.profile.d2;
        const auto ff = fn.f, fd1 = fn.d1, fd2 = fn.d2;
        g[n].f = [cf, ff](double t) { return cf(t) * ff(t); };
        g[n].d1 = [cf, cd1, ff, fd1](double t) {
            return cd1(t) * ff(t) + cf(t) * fd1(t);
        };
        g[n].d2 = [cf, cd1, cd2, ff, fd1, fd2](double t) {
            return cd2(t) * ff(t) + 2.0 * cd1(t) * fd1(t) + cf(t) * fd2(t);
        };
        g[n].f0 = 0.0;
        g[n].fp0 = 1.0;
        g[n].compact_support = true;
        g[n].support_end = 0.875;
    }

    const Eigen::MatrixXd gram =
        num::sq(omega / pi) * base_gram(n_modes).topLeftCorner(n_modes, n_modes);

    DerivativeRemovalResult res;
    res.omega = omega;
    double const_part = omega;
    for (int n = 1; n <= n_modes; ++n)
        const_part += (mu[n] - 4.0) * num::sq(uc(n));
    res.g_input = 0.5 * const_part;

    // time-dependent part of the exact spectral energy (vanishes past 7/8)
    auto integrand = [&](double t) {
        double acc = 0.0;
        for (int n = 1; n <= n_modes; ++n) {
            const double vn = vc(n);
            if (vn == 0.0) continue;
            const double gn = g[n].f(t);
            const double gn1 = g[n].d1(t);
            const double gn2 = g[n].d2(t);
            acc += 2.0 * num::sq(vn * gn1) +
                   (mu[n] - 4.0) * (2.0 * uc(n) * gn * vn + num::sq(gn * vn));
            for (int m = 1; m <= n_modes; ++m) {
                const double vm = vc(m);
                if (vm == 0.0) continue;
                acc += vm * g[m].d2(t) * vn * gn2 * gram(m - 1, n - 1);
            }
        }
        return acc;
    };
    res.g_competitor =
        res.g_input + integrate_exp2_breakpoints(integrand, rule.t_end);
    res.gap = res.g_competitor - res.g_input;

    // rigorous split: Q-forms on the diagonal plus the surviving cross terms
    const double c0 = default_c0();
    double bound = 0.0;
    for (int n = 1; n <= n_modes; ++n) {
        const double vn = vc(n);
        if (vn == 0.0) continue;
        bound += num::sq(vn) * q_form(g[n], mu[n] - 4.0, c0);
        // exact cross term; zero for n <= 3 by the moment construction
        const double cross =
            chi_moment(pieces(), chi.bump_amplitudes, 2.0 + std::cbrt(mu[n]));
        bound += 2.0 * (mu[n] - 4.0) * uc(n) * vn * cross;
    }
    res.gap_bound = bound;

    double u_curv = 0.0, v_grad = 0.0;
    for (int n = 1; n <= n_modes; ++n) {
        u_curv += mu[n] * num::sq(uc(n));
        v_grad += num::sq(vc(n));
    }
    const double denom_general = std::sqrt(u_curv) * std::sqrt(v_grad) + v_grad;
    res.c_general = denom_general > 0.0 ? bound / denom_general : 0.0;
    res.bound_general = res.g_input + res.gap_bound;

    // improved constant: subtract the low modes when omega is near an
    // admissible opening
    res.c_improved = std::numeric_limits<double>::quiet_NaN();
    res.bound_improved = res.bound_general;
    for (double theta : modes::admissible_openings()) {
        if (std::abs(omega - theta) > 0.1 * theta) continue;
        const int icrit = modes::critical_mode_index(theta);
        double u_curv_hi = 0.0;
        for (int n = icrit + 1; n <= n_modes; ++n)
            u_curv_hi += mu[n] * num::sq(uc(n));
        const double denom =
            std::sqrt(u_curv_hi) * std::sqrt(v_grad) + v_grad;
        res.c_improved = denom > 0.0 ? bound / denom : 0.0;
        break;
    }
    return res;
}

CompetitorField derivative_removal_competitor_field(
    const std::vector<double>& u_coeffs, const std::vector<double>& v_coeffs,
    double omega, int n_t, int n_theta, double t_max) {
    const int n_modes =
        static_cast<int>(std::max(u_coeffs.size(), v_coeffs.size()));
    const auto chi = make_chi_omega(omega);
    std::vector<modes::BucklingMode> basis;
    std::vector<DecayProfile> fprof;
    basis.reserve(n_modes);
    for (int n = 1; n <= n_modes; ++n) {
        basis.push_back(modes::buckling_mode(n, omega));
        fprof.push_back(removal_profile(n, omega));
    }
    auto uc = [&](int n) {
        return n <= static_cast<int>(u_coeffs.size()) ? u_coeffs[n - 1] : 0.0;
    };
    auto vcf = [&](int n) {
        return n <= static_cast<int>(v_coeffs.size()) ? v_coeffs[n - 1] : 0.0;
    };
    auto eval = [&](double t, double theta) {
        if (theta <= 0.0 || theta >= omega) return 0.0;
        double acc = 0.0;
        const double ct = chi.profile.f(t);
        for (int n = 1; n <= n_modes; ++n) {
            const double cn = uc(n) + ct * fprof[n - 1].f(t) * vcf(n);
            acc += cn * basis[n - 1].value(theta);
        }
        return acc;
    };
    CompetitorField cf;
    cf.construction = "derivative-removal";
    cf.field = weiss::CylinderField::from_function(eval, t_max, n_t, n_theta);
    const double dth = 2.0 * pi / n_theta;
    cf.boundary_u.resize(n_theta);
    cf.boundary_v.resize(n_theta);
    double verr = 0.0, serr = 0.0;
    for (int j = 0; j < n_theta; ++j) {
        const double th = (j + 0.5) * dth;
        double want_u = 0.0, want_v = 0.0;
        if (th > 0.0 && th < omega) {
            for (int n = 1; n <= n_modes; ++n) {
                want_u += uc(n) * basis[n - 1].value(th);
                want_v += vcf(n) * basis[n - 1].value(th);
            }
        }
        cf.boundary_u[j] = want_u;
        cf.boundary_v[j] = want_v;
        verr = std::max(verr, std::abs(eval(0.0, th) - want_u));
        const double dtb = 1e-6;
        const double slope = (eval(dtb, th) - eval(0.0, th)) / dtb;
        serr = std::max(serr, std::abs(slope - want_v));
    }
    cf.boundary_value_error = verr;
    cf.boundary_slope_error = serr;
    return cf;
}

// ---------------------------------------------------- biharmonic comparison ----

BiharmonicComparison biharmonic_comparison(const std::vector<cplx>& x,
                                           const std::vector<cplx>& y) {
    if (x.size() != y.size() || x.size() % 2 == 0)
        throw std::invalid_argument(
            "biharmonic_comparison: x, y must share an odd size 2K+1");
    const int K = (static_cast<int>(x.size()) - 1) / 2;
    BiharmonicComparison out;
    out.n_max = K;

    double sum_l = 0.0, sum_trace = 0.0, y_l2 = 0.0, y_grad = 0.0;
    for (int n = -K; n <= K; ++n) {
        const double an = std::abs(n);
        const double n2 = static_cast<double>(n) * n;
        const cplx xn = x[n + K], yn = y[n + K];
        const double xx = std::norm(xn), yy = std::norm(yn);
        const double cross = (std::conj(xn) * yn).real();
        const double ln = 4.0 * n2 * (an - 2.0) * xx +
                          4.0 * an * (an - 2.0) * cross + 4.0 * (an - 1.0) * yy;
        sum_l += ln;
        sum_trace += n2 * (n2 - 4.0) * xx;
        y_l2 += yy;
        y_grad += n2 * yy;
        if (xx > 0.0 || yy > 0.0) {
            BiharmonicRow row;
            row.n = n;
            row.lhs = ln;
            if (an >= 2.0)
                row.rhs = 0.9 * n2 * (n2 - 4.0) * xx + (12.0 * an - 4.0) * yy;
            else if (an == 1.0)
                row.rhs = -3.0 * xx + 4.0 * yy;
            else
                row.rhs = -2.0 * yy;
            row.ratio = row.rhs != 0.0 ? row.lhs / row.rhs : 0.0;
            out.rows.push_back(row);
        }
    }
    out.g_extension_minus_pi = pi * sum_l;
    out.g_trace_minus_pi = pi * sum_trace;
    out.delta_l = pi * (sum_l - sum_trace);
    out.rhs_total = -0.1 * num::positive_part(out.g_trace_minus_pi) +
                    6.0 * (2.0 * pi * y_grad) - 2.0 * (2.0 * pi * y_l2);
    out.inequality_holds = out.delta_l <= out.rhs_total + 1e-12;
    return out;
}

}  // namespace fbl::epi
