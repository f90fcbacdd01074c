#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fbl/weiss_energy.hpp"

namespace fbl::weiss {

using num::pi;

namespace {

// mask-aware finite differences on the (t, theta) grid: windows shrink to the
// largest same-mask run, theta is periodic, t is not
struct CylDerivs {
    std::vector<double> vt, vtt, vth, vtth, vthth;
};

CylDerivs build_cyl_derivs(const CylinderField& f) {
    const int nt = f.n_t, nj = f.n_theta;
    const double dth = 2.0 * pi / nj;
    CylDerivs d;
    const std::size_t total = f.vals.size();
    d.vt.assign(total, 0.0);
    d.vtt.assign(total, 0.0);
    d.vth.assign(total, 0.0);
    d.vtth.assign(total, 0.0);
    d.vthth.assign(total, 0.0);

    auto state_at = [&](int k, int j) { return f.mask[f.idx(k, (j % nj + nj) % nj)]; };

    auto window_t = [&](int k, int j, std::uint8_t s, int& lo, int& hi) {
        lo = 0;
        while (lo > -2 && k + lo - 1 >= 0 && f.mask[f.idx(k + lo - 1, j)] == s) --lo;
        hi = 0;
        while (hi < 2 && k + hi + 1 < nt && f.mask[f.idx(k + hi + 1, j)] == s) ++hi;
    };
    auto window_th = [&](int k, int j, std::uint8_t s, int& lo, int& hi) {
        lo = 0;
        while (lo > -2 && state_at(k, j + lo - 1) == s) --lo;
        hi = 0;
        while (hi < 2 && state_at(k, j + hi + 1) == s) ++hi;
    };

    auto apply = [&](double x0, double h, int lo, int hi, int m, auto value) {
        const int len = hi - lo + 1;
        if (len < m + 1) return 0.0;
        std::vector<double> x(len);
        for (int k = 0; k < len; ++k) x[k] = x0 + (lo + k) * h;
        const auto w = num::fd_weights(x0, x, m);
        double acc = 0.0;
        for (int k = 0; k < len; ++k) acc += w[k] * value(lo + k);
        return acc;
    };

    for (int k = 0; k < nt; ++k) {
        for (int j = 0; j < nj; ++j) {
            const std::uint8_t s = f.mask[f.idx(k, j)];
            int tlo, thi, hlo, hhi;
            window_t(k, j, s, tlo, thi);
            window_th(k, j, s, hlo, hhi);
            auto in_t = [&](int off) { return f.vals[f.idx(k + off, j)]; };
            auto in_th = [&](int off) {
                return f.vals[f.idx(k, ((j + off) % nj + nj) % nj)];
            };
            d.vt[f.idx(k, j)] = apply(0.0, f.dt, tlo, thi, 1, in_t);
            d.vtt[f.idx(k, j)] = apply(0.0, f.dt, tlo, thi, 2, in_t);
            d.vth[f.idx(k, j)] = apply(0.0, dth, hlo, hhi, 1, in_th);
            d.vthth[f.idx(k, j)] = apply(0.0, dth, hlo, hhi, 2, in_th);
        }
    }
    // mixed: theta-derivative of vt with the same theta windows
    for (int k = 0; k < nt; ++k) {
        for (int j = 0; j < nj; ++j) {
            const std::uint8_t s = f.mask[f.idx(k, j)];
            int hlo, hhi;
            window_th(k, j, s, hlo, hhi);
            auto in_th = [&](int off) {
                return d.vt[f.idx(k, ((j + off) % nj + nj) % nj)];
            };
            d.vtth[f.idx(k, j)] = apply(0.0, dth, hlo, hhi, 1, in_th);
        }
    }
    return d;
}

double compute_growth(const CylinderField& f, const CylDerivs& d) {
    const double dth = 2.0 * pi / f.n_theta;
    double best = 0.0;
    for (int s = 0; s + 1 <= static_cast<int>(f.t_max); ++s) {
        double acc = 0.0;
        for (int k = 0; k < f.n_t; ++k) {
            const double t = k * f.dt;
            if (t < s || t >= s + 1) continue;
            for (int j = 0; j < f.n_theta; ++j) {
                const std::size_t q = f.idx(k, j);
                acc += num::sq(f.vals[q]) + num::sq(d.vt[q]) + num::sq(d.vth[q]) +
                       num::sq(d.vtt[q]) + num::sq(d.vtth[q]) + num::sq(d.vthth[q]);
            }
        }
        acc *= f.dt * dth;
        best = std::max(best, std::sqrt(acc) / (s + 1.0));
    }
    return best;
}

// 5-node Lagrange interpolation of a uniform-grid sample vector
double interp_uniform(const std::vector<double>& g, double dt, int n, double x) {
    int i0 = static_cast<int>(std::lround(x / dt));
    i0 = std::clamp(i0, 2, n - 3);
    std::vector<double> nodes(5);
    for (int k = 0; k < 5; ++k) nodes[k] = (i0 - 2 + k) * dt;
    const auto w = num::fd_weights(x, nodes, 0);
    double acc = 0.0;
    for (int k = 0; k < 5; ++k) acc += w[k] * g[i0 - 2 + k];
    return acc;
}

}  // namespace

CylinderField CylinderField::from_function(
    const std::function<double(double, double)>& v, double t_max, int n_t,
    int n_theta) {
    if (n_t < 16 || n_theta < 16 || !(t_max > 0.0))
        throw std::invalid_argument("CylinderField: bad grid parameters");
    CylinderField f;
    f.n_t = n_t;
    f.n_theta = n_theta;
    f.t_max = t_max;
    f.dt = t_max / (n_t - 1);
    f.vals.resize(static_cast<std::size_t>(n_t) * n_theta);
    f.mask.resize(f.vals.size());
    const double dth = 2.0 * pi / n_theta;
    for (int k = 0; k < n_t; ++k)
        for (int j = 0; j < n_theta; ++j) {
            const double val = v(k * f.dt, (j + 0.5) * dth);
            f.vals[f.idx(k, j)] = val;
            f.mask[f.idx(k, j)] = (val != 0.0) ? 1 : 0;
        }
    f.growth_constant = compute_growth(f, build_cyl_derivs(f));
    return f;
}

CylinderField CylinderField::from_disk(const DiskField& field, double t_max,
                                       int n_t) {
    const PolarGrid& g = field.grid();
    if (std::exp(-t_max) < g.r[0])
        throw std::invalid_argument("from_disk: t_max reaches below resolved shells");
    CylinderField f;
    f.n_t = n_t;
    f.n_theta = g.n_theta;
    f.t_max = t_max;
    f.dt = t_max / (n_t - 1);
    f.vals.resize(static_cast<std::size_t>(n_t) * g.n_theta);
    f.mask.resize(f.vals.size());
    std::vector<double> x(5);
    for (int k = 0; k < n_t; ++k) {
        const double t = k * f.dt;
        const double radius = std::exp(-t);
        const double scale = std::exp(2.0 * t);
        int i0 = std::clamp(g.nearest_shell(radius), 2, g.n_r - 3);
        for (int m = 0; m < 5; ++m) x[m] = g.r[i0 - 2 + m];
        const auto w0 = num::fd_weights(radius, x, 0);
        const int inear = g.nearest_shell(radius);
        for (int j = 0; j < g.n_theta; ++j) {
            double acc = 0.0;
            for (int m = 0; m < 5; ++m) acc += w0[m] * field.value(i0 - 2 + m, j);
            f.vals[f.idx(k, j)] = scale * acc;
            f.mask[f.idx(k, j)] = field.mask(inear, j) ? 1 : 0;
        }
    }
    f.growth_constant = compute_growth(f, build_cyl_derivs(f));
    return f;
}

double cylinder_g(const CylinderField& v, double tau) {
    if (tau < 0.0 || tau > v.t_max - 2.0)
        throw std::invalid_argument("cylinder_g: tau must leave a tail of >= 2");
    const CylDerivs d = build_cyl_derivs(v);
    const double dth = 2.0 * pi / v.n_theta;

    std::vector<double> gt(v.n_t, 0.0);
    for (int k = 0; k < v.n_t; ++k) {
        double acc = 0.0;
        for (int j = 0; j < v.n_theta; ++j) {
            const std::size_t q = v.idx(k, j);
            acc += num::sq(d.vtt[q]) + 2.0 * num::sq(d.vtth[q]) +
                   num::sq(d.vthth[q]) - 4.0 * num::sq(d.vth[q]) +
                   (v.mask[q] ? 1.0 : 0.0);
        }
        gt[k] = acc * dth;
    }
    int nodes = 2 * v.n_t + 1;
    if (nodes % 2 == 0) ++nodes;
    const auto rule = num::make_exp_rule(2.0, v.t_max - tau, nodes);
    const double body = rule.integrate(
        [&](double s) { return interp_uniform(gt, v.dt, v.n_t, tau + s); });
    // beyond the grid freeze the cross-section: tail = e^{-2(T-tau)} g(T) / 2
    const double tail = rule.tail_unit() * gt[v.n_t - 1];
    return body + tail;
}

double cylinder_w(const CylinderField& v, double tau) {
    const double g_part = cylinder_g(v, tau);
    const CylDerivs d = build_cyl_derivs(v);
    const double dth = 2.0 * pi / v.n_theta;
    // interpolate v_t and v_tt columns at t = tau
    double acc = 0.0;
    std::vector<double> colt(v.n_t), coltt(v.n_t);
    for (int j = 0; j < v.n_theta; ++j) {
        for (int k = 0; k < v.n_t; ++k) {
            colt[k] = d.vt[v.idx(k, j)];
            coltt[k] = d.vtt[v.idx(k, j)];
        }
        const double vt = interp_uniform(colt, v.dt, v.n_t, tau);
        const double vtt = interp_uniform(coltt, v.dt, v.n_t, tau);
        acc += vt * (vt - vtt);
    }
    return g_part + 2.0 * acc * dth;
}

double cylinder_w_prime(const CylinderField& v, double tau) {
    if (tau < 0.0 || tau > v.t_max)
        throw std::invalid_argument("cylinder_w_prime: tau outside the grid");
    const CylDerivs d = build_cyl_derivs(v);
    const double dth = 2.0 * pi / v.n_theta;
    double acc = 0.0;
    std::vector<double> coltt(v.n_t), coltth(v.n_t);
    for (int j = 0; j < v.n_theta; ++j) {
        for (int k = 0; k < v.n_t; ++k) {
            coltt[k] = d.vtt[v.idx(k, j)];
            coltth[k] = d.vtth[v.idx(k, j)];
        }
        const double vtt = interp_uniform(coltt, v.dt, v.n_t, tau);
        const double vtth = interp_uniform(coltth, v.dt, v.n_t, tau);
        acc += vtt * vtt + vtth * vtth;
    }
    return -4.0 * acc * dth;
}

}  // namespace fbl::weiss
