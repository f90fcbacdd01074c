#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fbl/weiss_energy.hpp"

namespace fbl::weiss {

using num::pi;

// ------------------------------------------------------------- PolarGrid ----

PolarGrid PolarGrid::make(int n_r, int n_theta, double r_min) {
    if (n_r < 16 || n_theta < 16)
        throw std::invalid_argument("PolarGrid: need at least 16 cells per direction");
    if (!(r_min > 0.0) || r_min >= 0.1)
        throw std::invalid_argument("PolarGrid: r_min must lie in (0, 0.1)");
    PolarGrid g;
    g.n_r = n_r;
    g.n_theta = n_theta;
    g.r_min = r_min;
    g.dtheta = 2.0 * pi / n_theta;
    const int n_log = n_r / 4;
    const int n_uni = n_r - n_log;
    g.r_edge.resize(n_r + 1);
    const double ratio = std::log(0.1 / r_min);
    for (int i = 0; i <= n_log; ++i)
        g.r_edge[i] = r_min * std::exp(ratio * static_cast<double>(i) / n_log);
    for (int k = 1; k <= n_uni; ++k)
        g.r_edge[n_log + k] = 0.1 + 0.9 * static_cast<double>(k) / n_uni;
    g.r.resize(n_r);
    for (int i = 0; i < n_r; ++i) g.r[i] = 0.5 * (g.r_edge[i] + g.r_edge[i + 1]);
    return g;
}

int PolarGrid::nearest_shell(double radius) const {
    const auto it = std::lower_bound(r.begin(), r.end(), radius);
    if (it == r.begin()) return 0;
    if (it == r.end()) return n_r - 1;
    const auto i = static_cast<int>(it - r.begin());
    return (radius - r[i - 1] < r[i] - radius) ? i - 1 : i;
}

// -------------------------------------------------------------- DiskField ----

DiskField DiskField::from_function(const PolarGrid& grid,
                                   const std::function<double(double, double)>& u,
                                   MaskRule rule, double tau_supp) {
    DiskField f;
    f.grid_ = grid;
    f.tau_supp_ = tau_supp;
    f.vals_.resize(static_cast<std::size_t>(grid.n_r) * grid.n_theta);
    for (int i = 0; i < grid.n_r; ++i)
        for (int j = 0; j < grid.n_theta; ++j)
            f.vals_[f.idx(i, j)] = u(grid.r[i], grid.theta(j));
    if (rule == MaskRule::full) {
        f.mask_.assign(f.vals_.size(), 1);
    } else if (rule == MaskRule::thresholded) {
        f.build_mask_thresholded();
    } else {
        throw std::invalid_argument("from_function: angular_intervals needs a profile");
    }
    // center flatness estimated from the innermost shell
    double m0 = 0.0;
    for (int j = 0; j < grid.n_theta; ++j)
        m0 = std::max(m0, std::abs(f.vals_[f.idx(0, j)]));
    f.center_flat_ = m0 <= 10.0 * grid.r[0] * grid.r[0] * (1.0 + m0);
    return f;
}

DiskField DiskField::from_profile(const PolarGrid& grid,
                                  const modes::HomogeneousProfile& profile) {
    DiskField f;
    f.grid_ = grid;
    f.tau_supp_ = 0.0;  // exact support: no threshold involved
    const int nt = grid.n_theta;
    f.vals_.resize(static_cast<std::size_t>(grid.n_r) * nt);
    f.mask_.resize(f.vals_.size());
    std::vector<double> b(nt);
    std::vector<std::uint8_t> in(nt);
    for (int j = 0; j < nt; ++j) {
        b[j] = profile.b(grid.theta(j));
        in[j] = profile.in_support(grid.theta(j)) ? 1 : 0;
    }
    for (int i = 0; i < grid.n_r; ++i) {
        const double r2 = grid.r[i] * grid.r[i];
        for (int j = 0; j < nt; ++j) {
            f.vals_[f.idx(i, j)] = r2 * b[j];
            f.mask_[f.idx(i, j)] = in[j];
        }
    }
    f.center_flat_ = true;
    return f;
}

DiskField DiskField::from_samples_full(const PolarGrid& grid,
                                       std::vector<double> values, bool center_flat) {
    if (values.size() != static_cast<std::size_t>(grid.n_r) * grid.n_theta)
        throw std::invalid_argument("from_samples_full: size mismatch");
    DiskField f;
    f.grid_ = grid;
    f.tau_supp_ = 0.0;
    f.vals_ = std::move(values);
    f.mask_.assign(f.vals_.size(), 1);
    f.center_flat_ = center_flat;
    return f;
}

DiskField DiskField::from_samples(const PolarGrid& grid, std::vector<double> values,
                                  double tau_supp) {
    if (values.size() != static_cast<std::size_t>(grid.n_r) * grid.n_theta)
        throw std::invalid_argument("from_samples: size mismatch");
    DiskField f;
    f.grid_ = grid;
    f.tau_supp_ = tau_supp;
    f.vals_ = std::move(values);
    f.build_mask_thresholded();
    double m0 = 0.0;
    for (int j = 0; j < grid.n_theta; ++j)
        m0 = std::max(m0, std::abs(f.vals_[f.idx(0, j)]));
    f.center_flat_ = m0 <= 10.0 * grid.r[0] * grid.r[0] * (1.0 + m0);
    return f;
}

void DiskField::build_mask_thresholded() {
    const int nr = grid_.n_r, nt = grid_.n_theta;
    mask_.assign(vals_.size(), 0);
    for (int i = 0; i < nr; ++i) {
        const double hr = grid_.r_edge[i + 1] - grid_.r_edge[i];
        const double h = std::max(hr, grid_.r[i] * grid_.dtheta);
        for (int j = 0; j < nt; ++j) {
            const double v = vals_[idx(i, j)];
            // provisional centered differences, mask-free
            const int jm = (j + nt - 1) % nt, jp = (j + 1) % nt;
            const double ut = (vals_[idx(i, jp)] - vals_[idx(i, jm)]) / (2 * grid_.dtheta);
            double ur = 0.0;
            if (i > 0 && i + 1 < nr)
                ur = (vals_[idx(i + 1, j)] - vals_[idx(i - 1, j)]) /
                     (grid_.r[i + 1] - grid_.r[i - 1]);
            else if (i + 1 < nr)
                ur = (vals_[idx(i + 1, j)] - v) / (grid_.r[i + 1] - grid_.r[i]);
            const double gradm = std::hypot(ur, ut / grid_.r[i]);
            if (std::abs(v) > tau_supp_ * h * h || gradm > tau_supp_ * h)
                mask_[idx(i, j)] = 1;
        }
    }
}

namespace {

struct ThetaWeights {
    // weights[lo+2][hi+2] for contiguous windows lo..hi containing 0
    double w1[5][5][5] = {};
    double w2[5][5][5] = {};
    bool ok1[5][5] = {};
    bool ok2[5][5] = {};
};

ThetaWeights make_theta_weights(double h) {
    ThetaWeights tw;
    for (int lo = -2; lo <= 0; ++lo) {
        for (int hi = 0; hi <= 2; ++hi) {
            const int len = hi - lo + 1;
            std::vector<double> x(len);
            for (int k = 0; k < len; ++k) x[k] = (lo + k) * h;
            if (len >= 2) {
                auto w = num::fd_weights(0.0, x, 1);
                for (int k = 0; k < len; ++k) tw.w1[lo + 2][hi + 2][k] = w[k];
                tw.ok1[lo + 2][hi + 2] = true;
            }
            if (len >= 3) {
                auto w = num::fd_weights(0.0, x, 2);
                for (int k = 0; k < len; ++k) tw.w2[lo + 2][hi + 2][k] = w[k];
                tw.ok2[lo + 2][hi + 2] = true;
            }
        }
    }
    return tw;
}

}  // namespace

void DiskField::build_derivatives() const {
    if (derivs_built_) return;
    const int nr = grid_.n_r, nt = grid_.n_theta;
    const std::size_t total = vals_.size();
    dr_.assign(total, 0.0);
    dth_.assign(total, 0.0);
    drr_.assign(total, 0.0);
    drth_.assign(total, 0.0);
    dthth_.assign(total, 0.0);
    lap_.assign(total, 0.0);

    const ThetaWeights tw = make_theta_weights(grid_.dtheta);

    // full radial windows per shell (the common, untruncated case)
    std::vector<std::vector<double>> rw1(nr), rw2(nr);
    std::vector<int> rlo_full(nr), rhi_full(nr);
    for (int i = 0; i < nr; ++i) {
        const int lo = std::max(0, i - 2), hi = std::min(nr - 1, i + 2);
        rlo_full[i] = lo - i;
        rhi_full[i] = hi - i;
        std::vector<double> x(grid_.r.begin() + lo, grid_.r.begin() + hi + 1);
        rw1[i] = num::fd_weights(grid_.r[i], x, 1);
        rw2[i] = num::fd_weights(grid_.r[i], x, 2);
    }

    auto same = [&](int i, int j, std::uint8_t state) {
        return mask_[idx(i, (j % nt + nt) % nt)] == state;
    };

    // window in theta around j limited to cells sharing the mask state
    auto theta_window = [&](int i, int j, std::uint8_t state, int& lo, int& hi) {
        lo = 0;
        while (lo > -2 && same(i, j + lo - 1, state)) --lo;
        hi = 0;
        while (hi < 2 && same(i, j + hi + 1, state)) ++hi;
    };

    std::vector<double> rbuf(5);
    for (int i = 0; i < nr; ++i) {
        const double r = grid_.r[i];
        for (int j = 0; j < nt; ++j) {
            const std::uint8_t state = mask_[idx(i, j)];
            int tlo, thi;
            theta_window(i, j, state, tlo, thi);
            if (tw.ok1[tlo + 2][thi + 2]) {
                double acc = 0.0;
                for (int k = tlo; k <= thi; ++k)
                    acc += tw.w1[tlo + 2][thi + 2][k - tlo] * vals_[idx(i, (j + k + nt) % nt)];
                dth_[idx(i, j)] = acc;
            }
            if (tw.ok2[tlo + 2][thi + 2]) {
                double acc = 0.0;
                for (int k = tlo; k <= thi; ++k)
                    acc += tw.w2[tlo + 2][thi + 2][k - tlo] * vals_[idx(i, (j + k + nt) % nt)];
                dthth_[idx(i, j)] = acc;
            }

            int rlo = 0, rhi = 0;
            while (rlo > rlo_full[i] && mask_[idx(i + rlo - 1, j)] == state) --rlo;
            while (rhi < rhi_full[i] && mask_[idx(i + rhi + 1, j)] == state) ++rhi;
            const bool truncated = (rlo != rlo_full[i]) || (rhi != rhi_full[i]);
            const int len = rhi - rlo + 1;
            if (len >= 2) {
                const double* w1;
                const double* w2 = nullptr;
                std::vector<double> t1, t2;
                if (!truncated) {
                    w1 = rw1[i].data();
                    if (len >= 3) w2 = rw2[i].data();
                } else {
                    std::vector<double> x(len);
                    for (int k = 0; k < len; ++k) x[k] = grid_.r[i + rlo + k];
                    t1 = num::fd_weights(r, x, 1);
                    w1 = t1.data();
                    if (len >= 3) {
                        t2 = num::fd_weights(r, x, 2);
                        w2 = t2.data();
                    }
                }
                double a1 = 0.0, a2 = 0.0;
                for (int k = 0; k < len; ++k) {
                    const double v = vals_[idx(i + rlo + k, j)];
                    a1 += w1[k] * v;
                    if (w2) a2 += w2[k] * v;
                }
                dr_[idx(i, j)] = a1;
                drr_[idx(i, j)] = a2;
            }
            lap_[idx(i, j)] = drr_[idx(i, j)] + dr_[idx(i, j)] / r +
                              dthth_[idx(i, j)] / (r * r);
        }
    }

    // mixed derivative: theta-derivative of dr with the same windows
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < nt; ++j) {
            const std::uint8_t state = mask_[idx(i, j)];
            int tlo, thi;
            theta_window(i, j, state, tlo, thi);
            if (!tw.ok1[tlo + 2][thi + 2]) continue;
            double acc = 0.0;
            for (int k = tlo; k <= thi; ++k)
                acc += tw.w1[tlo + 2][thi + 2][k - tlo] * dr_[idx(i, (j + k + nt) % nt)];
            drth_[idx(i, j)] = acc;
        }
    }
    derivs_built_ = true;
}

const std::vector<double>& DiskField::dr() const {
    build_derivatives();
    return dr_;
}
const std::vector<double>& DiskField::dth() const {
    build_derivatives();
    return dth_;
}
const std::vector<double>& DiskField::drr() const {
    build_derivatives();
    return drr_;
}
const std::vector<double>& DiskField::drth() const {
    build_derivatives();
    return drth_;
}
const std::vector<double>& DiskField::dthth() const {
    build_derivatives();
    return dthth_;
}
const std::vector<double>& DiskField::laplacian() const {
    build_derivatives();
    return lap_;
}

double DiskField::support_area(double radius) const {
    const int nr = grid_.n_r, nt = grid_.n_theta;
    double area = 0.0;
    for (int i = 0; i < nr; ++i) {
        const double lo = grid_.r_edge[i];
        if (lo >= radius) break;
        const double hi = std::min(grid_.r_edge[i + 1], radius);
        const double cell = 0.5 * (hi * hi - lo * lo) * grid_.dtheta;
        // the hole inside r_edge[0] follows the innermost shell's mask
        const double hole =
            (i == 0) ? 0.5 * std::min(lo, radius) * std::min(lo, radius) * grid_.dtheta
                     : 0.0;
        for (int j = 0; j < nt; ++j)
            if (mask_[idx(i, j)]) area += cell + hole;
    }
    return area;
}

// ---------------------------------------------------------- BoundaryTrace ----

namespace {

std::vector<cplx> dft_coefficients(const std::vector<double>& samples,
                                   const std::vector<double>& thetas, int n_max) {
    const int nn = static_cast<int>(samples.size());
    std::vector<cplx> out(2 * n_max + 1);
    for (int n = -n_max; n <= n_max; ++n) {
        cplx acc{0.0, 0.0};
        for (int j = 0; j < nn; ++j)
            acc += samples[j] * std::exp(cplx(0.0, -n * thetas[j]));
        out[n + n_max] = acc / static_cast<double>(nn);
    }
    return out;
}

}  // namespace

double BoundaryTrace::parseval_u() const {
    double s = 0.0;
    for (const auto& c : fourier_u) s += std::norm(c);
    return 2.0 * pi * s;
}

BoundaryTrace BoundaryTrace::from_field(const DiskField& field, double radius,
                                        int n_max) {
    const PolarGrid& g = field.grid();
    if (n_max >= g.n_theta / 2)
        throw std::invalid_argument("BoundaryTrace: n_max too large for the grid");
    if (radius < g.r[2] || radius > g.r[g.n_r - 1] + 1e-12)
        throw std::invalid_argument("BoundaryTrace: radius outside resolved shells");
    // radial interpolation window of five shells around the target radius
    int i0 = g.nearest_shell(radius);
    i0 = std::clamp(i0, 2, g.n_r - 3);
    std::vector<double> x(5);
    for (int k = 0; k < 5; ++k) x[k] = g.r[i0 - 2 + k];
    const auto w0 = num::fd_weights(radius, x, 0);
    const auto w1 = num::fd_weights(radius, x, 1);
    const auto w2 = num::fd_weights(radius, x, 2);

    const int nt = g.n_theta;
    std::vector<double> su(nt), sur(nt), surr(nt), thetas(nt);
    for (int j = 0; j < nt; ++j) {
        thetas[j] = g.theta(j);
        double a0 = 0, a1 = 0, a2 = 0;
        for (int k = 0; k < 5; ++k) {
            const double v = field.value(i0 - 2 + k, j);
            a0 += w0[k] * v;
            a1 += w1[k] * v;
            a2 += w2[k] * v;
        }
        su[j] = a0;
        sur[j] = a1;
        surr[j] = a2;
    }
    BoundaryTrace t;
    t.radius = radius;
    t.n_max = n_max;
    t.fourier_u = dft_coefficients(su, thetas, n_max);
    t.fourier_ur = dft_coefficients(sur, thetas, n_max);
    t.fourier_urr = dft_coefficients(surr, thetas, n_max);
    return t;
}

BoundaryTrace BoundaryTrace::from_functions(const std::function<double(double)>& u,
                                            const std::function<double(double)>& ur,
                                            const std::function<double(double)>& urr,
                                            int n_max, int samples, double radius) {
    std::vector<double> su(samples), sur(samples), surr(samples), thetas(samples);
    for (int j = 0; j < samples; ++j) {
        thetas[j] = 2.0 * pi * j / samples;
        su[j] = u(thetas[j]);
        sur[j] = ur(thetas[j]);
        surr[j] = urr(thetas[j]);
    }
    BoundaryTrace t;
    t.radius = radius;
    t.n_max = n_max;
    t.fourier_u = dft_coefficients(su, thetas, n_max);
    t.fourier_ur = dft_coefficients(sur, thetas, n_max);
    t.fourier_urr = dft_coefficients(surr, thetas, n_max);
    return t;
}

// ----------------------------------------------------- GoursatCoefficients ----

bool GoursatCoefficients::center_flat() const {
    const double tol = 1e-13;
    if (std::abs(b_at(0)) > tol) return false;
    if (n_max >= 1 && (std::abs(b_at(1)) > tol || std::abs(b_at(-1)) > tol))
        return false;
    return true;
}

void GoursatCoefficients::symmetrize() {
    for (int n = 1; n <= n_max; ++n) {
        const cplx am = 0.5 * (a_at(n) + std::conj(a_at(-n)));
        const cplx bm = 0.5 * (b_at(n) + std::conj(b_at(-n)));
        a_at(n) = am;
        a_at(-n) = std::conj(am);
        b_at(n) = bm;
        b_at(-n) = std::conj(bm);
    }
    a_at(0) = cplx(a_at(0).real(), 0.0);
    b_at(0) = cplx(b_at(0).real(), 0.0);
}

double GoursatCoefficients::evaluate(double r, double theta) const {
    cplx acc{0.0, 0.0};
    for (int n = -n_max; n <= n_max; ++n) {
        const int an = std::abs(n);
        const double rn = std::pow(r, an);
        const cplx radial = a_at(n) * (rn * r * r) + b_at(n) * rn;
        acc += radial * std::exp(cplx(0.0, n * theta));
    }
    return acc.real();
}

DiskField GoursatCoefficients::to_field(const PolarGrid& grid) const {
    // phase table e^{in theta_j} for n >= 0; negative n by conjugation
    const int nt = grid.n_theta;
    std::vector<std::vector<cplx>> phase(n_max + 1, std::vector<cplx>(nt));
    for (int n = 0; n <= n_max; ++n)
        for (int j = 0; j < nt; ++j)
            phase[n][j] = std::exp(cplx(0.0, n * grid.theta(j)));

    std::vector<double> vals(static_cast<std::size_t>(grid.n_r) * nt);
    for (int i = 0; i < grid.n_r; ++i) {
        const double r = grid.r[i];
        for (int j = 0; j < nt; ++j) {
            cplx acc = a_at(0) * (r * r) + b_at(0);
            for (int n = 1; n <= n_max; ++n) {
                const double rn = std::pow(r, n);
                const cplx radial_p = a_at(n) * (rn * r * r) + b_at(n) * rn;
                const cplx radial_m = a_at(-n) * (rn * r * r) + b_at(-n) * rn;
                acc += radial_p * phase[n][j] + radial_m * std::conj(phase[n][j]);
            }
            vals[static_cast<std::size_t>(i) * nt + j] = acc.real();
        }
    }
    return DiskField::from_samples_full(grid, std::move(vals), center_flat());
}

GoursatCoefficients GoursatCoefficients::rescaled(double s) const {
    GoursatCoefficients out(n_max);
    for (int n = -n_max; n <= n_max; ++n) {
        const int an = std::abs(n);
        out.a_at(n) = a_at(n) * std::pow(s, an);
        out.b_at(n) = b_at(n) * std::pow(s, an - 2);
    }
    return out;
}

}  // namespace fbl::weiss
