#include "fbl/angular_modes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fbl::modes {

using num::pi;

double solve_t1(double tol) {
    // sin t - t cos t is strictly decreasing on (pi, 2pi): derivative t sin t < 0.
    auto g = [](double t) { return std::sin(t) - t * std::cos(t); };
    return num::bisect(g, pi, 2.0 * pi, tol, 400);
}

std::vector<double> admissible_openings(double tol) {
    return {pi, solve_t1(tol), 2.0 * pi};
}

namespace {

// Base-segment eigenvalue (opening pi).  Even n: root of sin x - x cos x with
// x = pi sqrt(mu)/2 in (k pi, (k+1) pi), k = n/2; the other characteristic
// factor sin(pi sqrt(mu)/2) has no zero strictly inside that bracket.
double mu_base(int n) {
    if (n < 1) throw std::invalid_argument("buckling eigenvalue: n >= 1 required");
    if (n % 2 == 1) {
        const double m = n + 1;
        return m * m;
    }
    const int k = n / 2;
    auto phi = [](double x) { return std::sin(x) - x * std::cos(x); };
    const double x = num::bisect(phi, k * pi, (k + 1) * pi, 1e-15 * (k + 1) * pi, 400);
    const double root = 2.0 * x / pi;
    return root * root;
}

double beta_of(double mu) {
    // sin(pi sqrt(mu)/2) = beta pi/2 and sqrt(mu) cos(pi sqrt(mu)/2) = beta
    // agree at the characteristic roots; use the first as the definition.
    return 2.0 / pi * std::sin(pi * std::sqrt(mu) / 2.0);
}

}  // namespace

double buckling_eigenvalue(int n, double omega) {
    if (!(omega > 0.0) || omega > 2.0 * pi + 1e-12)
        throw std::invalid_argument("buckling eigenvalue: need 0 < omega <= 2pi");
    const double s = pi / omega;
    return s * s * mu_base(n);
}

double BucklingMode::value(double theta) const {
    if (theta < 0.0 || theta > omega) return 0.0;
    const double s = pi * theta / omega;
    const double scale = std::sqrt(omega / pi);
    if (parity == Parity::odd) {
        const double m = n + 1;
        return scale * amp_ * (1.0 - std::cos(m * s)) / m;
    }
    const double x = s - pi / 2.0;
    return scale * amp_ * (std::sin(std::sqrt(mu_base_) * x) - beta * x);
}

double BucklingMode::d1(double theta) const {
    if (theta < 0.0 || theta > omega) return 0.0;
    const double s = pi * theta / omega;
    const double scale = std::sqrt(pi / omega);
    if (parity == Parity::odd) {
        const double m = n + 1;
        return scale * amp_ * std::sin(m * s);
    }
    const double x = s - pi / 2.0;
    const double rm = std::sqrt(mu_base_);
    return scale * amp_ * (rm * std::cos(rm * x) - beta);
}

double BucklingMode::d2(double theta) const {
    if (theta < 0.0 || theta > omega) return 0.0;
    const double s = pi * theta / omega;
    const double scale = std::sqrt(pi / omega) * (pi / omega);
    if (parity == Parity::odd) {
        const double m = n + 1;
        return scale * amp_ * m * std::cos(m * s);
    }
    const double x = s - pi / 2.0;
    return -scale * amp_ * mu_base_ * std::sin(std::sqrt(mu_base_) * x);
}

double BucklingMode::d4(double theta) const {
    if (theta < 0.0 || theta > omega) return 0.0;
    const double s = pi * theta / omega;
    const double w = pi / omega;
    const double scale = std::sqrt(pi / omega) * w * w * w;
    if (parity == Parity::odd) {
        const double m = n + 1;
        return -scale * amp_ * m * m * m * std::cos(m * s);
    }
    const double x = s - pi / 2.0;
    return scale * amp_ * mu_base_ * mu_base_ * std::sin(std::sqrt(mu_base_) * x);
}

BucklingMode buckling_mode(int n, double omega, int grid) {
    if (grid < 64) throw std::invalid_argument("buckling_mode: grid too coarse");
    BucklingMode mode;
    mode.n = n;
    mode.omega = omega;
    mode.mu_base_ = mu_base(n);
    mode.mu = (pi / omega) * (pi / omega) * mode.mu_base_;
    mode.parity = (n % 2 == 1) ? Parity::odd : Parity::even;
    mode.grid = grid;
    if (mode.parity == Parity::odd) {
        // int_0^pi sin^2((n+1)s) ds = pi/2, so amp = sqrt(2/pi) normalizes.
        mode.amp_ = std::sqrt(2.0 / pi);
        mode.beta = 0.0;
    } else {
        mode.beta = beta_of(mode.mu_base_);
        // int_{-pi/2}^{pi/2} (sqrt(mu) cos(sqrt(mu) x) - beta)^2 dx
        //   = (pi/2)(mu - beta^2) at characteristic roots.
        const double norm_sq = (pi / 2.0) * (mode.mu_base_ - mode.beta * mode.beta);
        mode.amp_ = 1.0 / std::sqrt(norm_sq);
    }
    mode.samples.resize(grid + 1);
    for (int j = 0; j <= grid; ++j)
        mode.samples[j] = mode.value(omega * j / grid);

    std::vector<double> g2(grid + 1);
    for (int j = 0; j <= grid; ++j) {
        const double d = mode.d1(omega * j / grid);
        g2[j] = d * d;
    }
    mode.norm_check = std::abs(num::simpson_samples(g2, omega / grid) - 1.0);
    return mode;
}

int critical_mode_index(double Theta) {
    int best = 1;
    double best_err = std::abs(buckling_eigenvalue(1, Theta) - 4.0);
    for (int n = 2; n <= 8; ++n) {
        const double err = std::abs(buckling_eigenvalue(n, Theta) - 4.0);
        if (err < best_err) {
            best = n;
            best_err = err;
        }
    }
    if (best_err > 1e-6)
        throw std::invalid_argument("critical_mode_index: no mode with eigenvalue 4 at this opening");
    return best;
}

namespace {

void sort_support(std::vector<Interval>& sup) {
    std::sort(sup.begin(), sup.end(), [](const Interval& a, const Interval& b) {
        if (std::abs(a.length() - b.length()) > 1e-15) return a.length() > b.length();
        return a.lo < b.lo;
    });
}

double wrap_angle(double th) {
    th = std::fmod(th, 2.0 * pi);
    if (th < 0) th += 2.0 * pi;
    return th;
}

}  // namespace

bool HomogeneousProfile::in_support(double theta) const {
    const double t = wrap_angle(theta);
    for (const auto& iv : support) {
        // intervals may straddle the 2pi wrap; compare against both shifts
        if ((t > iv.lo && t < iv.hi) || (t + 2 * pi > iv.lo && t + 2 * pi < iv.hi))
            return true;
    }
    return false;
}

double HomogeneousProfile::support_measure() const {
    double m = 0.0;
    for (const auto& iv : support) m += iv.length();
    return m;
}

HomogeneousProfile homogeneous_profile(ProfileKind kind, const ProfileParams& params) {
    HomogeneousProfile p;
    p.kind = kind;
    p.params = params;
    const double rot = params.rotation;
    const double sgn = params.sign;

    switch (kind) {
        case ProfileKind::flat: {
            p.b = [rot, sgn](double th) {
                const double s = std::sin(th - rot);
                return s > 0.0 ? sgn * 0.5 * s * s : 0.0;
            };
            p.db = [rot, sgn](double th) {
                const double s = std::sin(th - rot);
                return s > 0.0 ? sgn * s * std::cos(th - rot) : 0.0;
            };
            p.d2b = [rot, sgn](double th) {
                const double s = std::sin(th - rot);
                return s > 0.0 ? sgn * std::cos(2.0 * (th - rot)) : 0.0;
            };
            p.support = {{wrap_angle(rot), wrap_angle(rot) + pi}};
            break;
        }
        case ProfileKind::angular: {
            const double t1 = solve_t1();
            p.b = [rot, sgn, t1](double th) {
                const double s = wrap_angle(th - rot);
                if (s <= 0.0 || s >= t1) return 0.0;
                return sgn * 0.25 *
                       (1.0 - std::cos(2 * s) - (2.0 / t1) * (s - 0.5 * std::sin(2 * s)));
            };
            p.db = [rot, sgn, t1](double th) {
                const double s = wrap_angle(th - rot);
                if (s <= 0.0 || s >= t1) return 0.0;
                return sgn * 0.5 * (std::sin(2 * s) - (1.0 - std::cos(2 * s)) / t1);
            };
            p.d2b = [rot, sgn, t1](double th) {
                const double s = wrap_angle(th - rot);
                if (s <= 0.0 || s >= t1) return 0.0;
                return sgn * (std::cos(2 * s) - std::sin(2 * s) / t1);
            };
            p.support = {{wrap_angle(rot), wrap_angle(rot) + t1}};
            break;
        }
        case ProfileKind::nodal: {
            const double lam = params.lambda;
            if (std::abs(lam) < 1.0)
                throw std::invalid_argument("nodal profile: |lambda| >= 1 required");
            p.b = [rot, lam](double th) {
                const double s = std::sin(th - rot);
                return 0.5 * lam * s * s;
            };
            p.db = [rot, lam](double th) {
                return lam * std::sin(th - rot) * std::cos(th - rot);
            };
            p.d2b = [rot, lam](double th) { return lam * std::cos(2.0 * (th - rot)); };
            const double lo = wrap_angle(rot);
            p.support = {{lo, lo + pi}, {lo + pi, lo + 2 * pi}};
            break;
        }
        case ProfileKind::isolated: {
            const double a = params.a, bb = params.b, cc = params.c;
            // u = a(x^2+y^2)+b(x^2-y^2)+2cxy = r^2 (a + b cos 2th + c sin 2th)
            p.b = [a, bb, cc](double th) {
                return a + bb * std::cos(2 * th) + cc * std::sin(2 * th);
            };
            p.db = [bb, cc](double th) {
                return 2.0 * (-bb * std::sin(2 * th) + cc * std::cos(2 * th));
            };
            p.d2b = [bb, cc](double th) {
                return -4.0 * (bb * std::cos(2 * th) + cc * std::sin(2 * th));
            };
            const double rho_sq = bb * bb + cc * cc;
            if (std::abs(a * a - rho_sq) < 1e-14 * std::max(1.0, std::abs(a * a))) {
                // degenerate: b(theta) = a(1 + cos(2th - phi)) vanishes to second
                // order on a line; support splits into two half-turns there.
                const double phi = std::atan2(cc, bb);
                const double line = wrap_angle((phi + pi) / 2.0);
                p.support = {{line, line + pi}, {line + pi, line + 2 * pi}};
            } else {
                p.support = {{0.0, 2 * pi}};
            }
            break;
        }
    }
    sort_support(p.support);
    return p;
}

AngularDecomposition decompose_on_support(const std::function<double(double)>& fprime,
                                          std::vector<Interval> support, int n_max,
                                          int grid) {
    AngularDecomposition out;
    sort_support(support);
    out.components = support;
    double grad_sq = 0.0;
    double coeff_sq = 0.0;
    for (const auto& comp : support) {
        const double omega = comp.length();
        // node count proportional to arc length, forced odd for Simpson
        int nn = std::max(65, static_cast<int>(grid * omega / (2 * pi)));
        if (nn % 2 == 0) ++nn;
        const double h = omega / (nn - 1);
        std::vector<double> fp(nn);
        for (int j = 0; j < nn; ++j) fp[j] = fprime(comp.lo + j * h);
        {
            std::vector<double> fp2(nn);
            for (int j = 0; j < nn; ++j) fp2[j] = fp[j] * fp[j];
            grad_sq += num::simpson_samples(fp2, h);
        }
        std::vector<double> coeffs(n_max);
        for (int n = 1; n <= n_max; ++n) {
            const BucklingMode mode = buckling_mode(n, omega, 256);
            std::vector<double> prod(nn);
            for (int j = 0; j < nn; ++j) prod[j] = fp[j] * mode.d1(j * h);
            const double c = num::simpson_samples(prod, h);
            coeffs[n - 1] = c;
            coeff_sq += c * c;
        }
        out.coeffs.push_back(std::move(coeffs));
    }
    out.gradient_norm_sq = grad_sq;
    out.parseval_ratio = grad_sq > 0 ? coeff_sq / grad_sq : 1.0;
    return out;
}

}  // namespace fbl::modes
