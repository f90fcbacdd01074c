#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fbl/angular_modes.hpp"
#include "fbl/numerics.hpp"

using namespace fbl;
using num::pi;

namespace {
double l2_product(const modes::BucklingMode& f, const modes::BucklingMode& g,
                  int deriv) {
    const int n = 4097;
    const double h = f.omega / (n - 1);
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        const double th = i * h;
        const double a = deriv == 0 ? f.value(th) : deriv == 1 ? f.d1(th) : f.d2(th);
        const double b = deriv == 0 ? g.value(th) : deriv == 1 ? g.d1(th) : g.d2(th);
        v[i] = a * b;
    }
    return num::simpson_samples(v, h);
}
}  // namespace

TEST_CASE("first fixed point of tan above pi") {
    const double t1 = modes::solve_t1();
    CHECK(std::abs(t1 - 4.4934094579090633) < 1e-12);
    CHECK(std::abs(std::sin(t1) - t1 * std::cos(t1)) < 1e-12);

    const auto openings = modes::admissible_openings();
    REQUIRE(openings.size() == 3);
    CHECK(openings[0] == pi);
    CHECK(std::abs(openings[1] - t1) < 1e-13);
    CHECK(openings[2] == 2 * pi);
}

TEST_CASE("eigenvalue table at the admissible openings") {
    const double t1 = modes::solve_t1();
    // opening pi: odd entries exact squares, even entries from the secular root
    CHECK(modes::buckling_eigenvalue(1, pi) == 4.0);
    CHECK(std::abs(modes::buckling_eigenvalue(2, pi) - 8.1829940637531813) < 1e-11);
    CHECK(modes::buckling_eigenvalue(3, pi) == 16.0);
    CHECK(std::abs(modes::buckling_eigenvalue(4, pi) - 24.187196778635737) < 1e-11);
    // other openings scale by (pi/omega)^2
    for (int n = 1; n <= 8; ++n) {
        const double base = modes::buckling_eigenvalue(n, pi);
        CHECK(std::abs(modes::buckling_eigenvalue(n, 2 * pi) - 0.25 * base) < 1e-13);
        CHECK(std::abs(modes::buckling_eigenvalue(n, t1) -
                       num::sq(pi / t1) * base) < 1e-12);
    }
    // published three-digit values
    CHECK(std::abs(modes::buckling_eigenvalue(1, t1) - 1.955) < 2e-3);
    CHECK(std::abs(modes::buckling_eigenvalue(3, t1) - 7.821) < 2e-3);
    CHECK(std::abs(modes::buckling_eigenvalue(2, 2 * pi) - 2.046) < 2e-3);
    CHECK(std::abs(modes::buckling_eigenvalue(4, 2 * pi) - 6.047) < 2e-3);
}

TEST_CASE("critical mode has eigenvalue exactly 4") {
    const double t1 = modes::solve_t1();
    CHECK(modes::critical_mode_index(pi) == 1);
    CHECK(modes::critical_mode_index(t1) == 2);
    CHECK(modes::critical_mode_index(2 * pi) == 3);
    for (double th : {pi, t1, 2 * pi}) {
        const int i = modes::critical_mode_index(th);
        CHECK(std::abs(modes::buckling_eigenvalue(i, th) - 4.0) < 1e-12);
    }
}

TEST_CASE("modes are clamped, normalized, and solve the beam equation") {
    const double t1 = modes::solve_t1();
    for (double omega : {pi, t1, 2 * pi, 2.0}) {
        for (int n = 1; n <= 5; ++n) {
            const auto m = modes::buckling_mode(n, omega, 2048);
            CHECK(m.mu == modes::buckling_eigenvalue(n, omega));
            CHECK(std::abs(m.value(0.0)) < 1e-12);
            CHECK(std::abs(m.value(omega)) < 1e-10);
            CHECK(std::abs(m.d1(0.0)) < 1e-12);
            CHECK(std::abs(m.d1(omega)) < 1e-10);
            CHECK(m.value(-0.1) == 0.0);
            CHECK(m.value(omega + 0.1) == 0.0);
            CHECK(m.norm_check < 1e-9);
            // ODE residual b'''' + mu b'' = 0 at interior points
            for (double s : {0.2, 0.5, 0.8}) {
                const double th = s * omega;
                const double res = m.d4(th) + m.mu * m.d2(th);
                CHECK(std::abs(res) < 1e-8 * (1.0 + std::abs(m.d4(th))));
            }
            // cached samples match the evaluator
            REQUIRE(static_cast<int>(m.samples.size()) == m.grid + 1);
            CHECK(std::abs(m.samples[m.grid / 2] - m.value(omega / 2)) < 1e-14);
        }
    }
}

TEST_CASE("gradient orthonormality and curvature diagonal") {
    const double omega = modes::solve_t1();
    std::vector<modes::BucklingMode> basis;
    for (int n = 1; n <= 6; ++n) basis.push_back(modes::buckling_mode(n, omega));
    for (int a = 0; a < 6; ++a) {
        for (int b = a; b < 6; ++b) {
            const double g1 = l2_product(basis[a], basis[b], 1);
            const double g2 = l2_product(basis[a], basis[b], 2);
            if (a == b) {
                CHECK(std::abs(g1 - 1.0) < 1e-9);
                CHECK(std::abs(g2 - basis[a].mu) < 1e-7 * basis[a].mu);
            } else {
                CHECK(std::abs(g1) < 1e-9);
                CHECK(std::abs(g2) < 1e-7);
            }
        }
    }
}

TEST_CASE("derivatives agree with finite differences") {
    const auto m = modes::buckling_mode(2, 2 * pi);
    const double h = 1e-5;
    for (double th : {0.7, 2.1, 4.9}) {
        const double fd1 = (m.value(th + h) - m.value(th - h)) / (2 * h);
        CHECK(std::abs(fd1 - m.d1(th)) < 1e-8);
        const double fd2 = (m.d1(th + h) - m.d1(th - h)) / (2 * h);
        CHECK(std::abs(fd2 - m.d2(th)) < 1e-7);
    }
}

TEST_CASE("mass norms: odd closed form, scaling, and summability bounds") {
    const double t1 = modes::solve_t1();
    // odd base modes: ||b_n||^2 = 3/(n+1)^2 at opening pi
    for (int n : {1, 3, 5, 7}) {
        const auto m = modes::buckling_mode(n, pi);
        const double mass = l2_product(m, m, 0);
        CHECK(std::abs(mass - 3.0 / num::sq(n + 1.0)) < 1e-9);
    }
    // rescaling multiplies the mass by (omega/pi)^2
    for (int n : {1, 2, 3}) {
        const auto base = modes::buckling_mode(n, pi);
        const auto wide = modes::buckling_mode(n, 2 * pi);
        CHECK(std::abs(l2_product(wide, wide, 0) -
                       4.0 * l2_product(base, base, 0)) < 1e-8);
        // pointwise: b_{n,omega}(th) = sqrt(omega/pi) b_{n,pi}(pi th / omega)
        for (double s : {0.3, 0.6, 0.9}) {
            CHECK(std::abs(wide.value(2 * s * pi) -
                           std::sqrt(2.0) * base.value(s * pi)) < 1e-12);
        }
    }
    // mass decays like the inverse eigenvalue: mu_n ||b_{n,omega}||^2 <= 8 (omega/pi)^2
    for (double omega : {pi, t1, 2 * pi}) {
        for (int n = 1; n <= 12; ++n) {
            const auto m = modes::buckling_mode(n, omega, 2048);
            const double mass = l2_product(m, m, 0);
            CHECK(mass * m.mu <= 8.0 * num::sq(omega / pi) + 1e-9);
        }
    }
}

TEST_CASE("spectral gap around the critical opening") {
    const double t1 = modes::solve_t1();
    for (double theta : {pi, t1, 2 * pi}) {
        const int i = modes::critical_mode_index(theta);
        for (double f : {0.9, 0.95, 1.0, 1.05, 1.1}) {
            const double omega = std::min(f * theta, 2 * pi);
            for (int n = 1; n <= i + 4; ++n) {
                const double mu = modes::buckling_eigenvalue(n, omega);
                if (n < i) CHECK(mu <= 3.0 + 1e-12);
                if (n > i) CHECK(mu >= 5.0 - 1e-12);
            }
        }
    }
    // narrow sectors push the whole spectrum above 5
    for (double omega : {0.5 * pi, 0.3 * pi, 0.1 * pi})
        CHECK(modes::buckling_eigenvalue(1, omega) >= 5.0 - 1e-12);
}

TEST_CASE("homogeneous profiles expose their support exactly") {
    const double t1 = modes::solve_t1();

    auto flat = modes::homogeneous_profile(modes::ProfileKind::flat);
    REQUIRE(flat.support.size() == 1);
    CHECK(std::abs(flat.support_measure() - pi) < 1e-14);
    CHECK(flat.in_support(0.5 * pi));
    CHECK(!flat.in_support(1.5 * pi));
    CHECK(std::abs(flat.b(0.5 * pi) - 0.5) < 1e-15);
    CHECK(flat.b(1.2 * pi) == 0.0);
    CHECK(std::abs(flat.u(0.5, 0.5 * pi) - 0.125) < 1e-15);

    modes::ProfileParams ap;
    ap.rotation = 0.3;
    auto ang = modes::homogeneous_profile(modes::ProfileKind::angular, ap);
    CHECK(std::abs(ang.support_measure() - t1) < 1e-13);
    CHECK(std::abs(ang.b(0.3)) < 1e-14);
    CHECK(std::abs(ang.b(0.3 + t1)) < 1e-13);
    CHECK(std::abs(ang.db(0.3 + 1e-14)) < 1e-12);
    CHECK(ang.b(0.4) > 0.0);
    // antisymmetric about the sector midpoint
    CHECK(std::abs(ang.b(0.3 + 0.25 * t1) + ang.b(0.3 + 0.75 * t1)) < 1e-13);

    modes::ProfileParams np;
    np.lambda = -1.5;
    auto nod = modes::homogeneous_profile(modes::ProfileKind::nodal, np);
    REQUIRE(nod.support.size() == 2);
    CHECK(std::abs(nod.support_measure() - 2 * pi) < 1e-13);
    CHECK(std::abs(nod.b(0.5 * pi) + 0.75) < 1e-14);
    modes::ProfileParams bad;
    bad.lambda = 0.5;
    CHECK_THROWS_AS(modes::homogeneous_profile(modes::ProfileKind::nodal, bad),
                    std::invalid_argument);

    modes::ProfileParams ip;
    ip.a = 1.0;
    ip.b = 0.3;
    ip.c = 0.2;
    auto iso = modes::homogeneous_profile(modes::ProfileKind::isolated, ip);
    CHECK(std::abs(iso.support_measure() - 2 * pi) < 1e-13);
    // u = a(x^2+y^2) + b(x^2-y^2) + 2cxy at (x,y) = (r cos, r sin)
    const double r = 0.8, th = 1.1;
    const double x = r * std::cos(th), y = r * std::sin(th);
    CHECK(std::abs(iso.u(r, th) -
                   (ip.a * (x * x + y * y) + ip.b * (x * x - y * y) +
                    2 * ip.c * x * y)) < 1e-14);

    // derivative lambdas track finite differences of b
    const double h = 1e-6;
    for (double q : {0.9, 1.7}) {
        CHECK(std::abs((ang.b(q + h) - ang.b(q - h)) / (2 * h) - ang.db(q)) < 1e-8);
        CHECK(std::abs((ang.db(q + h) - ang.db(q - h)) / (2 * h) - ang.d2b(q)) < 1e-7);
    }
}

TEST_CASE("decomposition recovers planted coefficients") {
    const double omega = 2.9;
    const auto m1 = modes::buckling_mode(1, omega);
    const auto m4 = modes::buckling_mode(4, omega);
    const double lo = 0.5;
    auto fprime = [&](double th) {
        return 0.7 * m1.d1(th - lo) - 0.3 * m4.d1(th - lo);
    };
    const auto dec = modes::decompose_on_support(fprime, {{lo, lo + omega}}, 16);
    REQUIRE(dec.components.size() == 1);
    REQUIRE(dec.coeffs[0].size() == 16);
    CHECK(std::abs(dec.coeffs[0][0] - 0.7) < 1e-9);
    CHECK(std::abs(dec.coeffs[0][3] + 0.3) < 1e-9);
    for (int n = 1; n <= 16; ++n) {
        if (n == 1 || n == 4) continue;
        CHECK(std::abs(dec.coeffs[0][n - 1]) < 1e-8);
    }
    CHECK(std::abs(dec.gradient_norm_sq - 0.58) < 1e-9);
    CHECK(std::abs(dec.parseval_ratio - 1.0) < 1e-8);
}

TEST_CASE("two-lobe decomposition of the nodal profile") {
    // f = sin^2/2 on each lobe projects onto the first mode alone with
    // coefficient sqrt(2 pi)/4, and the gradient mass is pi/4
    auto fprime = [](double th) { return 0.5 * std::sin(2.0 * th); };
    const auto dec = modes::decompose_on_support(
        fprime, {{0.0, pi}, {pi, 2 * pi}}, 8);
    REQUIRE(dec.components.size() == 2);
    const double c = std::sqrt(2 * pi) / 4.0;
    for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(dec.coeffs[k][0] - c) < 1e-9);
        for (int n = 2; n <= 8; ++n) CHECK(std::abs(dec.coeffs[k][n - 1]) < 1e-9);
    }
    CHECK(std::abs(dec.gradient_norm_sq - 0.25 * pi) < 1e-9);
    CHECK(std::abs(dec.parseval_ratio - 1.0) < 1e-9);
}
