#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fbl/angular_modes.hpp"
#include "fbl/numerics.hpp"
#include "fbl/weiss_energy.hpp"

using namespace fbl;
using num::pi;

namespace {

weiss::PolarGrid test_grid() { return weiss::PolarGrid::make(192, 384); }

modes::HomogeneousProfile flat_profile() {
    return modes::homogeneous_profile(modes::ProfileKind::flat);
}
modes::HomogeneousProfile nodal_profile(double lambda) {
    modes::ProfileParams p;
    p.lambda = lambda;
    return modes::homogeneous_profile(modes::ProfileKind::nodal, p);
}
modes::HomogeneousProfile isolated_profile(double a, double b, double c) {
    modes::ProfileParams p;
    p.a = a;
    p.b = b;
    p.c = c;
    return modes::homogeneous_profile(modes::ProfileKind::isolated, p);
}

}  // namespace

TEST_CASE("polar grid shells are nested and searchable") {
    const auto g = weiss::PolarGrid::make(64, 128);
    REQUIRE(g.n_r == 64);
    REQUIRE(static_cast<int>(g.r.size()) == 64);
    REQUIRE(static_cast<int>(g.r_edge.size()) == 65);
    for (int i = 0; i < 64; ++i) {
        CHECK(g.r_edge[i] < g.r[i]);
        CHECK(g.r[i] < g.r_edge[i + 1]);
    }
    CHECK(g.r_edge[0] == 1e-3);
    CHECK(g.r_edge[64] == 1.0);
    for (double r : {0.05, 0.3, 0.9}) {
        const int i = g.nearest_shell(r);
        CHECK(std::abs(g.r[i] - r) <= g.r_edge[i + 1] - g.r_edge[i]);
    }
}

TEST_CASE("finite-difference derivatives track a smooth field") {
    const auto g = test_grid();
    auto field = weiss::DiskField::from_function(
        g, [](double r, double th) { return r * r * r * std::cos(th); });
    const auto& dr = field.dr();
    const auto& dth = field.dth();
    const auto& lap = field.laplacian();
    for (int i : {60, 120, 180}) {
        for (int j : {10, 150, 300}) {
            const double r = g.r[i], th = g.theta(j);
            const std::size_t q = field.idx(i, j);
            CHECK(std::abs(dr[q] - 3 * r * r * std::cos(th)) < 2e-3);
            CHECK(std::abs(dth[q] + r * r * r * std::sin(th)) < 2e-3);
            // laplacian of r^3 cos = 8 r cos
            CHECK(std::abs(lap[q] - 8 * r * std::cos(th)) < 5e-3);
        }
    }
}

TEST_CASE("support areas of the model profiles are cell-exact") {
    const auto g = test_grid();
    const auto flat = weiss::DiskField::from_profile(g, flat_profile());
    CHECK(std::abs(flat.support_area(1.0) - 0.5 * pi) < 1e-5);
    CHECK(std::abs(flat.support_area(0.5) - 0.125 * pi) < 1e-5);
    const auto nod = weiss::DiskField::from_profile(g, nodal_profile(1.0));
    CHECK(std::abs(nod.support_area(1.0) - pi) < 1e-5);
    const auto iso = weiss::DiskField::from_profile(g, isolated_profile(1, 0.2, 0.1));
    CHECK(std::abs(iso.support_area(1.0) - pi) < 1e-5);
}

TEST_CASE("energy of the half-plane and paraboloid fields") {
    const auto g = test_grid();
    // half-plane solution r^2 sin^2/2: |lap|^2 = 1 on the support
    const auto flat = weiss::DiskField::from_profile(g, flat_profile());
    CHECK(std::abs(weiss::energy(flat, 1.0, 1.0) - pi) < 5e-3 * pi);
    // u = (x^2+y^2)/4: lap = 1 everywhere, E = pi + pi
    const auto iso = weiss::DiskField::from_profile(g, isolated_profile(0.25, 0, 0));
    CHECK(std::abs(weiss::energy(iso, 1.0, 1.0) - 2 * pi) < 1e-3 * pi);
    // lambda scales only the area part
    CHECK(std::abs(weiss::energy(iso, 2.0, 1.0) - 3 * pi) < 1e-3 * pi);
    // and the same field restricted to D_{1/2}: pi/4 + lambda pi/4
    CHECK(std::abs(weiss::energy(iso, 1.0, 0.5) - 0.5 * pi) < 1e-3 * pi);
}

TEST_CASE("monotone quantity is constant on the blow-up profiles") {
    const auto g = test_grid();
    struct Row {
        modes::HomogeneousProfile profile;
        double expect;
    };
    const double t1 = modes::solve_t1();
    modes::ProfileParams ap;
    std::vector<Row> rows;
    rows.push_back({flat_profile(), 0.5 * pi});
    rows.push_back({modes::homogeneous_profile(modes::ProfileKind::angular, ap),
                    0.5 * t1});
    rows.push_back({nodal_profile(1.0), pi});
    rows.push_back({nodal_profile(-1.5), pi});
    rows.push_back({isolated_profile(1.0, 0.3, 0.2), pi});
    for (const auto& row : rows) {
        const auto f = weiss::DiskField::from_profile(g, row.profile);
        for (double r : {0.3, 0.5, 0.7}) {
            CHECK(std::abs(weiss::weiss_w(f, r) - row.expect) <
                  1e-2 * row.expect);
        }
    }
}

TEST_CASE("boundary functionals of the nodal and half-plane fields") {
    const auto g = test_grid();
    const auto nod = weiss::DiskField::from_profile(g, nodal_profile(1.0));
    const auto flat = weiss::DiskField::from_profile(g, flat_profile());
    for (double r : {0.4, 0.6}) {
        CHECK(std::abs(weiss::n_functional(nod, r) - 7 * pi / 16) < 2e-2);
        CHECK(std::abs(weiss::r_functional(nod, r) + pi) < 3e-2);
        CHECK(std::abs(weiss::r_functional(flat, r) + 0.5 * pi) < 3e-2);
        // N is scale-invariant on 2-homogeneous fields
        CHECK(std::abs(weiss::n_prime_closed(nod, r)) < 5e-2);
    }
}

TEST_CASE("shell identity relates W to the boundary functionals") {
    // non-homogeneous smooth field from low-order polynomial modes
    const auto g = test_grid();
    weiss::GoursatCoefficients gc(3);
    gc.a_at(0) = 0.2;
    gc.b_at(0) = 0.05;
    gc.a_at(1) = num::cplx(0.3, 0.1);
    gc.b_at(3) = num::cplx(0.02, -0.04);
    gc.symmetrize();
    const auto field = gc.to_field(g);
    for (double r : {0.4, 0.55, 0.7}) {
        const double lhs = weiss::weiss_w(field, r);
        const double rhs = weiss::energy(field, 1.0, r) / (r * r) +
                           r * weiss::n_prime_closed(field, r) +
                           weiss::r_functional(field, r);
        CHECK(std::abs(lhs - rhs) < 2e-2 * std::abs(lhs));
    }
    // the closed-form dN/dr agrees with differencing N across shells
    const double r0 = 0.6;
    const double h = 0.04;
    const double fd = (weiss::n_functional(field, r0 + h) -
                       weiss::n_functional(field, r0 - h)) /
                      (2 * h);
    CHECK(std::abs(weiss::n_prime_closed(field, r0) - fd) <
          5e-2 * (std::abs(fd) + 1.0));
}

TEST_CASE("trace data maps to polynomial mode coefficients") {
    using weiss::BoundaryTrace;
    // constant trace, zero slope -> pure degree-0 harmonic part
    auto tr = BoundaryTrace::from_functions([](double) { return 1.0; },
                                            [](double) { return 0.0; },
                                            [](double) { return 0.0; }, 8);
    auto gc = weiss::goursat_from_boundary(tr);
    CHECK(std::abs(gc.a_at(0)) < 1e-13);
    CHECK(std::abs(gc.b_at(0) - 1.0) < 1e-13);
    CHECK(std::abs(gc.evaluate(0.37, 1.1) - 1.0) < 1e-12);

    // pure slope -> (r^2 - 1)/2
    tr = BoundaryTrace::from_functions([](double) { return 0.0; },
                                       [](double) { return 1.0; },
                                       [](double) { return 0.0; }, 8);
    gc = weiss::goursat_from_boundary(tr);
    CHECK(std::abs(gc.a_at(0) - 0.5) < 1e-13);
    CHECK(std::abs(gc.b_at(0) + 0.5) < 1e-13);

    // trace of y^2/2 at radius 1
    tr = BoundaryTrace::from_functions(
        [](double th) { return 0.5 * num::sq(std::sin(th)); },
        [](double th) { return num::sq(std::sin(th)); },
        [](double th) { return num::sq(std::sin(th)); }, 8);
    gc = weiss::goursat_from_boundary(tr);
    CHECK(std::abs(gc.a_at(0) - 0.25) < 1e-13);
    CHECK(std::abs(gc.b_at(0)) < 1e-13);
    CHECK(std::abs(gc.a_at(2)) < 1e-13);
    CHECK(std::abs(gc.b_at(2) + 0.125) < 1e-13);
    CHECK(std::abs(gc.evaluate(0.63, 0.8) -
                   0.5 * num::sq(0.63 * std::sin(0.8))) < 1e-12);
}

TEST_CASE("field trace round-trips through the mode expansion") {
    const auto g = test_grid();
    weiss::GoursatCoefficients gc(4);
    gc.a_at(1) = num::cplx(0.25, -0.1);
    gc.a_at(3) = 0.05;
    gc.b_at(0) = 0.3;
    gc.b_at(2) = num::cplx(-0.07, 0.02);
    gc.symmetrize();
    const auto field = gc.to_field(g);
    const auto tr = weiss::BoundaryTrace::from_field(field, 0.8, 8);
    const auto back = weiss::goursat_from_boundary(tr);
    for (int n = -4; n <= 4; ++n) {
        CHECK(std::abs(back.a_at(n) - gc.a_at(n)) < 2e-3);
        CHECK(std::abs(back.b_at(n) - gc.b_at(n)) < 2e-3);
    }
}

TEST_CASE("closed-form monotone quantity of polynomial mode fields") {
    // pure b_0: W0 = -32 pi r^-4 |b0|^2
    weiss::GoursatCoefficients gb(2);
    gb.b_at(0) = 0.5;
    for (double r : {0.5, 1.0, 2.0}) {
        CHECK(std::abs(weiss::w0_goursat(gb, r) + 32 * pi * 0.25 / std::pow(r, 4)) <
              1e-12);
    }
    // pure a_1 (with the conjugate mode): each of n = +-1 contributes
    // 8 pi r^2 |a_1|^2
    weiss::GoursatCoefficients ga(2);
    ga.a_at(1) = num::cplx(0.3, 0.4);
    ga.a_at(-1) = std::conj(ga.a_at(1));
    for (double r : {0.5, 1.0, 2.0}) {
        CHECK(std::abs(weiss::w0_goursat(ga, r) - 2 * 8 * pi * 0.25 * r * r) <
              1e-12);
    }
    // symmetrize averages a mode with its mirror, so a one-sided assignment
    // ends up shared between +-n
    weiss::GoursatCoefficients gh(2);
    gh.a_at(1) = num::cplx(0.3, 0.4);
    gh.symmetrize();
    CHECK(std::abs(gh.a_at(1) - num::cplx(0.15, 0.2)) < 1e-15);
    CHECK(std::abs(gh.a_at(-1) - num::cplx(0.15, -0.2)) < 1e-15);
    // derivative is nonnegative for arbitrary coefficients (per-mode
    // positive-semidefinite quadratic form)
    num::Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        weiss::GoursatCoefficients gr(6);
        for (int n = -6; n <= 6; ++n) {
            gr.a_at(n) = rng.cuniform(1.0);
            gr.b_at(n) = rng.cuniform(1.0);
        }
        gr.symmetrize();
        double prev = -1e300;
        for (double r = 0.2; r <= 2.0; r += 0.1) {
            CHECK(weiss::w0_goursat_prime(gr, r) >= -1e-10);
            const double w = weiss::w0_goursat(gr, r);
            CHECK(w >= prev - 1e-10 * (1.0 + std::abs(w)));
            prev = w;
        }
    }
}

TEST_CASE("coefficient transport matches geometric rescaling") {
    num::Rng rng(11);
    weiss::GoursatCoefficients gc(4);
    for (int n = -4; n <= 4; ++n) {
        gc.a_at(n) = rng.cuniform(0.5);
        gc.b_at(n) = rng.cuniform(0.5);
    }
    gc.symmetrize();
    const double s = 0.62;
    const auto gs = gc.rescaled(s);
    // u_s(z) = u(sz)/s^2 pointwise
    for (double r : {0.3, 0.8}) {
        for (double th : {0.5, 2.4}) {
            CHECK(std::abs(gs.evaluate(r, th) - gc.evaluate(s * r, th) / (s * s)) <
                  1e-12);
        }
    }
    // and the monotone quantity slides accordingly
    CHECK(std::abs(weiss::w0_goursat(gs, 1.0) - weiss::w0_goursat(gc, s)) < 1e-12);
}

TEST_CASE("extension energy of boundary data") {
    using weiss::BoundaryTrace;
    // zero trace -> bare area term
    auto tr = BoundaryTrace::from_functions([](double) { return 0.0; },
                                            [](double) { return 0.0; },
                                            [](double) { return 0.0; }, 8);
    CHECK(std::abs(weiss::biharmonic_extension_energy(tr) - pi) < 1e-12);
    // pure slope -> (r^2-1)/2 with lap = 2: 4 pi + pi
    tr = BoundaryTrace::from_functions([](double) { return 0.0; },
                                       [](double) { return 1.0; },
                                       [](double) { return 0.0; }, 8);
    CHECK(std::abs(weiss::biharmonic_extension_energy(tr) - 5 * pi) < 1e-12);
    // trace of y^2/2 extends to itself: E = pi + pi
    tr = BoundaryTrace::from_functions(
        [](double th) { return 0.5 * num::sq(std::sin(th)); },
        [](double th) { return num::sq(std::sin(th)); },
        [](double th) { return num::sq(std::sin(th)); }, 8);
    CHECK(std::abs(weiss::biharmonic_extension_energy(tr) - 2 * pi) < 1e-12);
}

TEST_CASE("cylinder energy of a settled profile") {
    const auto g = test_grid();
    const auto flat = weiss::DiskField::from_profile(g, flat_profile());
    const auto v = weiss::CylinderField::from_disk(flat, 6.0, 256);
    // v(t,theta) = b(theta): all t-derivatives vanish
    CHECK(std::abs(weiss::cylinder_g(v, 0.0) - 0.5 * pi) < 1e-2 * pi);
    CHECK(std::abs(weiss::cylinder_w(v, 0.0) - 0.5 * pi) < 1e-2 * pi);
    CHECK(std::abs(weiss::cylinder_w_prime(v, 0.5)) < 1e-2);
    CHECK(v.growth_constant >= 0.0);
}

TEST_CASE("disk and cylinder evaluations of W agree") {
    const auto g = weiss::PolarGrid::make(256, 384);
    weiss::GoursatCoefficients gc(3);
    gc.a_at(0) = 0.2;
    gc.a_at(1) = num::cplx(0.15, 0.1);
    gc.b_at(2) = num::cplx(0.05, -0.02);
    gc.symmetrize();
    const auto field = gc.to_field(g);
    const auto v = weiss::CylinderField::from_disk(field, 6.0, 512);
    for (double r : {0.5, 0.7}) {
        const double from_disk = weiss::weiss_w(field, r);
        const double from_cyl = weiss::cylinder_w(v, -std::log(r));
        CHECK(std::abs(from_disk - from_cyl) < 2e-2 * std::abs(from_disk));
    }
    // the dissipation identity: dW/dtau = -4 int (v_tt^2 + v_ttheta^2)
    const double tau = 0.6;
    const double h = 0.08;
    const double fd =
        (weiss::cylinder_w(v, tau + h) - weiss::cylinder_w(v, tau - h)) / (2 * h);
    const double closed = weiss::cylinder_w_prime(v, tau);
    CHECK(std::abs(fd - closed) < 0.1 * (std::abs(closed) + 0.1));

    // analytic sampling agrees with disk resampling
    auto vfun = [&](double t, double th) {
        return std::exp(2 * t) * gc.evaluate(std::exp(-t), th);
    };
    const auto va = weiss::CylinderField::from_function(vfun, 6.0, 512, g.n_theta);
    double worst = 0.0;
    for (int k : {64, 256, 448}) {
        for (int j : {32, 192, 352}) {
            worst = std::max(worst,
                             std::abs(va.vals[va.idx(k, j)] - v.vals[v.idx(k, j)]));
        }
    }
    CHECK(worst < 2e-3);
}
