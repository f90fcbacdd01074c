#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace fbl::num {

inline constexpr double pi = 3.141592653589793238462643383279502884;

using cplx = std::complex<double>;

// ---------------------------------------------------------------- roots ----

// Plain bisection on [a,b]; f(a) and f(b) must have opposite signs.
// Runs until the bracket width drops below tol or max_iter halvings.
double bisect(const std::function<double(double)>& f, double a, double b,
              double tol = 1e-14, int max_iter = 200);

// ----------------------------------------------------------- quadrature ----

// Composite Simpson over [a,b] with n_nodes sample points (odd, >= 3).
double simpson(const std::function<double(double)>& f, double a, double b,
               int n_nodes);

// Composite Simpson over uniformly sampled values (odd count) with step h.
double simpson_samples(std::span<const double> values, double h);

// Trapezoid rule over one full period of a uniformly sampled periodic
// function (n samples spanning [0, period), no repeated endpoint).
// Spectrally accurate for smooth periodic integrands.
double periodic_trapezoid(std::span<const double> values, double period);

// Exact moment \int_a^b t^k e^{-c t} dt (c may be zero), by downward-stable
// recurrence in k.
double exp_moment(int k, double a, double b, double c);

// Product quadrature for semi-infinite integrals \int_0^inf e^{-rate t} g(t) dt:
// uniform nodes on [0, t_end]; per panel the smooth factor g is interpolated
// quadratically and the weight e^{-rate t} integrated exactly, so the rule is
// exact for polynomial g up to the analytic tail beyond t_end.
struct ExpWeightedRule {
    double rate = 2.0;
    double t_end = 40.0;
    std::vector<double> nodes;    // size 2m+1
    std::vector<double> weights;  // same size; sum_i w_i g(t_i)

    [[nodiscard]] double integrate(const std::function<double(double)>& g) const;
    [[nodiscard]] double integrate_samples(std::span<const double> g) const;
    // Tail \int_{t_end}^inf e^{-rate t} dt, for constant-continuation bounds.
    [[nodiscard]] double tail_unit() const;
};

ExpWeightedRule make_exp_rule(double rate, double t_end, int n_nodes);

// -------------------------------------------------- finite differences ----

// Fornberg weights: given nodes x[0..n) and evaluation point x0, returns the
// coefficients w such that f^(m)(x0) ~= sum_i w[i] f(x[i]).  Works for
// arbitrary node spacing and one-sided stencils.  m < n required.
std::vector<double> fd_weights(double x0, std::span<const double> x, int m);

// ------------------------------------------------------------------ rng ----

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(eng_);
    }
    double normal(double mean = 0.0, double sigma = 1.0) {
        return std::normal_distribution<double>(mean, sigma)(eng_);
    }
    cplx cuniform(double radius) {
        return {uniform(-radius, radius), uniform(-radius, radius)};
    }
    std::uint64_t raw() { return eng_(); }
    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

// ------------------------------------------------------------- helpers ----

inline double sq(double x) { return x * x; }

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

// C2 quintic smoothstep: 0 for s<=0, 1 for s>=1, 6s^5-15s^4+10s^3 between.
double smoothstep5(double s);
double smoothstep5_d1(double s);
double smoothstep5_d2(double s);

}  // namespace fbl::num
