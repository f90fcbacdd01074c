#include "fbl/numerics.hpp"

#include <cmath>

namespace fbl::num {

double bisect(const std::function<double(double)>& f, double a, double b,
              double tol, int max_iter) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0))
        throw std::invalid_argument("bisect: endpoints do not bracket a root");
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

double simpson(const std::function<double(double)>& f, double a, double b,
               int n_nodes) {
    if (n_nodes < 3 || n_nodes % 2 == 0)
        throw std::invalid_argument("simpson: need an odd node count >= 3");
    const double h = (b - a) / (n_nodes - 1);
    double acc = f(a) + f(b);
    for (int i = 1; i < n_nodes - 1; ++i)
        acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double simpson_samples(std::span<const double> v, double h) {
    const int n = static_cast<int>(v.size());
    if (n < 3 || n % 2 == 0)
        throw std::invalid_argument("simpson_samples: need odd sample count");
    double acc = v[0] + v[n - 1];
    for (int i = 1; i < n - 1; ++i) acc += v[i] * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double periodic_trapezoid(std::span<const double> v, double period) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc * period / static_cast<double>(v.size());
}

double exp_moment(int k, double a, double b, double c) {
    if (k < 0) throw std::invalid_argument("exp_moment: negative order");
    if (c == 0.0) {
        // plain polynomial moment
        double pa = a, pb = b;
        for (int i = 0; i < k; ++i) {
            pa *= a;
            pb *= b;
        }
        return (pb - pa) / (k + 1);
    }
    // I_0 = (e^{-ca} - e^{-cb})/c ; I_k = (a^k e^{-ca} - b^k e^{-cb})/c + k/c I_{k-1}
    const double ea = std::exp(-c * a);
    const double eb = std::exp(-c * b);
    double ik = (ea - eb) / c;
    double pa = 1.0, pb = 1.0;
    for (int i = 1; i <= k; ++i) {
        pa *= a;
        pb *= b;
        ik = (pa * ea - pb * eb) / c + (static_cast<double>(i) / c) * ik;
    }
    return ik;
}

ExpWeightedRule make_exp_rule(double rate, double t_end, int n_nodes) {
    if (n_nodes < 3 || n_nodes % 2 == 0)
        throw std::invalid_argument("make_exp_rule: need odd node count >= 3");
    ExpWeightedRule rule;
    rule.rate = rate;
    rule.t_end = t_end;
    const int n = n_nodes;
    const double h = t_end / (n - 1);
    rule.nodes.resize(n);
    rule.weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) rule.nodes[i] = i * h;

    // Per panel [t0,t2] with midpoint t1: integrate e^{-rate t} times the
    // Lagrange quadratic through the three nodes.  With s = t - t1 the basis
    // is L0 = s(s-h)/(2h^2), L1 = 1 - s^2/h^2, L2 = s(s+h)/(2h^2), and the
    // moments M_k = \int_{-h}^{h} s^k e^{-rate (t1+s)} ds come from exp_moment.
    for (int p = 0; p + 2 < n; p += 2) {
        const double t1 = rule.nodes[p + 1];
        const double m0 = exp_moment(0, -h, h, rate);
        const double m1 = exp_moment(1, -h, h, rate);
        const double m2 = exp_moment(2, -h, h, rate);
        const double scale = std::exp(-rate * t1);
        rule.weights[p] += scale * (m2 - h * m1) / (2 * h * h);
        rule.weights[p + 1] += scale * (m0 - m2 / (h * h));
        rule.weights[p + 2] += scale * (m2 + h * m1) / (2 * h * h);
    }
    return rule;
}

double ExpWeightedRule::integrate(const std::function<double(double)>& g) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * g(nodes[i]);
    return acc;
}

double ExpWeightedRule::integrate_samples(std::span<const double> g) const {
    if (g.size() != nodes.size())
        throw std::invalid_argument("ExpWeightedRule: sample count mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * g[i];
    return acc;
}

double ExpWeightedRule::tail_unit() const { return std::exp(-rate * t_end) / rate; }

std::vector<double> fd_weights(double x0, std::span<const double> x, int m) {
    const int n = static_cast<int>(x.size());
    if (m >= n)
        throw std::invalid_argument("fd_weights: derivative order needs more nodes");
    // Fornberg's recursive algorithm; c[i][k] = weight of node i for the k-th
    // derivative.  Only the highest requested order is returned.
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

double smoothstep5(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return ((6 * s - 15) * s + 10) * s * s * s;
}

double smoothstep5_d1(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return ((30 * s - 60) * s + 30) * s * s;
}

double smoothstep5_d2(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return ((120 * s - 180) * s + 60) * s;
}

}  // namespace fbl::num
