#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "fbl/fbp_solver.hpp"
#include "fbl/numerics.hpp"

namespace fbl::solver {

using num::pi;

namespace {

// hysteresis band: a removed cell re-enters only when the local bending gain
// exceeds this multiple of the removal threshold (prevents limit cycles of
// the nonconvex area term)
constexpr double kReentryFactor = 2.0;

// monotonicity slack constant, calibrated against homogeneous profiles at
// 64..192 radial shells (observed worst adjacent backslide stays below a
// quarter of the allowance; see the module tests)
constexpr double kMonotoneSlack = 2.0;

// ---------------------------------------------------- Cartesian workspace ----

// Cell-centered grid covering [-1,1]^2 plus a two-cell margin: cell (ix,iy)
// sits at (-1 + (ix-1.5) h, -1 + (iy-1.5) h), ix,iy = 0..n-1.  Interior cells
// (center radius < 1) carry the unknowns; every exterior cell carries the
// clamp data u = g(theta) + (r-1) h(theta), the first-order normal extension
// of the boundary trace pair.  The least-squares rows cover the interior AND
// the first exterior ring: a ring row reads the second data ring on one side
// and the unknowns on the other, which is what transmits the normal
// derivative of the clamp (value-only coupling would leave the minimum at
// the harmonic extension with zero bending).
struct CartWorkspace {
    int n = 0;
    double h = 0.0;
    double lambda = 0.0;
    std::vector<double> coord;           // cell-center coordinate per index
    std::vector<std::uint8_t> interior;  // center radius < 1
    std::vector<double> rad;             // center radius per cell
    std::vector<double> u;               // field values; exterior = clamp data
    std::vector<double> lap;             // 5-point Laplacian at interior cells

    [[nodiscard]] std::size_t id(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * n + ix;
    }
};

CartWorkspace make_workspace(int n_inner, double lambda,
                             const std::function<double(double)>& g,
                             const std::function<double(double)>& h) {
    CartWorkspace ws;
    ws.n = n_inner + 4;
    ws.h = 2.0 / n_inner;
    ws.lambda = lambda;
    ws.coord.resize(ws.n);
    for (int i = 0; i < ws.n; ++i) ws.coord[i] = -1.0 + (i - 1.5) * ws.h;
    const std::size_t nn = static_cast<std::size_t>(ws.n) * ws.n;
    ws.interior.assign(nn, 0);
    ws.rad.assign(nn, 0.0);
    ws.u.assign(nn, 0.0);
    ws.lap.assign(nn, 0.0);
    for (int iy = 0; iy < ws.n; ++iy)
        for (int ix = 0; ix < ws.n; ++ix) {
            const std::size_t c = ws.id(ix, iy);
            const double x = ws.coord[ix], y = ws.coord[iy];
            const double r = std::hypot(x, y);
            ws.rad[c] = r;
            if (r < 1.0) {
                ws.interior[c] = 1;
            } else {
                double th = std::atan2(y, x);
                if (th < 0.0) th += 2.0 * pi;
                ws.u[c] = g(th) + (r - 1.0) * h(th);
            }
        }
    return ws;
}

void recompute_laplacian(CartWorkspace& ws) {
    const double ih2 = 1.0 / (ws.h * ws.h);
    for (int iy = 1; iy + 1 < ws.n; ++iy)
        for (int ix = 1; ix + 1 < ws.n; ++ix) {
            const std::size_t c = ws.id(ix, iy);
            if (!ws.interior[c]) {
                ws.lap[c] = 0.0;
                continue;
            }
            ws.lap[c] = (ws.u[ws.id(ix - 1, iy)] + ws.u[ws.id(ix + 1, iy)] +
                         ws.u[ws.id(ix, iy - 1)] + ws.u[ws.id(ix, iy + 1)] -
                         4.0 * ws.u[c]) *
                        ih2;
        }
}

// discrete energy: bending summed over the disk cells plus the area term
double total_energy(const CartWorkspace& ws,
                    const std::vector<std::uint8_t>& act) {
    const double h2 = ws.h * ws.h;
    double bend = 0.0;
    std::size_t n_act = 0;
    const std::size_t nn = ws.u.size();
    for (std::size_t c = 0; c < nn; ++c) {
        if (ws.interior[c]) bend += num::sq(ws.lap[c]);
        if (act[c]) ++n_act;
    }
    return bend * h2 + ws.lambda * h2 * static_cast<double>(n_act);
}

// least-squares clamped biharmonic solve on the active set: minimize the sum
// of squared 5-point Laplacians over all disk cells with inactive interior
// cells pinned to zero; the normal equations carry the 13-point biharmonic
// stencil away from the mask boundary
void solve_clamped(CartWorkspace& ws, const std::vector<std::uint8_t>& act) {
    const int n = ws.n;
    const double ih2 = 1.0 / (ws.h * ws.h);
    std::vector<int> ids(ws.u.size(), -1);
    int n_unknown = 0;
    for (std::size_t c = 0; c < ws.u.size(); ++c)
        if (act[c]) ids[c] = n_unknown++;

    // pin inactive interior cells first so fixed reads are correct
    for (std::size_t c = 0; c < ws.u.size(); ++c)
        if (ws.interior[c] && !act[c]) ws.u[c] = 0.0;

    if (n_unknown > 0) {
        std::vector<int> rows;
        rows.reserve(ws.u.size());
        for (int iy = 1; iy + 1 < n; ++iy)
            for (int ix = 1; ix + 1 < n; ++ix)
                if (ws.rad[ws.id(ix, iy)] < 1.0 + ws.h)
                    rows.push_back(static_cast<int>(ws.id(ix, iy)));

        Eigen::SparseMatrix<double> lap_op(static_cast<int>(rows.size()),
                                           n_unknown);
        Eigen::VectorXd fixed = Eigen::VectorXd::Zero(
            static_cast<Eigen::Index>(rows.size()));
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(rows.size() * 5);
        for (std::size_t rix = 0; rix < rows.size(); ++rix) {
            const auto c = static_cast<std::size_t>(rows[rix]);
            const int ix = static_cast<int>(c) % n;
            const int iy = static_cast<int>(c) / n;
            const std::size_t nb[4] = {ws.id(ix - 1, iy), ws.id(ix + 1, iy),
                                       ws.id(ix, iy - 1), ws.id(ix, iy + 1)};
            const auto row = static_cast<int>(rix);
            if (ids[c] >= 0)
                trips.emplace_back(row, ids[c], -4.0 * ih2);
            else
                fixed[row] += -4.0 * ih2 * ws.u[c];
            for (const std::size_t b : nb) {
                if (ids[b] >= 0)
                    trips.emplace_back(row, ids[b], ih2);
                else
                    fixed[row] += ih2 * ws.u[b];
            }
        }
        lap_op.setFromTriplets(trips.begin(), trips.end());

        const Eigen::SparseMatrix<double> normal =
            Eigen::SparseMatrix<double>(lap_op.transpose()) * lap_op;
        const Eigen::VectorXd rhs = -lap_op.transpose() * fixed;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
        ldlt.compute(normal);
        if (ldlt.info() != Eigen::Success)
            throw std::runtime_error(
                "minimize_energy: clamped biharmonic factorization failed");
        const Eigen::VectorXd x = ldlt.solve(rhs);
        if (ldlt.info() != Eigen::Success)
            throw std::runtime_error(
                "minimize_energy: clamped biharmonic solve failed");
        for (std::size_t c = 0; c < ws.u.size(); ++c)
            if (ids[c] >= 0) ws.u[c] = x[ids[c]];
    }
    recompute_laplacian(ws);
}

// ------------------------------------------------------- support updates ----

// Gauss-Seidel local update at one cell: change u_c to t, refresh the cached
// Laplacians of the rows that read it
void apply_cell(CartWorkspace& ws, std::size_t c, int ix, int iy, double t) {
    const double ih2 = 1.0 / (ws.h * ws.h);
    const double delta = t - ws.u[c];
    ws.u[c] = t;
    ws.lap[c] -= 4.0 * delta * ih2;
    const std::size_t nb[4] = {ws.id(ix - 1, iy), ws.id(ix + 1, iy),
                               ws.id(ix, iy - 1), ws.id(ix, iy + 1)};
    for (const std::size_t b : nb)
        if (ws.interior[b]) ws.lap[b] += delta * ih2;
}

// one greedy sweep in a seed-shuffled deterministic order; returns the number
// of support changes.  Removal: zeroing the cell must beat the area toll
// lambda h^2 against the local bending increase.  Re-entry: the locally
// optimal value must gain more than kReentryFactor times that toll.
int cellwise_sweep(CartWorkspace& ws, std::vector<std::uint8_t>& act,
                   std::uint64_t seed) {
    std::vector<std::size_t> order;
    order.reserve(ws.u.size());
    for (std::size_t c = 0; c < ws.u.size(); ++c)
        if (ws.interior[c]) order.push_back(c);
    num::Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.raw() % i]);

    const double h2 = ws.h * ws.h;
    const double ih2 = 1.0 / h2;
    const double toll = ws.lambda * h2;
    int changes = 0;
    for (const std::size_t c : order) {
        const int ix = static_cast<int>(c) % ws.n;
        const int iy = static_cast<int>(c) / ws.n;
        const std::size_t nb[4] = {ws.id(ix - 1, iy), ws.id(ix + 1, iy),
                                   ws.id(ix, iy - 1), ws.id(ix, iy + 1)};
        if (act[c]) {
            const double d = -ws.u[c];  // removal sets the value to zero
            double dbend = num::sq(ws.lap[c] - 4.0 * d * ih2) -
                           num::sq(ws.lap[c]);
            for (const std::size_t b : nb)
                if (ws.interior[b])
                    dbend += num::sq(ws.lap[b] + d * ih2) - num::sq(ws.lap[b]);
            if (dbend * h2 < toll) {
                apply_cell(ws, c, ix, iy, 0.0);
                act[c] = 0;
                ++changes;
            }
        } else {
            // quadratic in the trial value t: rows read k t with k = -4/h^2
            // at the cell and 1/h^2 at interior neighbors
            double sk2 = num::sq(4.0 * ih2), slk = ws.lap[c] * (-4.0 * ih2);
            for (const std::size_t b : nb)
                if (ws.interior[b]) {
                    sk2 += num::sq(ih2);
                    slk += ws.lap[b] * ih2;
                }
            const double t = -slk / sk2;
            const double gain = slk * slk / sk2 * h2;
            if (gain > kReentryFactor * toll) {
                apply_cell(ws, c, ix, iy, t);
                act[c] = 1;
                ++changes;
            }
        }
    }
    return changes;
}

void set_radial_support(const CartWorkspace& ws, std::vector<std::uint8_t>& act,
                        double rho) {
    for (std::size_t c = 0; c < ws.u.size(); ++c)
        act[c] = (ws.interior[c] != 0 && ws.rad[c] >= rho) ? 1 : 0;
}

// ------------------------------------------------- cubic interpolation ----

// Catmull-Rom tensor interpolation of the padded cell-centered array;
// stencil indices are replicate-clamped at the array edge
double interp_cubic(const std::vector<double>& u, int n, double h, double x,
                    double y) {
    const auto weights = [](double t, double w[4]) {
        w[0] = 0.5 * (-t + 2.0 * t * t - t * t * t);
        w[1] = 0.5 * (2.0 - 5.0 * t * t + 3.0 * t * t * t);
        w[2] = 0.5 * (t + 4.0 * t * t - 3.0 * t * t * t);
        w[3] = 0.5 * (-t * t + t * t * t);
    };
    const double sx = (x + 1.0) / h + 1.5, sy = (y + 1.0) / h + 1.5;
    const int ix = static_cast<int>(std::floor(sx));
    const int iy = static_cast<int>(std::floor(sy));
    double wx[4], wy[4];
    weights(sx - ix, wx);
    weights(sy - iy, wy);
    double out = 0.0;
    for (int b = 0; b < 4; ++b) {
        const int jj = std::clamp(iy - 1 + b, 0, n - 1);
        double row = 0.0;
        for (int a = 0; a < 4; ++a) {
            const int ii = std::clamp(ix - 1 + a, 0, n - 1);
            row += wx[a] * u[static_cast<std::size_t>(jj) * n + ii];
        }
        out += wy[b] * row;
    }
    return out;
}

weiss::DiskField resample_polar(const std::vector<double>& u_cart, int n_cart,
                                double h_cart, int n_r, int n_theta,
                                double px, double py, double scale) {
    const auto grid = weiss::PolarGrid::make(n_r, n_theta);
    std::vector<double> vals(static_cast<std::size_t>(n_r) * n_theta);
    for (int i = 0; i < n_r; ++i)
        for (int j = 0; j < n_theta; ++j) {
            const double th = grid.theta(j);
            const double x = px + scale * grid.r[i] * std::cos(th);
            const double y = py + scale * grid.r[i] * std::sin(th);
            vals[static_cast<std::size_t>(i) * n_theta + j] =
                interp_cubic(u_cart, n_cart, h_cart, x, y) / (scale * scale);
        }
    return weiss::DiskField::from_samples(grid, std::move(vals));
}

}  // namespace

// -------------------------------------------------------- minimize_energy ----

SolveResult minimize_energy(const SolverConfig& config,
                            const std::function<double(double)>& g,
                            const std::function<double(double)>& h) {
    if (config.lambda < 0.0)
        throw std::invalid_argument("minimize_energy: lambda must be >= 0");
    if (config.n_r < 16 || config.n_theta < 16)
        throw std::invalid_argument(
            "minimize_energy: grid sizes must be at least 16");
    if (config.max_outer_iters < 1)
        throw std::invalid_argument(
            "minimize_energy: need at least one outer iteration");
    if (!(config.tol_energy > 0.0))
        throw std::invalid_argument("minimize_energy: tol_energy must be > 0");

    const bool radial =
        config.support_update_rule == SupportUpdateRule::radial_exact;
    CartWorkspace ws = make_workspace(2 * config.n_r, config.lambda, g, h);
    std::vector<std::uint8_t> act(ws.interior.begin(), ws.interior.end());
    double rho = 0.0;

    solve_clamped(ws, act);
    double energy = total_energy(ws, act);
    std::vector<double> history{energy};

    // with no area reward the full-support clamped solve is already the
    // minimizer: support updates could only add bending
    bool converged = (config.lambda == 0.0);
    bool step_rejected = false;
    int iters = 0;
    for (int iter = 0; !converged && iter < config.max_outer_iters; ++iter) {
        iters = iter + 1;
        if (radial) {
            // trial free radii: coarse scan first, one-cell moves afterwards
            std::vector<double> cands;
            if (iter == 0) {
                for (int j = 1; j <= 19; ++j) cands.push_back(0.05 * j);
            } else {
                if (rho - ws.h >= 0.5 * ws.h) cands.push_back(rho - ws.h);
                if (rho > 0.0 && rho - ws.h < 0.5 * ws.h) cands.push_back(0.0);
                if (rho + ws.h < 1.0 - ws.h) cands.push_back(rho + ws.h);
            }
            double best_e = energy, best_rho = rho;
            std::vector<double> best_u;
            std::vector<std::uint8_t> trial(act.size());
            for (const double cand : cands) {
                set_radial_support(ws, trial, cand);
                solve_clamped(ws, trial);
                const double e = total_energy(ws, trial);
                if (e < best_e) {
                    best_e = e;
                    best_rho = cand;
                    best_u = ws.u;
                }
            }
            if (best_rho == rho) {  // no improving move: stable support
                set_radial_support(ws, act, rho);
                solve_clamped(ws, act);
                converged = true;
                break;
            }
            rho = best_rho;
            set_radial_support(ws, act, rho);
            ws.u = std::move(best_u);
            recompute_laplacian(ws);
            const double drop = energy - best_e;
            energy = best_e;
            history.push_back(energy);
            if (drop < config.tol_energy) {
                converged = true;
                break;
            }
        } else {
            const std::vector<std::uint8_t> act_prev = act;
            const std::vector<double> u_prev = ws.u;
            const std::uint64_t sweep_seed =
                config.seed + 0x9e3779b97f4a7c15ULL * (iter + 1);
            const int changes = cellwise_sweep(ws, act, sweep_seed);
            if (changes == 0) {
                converged = true;
                break;
            }
            solve_clamped(ws, act);
            const double e_new = total_energy(ws, act);
            if (e_new < energy) {
                const double drop = energy - e_new;
                energy = e_new;
                history.push_back(energy);
                if (drop < config.tol_energy) {
                    converged = true;
                    break;
                }
            } else {
                // the greedy proposal did not pan out: revert and flag the
                // support rule rather than risk a limit cycle
                act = act_prev;
                ws.u = u_prev;
                recompute_laplacian(ws);
                step_rejected = true;
                break;
            }
        }
    }

    SolveResult res(resample_polar(ws.u, ws.n, ws.h, config.n_r,
                                   config.n_theta, 0.0, 0.0, 1.0));
    res.lambda = config.lambda;
    res.energy = energy;
    res.energy_history = std::move(history);
    res.converged = converged;
    std::size_t n_act = 0;
    for (const auto a : act) n_act += a;
    res.support_area = ws.h * ws.h * static_cast<double>(n_act);
    res.n_cart = ws.n;
    res.h_cart = ws.h;
    res.u_cart = ws.u;
    res.mask_cart.assign(act.begin(), act.end());
    // the polar shells below one Cartesian cell are interpolation residue;
    // judge center flatness from the source grid instead
    {
        const double probe = 4.0 * ws.h;
        double m0 = 0.0;
        for (std::size_t c = 0; c < ws.u.size(); ++c)
            if (ws.interior[c] && ws.rad[c] <= probe)
                m0 = std::max(m0, std::abs(ws.u[c]));
        res.field.set_center_flat(m0 <= 10.0 * probe * probe * (1.0 + m0));
    }

    const auto& pg = res.field.grid();
    const int lo_shell = 3, hi_shell = config.n_r - 4;
    const int n_prof = 14;
    for (int k = 0; k < n_prof; ++k) {
        const int i =
            lo_shell + k * (hi_shell - lo_shell) / (n_prof - 1);
        res.w_profile.emplace_back(
            pg.r[i], weiss::weiss_w(res.field, pg.r[i], config.lambda));
    }

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "{\"label\":\"candidate minimizer\",\"rule\":\"%s\","
                  "\"lambda\":%.6g,\"n_cart\":%d,\"outer_iters\":%d,"
                  "\"support_step_rejected\":%s,\"rho\":%.6g}",
                  radial ? "radial-exact" : "cellwise-threshold",
                  config.lambda, ws.n, iters, step_rejected ? "true" : "false",
                  radial ? rho : 0.0);
    res.notes = buf;
    return res;
}

double vanishing_threshold(const SolverConfig& config) {
    // zeroing one cell of the near-constant solve changes five Laplacian
    // rows, costing 20 u^2 / h^2 of bending against the lambda h^2 area
    // toll; data below half the break-even amplitude cascades to zero
    const double h = 1.0 / config.n_r;
    return 0.5 * h * h * std::sqrt(config.lambda / 20.0);
}

// ------------------------------------------------------- blow_up_sequence ----

std::vector<BlowUpStep> blow_up_sequence(const SolveResult& result, double px,
                                         double py,
                                         const std::vector<double>& radii,
                                         int n_r, int n_theta) {
    if (result.n_cart <= 0 || result.u_cart.empty())
        throw std::invalid_argument("blow_up_sequence: result has no grid");
    std::vector<BlowUpStep> steps;
    for (const double r : radii) {
        if (r < 4.0 * result.h_cart)
            throw std::invalid_argument(
                "blow_up_sequence: radius below grid resolution");
        if (std::hypot(px, py) + r > 1.0 + 1e-9)
            throw std::invalid_argument(
                "blow_up_sequence: rescaled disk escapes the unit disk");
        BlowUpStep step(r, resample_polar(result.u_cart, result.n_cart,
                                          result.h_cart, n_r, n_theta, px, py,
                                          r));
        const auto& pg = step.field.grid();
        step.w_tag =
            weiss::weiss_w(step.field, pg.r[pg.n_r - 4], result.lambda);
        steps.push_back(std::move(step));
    }
    return steps;
}

// ------------------------------------------------ monotonicity_experiment ----

MonotonicityReport monotonicity_experiment(const SolveResult& result,
                                           const std::vector<double>& r_grid) {
    if (!result.field.center_flat())
        throw std::invalid_argument(
            "monotonicity_experiment: field is not center-flat");
    const auto& pg = result.field.grid();
    MonotonicityReport rep;
    std::vector<double> radii = r_grid;
    std::sort(radii.begin(), radii.end());
    for (const double r : radii) {
        const int shell = pg.nearest_shell(r);
        if (shell < 3 || shell > pg.n_r - 4) continue;  // quadrature corridor
        rep.r.push_back(r);
        rep.w.push_back(weiss::weiss_w(result.field, r, result.lambda));
        // allowed backslide, explicit in the local grid spacing
        const double dr = pg.r_edge[shell + 1] - pg.r_edge[shell];
        const double rel = dr / r + num::sq(pg.dtheta);
        rep.slack.push_back(kMonotoneSlack * rel *
                            (1.0 + std::abs(rep.w.back())));
    }
    if (rep.r.size() < 2)
        throw std::invalid_argument(
            "monotonicity_experiment: need at least two admissible radii");
    for (std::size_t i = 0; i + 1 < rep.r.size(); ++i) {
        const double margin =
            rep.w[i + 1] + rep.slack[i] + rep.slack[i + 1] - rep.w[i];
        if (margin < 0.0) {
            ++rep.violations;
            rep.worst = std::min(rep.worst, margin);
        }
    }
    rep.passed = rep.violations == 0;
    return rep;
}

}  // namespace fbl::solver
