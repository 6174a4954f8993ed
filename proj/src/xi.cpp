#include "cmx/xi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

namespace cmx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453;

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    unsigned n = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    n = std::min<unsigned>(n, count == 0 ? 1 : static_cast<unsigned>(count));
    if (n <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < count; i += n) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct EffectiveFamily {
    std::vector<int> indices;            // indices into family.grid() that stay
    std::vector<int> skipped;
    std::vector<double> er_all;          // E_r^* per family entry
    std::vector<double> rho_hat_all;
};

double entry_er_star(const ChannelFamily::Entry& e, double rate, const DeltaStarSpec& spec, double* rho_hat) {
    ErCurve c;
    if (e.theta.has_value()) {
        c = bsc_Er_star(*e.theta, rate);
    } else {
        c = er_star(e.channel, spec.implied_q(e.channel.x_size()), rate);
    }
    if (rho_hat) *rho_hat = c.rho_hat;
    return c.value;
}

EffectiveFamily effective_family(const ChannelFamily& family, double rate, const DeltaStarSpec& spec, double floor) {
    EffectiveFamily ef;
    for (std::size_t i = 0; i < family.size(); ++i) {
        double rh = 0.0;
        const double er = entry_er_star(family.grid()[i], rate, spec, &rh);
        ef.er_all.push_back(er);
        ef.rho_hat_all.push_back(rh);
        if (er >= floor)
            ef.indices.push_back(static_cast<int>(i));
        else
            ef.skipped.push_back(static_cast<int>(i));
    }
    return ef;
}

struct CellMax {
    double value = -kInf;
    double rho = 0.0;
    double second = 0.0; // u or w, depending on the search
};

// Maximize obj(rho, u) over [0,1]^2 by grid sweep plus local refinement.
CellMax grid_max_2d(const std::function<double(double, double)>& obj, int n, int rounds,
                    double u_hi = 1.0) {
    CellMax best;
    double lo_r = 0.0, hi_r = 1.0, lo_u = 0.0, hi_u = u_hi;
    for (int round = 0; round <= rounds; ++round) {
        for (int i = 0; i < n; ++i) {
            const double rho = lo_r + (hi_r - lo_r) * i / (n - 1);
            for (int j = 0; j < n; ++j) {
                const double u = lo_u + (hi_u - lo_u) * j / (n - 1);
                const double v = obj(rho, u);
                if (v > best.value) {
                    best.value = v;
                    best.rho = rho;
                    best.second = u;
                }
            }
        }
        const double dr = (hi_r - lo_r) / (n - 1) * 5.0;
        const double du = (hi_u - lo_u) / (n - 1) * 5.0;
        lo_r = std::max(0.0, best.rho - dr);
        hi_r = std::min(1.0, best.rho + dr);
        lo_u = std::max(0.0, best.second - du);
        hi_u = std::min(u_hi, best.second + du);
    }
    return best;
}

// Closed-form per-pair objective for all-BSC families, variables (rho, u = lambda rho).
double bsc_pair_objective(double theta, double theta_prime, double rate, double er1, double er2,
                          double denom_floor, double rho, double u) {
    const double den = (1.0 - u) * er1 + u * er2;
    if (!(den >= denom_floor)) return -kInf;
    if (rho <= 0.0) return u == 0.0 ? 0.0 : -kInf; // lambda pinned to 0 at rho = 0
    const double lambda = u / rho;
    const double num = rho * kLn2 - bsc_V(theta, 1.0 - u) - rho * bsc_V(theta_prime, lambda) - rho * rate;
    return num / den;
}

// Sweep specialized to the closed form: V(theta, 1-u) depends on the u row
// only, so it is tabulated once per refinement round.
CellMax bsc_pair_max(double theta, double theta_prime, double rate, double er1, double er2,
                     double denom_floor, int n, int rounds) {
    CellMax best;
    double lo_r = 0.0, hi_r = 1.0, lo_u = 0.0, hi_u = 1.0;
    std::vector<double> v1(n), us(n), dens(n);
    for (int round = 0; round <= rounds; ++round) {
        for (int j = 0; j < n; ++j) {
            us[j] = lo_u + (hi_u - lo_u) * j / (n - 1);
            v1[j] = bsc_V(theta, 1.0 - us[j]);
            dens[j] = (1.0 - us[j]) * er1 + us[j] * er2;
        }
        for (int i = 0; i < n; ++i) {
            const double rho = lo_r + (hi_r - lo_r) * i / (n - 1);
            if (rho <= 0.0) {
                if (lo_u <= 0.0 && dens[0] >= denom_floor && 0.0 > best.value) best = {0.0, 0.0, 0.0};
                continue;
            }
            const double base = rho * (kLn2 - rate);
            for (int j = 0; j < n; ++j) {
                if (!(dens[j] >= denom_floor)) continue;
                const double v = (base - v1[j] - rho * bsc_V(theta_prime, us[j] / rho)) / dens[j];
                if (v > best.value) best = {v, rho, us[j]};
            }
        }
        const double dr = (hi_r - lo_r) / (n - 1) * 5.0;
        const double du = (hi_u - lo_u) / (n - 1) * 5.0;
        lo_r = std::max(0.0, best.rho - dr);
        hi_r = std::min(1.0, best.rho + dr);
        lo_u = std::max(0.0, best.second - du);
        hi_u = std::min(1.0, best.second + du);
    }
    return best;
}

} // namespace

XiResult xi_lb_bsc_closed_form(const ChannelFamily& family, double rate, int grid_points,
                               int refinement_rounds, double denom_floor, int threads) {
    if (!family.all_bsc()) throw std::invalid_argument("xi_lb_bsc_closed_form: family is not all-BSC");
    DeltaStarSpec uni = DeltaStarSpec::linear_binary();
    EffectiveFamily ef = effective_family(family, rate, uni, denom_floor);
    if (ef.indices.empty()) throw std::runtime_error("empty effective family: rate too high for every channel in the grid");

    const std::size_t m = ef.indices.size();
    struct PairBest {
        double value;
        CellMax cell;
    };
    std::vector<PairBest> pair_best(m * m);
    parallel_for(m * m, threads, [&](std::size_t k) {
        const int i = ef.indices[k / m], j = ef.indices[k % m];
        const double th = *family.grid()[i].theta, tp = *family.grid()[j].theta;
        const double e1 = ef.er_all[i], e2 = ef.er_all[j];
        CellMax c = bsc_pair_max(th, tp, rate, e1, e2, denom_floor, grid_points, refinement_rounds);
        pair_best[k] = {c.value, c};
    });

    XiResult r;
    r.xi = kInf;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < m * m; ++k) {
        if (pair_best[k].value < r.xi) {
            r.xi = pair_best[k].value;
            arg = k;
        }
    }
    const CellMax& c = pair_best[arg].cell;
    r.witness.theta_index = ef.indices[arg / m];
    r.witness.theta_prime_index = ef.indices[arg % m];
    r.witness.rho = c.rho;
    r.witness.s_or_lambda = c.rho > 0.0 ? c.second / c.rho : 0.0;
    r.witness.branch = 1;
    r.diagnostics.skipped_theta_indices = ef.skipped;
    r.diagnostics.er_star_values = ef.er_all;
    r.diagnostics.grids.rho_points = grid_points;
    r.diagnostics.grids.s_points = grid_points;
    r.diagnostics.grids.refinement_rounds = refinement_rounds;
    r.diagnostics.mode = "bsc-closed";
    return r;
}

namespace {

// min over P_{X|Y} of A(theta, alpha, .) with P_Y fixed: closed form when
// available, otherwise grid search.
double inner_min_A(const Dmc& w, double alpha, const Pmf& p_y, const DeltaStarSpec& spec,
                   bool bsc_uniform_fast, double theta, int grid_points, int rounds) {
    if (bsc_uniform_fast) return kLn2 - bsc_V(theta, alpha);
    if (spec.iid_like()) return min_A_over_conditional(w, alpha, p_y, spec);
    return min_A_grid(w, alpha, p_y, spec, grid_points, rounds);
}

// Gibbs minimizer columns, P(a|b) proportional to q(a) w(b|a)^alpha.
Mat gibbs_conditional(const Dmc& w, double alpha, const Pmf& q) {
    Mat cond(w.x_size(), w.y_size());
    for (Eigen::Index b = 0; b < w.y_size(); ++b) {
        Vec col(w.x_size());
        for (Eigen::Index a = 0; a < w.x_size(); ++a) {
            const double p = w.prob(b, a);
            col(a) = p > 0.0 ? q[a] * std::exp(alpha * std::log(p)) : 0.0;
        }
        const double s = col.sum();
        cond.col(b) = s > 0.0 ? Vec(col / s) : Vec::Constant(w.x_size(), 1.0 / w.x_size());
    }
    return cond;
}

std::vector<Vec> p_y_grid_points(Eigen::Index ny, int k) {
    std::vector<Vec> out;
    if (ny == 2) {
        for (int i = 0; i < k; ++i) {
            const double p = static_cast<double>(i) / (k - 1);
            Vec v(2);
            v << 1.0 - p, p;
            out.push_back(v);
        }
        return out;
    }
    std::function<void(Vec&, Eigen::Index, double)> rec = [&](Vec& v, Eigen::Index at, double rem) {
        if (at == ny - 1) {
            v(at) = rem;
            out.push_back(v);
            return;
        }
        for (int i = 0; i < k; ++i) {
            v(at) = rem * i / (k - 1);
            rec(v, at + 1, rem - v(at));
        }
    };
    Vec v(ny);
    rec(v, 0, 1.0);
    return out;
}

} // namespace

XiResult xi_lower_bound(const XiProblem& p) {
    if (p.mode != XiMode::LowerBound) throw std::invalid_argument("xi_lower_bound: wrong mode");
    EffectiveFamily ef = effective_family(p.family, p.rate, p.delta, p.denom_floor);
    if (ef.indices.empty()) throw std::runtime_error("empty effective family: rate too high for every channel in the grid");

    const auto& grid = p.family.grid();
    const Eigen::Index ny = grid[0].channel.y_size();
    const bool fast = p.family.all_bsc() && p.delta.iid_like() &&
                      (p.delta.implied_q(2).vec() - Vec::Constant(2, 0.5)).cwiseAbs().maxCoeff() < 1e-12;

    const std::vector<Vec> pys = p_y_grid_points(ny, p.grids.p_y_points);
    const std::size_t m = ef.indices.size();
    const std::size_t cells = pys.size() * m * m;

    struct CellBest {
        double value = kInf;
        CellMax cell;
    };
    std::vector<CellBest> best(cells);
    parallel_for(cells, p.threads, [&](std::size_t k) {
        const std::size_t pi = k / (m * m);
        const int i = ef.indices[(k / m) % m], j = ef.indices[k % m];
        const Pmf py(pys[pi]);
        const double hy = entropy(py);
        const double e1 = ef.er_all[i], e2 = ef.er_all[j];
        const double th = grid[i].theta.value_or(0.0), tp = grid[j].theta.value_or(0.0);
        auto obj = [&](double rho, double u) {
            const double den = (1.0 - u) * e1 + u * e2;
            if (!(den >= p.denom_floor)) return -kInf;
            double num;
            if (rho <= 0.0) {
                if (u != 0.0) return -kInf;
                num = inner_min_A(grid[i].channel, 1.0, py, p.delta, fast, th,
                                  p.grids.conditional_points, 1) - hy;
            } else {
                const double lambda = u / rho;
                num = inner_min_A(grid[i].channel, 1.0 - u, py, p.delta, fast, th,
                                  p.grids.conditional_points, 1) +
                      rho * inner_min_A(grid[j].channel, lambda, py, p.delta, fast, tp,
                                        p.grids.conditional_points, 1) -
                      hy - rho * p.rate;
            }
            return num / den;
        };
        CellMax c = grid_max_2d(obj, std::max(p.grids.rho_points, p.grids.s_points), p.grids.refinement_rounds);
        best[k] = {c.value, c};
    });

    XiResult r;
    r.xi = kInf;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < cells; ++k) {
        if (best[k].value < r.xi) {
            r.xi = best[k].value;
            arg = k;
        }
    }
    const std::size_t pi = arg / (m * m);
    const int wi = ef.indices[(arg / m) % m], wj = ef.indices[arg % m];
    r.witness.theta_index = wi;
    r.witness.theta_prime_index = wj;
    r.witness.p_y = pys[pi];
    r.witness.rho = best[arg].cell.rho;
    r.witness.s_or_lambda = best[arg].cell.rho > 0.0 ? best[arg].cell.second / best[arg].cell.rho : 0.0;
    r.witness.branch = 1;
    if (p.delta.iid_like()) {
        const Pmf py(pys[pi]);
        const Pmf q = p.delta.implied_q(grid[wi].channel.x_size());
        const double u = best[arg].cell.second;
        r.witness.cond_x = gibbs_conditional(grid[wi].channel, 1.0 - u, q);
        r.witness.cond_xp = gibbs_conditional(grid[wj].channel, r.witness.s_or_lambda, q);
    }
    r.diagnostics.skipped_theta_indices = ef.skipped;
    r.diagnostics.er_star_values = ef.er_all;
    r.diagnostics.grids = p.grids;
    r.diagnostics.mode = "lb";
    return r;
}

namespace {

struct PxyPoint {
    Vec p_y;
    Mat cond; // P_{X|Y}
};

// Per-P_XY cached quantities for the exact solver.
struct PxyCache {
    double hy = 0.0;
    double hx_given_y = 0.0;
    double delta_px = 0.0;          // Delta*(P_X)
    std::vector<double> e_ln;       // per family entry: E ln P_theta(Y|X); -inf marks a zero hit
};

PxyCache make_cache(const PxyPoint& pt, const ChannelFamily& family, const DeltaStarSpec& spec) {
    PxyCache c;
    const Eigen::Index nx = pt.cond.rows(), ny = pt.p_y.size();
    c.hy = entropy_raw(pt.p_y);
    for (Eigen::Index b = 0; b < ny; ++b) c.hx_given_y += pt.p_y(b) * entropy_raw(pt.cond.col(b));
    Vec px = Vec::Zero(nx);
    for (Eigen::Index b = 0; b < ny; ++b) px += pt.p_y(b) * pt.cond.col(b);
    c.delta_px = delta_star(spec, Pmf(px));
    for (const auto& e : family.grid()) {
        double s = 0.0;
        bool zero_hit = false;
        for (Eigen::Index a = 0; a < nx && !zero_hit; ++a) {
            for (Eigen::Index b = 0; b < ny; ++b) {
                const double mass = pt.p_y(b) * pt.cond(a, b);
                if (mass <= 0.0) continue;
                const double pr = e.channel.prob(b, a);
                if (pr <= 0.0) {
                    zero_hit = true;
                    break;
                }
                s += mass * std::log(pr);
            }
        }
        c.e_ln.push_back(zero_hit ? -kInf : s);
    }
    return c;
}

// A(theta, alpha, P_XY) from the cache: I(X;Y) + Delta*(P_X) - alpha E ln P,
// with I = H(X) - H(X|Y) and H(X) supplied by the caller from the marginal.
double A_from_cache(const PxyCache& c, double hx, double alpha, double e_ln) {
    if (c.delta_px == kInf) return kInf;
    double term;
    if (e_ln == -kInf) {
        if (alpha > 0.0) return kInf;
        if (alpha < 0.0) return -kInf;
        term = 0.0;
    } else {
        term = -alpha * e_ln;
    }
    return (hx - c.hx_given_y) + c.delta_px + term;
}

} // namespace

XiResult xi_exact(const XiProblem& p) {
    if (p.mode != XiMode::Exact) throw std::invalid_argument("xi_exact: wrong mode");
    const auto& grid = p.family.grid();
    const Eigen::Index nx = grid[0].channel.x_size(), ny = grid[0].channel.y_size();
    if (nx > 4 || ny > 4) throw std::invalid_argument("xi_exact: alphabet too large (complexity guard)");
    EffectiveFamily ef = effective_family(p.family, p.rate, p.delta, p.denom_floor);
    if (ef.indices.empty()) throw std::runtime_error("empty effective family: rate too high for every channel in the grid");

    const bool fast = p.family.all_bsc() && p.delta.iid_like() &&
                      (p.delta.implied_q(2).vec() - Vec::Constant(2, 0.5)).cwiseAbs().maxCoeff() < 1e-12;
    const std::size_t m = ef.indices.size();
    const int n2d = std::max(p.grids.rho_points, p.grids.s_points);

    // One evaluation of the inner two-branch expression for a fixed P_XY, theta'.
    struct Inner {
        double value;
        int branch;
        int theta_index;
        CellMax cell;
    };
    auto eval_inner = [&](const PxyPoint& pt, const PxyCache& cache, double hx, std::size_t jj) -> Inner {
        const int j = ef.indices[jj];
        // a joint whose X-marginal the coding distribution cannot produce
        // imposes no constraint: report +inf so the outer minimization
        // never selects it
        if (cache.delta_px == kInf) return {kInf, 1, ef.indices[0], {}};
        const double e2 = ef.er_all[j];
        const double tp = grid[j].theta.value_or(0.0);
        const Pmf py(pt.p_y);

        auto second_term = [&](double rho, double s) {
            return rho == 0.0 ? 0.0
                              : rho * inner_min_A(grid[j].channel, s, py, p.delta, fast, tp,
                                                  p.grids.conditional_points, 1);
        };

        // branch 1: min over theta of max over rho in [0,1], s in [0, 1/rho] (u = s rho in [0,1])
        double b1 = kInf;
        int b1_theta = -1;
        CellMax b1_cell;
        for (std::size_t ii = 0; ii < m; ++ii) {
            const int i = ef.indices[ii];
            const double e1 = ef.er_all[i];
            auto obj = [&](double rho, double u) {
                const double den = (1.0 - u) * e1 + u * e2;
                if (!(den >= p.denom_floor)) return -kInf;
                const double s = rho > 0.0 ? u / rho : 0.0;
                if (rho <= 0.0 && u != 0.0) return -kInf;
                const double a1 = A_from_cache(cache, hx, 1.0 - u, cache.e_ln[i]);
                if (a1 == kInf) return -kInf; // dominated; minimizing side never picks +inf num here
                const double num = a1 + second_term(rho, s) - cache.hy - rho * p.rate;
                return num / den;
            };
            CellMax c = grid_max_2d(obj, n2d, p.grids.refinement_rounds);
            if (c.value < b1) {
                b1 = c.value;
                b1_theta = i;
                b1_cell = c;
            }
        }

        // branch 2: max over theta of max over rho in [0,1], s >= 1/rho, via w = 1/(s rho) in (0,1]
        double b2 = -kInf;
        int b2_theta = -1;
        CellMax b2_cell;
        for (std::size_t ii = 0; ii < m; ++ii) {
            const int i = ef.indices[ii];
            const double e1 = ef.er_all[i];
            auto obj = [&](double rho, double w01) {
                if (rho <= 0.0 || w01 <= 0.0) return -kInf;
                const double u = 1.0 / w01; // u = s rho >= 1
                const double s = u / rho;
                const double den = (1.0 - u) * e1 + u * e2;
                if (!(den >= p.denom_floor)) return -kInf;
                const double a1 = A_from_cache(cache, hx, 1.0 - u, cache.e_ln[i]);
                if (a1 == kInf || a1 == -kInf) return -kInf;
                const double num = a1 + second_term(rho, s) - cache.hy - rho * p.rate;
                return num / den;
            };
            CellMax c = grid_max_2d(obj, n2d, p.grids.refinement_rounds);
            if (c.value > b2) {
                b2 = c.value;
                b2_theta = i;
                b2_cell = c;
            }
        }

        if (b2 > b1) return {b2, 2, b2_theta, b2_cell};
        return {b1, 1, b1_theta, b1_cell};
    };

    // Outer sweep over P_XY and theta', with refinement around the incumbent P_XY.
    const int kc = p.grids.conditional_points;
    const int kp = p.grids.p_y_points;
    double py_lo = 0.0, py_hi = 1.0;
    std::vector<std::pair<double, double>> cond_box(static_cast<std::size_t>(ny), {0.0, 1.0});

    XiResult r;
    r.xi = kInf;
    if (nx != 2 || ny != 2) {
        // Non-binary alphabets take the unrefined product-simplex sweep.
        std::vector<Vec> pys = p_y_grid_points(ny, kp);
        std::vector<Vec> cols;
        {
            std::function<void(Vec&, Eigen::Index, double)> rec = [&](Vec& v, Eigen::Index at, double rem) {
                if (at == nx - 1) {
                    v(at) = rem;
                    cols.push_back(v);
                    return;
                }
                for (int i = 0; i < kc; ++i) {
                    v(at) = rem * i / (kc - 1);
                    rec(v, at + 1, rem - v(at));
                }
            };
            Vec v(nx);
            rec(v, 0, 1.0);
        }
        std::vector<PxyPoint> pts;
        std::vector<std::size_t> pick(static_cast<std::size_t>(ny), 0);
        std::function<void(const Vec&, Eigen::Index)> rec2 = [&](const Vec& py, Eigen::Index b) {
            if (b == ny) {
                Mat cond(nx, ny);
                for (Eigen::Index cidx = 0; cidx < ny; ++cidx) cond.col(cidx) = cols[pick[cidx]];
                pts.push_back({py, cond});
                return;
            }
            for (std::size_t i = 0; i < cols.size(); ++i) {
                pick[b] = i;
                rec2(py, b + 1);
            }
        };
        for (const auto& py : pys) rec2(py, 0);

        std::vector<Inner> results(pts.size() * m);
        std::vector<double> vals(pts.size() * m, kInf);
        parallel_for(pts.size() * m, p.threads, [&](std::size_t k) {
            const auto& pt = pts[k / m];
            PxyCache cache = make_cache(pt, p.family, p.delta);
            Vec px = Vec::Zero(nx);
            for (Eigen::Index b = 0; b < ny; ++b) px += pt.p_y(b) * pt.cond.col(b);
            const double hx = entropy_raw(px);
            Inner in = eval_inner(pt, cache, hx, k % m);
            results[k] = in;
            vals[k] = in.value;
        });
        std::size_t arg = 0;
        for (std::size_t k = 0; k < vals.size(); ++k)
            if (vals[k] < r.xi) {
                r.xi = vals[k];
                arg = k;
            }
        const auto& pt = pts[arg / m];
        r.witness.theta_prime_index = ef.indices[arg % m];
        r.witness.theta_index = results[arg].theta_index;
        r.witness.p_y = pt.p_y;
        r.witness.cond_x = pt.cond;
        r.witness.rho = results[arg].cell.rho;
        r.witness.branch = results[arg].branch;
        r.witness.s_or_lambda = results[arg].branch == 1
                                    ? (results[arg].cell.rho > 0 ? results[arg].cell.second / results[arg].cell.rho : 0.0)
                                    : (results[arg].cell.second > 0 ? 1.0 / (results[arg].cell.second * results[arg].cell.rho) : 0.0);
    } else {
        PxyPoint best_pt;
        Inner best_inner{kInf, 1, -1, {}};
        std::size_t best_j = 0;
        for (int round = 0; round <= p.grids.refinement_rounds; ++round) {
            std::vector<PxyPoint> pts;
            for (int a = 0; a < kp; ++a) {
                const double py1 = py_lo + (py_hi - py_lo) * a / (kp - 1);
                Vec py(2);
                py << 1.0 - py1, py1;
                for (int c0 = 0; c0 < kc; ++c0) {
                    const double v0 = cond_box[0].first + (cond_box[0].second - cond_box[0].first) * c0 / (kc - 1);
                    for (int c1 = 0; c1 < kc; ++c1) {
                        const double v1 = cond_box[1].first + (cond_box[1].second - cond_box[1].first) * c1 / (kc - 1);
                        Mat cond(2, 2);
                        cond << 1.0 - v0, 1.0 - v1, v0, v1;
                        pts.push_back({py, cond});
                    }
                }
            }
            std::vector<Inner> results(pts.size() * m);
            std::vector<double> vals(pts.size() * m, kInf);
            parallel_for(pts.size() * m, p.threads, [&](std::size_t k) {
                const auto& pt = pts[k / m];
                PxyCache cache = make_cache(pt, p.family, p.delta);
                Vec px = pt.p_y(0) * pt.cond.col(0) + pt.p_y(1) * pt.cond.col(1);
                const double hx = entropy_raw(px);
                Inner in = eval_inner(pt, cache, hx, k % m);
                results[k] = in;
                vals[k] = in.value;
            });
            for (std::size_t k = 0; k < vals.size(); ++k) {
                if (vals[k] < best_inner.value) {
                    best_inner = results[k];
                    best_pt = pts[k / m];
                    best_j = k % m;
                }
            }
            const double dp = (py_hi - py_lo) / (kp - 1) * 5.0;
            const double p1 = best_pt.p_y(1);
            py_lo = std::max(0.0, p1 - dp);
            py_hi = std::min(1.0, p1 + dp);
            for (int b = 0; b < 2; ++b) {
                const double dc = (cond_box[b].second - cond_box[b].first) / (kc - 1) * 5.0;
                const double cv = best_pt.cond(1, b);
                cond_box[b] = {std::max(0.0, cv - dc), std::min(1.0, cv + dc)};
            }
        }
        r.xi = best_inner.value;
        r.witness.theta_prime_index = ef.indices[best_j];
        r.witness.theta_index = best_inner.theta_index;
        r.witness.p_y = best_pt.p_y;
        r.witness.cond_x = best_pt.cond;
        r.witness.rho = best_inner.cell.rho;
        r.witness.branch = best_inner.branch;
        r.witness.s_or_lambda = best_inner.branch == 1
                                    ? (best_inner.cell.rho > 0 ? best_inner.cell.second / best_inner.cell.rho : 0.0)
                                    : (best_inner.cell.second > 0 ? 1.0 / (best_inner.cell.second * best_inner.cell.rho) : 0.0);
    }
    r.diagnostics.skipped_theta_indices = ef.skipped;
    r.diagnostics.er_star_values = ef.er_all;
    r.diagnostics.grids = p.grids;
    r.diagnostics.mode = "exact";
    return r;
}

namespace {
void validate_problem(const XiProblem& p) {
    if (p.rate < 0.0) throw std::invalid_argument("XiProblem: negative rate");
    if (p.grids.p_y_points < 2 || p.grids.conditional_points < 2 || p.grids.rho_points < 2 ||
        p.grids.s_points < 2)
        throw std::invalid_argument("XiProblem: grid counts must be at least 2");
    if (p.mode == XiMode::BscClosedForm) {
        if (!p.family.all_bsc()) throw std::invalid_argument("XiProblem: closed form needs a BSC family");
        if (!p.delta.iid_like() ||
            (p.delta.implied_q(2).vec() - Vec::Constant(2, 0.5)).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("XiProblem: closed form needs the fair-coin coding distribution");
    }
}
} // namespace

XiResult solve_xi(const XiProblem& p) {
    validate_problem(p);
    switch (p.mode) {
        case XiMode::LowerBound: return xi_lower_bound(p);
        case XiMode::Exact: return xi_exact(p);
        case XiMode::BscClosedForm:
            return xi_lb_bsc_closed_form(p.family, p.rate, std::max(p.grids.rho_points, p.grids.s_points),
                                         p.grids.refinement_rounds, p.denom_floor, p.threads);
    }
    throw std::logic_error("solve_xi: unknown mode");
}

double replay_witness(const XiProblem& p, const XiResult& r) {
    const auto& grid = p.family.grid();
    const XiWitness& w = r.witness;
    EffectiveFamily ef = effective_family(p.family, p.rate, p.delta, p.denom_floor);
    const double e1 = ef.er_all[w.theta_index];
    const double e2 = ef.er_all[w.theta_prime_index];
    if (r.diagnostics.mode == "bsc-closed") {
        const double u = w.rho * w.s_or_lambda;
        return bsc_pair_objective(*grid[w.theta_index].theta, *grid[w.theta_prime_index].theta, p.rate,
                                  e1, e2, p.denom_floor, w.rho, u);
    }
    const bool fast = p.family.all_bsc() && p.delta.iid_like() &&
                      (p.delta.implied_q(2).vec() - Vec::Constant(2, 0.5)).cwiseAbs().maxCoeff() < 1e-12;
    const Pmf py(*w.p_y);
    const double hy = entropy(py);
    if (r.diagnostics.mode == "lb") {
        const double u = w.rho * w.s_or_lambda;
        const double den = (1.0 - u) * e1 + u * e2;
        double num;
        if (w.rho <= 0.0) {
            num = inner_min_A(grid[w.theta_index].channel, 1.0, py, p.delta, fast,
                              grid[w.theta_index].theta.value_or(0.0), p.grids.conditional_points, 1) - hy;
        } else {
            num = inner_min_A(grid[w.theta_index].channel, 1.0 - u, py, p.delta, fast,
                              grid[w.theta_index].theta.value_or(0.0), p.grids.conditional_points, 1) +
                  w.rho * inner_min_A(grid[w.theta_prime_index].channel, w.s_or_lambda, py, p.delta, fast,
                                      grid[w.theta_prime_index].theta.value_or(0.0), p.grids.conditional_points, 1) -
                  hy - w.rho * p.rate;
        }
        return num / den;
    }
    // exact mode
    PxyPoint pt{*w.p_y, *w.cond_x};
    PxyCache cache = make_cache(pt, p.family, p.delta);
    Vec px = Vec::Zero(pt.cond.rows());
    for (Eigen::Index b = 0; b < pt.p_y.size(); ++b) px += pt.p_y(b) * pt.cond.col(b);
    const double hx = entropy_raw(px);
    const double s = w.s_or_lambda;
    const double u = s * w.rho;
    const double den = (1.0 - u) * e1 + u * e2;
    const double a1 = A_from_cache(cache, hx, 1.0 - u, cache.e_ln[w.theta_index]);
    const double second = w.rho == 0.0 ? 0.0
                                       : w.rho * inner_min_A(grid[w.theta_prime_index].channel, s, py, p.delta, fast,
                                                             grid[w.theta_prime_index].theta.value_or(0.0),
                                                             p.grids.conditional_points, 1);
    return (a1 + second - cache.hy - w.rho * p.rate) / den;
}

std::pair<double, double> decomposition_identity(double theta, double theta_prime, double lambda,
                                                 double rho, double rate) {
    if (rho < 0.0 || rho > 1.0) throw std::domain_error("decomposition_identity: rho outside [0,1]");
    const double lr = lambda * rho;
    if (!(lambda > 0.0) || !(lr < 1.0)) throw std::domain_error("decomposition_identity: need 0 < lambda, lambda*rho < 1");
    const double lhs = rho * kLn2 - bsc_V(theta, 1.0 - lr) - rho * bsc_V(theta_prime, lambda) - rho * rate;
    const double rho_p = lr / (1.0 - lr);
    const double rho_pp = 1.0 / lambda - 1.0;
    const double rhs = (1.0 - lr) * bsc_Er(theta, rho_p, rate) + lr * bsc_Er(theta_prime, rho_pp, rate);
    return {lhs, rhs};
}

double log_moment_rate(const Dmc& w, double alpha, double xi, double rate, const Pmf& p_y,
                       const DeltaStarSpec& spec) {
    const Pmf q = spec.implied_q(w.x_size());
    const double er = er_star(w, q, rate).value;
    double min_a;
    if (spec.iid_like()) {
        min_a = min_A_over_conditional(w, alpha, p_y, spec);
    } else if (spec.kind == DeltaStarSpec::Kind::TypeNeighborhood && spec.radius < 1e-12 && w.x_size() == 2) {
        // exact marginal constraint: scan the one remaining degree of freedom
        min_a = kInf;
        const double p0 = (*spec.center)[1];
        double lo = 0.0, hi = 1.0;
        double best_c = 0.5;
        for (int round = 0; round < 4; ++round) {
            for (int i = 0; i <= 4000; ++i) {
                const double c0 = lo + (hi - lo) * i / 4000.0;
                if (p_y[1] <= 0.0) continue;
                double c1 = (p0 - p_y[0] * c0) / p_y[1];
                if (c1 < -1e-12 || c1 > 1.0 + 1e-12) continue;
                c1 = std::clamp(c1, 0.0, 1.0);
                Mat cond(2, 2);
                cond << 1.0 - c0, 1.0 - c1, c0, c1;
                const JointPmf j = JointPmf::from_marginal_and_conditional(p_y, cond);
                const double ds = spec.radius; // zero inside the neighborhood
                (void)ds;
                double e_ln = 0.0;
                bool zero_hit = false;
                for (Eigen::Index a = 0; a < 2 && !zero_hit; ++a)
                    for (Eigen::Index b = 0; b < 2; ++b) {
                        if (j(a, b) <= 0.0) continue;
                        const double pr = w.prob(b, a);
                        if (pr <= 0.0) {
                            zero_hit = true;
                            break;
                        }
                        e_ln += j(a, b) * std::log(pr);
                    }
                const double val = zero_hit && alpha > 0.0 ? kInf : mutual_information(j) - alpha * e_ln;
                if (val < min_a) {
                    min_a = val;
                    best_c = c0;
                }
            }
            const double d = (hi - lo) / 1000.0 * 5.0;
            lo = std::max(0.0, best_c - d);
            hi = std::min(1.0, best_c + d);
        }
    } else {
        min_a = min_A_grid(w, alpha, p_y, spec);
    }
    return alpha * xi * er - min_a;
}

} // namespace cmx
