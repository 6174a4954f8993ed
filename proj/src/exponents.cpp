#include "cmx/exponents.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace cmx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453;

// Concave maximization on [0,1] by golden section, endpoints included.
std::pair<double, double> golden_max01(const std::function<double(double)>& f, double xtol) {
    const double invphi = 0.6180339887498949;
    double a = 0.0, b = 1.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > xtol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    double x = 0.5 * (a + b), v = f(x);
    for (double e : {0.0, 1.0}) {
        const double fe = f(e);
        if (fe > v) {
            x = e;
            v = fe;
        }
    }
    return {x, v};
}

} // namespace

double bsc_V(double theta, double alpha) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::domain_error("bsc_V: theta outside (0,1)");
    const double t1 = alpha * std::log1p(-theta);
    const double t2 = alpha * std::log(theta);
    const double m = std::max(t1, t2);
    return m + std::log1p(std::exp(std::min(t1, t2) - m));
}

double bsc_Er(double theta, double rho, double rate) {
    return rho * kLn2 - (1.0 + rho) * bsc_V(theta, 1.0 / (1.0 + rho)) - rho * rate;
}

ErCurve bsc_Er_star(double theta, double rate) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::domain_error("bsc_Er_star: theta outside (0,1)");
    if (rate < 0.0) throw std::domain_error("bsc_Er_star: negative rate");
    auto [rho, val] = golden_max01([&](double r) { return bsc_Er(theta, r, rate); }, 1e-10);
    if (val <= 0.0) { // E_r(.,0) = 0, so the max is never negative
        rho = 0.0;
        val = 0.0;
    }
    return {theta, rate, val, rho};
}

double gallager_e0(const Dmc& w, const Pmf& q, double rho) {
    if (rho < 0.0) throw std::domain_error("gallager_e0: rho < 0");
    if (q.size() != w.x_size()) throw std::invalid_argument("gallager_e0: input pmf size mismatch");
    if (rho == 0.0) return 0.0; // identically zero at rho = 0
    const double a = 1.0 / (1.0 + rho);
    double total = 0.0;
    for (Eigen::Index y = 0; y < w.y_size(); ++y) {
        double inner = 0.0;
        for (Eigen::Index x = 0; x < w.x_size(); ++x) inner += q[x] * std::pow(w.prob(y, x), a);
        total += std::pow(inner, 1.0 + rho);
    }
    return -std::log(total);
}

ErCurve er_star(const Dmc& w, const Pmf& q, double rate) {
    auto [rho, val] = golden_max01([&](double r) { return gallager_e0(w, q, r) - r * rate; }, 1e-10);
    if (val <= 0.0) {
        rho = 0.0;
        val = 0.0;
    }
    ErCurve c;
    c.rate = rate;
    c.value = val;
    c.rho_hat = rho;
    return c;
}

DeltaStarSpec DeltaStarSpec::uniform_alphabet() { return {}; }

DeltaStarSpec DeltaStarSpec::iid_ref(Pmf q) {
    DeltaStarSpec s;
    s.kind = Kind::IidRef;
    s.ref = std::move(q);
    return s;
}

DeltaStarSpec DeltaStarSpec::type_neighborhood(Pmf p0, double radius) {
    if (radius < 0.0) throw std::invalid_argument("DeltaStarSpec: negative radius");
    DeltaStarSpec s;
    s.kind = Kind::TypeNeighborhood;
    s.center = std::move(p0);
    s.radius = radius;
    return s;
}

DeltaStarSpec DeltaStarSpec::linear_binary() {
    DeltaStarSpec s;
    s.kind = Kind::LinearBinary;
    return s;
}

Pmf DeltaStarSpec::implied_q(Eigen::Index alphabet) const {
    switch (kind) {
        case Kind::IidRef: return *ref;
        case Kind::TypeNeighborhood: return *center;
        case Kind::LinearBinary: return Pmf::uniform(2);
        case Kind::UniformAlphabet: default: return Pmf::uniform(alphabet);
    }
}

double delta_star(const DeltaStarSpec& spec, const Pmf& p) {
    switch (spec.kind) {
        case DeltaStarSpec::Kind::UniformAlphabet:
            return std::log(static_cast<double>(p.size())) - entropy(p);
        case DeltaStarSpec::Kind::IidRef:
            return kl(p, *spec.ref);
        case DeltaStarSpec::Kind::LinearBinary:
            if (p.size() != 2) throw std::invalid_argument("delta_star: LinearBinary needs a binary alphabet");
            return kLn2 - entropy(p);
        case DeltaStarSpec::Kind::TypeNeighborhood: {
            if (p.size() != spec.center->size()) throw std::invalid_argument("delta_star: alphabet mismatch");
            const double tv = 0.5 * (p.vec() - spec.center->vec()).cwiseAbs().sum();
            return tv <= spec.radius + 1e-15 ? 0.0 : kInf;
        }
    }
    return kInf;
}

double A_func(const Dmc& w, double alpha, const JointPmf& j, const DeltaStarSpec& spec) {
    if (j.x_size() != w.x_size() || j.y_size() != w.y_size()) throw std::invalid_argument("A_func: joint/channel size mismatch");
    const double ds = delta_star(spec, j.marginal_x());
    if (ds == kInf) return kInf;
    double e_ln = 0.0;
    bool hit_zero = false;
    for (Eigen::Index a = 0; a < j.x_size(); ++a) {
        for (Eigen::Index b = 0; b < j.y_size(); ++b) {
            const double m = j(a, b);
            if (m <= 0.0) continue;
            const double p = w.prob(b, a);
            if (p <= 0.0) {
                hit_zero = true;
            } else {
                e_ln += m * std::log(p);
            }
        }
    }
    if (hit_zero) {
        if (alpha > 0.0) return kInf;
        if (alpha < 0.0) return -kInf;
        // alpha = 0: the term vanishes
    }
    return mutual_information(j) + ds - alpha * e_ln;
}

double min_A_over_conditional(const Dmc& w, double alpha, const Pmf& p_y, const DeltaStarSpec& spec) {
    if (!spec.iid_like()) throw std::invalid_argument("min_A_over_conditional: spec is not of i.i.d. type");
    if (p_y.size() != w.y_size()) throw std::invalid_argument("min_A_over_conditional: output pmf size mismatch");
    const Pmf q = spec.implied_q(w.x_size());
    double total = 0.0;
    for (Eigen::Index b = 0; b < w.y_size(); ++b) {
        if (p_y[b] <= 0.0) continue;
        double inner = 0.0;
        bool inner_inf = false;
        for (Eigen::Index a = 0; a < w.x_size(); ++a) {
            const double p = w.prob(b, a);
            if (p > 0.0) {
                inner += q[a] * std::exp(alpha * std::log(p));
            } else if (q[a] > 0.0 && alpha < 0.0) {
                inner_inf = true; // 0^alpha diverges
            }
        }
        if (inner_inf) return -kInf;
        if (inner <= 0.0) return kInf; // every supported input has a zero transition
        total -= p_y[b] * std::log(inner);
    }
    return total;
}

namespace {

// Recursive simplex sweep: fills `col` with grid points on the k-simplex.
void sweep_simplex(Eigen::Index dim, int points, Vec& col, Eigen::Index at, double remaining,
                   const std::function<void(const Vec&)>& visit) {
    if (at == dim - 1) {
        col(at) = remaining;
        visit(col);
        return;
    }
    for (int i = 0; i < points; ++i) {
        const double v = remaining * static_cast<double>(i) / static_cast<double>(points - 1);
        col(at) = v;
        sweep_simplex(dim, points, col, at + 1, remaining - v, visit);
    }
}

} // namespace

double min_A_grid(const Dmc& w, double alpha, const Pmf& p_y, const DeltaStarSpec& spec,
                  int points_per_dof, int refinement_rounds) {
    const Eigen::Index nx = w.x_size(), ny = w.y_size();
    if (p_y.size() != ny) throw std::invalid_argument("min_A_grid: output pmf size mismatch");

    // Binary-input shortcut: each conditional column is one degree of freedom.
    if (nx == 2) {
        std::vector<double> lo(ny, 0.0), hi(ny, 1.0);
        double best = kInf;
        Vec best_c = Vec::Constant(ny, 0.5);
        for (int round = 0; round <= refinement_rounds; ++round) {
            // coordinate sweep over all columns jointly
            std::vector<int> idx(ny, 0);
            Vec c(ny);
            const int k = points_per_dof;
            const long total = static_cast<long>(std::pow(static_cast<double>(k), static_cast<double>(ny)));
            for (long cell = 0; cell < total; ++cell) {
                long rem = cell;
                for (Eigen::Index b = 0; b < ny; ++b) {
                    const int i = static_cast<int>(rem % k);
                    rem /= k;
                    c(b) = lo[b] + (hi[b] - lo[b]) * static_cast<double>(i) / static_cast<double>(k - 1);
                }
                Mat cond(2, ny);
                cond.row(1) = c.transpose();
                cond.row(0) = (1.0 - c.array()).transpose();
                const JointPmf j = JointPmf::from_marginal_and_conditional(p_y, cond);
                const double val = A_func(w, alpha, j, spec);
                if (val < best) {
                    best = val;
                    best_c = c;
                }
            }
            const double shrink = 1.0 / 5.0;
            for (Eigen::Index b = 0; b < ny; ++b) {
                const double half = (hi[b] - lo[b]) * shrink;
                lo[b] = std::max(0.0, best_c(b) - half);
                hi[b] = std::min(1.0, best_c(b) + half);
            }
        }
        return best;
    }

    // General alphabet: independent per-column simplex sweep only works for
    // marginal-free specs; with a coupled Delta* we sweep columns jointly,
    // which is exponential in |Y|. Guarded small-alphabet use only.
    if (ny > 3) throw std::invalid_argument("min_A_grid: alphabet too large for joint sweep");
    std::vector<Vec> columns;
    Vec col(nx);
    sweep_simplex(nx, points_per_dof, col, 0, 1.0, [&](const Vec& v) { columns.push_back(v); });
    double best = kInf;
    std::vector<std::size_t> pick(ny, 0);
    std::function<void(Eigen::Index)> rec = [&](Eigen::Index b) {
        if (b == ny) {
            Mat cond(nx, ny);
            for (Eigen::Index j = 0; j < ny; ++j) cond.col(j) = columns[pick[j]];
            const double val = A_func(w, alpha, JointPmf::from_marginal_and_conditional(p_y, cond), spec);
            if (val < best) best = val;
            return;
        }
        for (std::size_t i = 0; i < columns.size(); ++i) {
            pick[b] = i;
            rec(b + 1);
        }
    };
    rec(0);
    return best;
}

double B_func(const Dmc& w_theta, const Dmc& w_theta_prime, const Pmf& p_y,
              const Mat& cond_x_given_y, const Mat& cond_xp_given_y,
              double s, double rho, const DeltaStarSpec& spec) {
    if (rho < 0.0 || rho > 1.0) throw std::domain_error("B_func: rho outside [0,1]");
    if (s < 0.0) throw std::domain_error("B_func: s < 0");
    const JointPmf j1 = JointPmf::from_marginal_and_conditional(p_y, cond_x_given_y);
    const JointPmf j2 = JointPmf::from_marginal_and_conditional(p_y, cond_xp_given_y);
    const double a1 = A_func(w_theta, 1.0 - s * rho, j1, spec);
    const double a2 = rho == 0.0 ? 0.0 : rho * A_func(w_theta_prime, s, j2, spec);
    return a1 + a2 - entropy(p_y);
}

double conv_cutoff_R0(const Dmc& w) {
    if (w.x_size() != 2) throw std::invalid_argument("conv_cutoff_R0: non-binary input");
    double total = 0.0;
    for (Eigen::Index y = 0; y < w.y_size(); ++y) {
        const double inner = 0.5 * (std::sqrt(w.prob(y, 0)) + std::sqrt(w.prob(y, 1)));
        total += inner * inner;
    }
    return -std::log(total);
}

double conv_E0(const Dmc& w, double rho) {
    if (w.x_size() != 2) throw std::invalid_argument("conv_E0: non-binary input");
    if (rho < 0.0 || rho > 1.0) throw std::domain_error("conv_E0: rho outside [0,1]");
    return gallager_e0(w, Pmf::uniform(2), rho);
}

double conv_path_bound(int b, int K, int l, int n, const Dmc& w, double rho) {
    if (b < 1 || K < 1 || l < 0 || n < 1) throw std::invalid_argument("conv_path_bound: bad parameters");
    const double paths = std::exp2(static_cast<double>(b)) - 1.0;
    const double growth = std::exp2(static_cast<double>(b) * l * rho);
    const double e0 = conv_E0(w, rho);
    return paths * growth * std::exp(-static_cast<double>(K + l) * n * e0);
}

} // namespace cmx
