#include "cmx/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmx {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Dmc::Dmc(Mat transition) : w_(std::move(transition)) {
    if (w_.rows() < 1 || w_.cols() < 1) throw std::invalid_argument("Dmc: empty matrix");
    for (Eigen::Index x = 0; x < w_.rows(); ++x) {
        (void)Pmf(w_.row(x).transpose()); // row validation
    }
}

Mat Dmc::log_mat() const {
    Mat lw(w_.rows(), w_.cols());
    for (Eigen::Index x = 0; x < w_.rows(); ++x)
        for (Eigen::Index y = 0; y < w_.cols(); ++y)
            lw(x, y) = w_(x, y) > 0.0 ? std::log(w_(x, y)) : -kInf;
    return lw;
}

Dmc bsc(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::domain_error("bsc: theta outside (0,1)");
    Mat w(2, 2);
    w << 1.0 - theta, theta, theta, 1.0 - theta;
    return Dmc(std::move(w));
}

Dmc noiseless_binary() {
    Mat w(2, 2);
    w << 1.0, 0.0, 0.0, 1.0;
    return Dmc(std::move(w));
}

bool is_bios(const Dmc& w, std::span<const int> neg, double tol) {
    if (w.x_size() != 2) throw std::invalid_argument("is_bios: non-binary input alphabet");
    if (static_cast<Eigen::Index>(neg.size()) != w.y_size()) throw std::invalid_argument("is_bios: involution size mismatch");
    for (Eigen::Index y = 0; y < w.y_size(); ++y) {
        const int ny = neg[y];
        if (ny < 0 || ny >= w.y_size() || neg[ny] != y) throw std::invalid_argument("is_bios: not an involution");
    }
    for (Eigen::Index y = 0; y < w.y_size(); ++y) {
        if (std::abs(w.prob(y, 0) - w.prob(neg[y], 1)) > tol) return false;
    }
    return true;
}

std::vector<Symbol> transmit(const Dmc& w, std::span<const Symbol> x, RngStream& rng) {
    std::vector<Symbol> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= w.x_size()) throw std::invalid_argument("transmit: symbol out of range");
        const double u = rng.next_double();
        double acc = 0.0;
        Eigen::Index out = w.y_size() - 1;
        for (Eigen::Index b = 0; b < w.y_size(); ++b) {
            acc += w.prob(b, x[i]);
            if (u < acc) {
                out = b;
                break;
            }
        }
        y[i] = static_cast<Symbol>(out);
    }
    return y;
}

double capacity(const Dmc& w, double iterate_tol, int max_iters) {
    const Eigen::Index nx = w.x_size(), ny = w.y_size();
    Vec q = Vec::Constant(nx, 1.0 / static_cast<double>(nx));
    double prev = -kInf;
    for (int it = 0; it < max_iters; ++it) {
        const Vec r = w.mat().transpose() * q; // output marginal
        // per-input divergence D(W(.|x) || r)
        Vec d(nx);
        for (Eigen::Index x = 0; x < nx; ++x) {
            double s = 0.0;
            for (Eigen::Index y = 0; y < ny; ++y) {
                const double p = w.prob(y, x);
                if (p > 0.0) s += p * std::log(p / r(y));
            }
            d(x) = s;
        }
        double cap = 0.0;
        for (Eigen::Index x = 0; x < nx; ++x) cap += q(x) * d(x);
        if (cap < 0.0) cap = 0.0;
        if (std::abs(cap - prev) < iterate_tol) return cap;
        prev = cap;
        // multiplicative update, normalized in log space for stability
        const double dmax = d.maxCoeff();
        Vec nq(nx);
        for (Eigen::Index x = 0; x < nx; ++x) nq(x) = q(x) * std::exp(d(x) - dmax);
        q = nq / nq.sum();
    }
    return prev < 0.0 ? 0.0 : prev;
}

ChannelFamily ChannelFamily::bsc_interval(double lo, double hi, double step) {
    if (!(lo > 0.0 && lo <= hi && hi < 1.0)) throw std::invalid_argument("ChannelFamily: need 0 < lo <= hi < 1");
    if (!(step > 0.0)) throw std::invalid_argument("ChannelFamily: step must be positive");
    std::vector<Entry> entries;
    for (int i = 0;; ++i) {
        const double theta = lo + step * i;
        if (theta > hi + 1e-12) break;
        const double t = std::min(theta, hi);
        entries.push_back({bsc(t), "bsc(" + std::to_string(t) + ")", t});
    }
    if (entries.empty()) throw std::invalid_argument("ChannelFamily: empty grid");
    return ChannelFamily(std::move(entries));
}

ChannelFamily ChannelFamily::explicit_grid(std::vector<Entry> entries) {
    if (entries.empty()) throw std::invalid_argument("ChannelFamily: empty grid");
    return ChannelFamily(std::move(entries));
}

ChannelFamily ChannelFamily::singleton(Dmc w, std::string label) {
    std::vector<Entry> e;
    std::optional<double> theta;
    if (w.x_size() == 2 && w.y_size() == 2 && std::abs(w.prob(0, 0) - w.prob(1, 1)) < 1e-15 &&
        std::abs(w.prob(1, 0) - w.prob(0, 1)) < 1e-15)
        theta = w.prob(1, 0);
    e.push_back({std::move(w), std::move(label), theta});
    return ChannelFamily(std::move(e));
}

bool ChannelFamily::all_bsc() const {
    for (const auto& e : entries_)
        if (!e.theta.has_value()) return false;
    return true;
}

} // namespace cmx
