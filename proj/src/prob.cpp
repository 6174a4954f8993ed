#include "cmx/prob.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmx {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_weights(const Vec& v, double tol, const char* what) {
    if (v.size() == 0) throw std::invalid_argument(std::string(what) + ": empty");
    if ((v.array() < 0.0).any()) throw std::invalid_argument(std::string(what) + ": negative entry");
    if (std::abs(v.sum() - 1.0) > tol) throw std::invalid_argument(std::string(what) + ": does not sum to 1");
}
} // namespace

Pmf::Pmf(Vec probs) : probs_(std::move(probs)) {
    check_weights(probs_, kSumTol, "Pmf");
}

Pmf::Pmf(std::initializer_list<double> probs) : probs_(Eigen::Map<const Vec>(probs.begin(), static_cast<Eigen::Index>(probs.size()))) {
    check_weights(probs_, kSumTol, "Pmf");
}

Pmf Pmf::uniform(Eigen::Index k) {
    if (k < 1) throw std::invalid_argument("Pmf::uniform: k < 1");
    return Pmf(Vec::Constant(k, 1.0 / static_cast<double>(k)));
}

Pmf Pmf::degenerate(Eigen::Index k, Eigen::Index support) {
    if (support < 0 || support >= k) throw std::invalid_argument("Pmf::degenerate: support out of range");
    Vec v = Vec::Zero(k);
    v(support) = 1.0;
    return Pmf(std::move(v));
}

JointPmf::JointPmf(Mat probs) : probs_(std::move(probs)) {
    if (probs_.size() == 0) throw std::invalid_argument("JointPmf: empty");
    if ((probs_.array() < 0.0).any()) throw std::invalid_argument("JointPmf: negative entry");
    if (std::abs(probs_.sum() - 1.0) > Pmf::kSumTol) throw std::invalid_argument("JointPmf: does not sum to 1");
}

Pmf JointPmf::marginal_x() const { return Pmf(probs_.rowwise().sum()); }
Pmf JointPmf::marginal_y() const { return Pmf(probs_.colwise().sum().transpose()); }

Mat JointPmf::conditional_x_given_y() const {
    Mat cond = Mat::Zero(probs_.rows(), probs_.cols());
    for (Eigen::Index b = 0; b < probs_.cols(); ++b) {
        const double py = probs_.col(b).sum();
        if (py > 0.0) cond.col(b) = probs_.col(b) / py;
    }
    return cond;
}

JointPmf JointPmf::from_marginal_and_conditional(const Pmf& p_y, const Mat& cond) {
    if (cond.cols() != p_y.size()) throw std::invalid_argument("JointPmf: conditional column count mismatch");
    Mat j(cond.rows(), cond.cols());
    for (Eigen::Index b = 0; b < cond.cols(); ++b) j.col(b) = cond.col(b) * p_y[b];
    return JointPmf(std::move(j));
}

JointPmf TypeStats::to_joint_pmf() const {
    if (n <= 0) throw std::invalid_argument("TypeStats: n < 1");
    return JointPmf(counts.cast<double>() / static_cast<double>(n));
}

double entropy_raw(const Vec& w) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double p = w(i);
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

double entropy(const Pmf& p) { return entropy_raw(p.vec()); }

double entropy(const JointPmf& j) {
    return entropy_raw(Eigen::Map<const Vec>(j.mat().data(), j.mat().size()));
}

double kl(const Pmf& p, const Pmf& q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl: alphabet mismatch");
    double d = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            if (q[i] <= 0.0) return kInf;
            d += p[i] * std::log(p[i] / q[i]);
        }
    }
    return d < 0.0 ? 0.0 : d;
}

double mutual_information(const JointPmf& j) {
    const double i = entropy(j.marginal_x()) + entropy(j.marginal_y()) - entropy(j);
    return i < 0.0 ? 0.0 : i;
}

TypeStats joint_type(std::span<const Symbol> x, std::span<const Symbol> y, int x_alphabet, int y_alphabet) {
    if (x.size() != y.size()) throw std::invalid_argument("joint_type: length mismatch");
    if (x.empty()) throw std::invalid_argument("joint_type: empty vectors");
    int ax = x_alphabet, ay = y_alphabet;
    if (ax == 0 || ay == 0) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            ax = std::max(ax, static_cast<int>(x[i]) + 1);
            ay = std::max(ay, static_cast<int>(y[i]) + 1);
        }
    }
    TypeStats t;
    t.counts = MatI::Zero(ax, ay);
    t.n = static_cast<long>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= ax || y[i] >= ay) throw std::invalid_argument("joint_type: symbol out of range");
        t.counts(x[i], y[i]) += 1;
    }
    return t;
}

HammingResult hamming(std::span<const Symbol> x, std::span<const Symbol> y) {
    if (x.size() != y.size()) throw std::invalid_argument("hamming: length mismatch");
    if (x.empty()) throw std::invalid_argument("hamming: empty vectors");
    long d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] != y[i]) ? 1 : 0;
    return {d, static_cast<double>(d) / static_cast<double>(x.size())};
}

} // namespace cmx
