#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace cmx {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using MatI = Eigen::MatrixXi;
using Symbol = std::uint8_t;

// Probability vector over a finite alphabet. Entries must be >= 0 and sum
// to 1 within kSumTol; invalid inputs are rejected, never renormalized.
class Pmf {
  public:
    static constexpr double kSumTol = 1e-9;

    explicit Pmf(Vec probs);
    Pmf(std::initializer_list<double> probs);

    static Pmf uniform(Eigen::Index k);
    static Pmf degenerate(Eigen::Index k, Eigen::Index support);

    Eigen::Index size() const { return probs_.size(); }
    double operator[](Eigen::Index i) const { return probs_(i); }
    const Vec& vec() const { return probs_; }

  private:
    Vec probs_;
};

// Joint distribution over X x Y (rows = X, cols = Y).
class JointPmf {
  public:
    explicit JointPmf(Mat probs);

    Eigen::Index x_size() const { return probs_.rows(); }
    Eigen::Index y_size() const { return probs_.cols(); }
    double operator()(Eigen::Index a, Eigen::Index b) const { return probs_(a, b); }
    const Mat& mat() const { return probs_; }

    Pmf marginal_x() const;
    Pmf marginal_y() const;
    // Columns are P_{X|Y}(.|b); columns with zero Y-marginal are left zero.
    Mat conditional_x_given_y() const;

    static JointPmf from_marginal_and_conditional(const Pmf& p_y, const Mat& cond_x_given_y);

  private:
    Mat probs_;
};

// Joint symbol counts of a vector pair, N_{xy}(a,b).
struct TypeStats {
    MatI counts; // X x Y
    long n = 0;

    JointPmf to_joint_pmf() const;
};

// Information measures, all in nats. 0 ln 0 = 0; p ln(p/0) = +inf for p > 0.
double entropy(const Pmf& p);
double entropy(const JointPmf& j); // joint entropy, i.e. the flattened pmf's entropy
double kl(const Pmf& p, const Pmf& q);
double mutual_information(const JointPmf& j);

TypeStats joint_type(std::span<const Symbol> x, std::span<const Symbol> y,
                     int x_alphabet = 0, int y_alphabet = 0);

struct HammingResult {
    long distance = 0;
    double normalized = 0.0;
};
HammingResult hamming(std::span<const Symbol> x, std::span<const Symbol> y);

// -sum p ln p of an arbitrary nonnegative weight vector (used internally
// where slices of a joint are not themselves Pmfs).
double entropy_raw(const Vec& w);

inline double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -(p * std::log(p) + (1.0 - p) * std::log1p(-p));
}

} // namespace cmx
