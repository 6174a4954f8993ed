#include "cmx/prob.hpp"
#include "cmx/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace cmx;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Pmf random_pmf(RngStream& rng, Eigen::Index k) {
    Vec v(k);
    double s = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        v(i) = -std::log(1.0 - rng.next_double());
        s += v(i);
    }
    return Pmf(Vec(v / s));
}
} // namespace

TEST_CASE("pmf validation") {
    CHECK_THROWS_AS(Pmf({0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(Pmf({1.2, -0.2}), std::invalid_argument);
    CHECK_NOTHROW(Pmf({0.25, 0.25, 0.25, 0.25}));
    // within tolerance is accepted as-is, not repaired
    Pmf p({0.5, 0.5 + 5e-10});
    CHECK(p[1] == 0.5 + 5e-10);
}

TEST_CASE("entropy") {
    CHECK(entropy(Pmf{0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(entropy(Pmf{1.0, 0.0}) == 0.0);
    CHECK(entropy(Pmf{0.9, 0.1}) == doctest::Approx(0.3250829733914482).epsilon(1e-9));
    for (int k = 2; k <= 7; ++k)
        CHECK(entropy(Pmf::uniform(k)) == doctest::Approx(std::log(double(k))).epsilon(1e-12));
}

TEST_CASE("kl divergence") {
    Pmf p{0.3, 0.7};
    CHECK(kl(p, p) == doctest::Approx(0.0));
    CHECK(kl(Pmf{1.0, 0.0}, Pmf{0.5, 0.5}) == doctest::Approx(std::log(2.0)));
    CHECK(kl(Pmf{0.5, 0.5}, Pmf{1.0, 0.0}) == kInf);
    CHECK_THROWS_AS(kl(Pmf{0.5, 0.5}, Pmf{0.5, 0.3, 0.2}), std::invalid_argument);

    RngStream rng(11);
    for (int t = 0; t < 200; ++t) {
        Pmf a = random_pmf(rng, 4), b = random_pmf(rng, 4);
        CHECK(kl(a, b) >= 0.0);
    }
    Pmf a = random_pmf(rng, 5);
    CHECK(kl(a, a) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("joint pmf accessors recompose") {
    Mat j(2, 2);
    j << 0.4, 0.1, 0.2, 0.3;
    JointPmf joint(j);
    Pmf py = joint.marginal_y();
    Mat cond = joint.conditional_x_given_y();
    for (Eigen::Index a = 0; a < 2; ++a)
        for (Eigen::Index b = 0; b < 2; ++b)
            CHECK(cond(a, b) * py[b] == doctest::Approx(joint(a, b)).epsilon(1e-12));
}

TEST_CASE("mutual information") {
    Mat prod(2, 2);
    prod << 0.12, 0.28, 0.18, 0.42; // p_x = (0.4, 0.6), p_y = (0.3, 0.7)
    CHECK(mutual_information(JointPmf(prod)) == doctest::Approx(0.0).epsilon(1e-12));

    Mat ident(2, 2);
    ident << 0.5, 0.0, 0.0, 0.5;
    CHECK(mutual_information(JointPmf(ident)) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // BSC(0.1) with uniform input: ln 2 - H_b(0.1)
    Mat b(2, 2);
    b << 0.45, 0.05, 0.05, 0.45;
    CHECK(mutual_information(JointPmf(b)) == doctest::Approx(0.3680642071684971).epsilon(1e-9));

    // identity I = H(X) + H(Y) - H(X,Y)
    RngStream rng(5);
    for (int t = 0; t < 50; ++t) {
        Vec v(6);
        double s = 0;
        for (int i = 0; i < 6; ++i) {
            v(i) = -std::log(1.0 - rng.next_double());
            s += v(i);
        }
        Mat m = Eigen::Map<Mat>(v.data(), 2, 3) / s;
        JointPmf jt(m);
        const double lhs = mutual_information(jt);
        const double rhs = entropy(jt.marginal_x()) + entropy(jt.marginal_y()) - entropy(jt);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("joint type") {
    std::vector<Symbol> x{0, 1, 1, 0}, y{0, 1, 0, 1};
    TypeStats t = joint_type(x, y);
    CHECK(t.n == 4);
    CHECK(t.counts(0, 0) == 1);
    CHECK(t.counts(0, 1) == 1);
    CHECK(t.counts(1, 0) == 1);
    CHECK(t.counts(1, 1) == 1);

    std::vector<Symbol> z{0, 0, 0}, o{1, 1, 1};
    TypeStats t2 = joint_type(z, o);
    CHECK(t2.counts(0, 1) == 3);
    CHECK(t2.counts(0, 0) == 0);
    CHECK(t2.counts.rows() == 1); // inferred x-alphabet
    TypeStats t3 = joint_type(z, o, 2, 2);
    CHECK(t3.counts(0, 1) == 3);
    CHECK(t3.counts(1, 0) == 0);

    // x = y gives diagonal counts only
    std::vector<Symbol> d{0, 1, 2, 1, 0};
    TypeStats t4 = joint_type(d, d);
    for (Eigen::Index a = 0; a < 3; ++a)
        for (Eigen::Index b = 0; b < 3; ++b)
            if (a != b) CHECK(t4.counts(a, b) == 0);

    CHECK_THROWS_AS(joint_type(std::vector<Symbol>{0, 1}, std::vector<Symbol>{0}), std::invalid_argument);

    // counts sum to n; to_joint_pmf entries are multiples of 1/n
    JointPmf jp = t.to_joint_pmf();
    CHECK(t.counts.sum() == t.n);
    for (Eigen::Index a = 0; a < 2; ++a)
        for (Eigen::Index b = 0; b < 2; ++b)
            CHECK(jp(a, b) * 4.0 == doctest::Approx(std::round(jp(a, b) * 4.0)).epsilon(1e-12));
}

TEST_CASE("joint type marginals match individual empirical types") {
    RngStream rng(23);
    std::vector<Symbol> x(40), y(40);
    for (int i = 0; i < 40; ++i) {
        x[i] = static_cast<Symbol>(rng.next_u64() % 3);
        y[i] = static_cast<Symbol>(rng.next_u64() % 2);
    }
    JointPmf j = joint_type(x, y, 3, 2).to_joint_pmf();
    Pmf px = j.marginal_x();
    for (Eigen::Index a = 0; a < 3; ++a) {
        long c = 0;
        for (auto s : x) c += s == a ? 1 : 0;
        CHECK(px[a] == doctest::Approx(c / 40.0).epsilon(1e-12));
    }
}

TEST_CASE("hamming") {
    std::vector<Symbol> x{0, 1, 0, 1}, z{0, 0, 0, 0};
    CHECK(hamming(x, x).distance == 0);
    CHECK(hamming(x, x).normalized == 0.0);
    auto h = hamming(x, z);
    CHECK(h.distance == 2);
    CHECK(h.normalized == doctest::Approx(0.5));
    std::vector<Symbol> a(8, 0), b(8, 1);
    CHECK(hamming(a, b).distance == 8);
    CHECK(hamming(a, b).normalized == 1.0);
    CHECK_THROWS_AS(hamming(std::vector<Symbol>{0}, std::vector<Symbol>{0, 1}), std::invalid_argument);
}
