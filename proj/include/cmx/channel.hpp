#pragma once

#include "cmx/prob.hpp"
#include "cmx/rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cmx {

// Discrete memoryless channel, w(x,y) = P(y|x). Rows are valid Pmfs.
class Dmc {
  public:
    explicit Dmc(Mat transition);

    Eigen::Index x_size() const { return w_.rows(); }
    Eigen::Index y_size() const { return w_.cols(); }
    double prob(Eigen::Index y, Eigen::Index x) const { return w_(x, y); }
    const Mat& mat() const { return w_; }
    Pmf row(Eigen::Index x) const { return Pmf(w_.row(x).transpose()); }

    // Elementwise ln P(y|x); -inf at zero transitions.
    Mat log_mat() const;

  private:
    Mat w_;
};

Dmc bsc(double theta);

// Test fixture: binary channel that copies its input (theta -> 0 limit).
Dmc noiseless_binary();

// BIOS predicate: P(y|0) = P(neg(y)|1) for an involution neg on Y.
bool is_bios(const Dmc& w, std::span<const int> neg, double tol = 1e-12);

std::vector<Symbol> transmit(const Dmc& w, std::span<const Symbol> x, RngStream& rng);

// Channel capacity in nats by alternating maximization over the input pmf.
double capacity(const Dmc& w, double iterate_tol = 1e-10, int max_iters = 10000);

// Parameter family Theta as a finite grid of channels.
class ChannelFamily {
  public:
    struct Entry {
        Dmc channel;
        std::string label;
        std::optional<double> theta; // crossover probability for BSC grids
    };

    static ChannelFamily bsc_interval(double lo, double hi, double step);
    static ChannelFamily explicit_grid(std::vector<Entry> entries);
    static ChannelFamily singleton(Dmc w, std::string label = "ch0");

    const std::vector<Entry>& grid() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool all_bsc() const;

  private:
    explicit ChannelFamily(std::vector<Entry> entries) : entries_(std::move(entries)) {}
    std::vector<Entry> entries_;
};

} // namespace cmx
