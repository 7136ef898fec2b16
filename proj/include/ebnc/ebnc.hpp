#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ebnc/errors.hpp"
#include "ebnc/network.hpp"

namespace ebnc {

inline constexpr std::size_t kDefaultRowCap = std::size_t{1} << 20;

// A local distribution function for a class variable Y given inputs X,
// obtained by conditioning in an inner Bayesian network over exactly
// {Y} union X. The inner structure is unconstrained: X need not be the
// parents of Y, and Y may have both parents and children.
class Ebnc {
  public:
    Ebnc() = default;

    Ebnc(BayesianNetwork inner, int y) : inner_(std::move(inner)), y_(y) {
        if (y_ < 0 || static_cast<std::size_t>(y_) >= inner_.node_count())
            fail(ErrorCode::InvalidIndex, "class node index out of range");
        for (std::size_t i = 0; i < inner_.node_count(); ++i)
            if (static_cast<int>(i) != y_) inputs_.push_back(static_cast<int>(i));
        ordering_ = ordering_y_late(inner_, y_);
        input_radices_.reserve(inputs_.size());
        for (int node : inputs_) input_radices_.push_back(inner_.variable(node).state_count());
    }

    const BayesianNetwork& inner() const { return inner_; }
    int y() const { return y_; }
    const Variable& class_variable() const { return inner_.variable(y_); }
    int class_state_count() const { return class_variable().state_count(); }

    // Input nodes (inner indices) in input order: ascending inner index.
    const std::vector<int>& inputs() const { return inputs_; }
    std::size_t input_count() const { return inputs_.size(); }
    const std::vector<int>& input_radices() const { return input_radices_; }
    const YLateOrdering& ordering() const { return ordering_; }

    bool all_binary() const {
        for (const auto& v : inner_.variables())
            if (v.state_count() != 2) return false;
        return true;
    }

    // Number of input configurations.
    std::size_t input_configuration_count() const {
        std::size_t q = 1;
        for (int r : input_radices_) q *= static_cast<std::size_t>(r);
        return q;
    }

    // Total inner configuration with y set to `y_state` and inputs per `x`.
    Configuration inner_configuration(const std::vector<int>& x, int y_state) const {
        check_input(x);
        Configuration z = Configuration::empty(inner_.node_count());
        z.assignment[y_] = y_state;
        for (std::size_t i = 0; i < inputs_.size(); ++i) z.assignment[inputs_[i]] = x[i];
        return z;
    }

    std::vector<int> input_configuration(std::size_t index) const {
        return configuration_from_index(index, input_radices_);
    }

    std::size_t input_index(const std::vector<int>& x) const {
        check_input(x);
        return configuration_index(x, input_radices_);
    }

    Ebnc with_cpt_values(const std::vector<std::vector<double>>& values) const {
        return Ebnc(inner_.with_cpt_values(values), y_);
    }

    void check_input(const std::vector<int>& x) const {
        if (x.size() != inputs_.size())
            fail(ErrorCode::PartialConfiguration, "input configuration must assign every input");
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < 0 || x[i] >= input_radices_[i])
                fail(ErrorCode::InvalidIndex, "input state out of range");
    }

  private:
    BayesianNetwork inner_;
    int y_ = 0;
    std::vector<int> inputs_;
    std::vector<int> input_radices_;
    YLateOrdering ordering_;
};

// Posterior log odds of each non-reference class state against state 0,
// computed by summing log CPT ratios along the y-late ordering. Nodes before
// y contribute nothing; nodes after y contribute log ratios between the
// parent configurations with y set to state k versus state 0. Terms for
// nodes without y among their parents evaluate to zero and are kept in the
// sum rather than removed symbolically.
inline std::vector<double> log_odds(const Ebnc& e, const std::vector<int>& x) {
    const int r_y = e.class_state_count();
    std::vector<double> lambda(static_cast<std::size_t>(r_y - 1), 0.0);
    const auto& net = e.inner();

    Configuration z_ref = e.inner_configuration(x, 0);
    const std::size_t y_row_ref = net.cpt_row_index(e.y(), z_ref);

    for (int k = 1; k < r_y; ++k) {
        Configuration z_k = z_ref;
        z_k.assignment[e.y()] = k;
        double value = std::log(net.cpt(e.y()).at(y_row_ref, k)) -
                       std::log(net.cpt(e.y()).at(y_row_ref, 0));
        const auto& order = e.ordering().order;
        for (std::size_t pos = static_cast<std::size_t>(e.ordering().hidden_prefix) + 1;
             pos < order.size(); ++pos) {
            const int node = order[pos];
            const int observed = z_ref.assignment[node];
            const std::size_t row_k = net.cpt_row_index(node, z_k);
            const std::size_t row_ref = net.cpt_row_index(node, z_ref);
            value += std::log(net.cpt(node).at(row_k, observed)) -
                     std::log(net.cpt(node).at(row_ref, observed));
        }
        lambda[static_cast<std::size_t>(k - 1)] = value;
    }
    return lambda;
}

// Probabilities from log odds against the reference state. The shift by
// max(0, max lambda) keeps the exponentials bounded for large log odds.
inline std::vector<double> softmax(const std::vector<double>& lambda) {
    double shift = 0.0;
    for (double v : lambda) shift = std::max(shift, v);
    double denom = std::exp(-shift);
    std::vector<double> p(lambda.size() + 1);
    p[0] = std::exp(-shift);
    for (std::size_t k = 0; k < lambda.size(); ++k) {
        p[k + 1] = std::exp(lambda[k] - shift);
        denom += p[k + 1];
    }
    for (auto& value : p) value /= denom;
    return p;
}

inline std::vector<double> conditional_distribution(const Ebnc& e, const std::vector<int>& x) {
    return softmax(log_odds(e, x));
}

// Most probable class state; ties break toward the lowest state index.
inline int classify(const Ebnc& e, const std::vector<int>& x) {
    const std::vector<double> p = conditional_distribution(e, x);
    int best = 0;
    for (std::size_t k = 1; k < p.size(); ++k)
        if (p[k] > p[best]) best = static_cast<int>(k);
    return best;
}

// Log odds for every input configuration, enumerated row-major over the
// inputs (leftmost input varies slowest).
struct LogOddsTable {
    std::size_t configuration_count = 0;
    int class_state_count = 0;
    std::vector<std::vector<double>> values;  // one vector of length r_y - 1 per configuration
};

inline LogOddsTable full_log_odds_table(const Ebnc& e, std::size_t row_cap = kDefaultRowCap) {
    const std::size_t q = e.input_configuration_count();
    if (q > row_cap)
        fail(ErrorCode::CapExceeded, "input configuration count " + std::to_string(q) +
                                         " exceeds cap " + std::to_string(row_cap));
    LogOddsTable table;
    table.configuration_count = q;
    table.class_state_count = e.class_state_count();
    table.values.reserve(q);
    for (std::size_t idx = 0; idx < q; ++idx)
        table.values.push_back(log_odds(e, e.input_configuration(idx)));
    return table;
}

}  // namespace ebnc
