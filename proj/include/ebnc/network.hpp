#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ebnc/errors.hpp"

namespace ebnc {

// CPT entries must stay strictly inside the simplex: downstream log-odds and
// log-ratio parameters take logs of entry ratios, so boundary values would
// produce infinities.
inline constexpr double kProbabilityEpsilon = 1e-12;
inline constexpr double kRowSumTolerance = 1e-12;

struct Variable {
    std::string name;
    std::vector<std::string> state_labels;

    int state_count() const { return static_cast<int>(state_labels.size()); }

    int state_index(const std::string& label) const {
        for (std::size_t i = 0; i < state_labels.size(); ++i)
            if (state_labels[i] == label) return static_cast<int>(i);
        return -1;
    }
};

inline Variable binary_variable(std::string name) {
    return Variable{std::move(name), {"0", "1"}};
}

// Assignment of state indices to a subset of variables; -1 marks unassigned.
struct Configuration {
    std::vector<int> assignment;

    static Configuration empty(std::size_t variable_count) {
        return Configuration{std::vector<int>(variable_count, -1)};
    }
    bool is_assigned(std::size_t v) const { return assignment[v] >= 0; }
    bool is_total() const {
        return std::all_of(assignment.begin(), assignment.end(), [](int s) { return s >= 0; });
    }
};

// Conditional probability table for one node. Rows are indexed by the parent
// configuration in row-major order over the parents sorted by node index,
// with the leftmost (lowest-index) parent varying slowest.
struct Cpt {
    std::size_t row_count = 1;
    int state_count = 0;
    std::vector<double> values;  // row_count * state_count

    const double* row(std::size_t r) const { return values.data() + r * state_count; }
    double* row(std::size_t r) { return values.data() + r * state_count; }
    double at(std::size_t r, int state) const { return values[r * state_count + state]; }
};

class BayesianNetwork {
  public:
    BayesianNetwork() = default;

    std::size_t node_count() const { return variables_.size(); }
    const std::vector<Variable>& variables() const { return variables_; }
    const Variable& variable(std::size_t i) const { return variables_[i]; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& parents(std::size_t i) const { return parents_[i]; }
    const std::vector<int>& children(std::size_t i) const { return children_[i]; }
    const Cpt& cpt(std::size_t i) const { return cpts_[i]; }
    const std::vector<Cpt>& cpts() const { return cpts_; }

    int node_index(const std::string& name) const {
        for (std::size_t i = 0; i < variables_.size(); ++i)
            if (variables_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    // Row index of node's CPT for a total (or sufficiently assigned)
    // configuration of the network.
    std::size_t cpt_row_index(std::size_t node, const Configuration& z) const {
        std::size_t row = 0;
        for (int p : parents_[node]) {
            if (!z.is_assigned(p))
                fail(ErrorCode::PartialConfiguration,
                     "parent " + variables_[p].name + " of " + variables_[node].name +
                         " is unassigned");
            row = row * static_cast<std::size_t>(variables_[p].state_count()) +
                  static_cast<std::size_t>(z.assignment[p]);
        }
        return row;
    }

    // Count of free CPT parameters: per row, state_count - 1.
    std::size_t free_parameter_count() const {
        std::size_t total = 0;
        for (std::size_t i = 0; i < node_count(); ++i)
            total += cpts_[i].row_count * static_cast<std::size_t>(variables_[i].state_count() - 1);
        return total;
    }

    // Topological order, deterministic: among ready nodes, lowest index first.
    std::vector<int> topological_order() const {
        return priority_topological_order([](int) { return 0; });
    }

    // Nodes reachable from `source` by directed paths (strict descendants).
    std::vector<bool> descendants(std::size_t source) const {
        std::vector<bool> seen(node_count(), false);
        std::vector<int> stack{static_cast<int>(source)};
        while (!stack.empty()) {
            int node = stack.back();
            stack.pop_back();
            for (int child : children_[node]) {
                if (!seen[child]) {
                    seen[child] = true;
                    stack.push_back(child);
                }
            }
        }
        return seen;
    }

    // Replace all CPT values (same shapes) with validation.
    BayesianNetwork with_cpt_values(const std::vector<std::vector<double>>& flat_values) const;

    friend BayesianNetwork build_network(std::vector<Variable> variables,
                                         std::vector<std::pair<int, int>> edges,
                                         std::vector<Cpt> cpts);

    // Topological order with a caller-supplied priority group; within a group,
    // ties break by ascending node index.
    template <typename GroupFn>
    std::vector<int> priority_topological_order(GroupFn group) const {
        std::vector<int> in_degree(node_count(), 0);
        for (const auto& [parent, child] : edges_) {
            (void)parent;
            ++in_degree[child];
        }
        using Key = std::pair<int, int>;  // (group, node index)
        std::priority_queue<Key, std::vector<Key>, std::greater<Key>> ready;
        for (std::size_t i = 0; i < node_count(); ++i)
            if (in_degree[i] == 0) ready.emplace(group(static_cast<int>(i)), static_cast<int>(i));
        std::vector<int> order;
        order.reserve(node_count());
        while (!ready.empty()) {
            const int node = ready.top().second;
            ready.pop();
            order.push_back(node);
            for (int child : children_[node])
                if (--in_degree[child] == 0) ready.emplace(group(child), child);
        }
        if (order.size() != node_count())
            fail(ErrorCode::CycleDetected, "edge relation admits no topological order");
        return order;
    }

  private:
    std::vector<Variable> variables_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> parents_;   // sorted ascending
    std::vector<std::vector<int>> children_;  // sorted ascending
    std::vector<Cpt> cpts_;
};

inline BayesianNetwork build_network(std::vector<Variable> variables,
                                     std::vector<std::pair<int, int>> edges,
                                     std::vector<Cpt> cpts) {
    BayesianNetwork net;
    const int n = static_cast<int>(variables.size());
    std::set<std::string> names;
    for (const auto& v : variables) {
        if (v.state_count() < 2)
            fail(ErrorCode::InvalidArgument, "variable " + v.name + " needs at least 2 states");
        std::set<std::string> labels(v.state_labels.begin(), v.state_labels.end());
        if (static_cast<int>(labels.size()) != v.state_count())
            fail(ErrorCode::InvalidArgument, "duplicate state labels in " + v.name);
        if (!names.insert(v.name).second)
            fail(ErrorCode::InvalidArgument, "duplicate variable name " + v.name);
    }

    net.variables_ = std::move(variables);
    net.parents_.assign(n, {});
    net.children_.assign(n, {});
    std::set<std::pair<int, int>> seen_edges;
    for (const auto& [parent, child] : edges) {
        if (parent < 0 || parent >= n || child < 0 || child >= n || parent == child)
            fail(ErrorCode::InvalidIndex, "edge endpoint out of range");
        if (!seen_edges.insert({parent, child}).second) continue;
        net.parents_[child].push_back(parent);
        net.children_[parent].push_back(child);
    }
    net.edges_.assign(seen_edges.begin(), seen_edges.end());
    for (auto& p : net.parents_) std::sort(p.begin(), p.end());
    for (auto& c : net.children_) std::sort(c.begin(), c.end());

    net.topological_order();  // throws CycleDetected on a cycle

    if (static_cast<int>(cpts.size()) != n)
        fail(ErrorCode::CptShapeMismatch, "expected one CPT per node");
    for (int i = 0; i < n; ++i) {
        std::size_t expected_rows = 1;
        for (int p : net.parents_[i])
            expected_rows *= static_cast<std::size_t>(net.variables_[p].state_count());
        const Cpt& cpt = cpts[i];
        if (cpt.state_count != net.variables_[i].state_count() ||
            cpt.row_count != expected_rows ||
            cpt.values.size() != expected_rows * static_cast<std::size_t>(cpt.state_count))
            fail(ErrorCode::CptShapeMismatch,
                 "CPT for " + net.variables_[i].name + " has the wrong shape");
        for (std::size_t r = 0; r < cpt.row_count; ++r) {
            double sum = 0.0;
            for (int s = 0; s < cpt.state_count; ++s) {
                const double p = cpt.at(r, s);
                if (!(p >= kProbabilityEpsilon && p <= 1.0 - kProbabilityEpsilon))
                    fail(ErrorCode::ProbabilityOutOfInterior,
                         "CPT entry for " + net.variables_[i].name +
                             " lies outside the open simplex");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance)
                fail(ErrorCode::RowNotNormalized,
                     "CPT row for " + net.variables_[i].name + " does not sum to 1");
        }
    }
    net.cpts_ = std::move(cpts);
    return net;
}

inline BayesianNetwork BayesianNetwork::with_cpt_values(
    const std::vector<std::vector<double>>& flat_values) const {
    std::vector<Cpt> cpts = cpts_;
    if (flat_values.size() != cpts.size())
        fail(ErrorCode::CptShapeMismatch, "expected one value block per node");
    for (std::size_t i = 0; i < cpts.size(); ++i) {
        if (flat_values[i].size() != cpts[i].values.size())
            fail(ErrorCode::CptShapeMismatch, "value block size mismatch");
        cpts[i].values = flat_values[i];
    }
    return build_network(variables_, edges_, std::move(cpts));
}

// Joint probability of a total configuration per the network factorization.
inline double joint_probability(const BayesianNetwork& net, const Configuration& z) {
    if (z.assignment.size() != net.node_count() || !z.is_total())
        fail(ErrorCode::PartialConfiguration, "joint_probability needs a total configuration");
    double product = 1.0;
    for (std::size_t i = 0; i < net.node_count(); ++i) {
        const std::size_t row = net.cpt_row_index(i, z);
        product *= net.cpt(i).at(row, z.assignment[i]);
    }
    return product;
}

struct YLateOrdering {
    std::vector<int> order;  // topological; non-descendants of y, then y, then descendants
    int hidden_prefix = 0;   // count of nodes before y
};

// Topological ordering in which y appears as late as possible: exactly the
// non-descendants of y precede it. Ties break by ascending node index.
inline YLateOrdering ordering_y_late(const BayesianNetwork& net, int y) {
    if (y < 0 || static_cast<std::size_t>(y) >= net.node_count())
        fail(ErrorCode::InvalidIndex, "node index out of range");
    const std::vector<bool> desc = net.descendants(y);
    YLateOrdering result;
    result.order = net.priority_topological_order(
        [&](int node) { return node == y ? 1 : (desc[node] ? 2 : 0); });
    for (std::size_t i = 0; i < result.order.size(); ++i)
        if (result.order[i] == y) {
            result.hidden_prefix = static_cast<int>(i);
            break;
        }
    return result;
}

// Mixed-radix index of a configuration over `nodes` (leftmost varies slowest).
inline std::size_t configuration_index(const std::vector<int>& states,
                                       const std::vector<int>& radices) {
    std::size_t index = 0;
    for (std::size_t i = 0; i < states.size(); ++i)
        index = index * static_cast<std::size_t>(radices[i]) +
                static_cast<std::size_t>(states[i]);
    return index;
}

inline std::vector<int> configuration_from_index(std::size_t index,
                                                 const std::vector<int>& radices) {
    std::vector<int> states(radices.size(), 0);
    for (std::size_t i = radices.size(); i-- > 0;) {
        states[i] = static_cast<int>(index % static_cast<std::size_t>(radices[i]));
        index /= static_cast<std::size_t>(radices[i]);
    }
    return states;
}

}  // namespace ebnc
