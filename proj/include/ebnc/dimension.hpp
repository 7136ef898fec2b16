#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "ebnc/ebnc.hpp"
#include "ebnc/errors.hpp"
#include "ebnc/exact.hpp"
#include "ebnc/network.hpp"

namespace ebnc {

// ---------------------------------------------------------------------------
// Log-CPT-ratio parameters (the kappa system). The map from CPT values to the
// log-odds table factors through these parameters, and the second stage is
// linear with integer coefficients, so the model dimension is the rank of the
// coefficient matrix.
// ---------------------------------------------------------------------------

struct KappaParam {
    bool class_target = true;  // ratio of the class variable's CPT entries
    int node = 0;              // target node (the class node for class_target)
    int value = 0;             // observed state of the target (input targets only)
    int k = 1;                 // class state in the numerator (reference state 0 in denominator)
    std::vector<int> cond;     // conditioning configuration, conditioning nodes ascending

    auto key() const { return std::tie(class_target, node, cond, value, k); }
    bool operator<(const KappaParam& other) const {
        // class-target parameters sort first (class_target=true < false is
        // reversed by std::tie on bool, so compare explicitly)
        if (class_target != other.class_target) return class_target;
        return key() < other.key();
    }
};

struct KappaSystem {
    int class_state_count = 2;
    std::size_t configuration_count = 0;
    std::vector<int> cond_nodes_class;              // parents of the class node
    std::vector<std::vector<int>> cond_nodes_input; // per param-owning input node
    std::vector<KappaParam> params;                 // canonical order
    // One row per log-odds entry, ordered by input configuration then class
    // state; each row lists the parameter columns with coefficient +1.
    std::vector<std::vector<int>> row_entries;

    std::size_t row_count() const { return row_entries.size(); }
    std::size_t column_count() const { return params.size(); }

    IntMatrix dense() const {
        IntMatrix m(row_count(), std::vector<BigInt>(column_count(), 0));
        for (std::size_t r = 0; r < row_count(); ++r)
            for (int c : row_entries[r]) m[r][c] = 1;
        return m;
    }
};

namespace detail {

inline std::string config_text(const BayesianNetwork& net, const std::vector<int>& nodes,
                               const std::vector<int>& states) {
    std::string out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i) out += ",";
        out += net.variable(nodes[i]).name + "=" +
               net.variable(nodes[i]).state_labels[states[i]];
    }
    return out;
}

// Conditioning nodes of a kappa parameter within the inner network.
inline std::vector<int> without(const std::vector<int>& nodes, int drop) {
    std::vector<int> out;
    for (int n : nodes)
        if (n != drop) out.push_back(n);
    return out;
}

// CPT row index for `node` when its parents take `values` for the nodes in
// `given` (ascending) and the class node takes `class_state`.
inline std::size_t cpt_row_with_class(const BayesianNetwork& net, int node, int class_node,
                                      const std::vector<int>& given,
                                      const std::vector<int>& values, int class_state) {
    std::size_t row = 0;
    std::size_t pos = 0;
    for (int p : net.parents(node)) {
        int state;
        if (p == class_node) {
            state = class_state;
        } else {
            state = values[pos];
            ++pos;
        }
        (void)given;
        row = row * static_cast<std::size_t>(net.variable(p).state_count()) +
              static_cast<std::size_t>(state);
    }
    return row;
}

}  // namespace detail

inline std::string kappa_name(const BayesianNetwork& net, int class_node,
                              const KappaParam& p) {
    const std::string k_label = net.variable(class_node).state_labels[p.k];
    std::string out = "kappa(";
    if (p.class_target) {
        out += net.variable(class_node).name + "=" + k_label;
        const auto cond_nodes = net.parents(class_node);
        if (!cond_nodes.empty()) out += "|" + detail::config_text(net, cond_nodes, p.cond);
    } else {
        out += net.variable(p.node).name + "=" + net.variable(p.node).state_labels[p.value];
        const auto cond_nodes = detail::without(net.parents(p.node), class_node);
        out += "|";
        if (!cond_nodes.empty()) out += detail::config_text(net, cond_nodes, p.cond) + ",";
        out += net.variable(class_node).name + "=" + k_label;
    }
    return out + ")";
}

inline KappaSystem build_kappa_system(const Ebnc& e, std::size_t row_cap = kDefaultRowCap) {
    const auto& net = e.inner();
    const int y = e.y();
    const int r_y = e.class_state_count();
    const std::size_t q = e.input_configuration_count();
    const std::size_t rows = q * static_cast<std::size_t>(r_y - 1);
    if (rows > row_cap)
        fail(ErrorCode::CapExceeded, "log-odds row count " + std::to_string(rows) +
                                         " exceeds cap " + std::to_string(row_cap));

    KappaSystem sys;
    sys.class_state_count = r_y;
    sys.configuration_count = q;
    sys.cond_nodes_class = net.parents(y);

    // Input nodes whose CPT conditions on the class node; only these
    // contribute nonzero log-ratio terms.
    std::vector<int> contributors;
    for (std::size_t j = 0; j < net.node_count(); ++j) {
        if (static_cast<int>(j) == y) continue;
        const auto& ps = net.parents(j);
        if (std::find(ps.begin(), ps.end(), y) != ps.end())
            contributors.push_back(static_cast<int>(j));
    }

    // Generate all parameters, then sort canonically.
    std::vector<KappaParam> params;
    {
        std::vector<int> radices;
        for (int p : sys.cond_nodes_class) radices.push_back(net.variable(p).state_count());
        std::size_t count = 1;
        for (int r : radices) count *= static_cast<std::size_t>(r);
        for (std::size_t c = 0; c < count; ++c)
            for (int k = 1; k < r_y; ++k)
                params.push_back(KappaParam{true, y, 0, k, configuration_from_index(c, radices)});
    }
    for (int j : contributors) {
        const auto cond_nodes = detail::without(net.parents(j), y);
        std::vector<int> radices;
        for (int p : cond_nodes) radices.push_back(net.variable(p).state_count());
        std::size_t count = 1;
        for (int r : radices) count *= static_cast<std::size_t>(r);
        for (std::size_t c = 0; c < count; ++c) {
            const auto cond = configuration_from_index(c, radices);
            for (int v = 0; v < net.variable(j).state_count(); ++v)
                for (int k = 1; k < r_y; ++k)
                    params.push_back(KappaParam{false, j, v, k, cond});
        }
    }
    std::sort(params.begin(), params.end());
    sys.params = std::move(params);

    std::map<decltype(sys.params[0].key()), int> column_of;
    std::vector<KappaParam> owned = sys.params;  // keep keys alive via sys.params
    for (std::size_t c = 0; c < sys.params.size(); ++c)
        column_of[sys.params[c].key()] = static_cast<int>(c);

    // Per-contributor conditioning node lists, aligned to sys order for reuse.
    sys.cond_nodes_input.assign(net.node_count(), {});
    for (int j : contributors) sys.cond_nodes_input[j] = detail::without(net.parents(j), y);

    sys.row_entries.reserve(rows);
    for (std::size_t xi = 0; xi < q; ++xi) {
        const std::vector<int> x = e.input_configuration(xi);
        const Configuration z = e.inner_configuration(x, 0);
        for (int k = 1; k < r_y; ++k) {
            std::vector<int> row;
            {
                std::vector<int> cond(sys.cond_nodes_class.size());
                for (std::size_t i = 0; i < cond.size(); ++i)
                    cond[i] = z.assignment[sys.cond_nodes_class[i]];
                KappaParam probe{true, y, 0, k, std::move(cond)};
                row.push_back(column_of.at(probe.key()));
            }
            for (int j : contributors) {
                const auto& cond_nodes = sys.cond_nodes_input[j];
                std::vector<int> cond(cond_nodes.size());
                for (std::size_t i = 0; i < cond.size(); ++i)
                    cond[i] = z.assignment[cond_nodes[i]];
                KappaParam probe{false, j, z.assignment[j], k, std::move(cond)};
                row.push_back(column_of.at(probe.key()));
            }
            std::sort(row.begin(), row.end());
            sys.row_entries.push_back(std::move(row));
        }
    }
    return sys;
}

// Numeric values of the kappa parameters at the EBNC's current CPTs.
inline std::vector<double> kappa_values(const Ebnc& e, const KappaSystem& sys) {
    const auto& net = e.inner();
    const int y = e.y();
    std::vector<double> values(sys.params.size());
    for (std::size_t c = 0; c < sys.params.size(); ++c) {
        const KappaParam& p = sys.params[c];
        if (p.class_target) {
            std::size_t row = 0;
            const auto& cond_nodes = sys.cond_nodes_class;
            for (std::size_t i = 0; i < cond_nodes.size(); ++i)
                row = row * static_cast<std::size_t>(net.variable(cond_nodes[i]).state_count()) +
                      static_cast<std::size_t>(p.cond[i]);
            values[c] = std::log(net.cpt(y).at(row, p.k)) - std::log(net.cpt(y).at(row, 0));
        } else {
            const std::size_t row_k =
                detail::cpt_row_with_class(net, p.node, y, sys.cond_nodes_input[p.node], p.cond, p.k);
            const std::size_t row_0 =
                detail::cpt_row_with_class(net, p.node, y, sys.cond_nodes_input[p.node], p.cond, 0);
            values[c] = std::log(net.cpt(p.node).at(row_k, p.value)) -
                        std::log(net.cpt(p.node).at(row_0, p.value));
        }
    }
    return values;
}

// ---------------------------------------------------------------------------
// Blockwise construction for all-binary networks. Starting from the all-zero
// input configuration, inputs are switched on one at a time in an order
// consistent with the inner network; the increment contributed by switching
// an input is a sum of difference parameters (etas), and the coefficients of
// the indicator products (psis) group into per-input blocks whose exact ranks
// add up to the model dimension.
// ---------------------------------------------------------------------------

struct EtaParam {
    enum class Kind { Intercept, ClassCpt, OwnCpt, ChildCpt };
    Kind kind = Kind::Intercept;
    int turn_on = -1;       // input being switched on
    int target = -1;        // node whose CPT is differenced
    int value = 0;          // observed state of the target (ChildCpt only)
    std::vector<int> cond;  // conditioning configuration, nodes ascending

    auto key() const { return std::tie(kind, turn_on, target, cond, value); }
    bool operator<(const EtaParam& other) const { return key() < other.key(); }
    bool operator==(const EtaParam& other) const { return key() == other.key(); }
};

struct EtaPsiBlock {
    int variable = -1;               // input switched on; -1 for the intercept block
    std::vector<int> scope;          // inputs the psi coefficients depend on, ascending
    std::vector<int> scope_radices;  // all 2 for binary networks
    std::vector<EtaParam> etas;      // block columns, canonical order
    std::vector<std::vector<int>> row_entries;  // per scope configuration, column indices

    std::size_t row_count() const { return row_entries.size(); }
    IntMatrix dense() const {
        IntMatrix m(row_count(), std::vector<BigInt>(etas.size(), 0));
        for (std::size_t r = 0; r < row_count(); ++r)
            for (int c : row_entries[r]) m[r][c] = 1;
        return m;
    }
};

struct EtaPsiBlocks {
    std::vector<int> turn_on_order;   // inputs in network-consistent order
    std::vector<EtaPsiBlock> blocks;  // blocks[0] is the intercept block
};

inline std::string eta_name(const BayesianNetwork& net, int class_node, const EtaParam& p) {
    if (p.kind == EtaParam::Kind::Intercept) return "eta0";
    const std::string turn_on = net.variable(p.turn_on).name;
    std::string out = "eta[" + turn_on + "](";
    std::vector<int> cond_nodes;
    if (p.kind == EtaParam::Kind::ClassCpt) {
        out += net.variable(class_node).name + "|";
        cond_nodes = detail::without(net.parents(class_node), p.turn_on);
    } else if (p.kind == EtaParam::Kind::OwnCpt) {
        out += net.variable(p.target).name + "|";
        cond_nodes = detail::without(net.parents(p.target), class_node);
        cond_nodes = detail::without(cond_nodes, p.target);
    } else {
        out += net.variable(p.target).name + "=" +
               net.variable(p.target).state_labels[p.value] + "|";
        cond_nodes = detail::without(detail::without(net.parents(p.target), class_node), p.turn_on);
    }
    // Arguments: the switched variable bare, conditioning assignments, and a
    // bare class symbol for CPTs that condition on the class.
    std::vector<std::pair<int, std::string>> args;
    if (p.kind == EtaParam::Kind::OwnCpt) {
        // own-CPT difference runs over the target's two states
    } else {
        args.emplace_back(p.turn_on, turn_on);
    }
    for (std::size_t i = 0; i < cond_nodes.size(); ++i)
        args.emplace_back(cond_nodes[i], net.variable(cond_nodes[i]).name + "=" +
                                             net.variable(cond_nodes[i]).state_labels[p.cond[i]]);
    if (p.kind == EtaParam::Kind::OwnCpt) args.emplace_back(p.turn_on, turn_on);
    std::sort(args.begin(), args.end());
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ",";
        out += args[i].second;
    }
    if (p.kind != EtaParam::Kind::ClassCpt) {
        if (!args.empty()) out += ",";
        out += net.variable(class_node).name;
    }
    return out + ")";
}

inline std::string psi_name(const BayesianNetwork& net, const EtaPsiBlock& block,
                            std::size_t row) {
    if (block.variable < 0) return "psi0";
    std::string out = "psi[" + net.variable(block.variable).name + "]";
    if (block.scope.empty()) return out;
    const auto states = configuration_from_index(row, block.scope_radices);
    return out + "(" + detail::config_text(net, block.scope, states) + ")";
}

// Indicator product guarding a psi coefficient in the expansion of the
// log-odds function.
inline std::string psi_guard(const BayesianNetwork& net, const EtaPsiBlock& block,
                             std::size_t row) {
    if (block.variable < 0) return "1";
    std::string out = "I(" + net.variable(block.variable).name + "=" +
                      net.variable(block.variable).state_labels[1] + ")";
    const auto states = configuration_from_index(row, block.scope_radices);
    for (std::size_t i = 0; i < block.scope.size(); ++i)
        out += "I(" + net.variable(block.scope[i]).name + "=" +
               net.variable(block.scope[i]).state_labels[states[i]] + ")";
    return out;
}

inline EtaPsiBlocks build_eta_psi(const Ebnc& e, std::size_t row_cap = kDefaultRowCap) {
    if (!e.all_binary())
        fail(ErrorCode::NonBinaryVariable,
             "the blockwise construction requires binary variables");
    const auto& net = e.inner();
    const int y = e.y();

    EtaPsiBlocks result;
    // Network-consistent switch-on order over the inputs, index tie-break.
    for (int node : net.topological_order())
        if (node != y) result.turn_on_order.push_back(node);

    std::vector<int> position(net.node_count(), -1);
    for (std::size_t i = 0; i < result.turn_on_order.size(); ++i)
        position[result.turn_on_order[i]] = static_cast<int>(i);

    std::vector<int> contributors;  // nodes whose CPT conditions on the class node
    for (std::size_t j = 0; j < net.node_count(); ++j) {
        if (static_cast<int>(j) == y) continue;
        const auto& ps = net.parents(j);
        if (std::find(ps.begin(), ps.end(), y) != ps.end())
            contributors.push_back(static_cast<int>(j));
    }

    {
        EtaPsiBlock intercept;
        intercept.variable = -1;
        intercept.etas.push_back(EtaParam{});
        intercept.row_entries.push_back({0});
        result.blocks.push_back(std::move(intercept));
    }

    const auto& y_parents = net.parents(y);
    for (int input : result.turn_on_order) {
        EtaPsiBlock block;
        block.variable = input;

        struct Term {
            EtaParam::Kind kind;
            int target;
            int value;
            std::vector<int> arg_nodes;  // conditioning nodes, ascending
        };
        std::vector<Term> terms;
        if (std::find(y_parents.begin(), y_parents.end(), input) != y_parents.end())
            terms.push_back({EtaParam::Kind::ClassCpt, y, 0, detail::without(y_parents, input)});
        {
            const auto& ps = net.parents(input);
            if (std::find(ps.begin(), ps.end(), y) != ps.end())
                terms.push_back({EtaParam::Kind::OwnCpt, input, 0, detail::without(ps, y)});
        }
        for (int j : contributors) {
            if (j == input) continue;
            const auto& ps = net.parents(j);
            if (std::find(ps.begin(), ps.end(), input) == ps.end()) continue;
            // The affected node sits later in the switch-on order, so it is
            // still observed in its reference state.
            terms.push_back({EtaParam::Kind::ChildCpt, j, 0,
                             detail::without(detail::without(ps, y), input)});
        }

        std::set<int> scope_set;
        for (const auto& term : terms)
            for (int node : term.arg_nodes)
                if (position[node] < position[input]) scope_set.insert(node);
        block.scope.assign(scope_set.begin(), scope_set.end());
        block.scope_radices.assign(block.scope.size(), 2);

        std::size_t rows = std::size_t{1} << block.scope.size();
        if (rows > row_cap)
            fail(ErrorCode::CapExceeded, "block row count exceeds cap");

        std::map<decltype(std::declval<EtaParam>().key()), int> column_of;
        std::vector<EtaParam> columns;
        block.row_entries.reserve(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto scope_states = configuration_from_index(r, block.scope_radices);
            std::vector<int> scope_value(net.node_count(), 0);
            for (std::size_t i = 0; i < block.scope.size(); ++i)
                scope_value[block.scope[i]] = scope_states[i];
            std::vector<int> entries;
            for (const auto& term : terms) {
                EtaParam param;
                param.kind = term.kind;
                param.turn_on = input;
                param.target = term.target;
                param.value = term.value;
                param.cond.reserve(term.arg_nodes.size());
                for (int node : term.arg_nodes)
                    param.cond.push_back(position[node] < position[input] ? scope_value[node]
                                                                          : 0);
                auto it = column_of.find(param.key());
                int col;
                if (it == column_of.end()) {
                    col = static_cast<int>(columns.size());
                    columns.push_back(param);
                    column_of[columns.back().key()] = col;
                } else {
                    col = it->second;
                }
                entries.push_back(col);
            }
            std::sort(entries.begin(), entries.end());
            block.row_entries.push_back(std::move(entries));
        }

        // Re-sort columns canonically and remap rows.
        std::vector<int> perm(columns.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
        std::sort(perm.begin(), perm.end(),
                  [&](int a, int b) { return columns[a] < columns[b]; });
        std::vector<int> inverse(columns.size());
        for (std::size_t i = 0; i < perm.size(); ++i) inverse[perm[i]] = static_cast<int>(i);
        block.etas.reserve(columns.size());
        for (int idx : perm) block.etas.push_back(std::move(columns[idx]));
        for (auto& row : block.row_entries) {
            for (auto& c : row) c = inverse[c];
            std::sort(row.begin(), row.end());
        }
        result.blocks.push_back(std::move(block));
    }
    return result;
}

// Numeric value of a difference parameter at the EBNC's current CPTs.
inline double eta_value(const Ebnc& e, const EtaParam& p) {
    const auto& net = e.inner();
    const int y = e.y();
    switch (p.kind) {
        case EtaParam::Kind::Intercept: {
            const std::vector<int> x0(e.input_count(), 0);
            return log_odds(e, x0)[0];
        }
        case EtaParam::Kind::ClassCpt: {
            const auto cond_nodes = detail::without(net.parents(y), p.turn_on);
            auto omega = [&](int turn_state) {
                std::size_t row = 0;
                std::size_t pos = 0;
                for (int parent : net.parents(y)) {
                    const int state = parent == p.turn_on ? turn_state : p.cond[pos++];
                    row = row * 2 + static_cast<std::size_t>(state);
                }
                return std::log(net.cpt(y).at(row, 1)) - std::log(net.cpt(y).at(row, 0));
            };
            (void)cond_nodes;
            return omega(1) - omega(0);
        }
        case EtaParam::Kind::OwnCpt: {
            auto omega = [&](int own_state) {
                auto row = [&](int class_state) {
                    std::size_t r = 0;
                    std::size_t pos = 0;
                    for (int parent : net.parents(p.target)) {
                        const int state = parent == y ? class_state : p.cond[pos++];
                        r = r * 2 + static_cast<std::size_t>(state);
                    }
                    return r;
                };
                return std::log(net.cpt(p.target).at(row(1), own_state)) -
                       std::log(net.cpt(p.target).at(row(0), own_state));
            };
            return omega(1) - omega(0);
        }
        case EtaParam::Kind::ChildCpt: {
            auto omega = [&](int turn_state) {
                auto row = [&](int class_state) {
                    std::size_t r = 0;
                    std::size_t pos = 0;
                    for (int parent : net.parents(p.target)) {
                        int state;
                        if (parent == y)
                            state = class_state;
                        else if (parent == p.turn_on)
                            state = turn_state;
                        else
                            state = p.cond[pos++];
                        r = r * 2 + static_cast<std::size_t>(state);
                    }
                    return r;
                };
                return std::log(net.cpt(p.target).at(row(1), p.value)) -
                       std::log(net.cpt(p.target).at(row(0), p.value));
            };
            return omega(1) - omega(0);
        }
    }
    return 0.0;
}

// Evaluates the indicator expansion at the EBNC's CPTs for one input
// configuration; agrees with log_odds by construction.
inline double blockwise_log_odds(const Ebnc& e, const EtaPsiBlocks& blocks,
                                 const std::vector<int>& x) {
    e.check_input(x);
    std::vector<int> state_of(e.inner().node_count(), 0);
    for (std::size_t i = 0; i < e.inputs().size(); ++i) state_of[e.inputs()[i]] = x[i];

    double lambda = eta_value(e, blocks.blocks[0].etas[0]);
    for (std::size_t b = 1; b < blocks.blocks.size(); ++b) {
        const EtaPsiBlock& block = blocks.blocks[b];
        if (state_of[block.variable] != 1) continue;
        std::vector<int> scope_states(block.scope.size());
        for (std::size_t i = 0; i < block.scope.size(); ++i)
            scope_states[i] = state_of[block.scope[i]];
        const std::size_t row = configuration_index(scope_states, block.scope_radices);
        for (int col : block.row_entries[row]) lambda += eta_value(e, block.etas[col]);
    }
    return lambda;
}

// ---------------------------------------------------------------------------
// Dimension reports and the phi parameterization.
// ---------------------------------------------------------------------------

enum class DimensionMethod { Global, Blockwise };

inline const char* dimension_method_name(DimensionMethod m) {
    return m == DimensionMethod::Global ? "global" : "blockwise";
}

struct BasisTerm {
    BigInt coefficient;
    std::string parameter;
};

struct BasisVector {
    std::string name;  // phi_1, phi_2, ...
    std::vector<BasisTerm> terms;
};

struct DimensionReport {
    int dimension = 0;
    DimensionMethod method = DimensionMethod::Global;
    std::vector<BasisVector> basis;
};

inline std::string serialize_basis_vector(const BasisVector& v) {
    std::ostringstream out;
    out << v.name << " =";
    bool first = true;
    for (const auto& term : v.terms) {
        if (term.coefficient == 0) continue;
        const bool negative = term.coefficient < 0;
        BigInt magnitude = negative ? BigInt(-term.coefficient) : term.coefficient;
        if (first) {
            out << " " << (negative ? "-" : "");
            first = false;
        } else {
            out << (negative ? " - " : " + ");
        }
        if (magnitude != 1) out << magnitude.str() << "*";
        out << term.parameter;
    }
    if (first) out << " 0";
    return out.str();
}

inline std::string serialize_dimension_report(const DimensionReport& report) {
    std::ostringstream out;
    out << "dimension = " << report.dimension << "\n";
    out << "method = " << dimension_method_name(report.method) << "\n";
    for (const auto& v : report.basis) out << serialize_basis_vector(v) << "\n";
    return out.str();
}

// The non-redundant parameterization: the report plus the linear map from
// phi coordinates back to the log-odds table, used for fitting and scoring.
class PhiBasis {
  public:
    static PhiBasis global(const Ebnc& e, std::size_t row_cap = kDefaultRowCap) {
        PhiBasis basis;
        basis.method_ = DimensionMethod::Global;
        basis.class_state_count_ = e.class_state_count();
        basis.configuration_count_ = e.input_configuration_count();
        GlobalData data;
        data.system = build_kappa_system(e, row_cap);
        data.row_basis = reduced_row_basis(data.system.dense());
        data.pivot_of_column.assign(data.system.column_count(), -1);
        for (std::size_t m = 0; m < data.row_basis.rank; ++m)
            data.pivot_of_column[data.row_basis.pivot_cols[m]] = static_cast<int>(m);
        data.pivot_inverse.resize(data.row_basis.rank);
        for (std::size_t m = 0; m < data.row_basis.rank; ++m)
            data.pivot_inverse[m] =
                1.0 / static_cast<double>(data.row_basis.pivot_values[m]);
        basis.dimension_ = static_cast<int>(data.row_basis.rank);
        basis.data_ = std::move(data);
        return basis;
    }

    static PhiBasis blockwise(const Ebnc& e, std::size_t row_cap = kDefaultRowCap) {
        PhiBasis basis;
        basis.method_ = DimensionMethod::Blockwise;
        basis.class_state_count_ = e.class_state_count();
        basis.configuration_count_ = e.input_configuration_count();
        BlockData data;
        data.blocks = build_eta_psi(e, row_cap);
        int dim = 0;
        for (const auto& block : data.blocks.blocks) {
            BlockBasis bb;
            bb.row_basis = reduced_row_basis(block.dense());
            bb.pivot_of_column.assign(block.etas.size(), -1);
            for (std::size_t m = 0; m < bb.row_basis.rank; ++m)
                bb.pivot_of_column[bb.row_basis.pivot_cols[m]] = static_cast<int>(m);
            bb.pivot_inverse.resize(bb.row_basis.rank);
            for (std::size_t m = 0; m < bb.row_basis.rank; ++m)
                bb.pivot_inverse[m] = 1.0 / static_cast<double>(bb.row_basis.pivot_values[m]);
            bb.phi_offset = dim;
            dim += static_cast<int>(bb.row_basis.rank);
            data.block_bases.push_back(std::move(bb));
        }
        // Map each input to its block for configuration lookups.
        data.block_of_input.assign(e.inner().node_count(), -1);
        for (std::size_t b = 1; b < data.blocks.blocks.size(); ++b)
            data.block_of_input[data.blocks.blocks[b].variable] = static_cast<int>(b);
        data.input_radices = e.input_radices();
        data.inputs = e.inputs();
        data.node_count = e.inner().node_count();
        basis.dimension_ = dim;
        basis.data_ = std::move(data);
        return basis;
    }

    // Blockwise when every variable is binary, otherwise the general method.
    static PhiBasis automatic(const Ebnc& e, std::size_t row_cap = kDefaultRowCap) {
        return e.all_binary() ? blockwise(e, row_cap) : global(e, row_cap);
    }

    int dimension() const { return dimension_; }
    DimensionMethod method() const { return method_; }
    int class_state_count() const { return class_state_count_; }
    std::size_t input_configuration_count() const { return configuration_count_; }

    DimensionReport report(const Ebnc& e) const {
        DimensionReport rep;
        rep.dimension = dimension_;
        rep.method = method_;
        if (method_ == DimensionMethod::Global) {
            const auto& data = std::get<GlobalData>(data_);
            for (std::size_t m = 0; m < data.row_basis.rank; ++m) {
                BasisVector v;
                v.name = "phi_" + std::to_string(m + 1);
                const auto& row = data.row_basis.rows[m];
                for (std::size_t c = 0; c < row.size(); ++c)
                    if (row[c] != 0)
                        v.terms.push_back(
                            {row[c], kappa_name(e.inner(), e.y(), data.system.params[c])});
                rep.basis.push_back(std::move(v));
            }
        } else {
            const auto& data = std::get<BlockData>(data_);
            int phi_index = 0;
            for (std::size_t b = 0; b < data.blocks.blocks.size(); ++b) {
                const auto& block = data.blocks.blocks[b];
                const auto& bb = data.block_bases[b];
                for (std::size_t m = 0; m < bb.row_basis.rank; ++m) {
                    BasisVector v;
                    v.name = "phi_" + std::to_string(++phi_index);
                    const auto& row = bb.row_basis.rows[m];
                    for (std::size_t c = 0; c < row.size(); ++c)
                        if (row[c] != 0)
                            v.terms.push_back({row[c], eta_name(e.inner(), e.y(), block.etas[c])});
                    rep.basis.push_back(std::move(v));
                }
            }
        }
        return rep;
    }

    // Coefficient rows of the map phi -> log-odds for one input configuration:
    // (class_state_count - 1) rows of `dimension` coefficients, row-major.
    std::vector<double> lambda_coefficients(std::size_t x_index) const {
        const std::size_t k_rows = static_cast<std::size_t>(class_state_count_ - 1);
        std::vector<double> out(k_rows * static_cast<std::size_t>(dimension_), 0.0);
        if (method_ == DimensionMethod::Global) {
            const auto& data = std::get<GlobalData>(data_);
            for (std::size_t k = 0; k < k_rows; ++k) {
                const auto& entries = data.system.row_entries[x_index * k_rows + k];
                double* row = out.data() + k * static_cast<std::size_t>(dimension_);
                for (int col : entries) {
                    const int m = data.pivot_of_column[col];
                    if (m >= 0) row[m] += data.pivot_inverse[m];
                }
            }
        } else {
            const auto& data = std::get<BlockData>(data_);
            const auto states = configuration_from_index(x_index, data.input_radices);
            std::vector<int> state_of(data.node_count, 0);
            for (std::size_t i = 0; i < data.inputs.size(); ++i)
                state_of[data.inputs[i]] = states[i];
            // Intercept block always contributes its single coordinate.
            out[static_cast<std::size_t>(data.block_bases[0].phi_offset)] =
                data.block_bases[0].pivot_inverse[0];
            for (std::size_t b = 1; b < data.blocks.blocks.size(); ++b) {
                const auto& block = data.blocks.blocks[b];
                if (state_of[block.variable] != 1) continue;
                std::vector<int> scope_states(block.scope.size());
                for (std::size_t i = 0; i < block.scope.size(); ++i)
                    scope_states[i] = state_of[block.scope[i]];
                const std::size_t row_index =
                    configuration_index(scope_states, block.scope_radices);
                const auto& bb = data.block_bases[b];
                for (int col : block.row_entries[row_index]) {
                    const int m = bb.pivot_of_column[col];
                    if (m >= 0)
                        out[static_cast<std::size_t>(bb.phi_offset + m)] += bb.pivot_inverse[m];
                }
            }
        }
        return out;
    }

    // Basis functionals evaluated at an EBNC with the same structure.
    std::vector<double> phi_of(const Ebnc& e) const {
        std::vector<double> phi(static_cast<std::size_t>(dimension_), 0.0);
        if (method_ == DimensionMethod::Global) {
            const auto& data = std::get<GlobalData>(data_);
            const std::vector<double> kappa = kappa_values(e, data.system);
            for (std::size_t m = 0; m < data.row_basis.rank; ++m) {
                double sum = 0.0;
                const auto& row = data.row_basis.rows[m];
                for (std::size_t c = 0; c < row.size(); ++c)
                    if (row[c] != 0) sum += static_cast<double>(row[c]) * kappa[c];
                phi[m] = sum;
            }
        } else {
            const auto& data = std::get<BlockData>(data_);
            for (std::size_t b = 0; b < data.blocks.blocks.size(); ++b) {
                const auto& block = data.blocks.blocks[b];
                const auto& bb = data.block_bases[b];
                std::vector<double> eta(block.etas.size());
                for (std::size_t c = 0; c < block.etas.size(); ++c)
                    eta[c] = eta_value(e, block.etas[c]);
                for (std::size_t m = 0; m < bb.row_basis.rank; ++m) {
                    double sum = 0.0;
                    const auto& row = bb.row_basis.rows[m];
                    for (std::size_t c = 0; c < row.size(); ++c)
                        if (row[c] != 0) sum += static_cast<double>(row[c]) * eta[c];
                    phi[static_cast<std::size_t>(bb.phi_offset + m)] = sum;
                }
            }
        }
        return phi;
    }

    // Exposed for inspection and tests.
    const KappaSystem& kappa_system() const { return std::get<GlobalData>(data_).system; }
    const EtaPsiBlocks& eta_psi_blocks() const { return std::get<BlockData>(data_).blocks; }
    std::vector<int> block_ranks() const {
        const auto& data = std::get<BlockData>(data_);
        std::vector<int> ranks;
        for (const auto& bb : data.block_bases)
            ranks.push_back(static_cast<int>(bb.row_basis.rank));
        return ranks;
    }

  private:
    struct GlobalData {
        KappaSystem system;
        RowBasis row_basis;
        std::vector<int> pivot_of_column;
        std::vector<double> pivot_inverse;
    };
    struct BlockBasis {
        RowBasis row_basis;
        std::vector<int> pivot_of_column;
        std::vector<double> pivot_inverse;
        int phi_offset = 0;
    };
    struct BlockData {
        EtaPsiBlocks blocks;
        std::vector<BlockBasis> block_bases;
        std::vector<int> block_of_input;
        std::vector<int> input_radices;
        std::vector<int> inputs;
        std::size_t node_count = 0;
    };

    DimensionMethod method_ = DimensionMethod::Global;
    int dimension_ = 0;
    int class_state_count_ = 2;
    std::size_t configuration_count_ = 0;
    std::variant<GlobalData, BlockData> data_;
};

inline DimensionReport dimension_global(const Ebnc& e, std::size_t row_cap = kDefaultRowCap) {
    return PhiBasis::global(e, row_cap).report(e);
}

inline DimensionReport dimension_blockwise(const Ebnc& e,
                                           std::size_t row_cap = kDefaultRowCap) {
    return PhiBasis::blockwise(e, row_cap).report(e);
}

// ---------------------------------------------------------------------------
// Openness of the map from CPT values to the difference parameters: the log
// ratios (omegas) either read disjoint CPT cells or form a complementary
// pair over the two states of a binary node, and the linear map from omegas
// to the difference parameters admits a triangular witness with unit
// diagonal.
// ---------------------------------------------------------------------------

struct OmegaParam {
    bool class_target = true;
    int node = 0;
    int value = 0;          // target state (input targets only)
    std::vector<int> cond;  // conditioning configuration (excluding the class node)

    auto key() const { return std::tie(class_target, node, value, cond); }
    bool operator<(const OmegaParam& other) const {
        if (class_target != other.class_target) return class_target;
        int ones_a = 0, ones_b = 0;
        for (int s : cond) ones_a += s;
        for (int s : other.cond) ones_b += s;
        return std::tie(node, value, ones_a, cond) <
               std::tie(other.node, other.value, ones_b, other.cond);
    }
};

inline std::string omega_name(const BayesianNetwork& net, int class_node,
                              const OmegaParam& p) {
    std::string out = "omega(";
    if (p.class_target) {
        out += net.variable(class_node).name;
        const auto& cond_nodes = net.parents(class_node);
        if (!cond_nodes.empty()) out += "|" + detail::config_text(net, cond_nodes, p.cond);
    } else {
        out += net.variable(p.node).name + "=" + net.variable(p.node).state_labels[p.value];
        const auto cond_nodes = detail::without(net.parents(p.node), class_node);
        out += "|";
        if (!cond_nodes.empty()) out += detail::config_text(net, cond_nodes, p.cond) + ",";
        out += net.variable(class_node).name;
    }
    return out + ")";
}

struct OpennessReport {
    bool ok = false;
    std::size_t omega_count = 0;
    std::size_t eta_count = 0;
    std::size_t free_columns = 0;
    std::vector<std::string> row_order;    // eta names in triangular order
    std::vector<std::string> pivot_order;  // pivot omega per row
};

inline OpennessReport check_theta_eta_open(const Ebnc& e,
                                           std::size_t row_cap = kDefaultRowCap) {
    const EtaPsiBlocks blocks = build_eta_psi(e, row_cap);
    const auto& net = e.inner();
    const int y = e.y();

    // Collect all omega parameters.
    std::vector<OmegaParam> omegas;
    {
        const auto& y_parents = net.parents(y);
        std::vector<int> radices(y_parents.size(), 2);
        const std::size_t count = std::size_t{1} << y_parents.size();
        for (std::size_t c = 0; c < count; ++c)
            omegas.push_back(OmegaParam{true, y, 0, configuration_from_index(c, radices)});
        for (std::size_t j = 0; j < net.node_count(); ++j) {
            if (static_cast<int>(j) == y) continue;
            const auto& ps = net.parents(j);
            if (std::find(ps.begin(), ps.end(), y) == ps.end()) continue;
            const auto cond_nodes = detail::without(ps, y);
            std::vector<int> cond_radices(cond_nodes.size(), 2);
            const std::size_t cfgs = std::size_t{1} << cond_nodes.size();
            for (std::size_t c = 0; c < cfgs; ++c)
                for (int v = 0; v < 2; ++v)
                    omegas.push_back(OmegaParam{false, static_cast<int>(j), v,
                                                configuration_from_index(c, cond_radices)});
        }
    }
    std::sort(omegas.begin(), omegas.end());
    std::map<decltype(std::declval<OmegaParam>().key()), int> omega_column;
    for (std::size_t c = 0; c < omegas.size(); ++c) omega_column[omegas[c].key()] = static_cast<int>(c);

    // (a) Disjoint CPT reads, except for the complementary pair over the two
    // states of one input CPT cell.
    {
        std::map<std::tuple<int, std::vector<int>>, std::vector<int>> readers;
        for (std::size_t c = 0; c < omegas.size(); ++c) {
            const auto& w = omegas[c];
            readers[{w.class_target ? y : w.node, w.cond}].push_back(static_cast<int>(c));
        }
        for (const auto& [cell, cols] : readers) {
            (void)cell;
            if (cols.size() == 1) continue;
            const bool complementary_pair =
                cols.size() == 2 && !omegas[cols[0]].class_target &&
                !omegas[cols[1]].class_target &&
                omegas[cols[0]].node == omegas[cols[1]].node &&
                omegas[cols[0]].value != omegas[cols[1]].value;
            if (!complementary_pair)
                fail(ErrorCode::TriangularizationFailed,
                     "omega parameters share CPT cells beyond complementary pairs");
        }
    }

    // Rows: every difference parameter in use, expressed over the omegas.
    struct EtaRow {
        std::string name;
        int pivot = -1;
        std::vector<std::pair<int, int>> entries;  // (omega column, coefficient)
    };
    std::vector<EtaRow> rows;
    std::set<decltype(std::declval<EtaParam>().key())> seen;
    for (const auto& block : blocks.blocks) {
        for (const auto& eta : block.etas) {
            if (!seen.insert(eta.key()).second) continue;
            EtaRow row;
            row.name = eta_name(net, y, eta);
            switch (eta.kind) {
                case EtaParam::Kind::Intercept: {
                    const auto& y_parents = net.parents(y);
                    OmegaParam base{true, y, 0, std::vector<int>(y_parents.size(), 0)};
                    row.pivot = omega_column.at(base.key());
                    row.entries.emplace_back(row.pivot, 1);
                    for (std::size_t j = 0; j < net.node_count(); ++j) {
                        if (static_cast<int>(j) == y) continue;
                        const auto& ps = net.parents(j);
                        if (std::find(ps.begin(), ps.end(), y) == ps.end()) continue;
                        const auto cond_nodes = detail::without(ps, y);
                        OmegaParam w{false, static_cast<int>(j), 0,
                                     std::vector<int>(cond_nodes.size(), 0)};
                        row.entries.emplace_back(omega_column.at(w.key()), 1);
                    }
                    break;
                }
                case EtaParam::Kind::ClassCpt: {
                    const auto& y_parents = net.parents(y);
                    auto config = [&](int turn_state) {
                        std::vector<int> cfg(y_parents.size());
                        std::size_t pos = 0;
                        for (std::size_t i = 0; i < y_parents.size(); ++i)
                            cfg[i] = y_parents[i] == eta.turn_on ? turn_state
                                                                 : eta.cond[pos++];
                        return cfg;
                    };
                    OmegaParam on{true, y, 0, config(1)};
                    OmegaParam off{true, y, 0, config(0)};
                    row.pivot = omega_column.at(on.key());
                    row.entries.emplace_back(row.pivot, 1);
                    row.entries.emplace_back(omega_column.at(off.key()), -1);
                    break;
                }
                case EtaParam::Kind::OwnCpt: {
                    OmegaParam on{false, eta.target, 1, eta.cond};
                    OmegaParam off{false, eta.target, 0, eta.cond};
                    row.pivot = omega_column.at(on.key());
                    row.entries.emplace_back(row.pivot, 1);
                    row.entries.emplace_back(omega_column.at(off.key()), -1);
                    break;
                }
                case EtaParam::Kind::ChildCpt: {
                    const auto cond_nodes =
                        detail::without(net.parents(eta.target), y);
                    auto config = [&](int turn_state) {
                        std::vector<int> cfg(cond_nodes.size());
                        std::size_t pos = 0;
                        for (std::size_t i = 0; i < cond_nodes.size(); ++i)
                            cfg[i] = cond_nodes[i] == eta.turn_on ? turn_state
                                                                  : eta.cond[pos++];
                        return cfg;
                    };
                    OmegaParam on{false, eta.target, eta.value, config(1)};
                    OmegaParam off{false, eta.target, eta.value, config(0)};
                    row.pivot = omega_column.at(on.key());
                    row.entries.emplace_back(row.pivot, 1);
                    row.entries.emplace_back(omega_column.at(off.key()), -1);
                    break;
                }
            }
            rows.push_back(std::move(row));
        }
    }

    // (b) Triangular witness: rows ordered by pivot column; each row must not
    // touch the pivot of any later row, and the pivot coefficient must be +1.
    std::sort(rows.begin(), rows.end(),
              [](const EtaRow& a, const EtaRow& b) { return a.pivot < b.pivot; });
    std::map<int, std::size_t> pivot_row;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        if (!pivot_row.emplace(rows[t].pivot, t).second)
            fail(ErrorCode::TriangularizationFailed, "duplicate pivot assignment");
    }
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (const auto& [col, coeff] : rows[t].entries) {
            if (col == rows[t].pivot) {
                if (coeff != 1)
                    fail(ErrorCode::TriangularizationFailed, "pivot coefficient is not unit");
                continue;
            }
            auto it = pivot_row.find(col);
            if (it != pivot_row.end() && it->second > t)
                fail(ErrorCode::TriangularizationFailed,
                     "entry above a later pivot breaks triangular form");
        }
    }

    OpennessReport report;
    report.ok = true;
    report.omega_count = omegas.size();
    report.eta_count = rows.size();
    report.free_columns = omegas.size() - rows.size();
    for (const auto& row : rows) {
        report.row_order.push_back(row.name);
        report.pivot_order.push_back(omega_name(net, y, omegas[row.pivot]));
    }
    return report;
}

}  // namespace ebnc
