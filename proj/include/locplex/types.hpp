#pragma once

// Core domain types for distribution-network analysis: instances (demand
// nodes + distance matrix), networks (facility set + allocation), cost
// parameters, and normalized demand-share vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace locplex {

using NodeId = int;

// Allocation value for nodes outside the covered demand set.
inline constexpr NodeId kUnassigned = -1;

// Input data violates a documented precondition or file contract.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exact enumeration would exceed the configured candidate budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dense row-major matrix. Distances are accepted asymmetric (road
// networks generally are), so no symmetry is assumed anywhere.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, value) {}

    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }
    bool empty() const { return data_.empty(); }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// A demand system: node set 0..N-1 with per-node demand W_i (tons/period)
// and a km distance matrix d(i,j). The optional depot is the main
// distribution centre, required only when first-leg costs apply.
struct Instance {
    std::vector<double> demand;
    Matrix dist;
    std::optional<NodeId> depot;

    int size() const { return static_cast<int>(demand.size()); }

    friend bool operator==(const Instance&, const Instance&) = default;
};

struct ValidationReport {
    std::vector<std::string> errors;

    bool ok() const { return errors.empty(); }

    std::string to_string() const {
        std::string out;
        for (const auto& e : errors) {
            if (!out.empty()) out += "; ";
            out += e;
        }
        return out;
    }

    void require_ok(const std::string& context) const {
        if (!ok()) throw ValidationError(context + ": " + to_string());
    }
};

// Checks every Instance invariant and reports all violations, not just
// the first one found.
inline ValidationReport validate_instance(const Instance& inst) {
    ValidationReport report;
    const int n = inst.size();
    if (n == 0) report.errors.push_back("instance has no nodes");
    if (!inst.dist.square() || inst.dist.rows() != n) {
        std::ostringstream os;
        os << "distance matrix is " << inst.dist.rows() << "x" << inst.dist.cols()
           << ", expected " << n << "x" << n;
        report.errors.push_back(os.str());
        return report;  // index-based checks below would be unsafe
    }
    bool any_positive = false;
    for (int i = 0; i < n; ++i) {
        if (inst.demand[i] < 0.0) {
            report.errors.push_back("negative demand at node " + std::to_string(i));
        } else if (inst.demand[i] > 0.0) {
            any_positive = true;
        }
        if (inst.dist(i, i) != 0.0) {
            report.errors.push_back("nonzero diagonal at node " + std::to_string(i));
        }
        for (int j = 0; j < n; ++j) {
            if (inst.dist(i, j) < 0.0) {
                std::ostringstream os;
                os << "negative distance d(" << i << "," << j << ")";
                report.errors.push_back(os.str());
            }
        }
    }
    if (n > 0 && !any_positive) report.errors.push_back("all demands are zero");
    if (inst.depot && (*inst.depot < 0 || *inst.depot >= n)) {
        report.errors.push_back("depot " + std::to_string(*inst.depot) + " is not a valid node");
    }
    return report;
}

// Normalized probability vector over partes (demand shares). Entries lie
// in [0,1] and sum to 1 within 1e-9.
class WeightVector {
public:
    explicit WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
        double sum = 0.0;
        for (double w : weights_) {
            if (w < 0.0 || w > 1.0) throw ValidationError("weight outside [0,1]");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ValidationError("weights sum to " + std::to_string(sum) + ", expected 1");
        }
    }

    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    const std::vector<double>& values() const { return weights_; }

    auto begin() const { return weights_.begin(); }
    auto end() const { return weights_.end(); }

private:
    std::vector<double> weights_;
};

// Demand shares p_i = W_i / sum of W over `subset`, in subset order.
inline WeightVector demand_shares(const Instance& inst, std::span<const NodeId> subset) {
    if (subset.empty()) throw ValidationError("demand_shares: empty subset");
    double total = 0.0;
    for (NodeId i : subset) {
        if (i < 0 || i >= inst.size()) {
            throw ValidationError("demand_shares: node " + std::to_string(i) + " out of range");
        }
        total += inst.demand[i];
    }
    if (total <= 0.0) throw ValidationError("demand_shares: subset has zero total demand");
    std::vector<double> shares;
    shares.reserve(subset.size());
    for (NodeId i : subset) shares.push_back(inst.demand[i] / total);
    return WeightVector(std::move(shares));
}

// A chosen facility set S plus an explicit node -> facility allocation.
// allocation[i] == kUnassigned marks a node outside the covered demand
// set (rationalisation and reduction shrink coverage).
struct Network {
    std::vector<NodeId> facilities;  // ascending, unique
    std::vector<NodeId> allocation;  // size = instance size

    int k() const { return static_cast<int>(facilities.size()); }

    bool covers(NodeId i) const { return allocation[i] != kUnassigned; }

    bool is_facility(NodeId f) const {
        return std::binary_search(facilities.begin(), facilities.end(), f);
    }

    std::vector<NodeId> covered_nodes() const {
        std::vector<NodeId> out;
        for (NodeId i = 0; i < static_cast<NodeId>(allocation.size()); ++i) {
            if (allocation[i] != kUnassigned) out.push_back(i);
        }
        return out;
    }

    double covered_demand(const Instance& inst) const {
        double total = 0.0;
        for (NodeId i = 0; i < static_cast<NodeId>(allocation.size()); ++i) {
            if (allocation[i] != kUnassigned) total += inst.demand[i];
        }
        return total;
    }

    // Allocation set of facility f, ascending node order.
    std::vector<NodeId> members(NodeId f) const {
        std::vector<NodeId> out;
        for (NodeId i = 0; i < static_cast<NodeId>(allocation.size()); ++i) {
            if (allocation[i] == f) out.push_back(i);
        }
        return out;
    }

    friend bool operator==(const Network&, const Network&) = default;
};

// Network invariants: allocation is a partition of the covered nodes
// into nonempty per-facility sets, and every facility serves itself.
inline ValidationReport validate_network(const Instance& inst, const Network& net) {
    ValidationReport report;
    const int n = inst.size();
    if (static_cast<int>(net.allocation.size()) != n) {
        report.errors.push_back("allocation size " + std::to_string(net.allocation.size()) +
                                " does not match instance size " + std::to_string(n));
        return report;
    }
    if (net.facilities.empty()) report.errors.push_back("facility set is empty");
    if (!std::is_sorted(net.facilities.begin(), net.facilities.end()) ||
        std::adjacent_find(net.facilities.begin(), net.facilities.end()) != net.facilities.end()) {
        report.errors.push_back("facilities must be sorted and unique");
    }
    for (NodeId f : net.facilities) {
        if (f < 0 || f >= n) {
            report.errors.push_back("facility " + std::to_string(f) + " is not a valid node");
        } else if (net.allocation[f] != f) {
            report.errors.push_back("facility " + std::to_string(f) + " is not allocated to itself");
        }
    }
    for (NodeId i = 0; i < n; ++i) {
        NodeId f = net.allocation[i];
        if (f == kUnassigned) continue;
        if (!net.is_facility(f)) {
            report.errors.push_back("node " + std::to_string(i) + " allocated to closed facility " +
                                    std::to_string(f));
        }
    }
    return report;
}

// A quantity defined per facility site: either one uniform value or an
// explicit per-node vector (indexed by facility NodeId).
class PerNodeValue {
public:
    PerNodeValue(double uniform = 0.0) : uniform_value_(uniform) {}

    static PerNodeValue per_node(std::vector<double> values) {
        PerNodeValue v;
        v.per_node_ = std::move(values);
        return v;
    }

    bool is_uniform() const { return per_node_.empty(); }

    double at(NodeId i) const {
        return per_node_.empty() ? uniform_value_ : per_node_[static_cast<std::size_t>(i)];
    }

    double uniform_value() const { return uniform_value_; }
    const std::vector<double>& per_node_values() const { return per_node_; }

    friend bool operator==(const PerNodeValue&, const PerNodeValue&) = default;

private:
    double uniform_value_ = 0.0;
    std::vector<double> per_node_;
};

// Economic parameters: r (unit revenue net of production cost), gamma
// (last-leg transport cost), rho (first-leg cost; 0 disables the
// distribution-cost model), phi (facility fixed cost), alpha (complexity
// cost factor, scalar or per-facility).
struct CostParams {
    double r = 0.0;       // currency/ton
    double gamma = 0.0;   // currency/(km*ton)
    double rho = 0.0;     // currency/(km*ton)
    PerNodeValue phi{0.0};    // currency/period
    PerNodeValue alpha{0.0};  // each value in [0,1)

    double alpha_at(NodeId f) const { return alpha.at(f); }
    double phi_at(NodeId f) const { return phi.at(f); }
};

inline ValidationReport validate_params(const CostParams& p, int n_nodes) {
    ValidationReport report;
    if (!(p.r > 0.0)) report.errors.push_back("r must be > 0");
    if (p.gamma < 0.0) report.errors.push_back("gamma must be >= 0");
    if (p.rho < 0.0) report.errors.push_back("rho must be >= 0");
    if (p.rho > 0.0 && !(p.rho < p.gamma)) {
        report.errors.push_back("rho must be < gamma when positive");
    }
    auto check_alpha = [&report](double a) {
        if (a < 0.0 || a >= 1.0) report.errors.push_back("alpha must lie in [0,1)");
    };
    if (p.alpha.is_uniform()) {
        check_alpha(p.alpha.uniform_value());
    } else {
        if (static_cast<int>(p.alpha.per_node_values().size()) != n_nodes) {
            report.errors.push_back("per-node alpha vector size mismatch");
        }
        for (double a : p.alpha.per_node_values()) check_alpha(a);
    }
    if (!p.phi.is_uniform() && static_cast<int>(p.phi.per_node_values().size()) != n_nodes) {
        report.errors.push_back("per-node phi vector size mismatch");
    }
    return report;
}

}  // namespace locplex
