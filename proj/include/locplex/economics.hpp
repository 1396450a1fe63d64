#pragma once

// Revenue and profit evaluators: per-facility revenue with optional
// first-leg distribution costs, gross profit under the complexity penalty,
// the monetary cost of complexity, and the net-profit evaluator used to
// score arbitrary networks.

#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "locplex/complexity.hpp"
#include "locplex/types.hpp"

namespace locplex {

namespace detail {

inline void require_depot_if_needed(const Instance& inst, const CostParams& params) {
    if (params.rho > 0.0 && !inst.depot) {
        throw ValidationError("rho > 0 requires an instance depot");
    }
}

// Reusable buffers for allocation-based objective evaluation. One scratch
// per solve/heuristic run keeps the hot loop allocation-free.
struct EvalScratch {
    std::vector<double> demand_sum;    // per facility slot
    std::vector<double> wlog_sum;      // per facility slot: sum W*log2(W)
    std::vector<double> revenue;       // per facility slot
    std::vector<double> alloc_cost;    // per facility slot: depot leg for allocation scoring
    std::vector<int> slot_of;          // node id -> facility slot, -1 when closed
    std::vector<double> wlog_cache;    // per node: W*log2(W), 0 for W=0

    void prepare(const Instance& inst) {
        if (wlog_cache.size() == inst.demand.size()) return;
        wlog_cache.resize(inst.demand.size());
        for (std::size_t i = 0; i < inst.demand.size(); ++i) {
            double w = inst.demand[i];
            wlog_cache[i] = w > 0.0 ? w * std::log2(w) : 0.0;
        }
        slot_of.assign(inst.demand.size(), -1);
    }
};

// Per-facility accumulation shared by all evaluators: demand, entropy
// terms, and two-leg revenue sum_i (r - rho*d(c,f) - gamma*d(f,i)) * W_i.
inline void accumulate_facility_terms(const Instance& inst, const CostParams& params,
                                      std::span<const NodeId> facilities,
                                      std::span<const NodeId> allocation, EvalScratch& s) {
    s.prepare(inst);
    const int k = static_cast<int>(facilities.size());
    s.demand_sum.assign(k, 0.0);
    s.wlog_sum.assign(k, 0.0);
    s.revenue.assign(k, 0.0);

    std::vector<double> depot_leg(k, 0.0);
    if (params.rho > 0.0) {
        require_depot_if_needed(inst, params);
        for (int j = 0; j < k; ++j) depot_leg[j] = params.rho * inst.dist(*inst.depot, facilities[j]);
    }
    for (int j = 0; j < k; ++j) s.slot_of[facilities[j]] = j;

    const int n = inst.size();
    for (NodeId i = 0; i < n; ++i) {
        NodeId f = allocation[i];
        if (f == kUnassigned) continue;
        int j = s.slot_of[f];
        double w = inst.demand[i];
        s.demand_sum[j] += w;
        s.wlog_sum[j] += s.wlog_cache[i];
        s.revenue[j] += (params.r - depot_leg[j] - params.gamma * inst.dist(f, i)) * w;
    }
    for (int j = 0; j < k; ++j) s.slot_of[facilities[j]] = -1;
}

inline double local_bits(double demand_sum, double wlog_sum) {
    if (demand_sum <= 0.0) return 0.0;
    double bits = std::log2(demand_sum) - wlog_sum / demand_sum;
    return bits < 0.0 ? 0.0 : bits;
}

// Z-evaluator over raw facility/allocation spans:
// sum_f [ R(f) * (1 - alpha_f * C_p(N_f)) - phi_f ].
inline double plex_objective(const Instance& inst, const CostParams& params,
                             std::span<const NodeId> facilities,
                             std::span<const NodeId> allocation, EvalScratch& s) {
    accumulate_facility_terms(inst, params, facilities, allocation, s);
    double z = 0.0;
    for (std::size_t j = 0; j < facilities.size(); ++j) {
        NodeId f = facilities[j];
        double bits = local_bits(s.demand_sum[j], s.wlog_sum[j]);
        z += s.revenue[j] * (1.0 - params.alpha_at(f) * bits) - params.phi_at(f);
    }
    return z;
}

// Complexity-blind evaluator: sum_f [R(f) - phi_f].
inline double kmedian_objective(const Instance& inst, const CostParams& params,
                                std::span<const NodeId> facilities,
                                std::span<const NodeId> allocation, EvalScratch& s) {
    accumulate_facility_terms(inst, params, facilities, allocation, s);
    double z = 0.0;
    for (std::size_t j = 0; j < facilities.size(); ++j) {
        z += s.revenue[j] - params.phi_at(facilities[j]);
    }
    return z;
}

}  // namespace detail

// Revenue of facility f: sum over its allocated nodes of
// (r - rho*d(depot,f) - gamma*d(f,i)) * W_i. With rho = 0 the first-leg
// term vanishes and this is the plain margin-times-demand sum.
inline double facility_revenue(const Instance& inst, const Network& net, const CostParams& params,
                               NodeId f) {
    if (!net.is_facility(f)) {
        throw ValidationError("facility_revenue: " + std::to_string(f) + " is not an open facility");
    }
    detail::require_depot_if_needed(inst, params);
    double depot_leg = params.rho > 0.0 ? params.rho * inst.dist(*inst.depot, f) : 0.0;
    double revenue = 0.0;
    for (NodeId i = 0; i < inst.size(); ++i) {
        if (net.allocation[i] == f) {
            revenue += (params.r - depot_leg - params.gamma * inst.dist(f, i)) * inst.demand[i];
        }
    }
    return revenue;
}

// Gross profit: sum_f (1 - alpha_f * C_p(N_f)) * R(f).
inline double gross_profit(const Instance& inst, const Network& net, const CostParams& params) {
    detail::EvalScratch s;
    detail::accumulate_facility_terms(inst, params, net.facilities, net.allocation, s);
    double total = 0.0;
    for (std::size_t j = 0; j < net.facilities.size(); ++j) {
        NodeId f = net.facilities[j];
        double bits = detail::local_bits(s.demand_sum[j], s.wlog_sum[j]);
        total += (1.0 - params.alpha_at(f) * bits) * s.revenue[j];
    }
    return total;
}

// Monetary cost of complexity: sum_f alpha_f * C_p(N_f) * R(f).
// Identity: gross_profit + complexity_cost = sum_f R(f).
inline double complexity_cost(const Instance& inst, const Network& net, const CostParams& params) {
    detail::EvalScratch s;
    detail::accumulate_facility_terms(inst, params, net.facilities, net.allocation, s);
    double total = 0.0;
    for (std::size_t j = 0; j < net.facilities.size(); ++j) {
        NodeId f = net.facilities[j];
        double bits = detail::local_bits(s.demand_sum[j], s.wlog_sum[j]);
        total += params.alpha_at(f) * bits * s.revenue[j];
    }
    return total;
}

struct ProfitReport {
    std::map<NodeId, double> revenue_by_facility;
    double gross_profit = 0.0;        // complexity-penalized revenue
    double complexity_cost = 0.0;     // C_alpha
    double fixed_cost_total = 0.0;    // sum phi_f
    double net_profit_plex = 0.0;     // gross_profit - fixed costs
    double net_profit_kmedian = 0.0;  // sum (R(f) - phi_f), complexity-blind
    // Facilities whose penalty factor 1 - alpha*C_p(N_f) went negative;
    // the model allows it but it usually signals an out-of-range alpha.
    std::vector<NodeId> negative_penalty_facilities;
};

// Full profit evaluation of a network:
// net_profit_plex = sum_f [ R(f)*(1 - alpha_f*C_p(N_f)) - phi_f ].
inline ProfitReport z_plex(const Instance& inst, const Network& net, const CostParams& params) {
    detail::EvalScratch s;
    detail::accumulate_facility_terms(inst, params, net.facilities, net.allocation, s);
    ProfitReport report;
    for (std::size_t j = 0; j < net.facilities.size(); ++j) {
        NodeId f = net.facilities[j];
        double bits = detail::local_bits(s.demand_sum[j], s.wlog_sum[j]);
        double alpha = params.alpha_at(f);
        double phi = params.phi_at(f);
        double penalty_factor = 1.0 - alpha * bits;
        report.revenue_by_facility.emplace(f, s.revenue[j]);
        report.gross_profit += s.revenue[j] * penalty_factor;
        report.complexity_cost += alpha * bits * s.revenue[j];
        report.fixed_cost_total += phi;
        report.net_profit_plex += s.revenue[j] * penalty_factor - phi;
        report.net_profit_kmedian += s.revenue[j] - phi;
        if (penalty_factor < 0.0) report.negative_penalty_facilities.push_back(f);
    }
    return report;
}

}  // namespace locplex
