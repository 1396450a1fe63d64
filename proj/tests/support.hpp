#pragma once

// Shared test fixtures: the 14-node golden instance, seeded random
// instance/partition generators, and independent brute-force oracles kept
// deliberately separate from the library's own evaluation paths.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "locplex/types.hpp"

namespace testsupport {

using locplex::Instance;
using locplex::Matrix;
using locplex::Network;
using locplex::NodeId;

// The worked 14-node example: facilities A=0, B=5, C=11 serve {0..4},
// {5..10}, {11..13}; distances realize that nearest-server partition and
// send node 11 to B and nodes 12, 13 to A once C closes.
inline Instance table2_instance() {
    const std::vector<std::pair<double, double>> xy = {
        {0, 0},    {10, 5},   {-10, 5},  {5, -10},  {-5, -12},
        {100, 0},  {110, 5},  {90, 5},   {105, -10}, {95, -10}, {108, 8},
        {100, 200}, {40, 180}, {30, 170},
    };
    Instance inst;
    inst.demand = {20, 30, 70, 40, 40, 90, 110, 55, 30, 130, 85, 75, 111, 114};
    const int n = static_cast<int>(xy.size());
    inst.dist = Matrix(n, n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            inst.dist(i, j) = std::hypot(xy[i].first - xy[j].first, xy[i].second - xy[j].second);
        }
    }
    return inst;
}

inline Network table2_network() {
    Network net;
    net.facilities = {0, 5, 11};
    net.allocation = {0, 0, 0, 0, 0, 5, 5, 5, 5, 5, 5, 11, 11, 11};
    return net;
}

// Random symmetric instance with positive demands.
inline Instance random_instance(std::mt19937_64& rng, int n, double max_coord = 1000.0,
                                double min_demand = 1.0, double max_demand = 150.0) {
    std::uniform_real_distribution<double> uc(0.0, max_coord);
    std::uniform_real_distribution<double> uw(min_demand, max_demand);
    std::vector<double> x(n), y(n);
    Instance inst;
    inst.demand.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i] = uc(rng);
        y[i] = uc(rng);
        inst.demand[i] = uw(rng);
    }
    inst.dist = Matrix(n, n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double d = std::hypot(x[i] - x[j], y[i] - y[j]);
            inst.dist(i, j) = d;
            inst.dist(j, i) = d;
        }
    }
    inst.depot = 0;
    return inst;
}

// Random full-coverage partition into k facility groups; each facility is
// a member of its own group.
inline Network random_partition(std::mt19937_64& rng, const Instance& inst, int k) {
    const int n = inst.size();
    std::vector<NodeId> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), rng);
    Network net;
    net.facilities.assign(ids.begin(), ids.begin() + k);
    std::sort(net.facilities.begin(), net.facilities.end());
    net.allocation.assign(n, locplex::kUnassigned);
    std::uniform_int_distribution<int> pick(0, k - 1);
    for (int i = 0; i < n; ++i) net.allocation[i] = net.facilities[pick(rng)];
    for (NodeId f : net.facilities) net.allocation[f] = f;
    return net;
}

// ---------------------------------------------------------------------------
// Independent oracles (straight-line textbook formulas; no reuse of the
// library's accumulation tricks).

inline double oracle_entropy(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return 0.0;
    double bits = 0.0;
    for (double w : weights) {
        if (w > 0.0) {
            double p = w / total;
            bits += p * std::log2(1.0 / p);
        }
    }
    return bits;
}

// Net profit of a facility set under the solver's allocation contract,
// recomputed from scratch: each node goes to the facility with the
// cheapest delivered cost rho*d(c,f) + gamma*d(f,i) (lowest-index ties,
// facilities self-served), revenue (r - rho*d(c,f) - gamma*d(f,i)) * W_i,
// entropy over member demands.
inline double oracle_plex_value(const Instance& inst, const locplex::CostParams& params,
                                const std::vector<NodeId>& facilities) {
    const int n = inst.size();
    std::vector<NodeId> alloc(n, -1);
    for (NodeId f : facilities) alloc[f] = f;
    for (int i = 0; i < n; ++i) {
        if (alloc[i] == i) continue;
        NodeId best = -1;
        double best_c = std::numeric_limits<double>::infinity();
        for (NodeId f : facilities) {
            double leg = params.rho > 0.0 ? params.rho * inst.dist(*inst.depot, f) : 0.0;
            double c = leg + params.gamma * inst.dist(f, i);
            if (c < best_c) {
                best_c = c;
                best = f;
            }
        }
        alloc[i] = best;
    }
    double z = 0.0;
    for (NodeId f : facilities) {
        std::vector<double> member_demand;
        double revenue = 0.0;
        double depot_leg = params.rho > 0.0 ? params.rho * inst.dist(*inst.depot, f) : 0.0;
        for (int i = 0; i < n; ++i) {
            if (alloc[i] != f) continue;
            member_demand.push_back(inst.demand[i]);
            revenue += (params.r - depot_leg - params.gamma * inst.dist(f, i)) * inst.demand[i];
        }
        double bits = oracle_entropy(member_demand);
        z += revenue * (1.0 - params.alpha_at(f) * bits) - params.phi_at(f);
    }
    return z;
}

inline double oracle_kmedian_value(const Instance& inst, const locplex::CostParams& params,
                                   const std::vector<NodeId>& facilities) {
    locplex::CostParams blind = params;
    blind.alpha = locplex::PerNodeValue(0.0);
    return oracle_plex_value(inst, blind, facilities);
}

// Exhaustive best K-subset under the given scorer.
template <typename Scorer>
double oracle_best_subset(const Instance& inst, int k, Scorer&& scorer) {
    const int n = inst.size();
    std::vector<NodeId> combo(k);
    for (int i = 0; i < k; ++i) combo[i] = i;
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
        best = std::max(best, scorer(combo));
        int pos = k - 1;
        while (pos >= 0 && combo[pos] == n - k + pos) --pos;
        if (pos < 0) break;
        ++combo[pos];
        for (int j = pos + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
    }
    return best;
}

}  // namespace testsupport
