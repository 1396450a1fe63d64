#pragma once

// Network restructuring strategies over a fixed instance:
//  - rebalance:   move nodes to their second-nearest facility when that
//                 improves net profit, then recentre each facility on the
//                 1-Median of its allocation set;
//  - rationalise: abandon far demand nodes whose removal raises net profit;
//  - reduce:      close whole facilities, abandoning or reallocating their
//                 demand.
// All three accept only strict improvements and record an auditable,
// replayable move trail.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locplex/economics.hpp"
#include "locplex/solvers.hpp"
#include "locplex/types.hpp"

namespace locplex {

enum class MoveKind {
    transfer_node,       // node moved to its second-nearest facility
    recentre_facility,   // facility site replaced by its allocation 1-Median
    drop_node,           // node abandoned (coverage shrinks)
    drop_facility,       // facility closed, its nodes abandoned
    reallocate_orphans,  // facility closed, its nodes moved to nearest survivors
};

inline const char* to_string(MoveKind k) {
    switch (k) {
        case MoveKind::transfer_node: return "transfer-node";
        case MoveKind::recentre_facility: return "recentre-facility";
        case MoveKind::drop_node: return "drop-node";
        case MoveKind::drop_facility: return "drop-facility";
        case MoveKind::reallocate_orphans: return "reallocate-orphans";
    }
    return "?";
}

// One accepted step of a restructuring run. `reassignments` carries the
// exact allocation edits (target kUnassigned = abandoned) so a move log
// replays without re-deriving any decision.
struct Move {
    MoveKind kind;
    NodeId node = kUnassigned;  // moved/dropped node (node-level moves)
    NodeId from = kUnassigned;  // source facility / closed facility
    NodeId to = kUnassigned;    // target facility / new site
    std::vector<std::pair<NodeId, NodeId>> reassignments;
    double objective_before = 0.0;
    double objective_after = 0.0;
};

struct RestructureOptions {
    double min_gain = 1e-9;          // relative strict-improvement threshold
    bool full_scan = false;          // rebalance: keep scanning past a failed transfer
    bool unguarded_recentre = false; // rebalance: recentre even when net profit drops
    std::optional<int> n_tail;       // rationalise: candidates per facility
                                     // (default: 25% of the allocation set, min 1)
};

struct RestructureResult {
    Network final_network;
    std::vector<NodeId> covered_nodes;
    std::vector<Move> moves;
    double z_before = 0.0;
    double z_after = 0.0;
    double c_alpha_before = 0.0;
    double c_alpha_after = 0.0;
    std::vector<std::string> notes;

    bool fired() const { return !moves.empty(); }
};

// Closes facility f. With reallocate=false its nodes leave the covered
// set; otherwise each moves to its nearest surviving facility (d(i,f'),
// ties to the lowest index).
inline Network remove_facility(const Instance& inst, const Network& net, NodeId f,
                               bool reallocate) {
    if (!net.is_facility(f)) {
        throw ValidationError("remove_facility: " + std::to_string(f) + " is not open");
    }
    if (net.facilities.size() < 2) {
        throw ValidationError("remove_facility: cannot close the last facility");
    }
    Network out = net;
    out.facilities.erase(std::find(out.facilities.begin(), out.facilities.end(), f));
    for (NodeId i = 0; i < static_cast<NodeId>(out.allocation.size()); ++i) {
        if (net.allocation[i] != f) continue;
        if (!reallocate) {
            out.allocation[i] = kUnassigned;
        } else {
            NodeId best = out.facilities.front();
            double best_d = inst.dist(i, best);
            for (std::size_t j = 1; j < out.facilities.size(); ++j) {
                double d = inst.dist(i, out.facilities[j]);
                if (d < best_d) {
                    best_d = d;
                    best = out.facilities[j];
                }
            }
            out.allocation[i] = best;
        }
    }
    return out;
}

namespace detail {

inline bool improves(double candidate, double incumbent, double min_gain) {
    return candidate - incumbent > min_gain * std::abs(incumbent);
}

inline double plex_of(const Instance& inst, const CostParams& params, const Network& net,
                      EvalScratch& scratch) {
    return plex_objective(inst, params, net.facilities, net.allocation, scratch);
}

inline void begin_result(const Instance& inst, const Network& net, const CostParams& params,
                         RestructureResult& result, double& z, EvalScratch& scratch) {
    validate_network(inst, net).require_ok("restructure input network");
    validate_params(params, inst.size()).require_ok("restructure params");
    detail::require_depot_if_needed(inst, params);
    z = plex_of(inst, params, net, scratch);
    result.z_before = z;
    result.c_alpha_before = complexity_cost(inst, net, params);
}

inline void finish_result(const Instance& inst, const CostParams& params, Network net, double z,
                          RestructureResult& result) {
    result.final_network = std::move(net);
    result.covered_nodes = result.final_network.covered_nodes();
    result.z_after = z;
    result.c_alpha_after = complexity_cost(inst, result.final_network, params);
}

}  // namespace detail

// Rebalancing. Phase 1 walks each facility's nodes in decreasing order of
// tau(i) = (distance to second-nearest facility) * W_i, tentatively moving
// each to its second-nearest facility and stopping at the first
// non-improving candidate (full_scan keeps going instead). Phase 2
// recentres every facility on the 1-Median of its final allocation set;
// a recentre that does not improve net profit is rejected unless
// unguarded_recentre is set.
inline RestructureResult rebalance(const Instance& inst, const Network& net,
                                   const CostParams& params,
                                   const RestructureOptions& opts = {}) {
    RestructureResult result;
    detail::EvalScratch scratch;
    double z = 0.0;
    detail::begin_result(inst, net, params, result, z, scratch);

    if (net.facilities.size() < 2) {
        result.notes.push_back("rebalance skipped: fewer than two facilities, no second-nearest exists");
        detail::finish_result(inst, params, net, z, result);
        return result;
    }

    Network cur = net;

    // Candidate orderings are fixed up front from the input allocation;
    // the facility's own node never transfers (it anchors the set).
    struct Candidate {
        NodeId node;
        double tau;
    };
    std::vector<std::vector<Candidate>> ordering(cur.facilities.size());
    for (std::size_t j = 0; j < cur.facilities.size(); ++j) {
        NodeId f = cur.facilities[j];
        for (NodeId i : cur.members(f)) {
            if (i == f) continue;
            NodeId alt = second_nearest(inst, cur.facilities, i, f);
            ordering[j].push_back({i, inst.dist(i, alt) * inst.demand[i]});
        }
        std::stable_sort(ordering[j].begin(), ordering[j].end(),
                         [](const Candidate& a, const Candidate& b) {
                             if (a.tau != b.tau) return a.tau > b.tau;
                             return a.node < b.node;
                         });
    }

    for (std::size_t j = 0; j < cur.facilities.size(); ++j) {
        NodeId f = cur.facilities[j];
        for (const Candidate& c : ordering[j]) {
            NodeId target = second_nearest(inst, cur.facilities, c.node, f);
            cur.allocation[c.node] = target;
            double trial = detail::plex_of(inst, params, cur, scratch);
            if (detail::improves(trial, z, opts.min_gain)) {
                Move m{MoveKind::transfer_node, c.node, f, target, {{c.node, target}}, z, trial};
                result.moves.push_back(std::move(m));
                z = trial;
            } else {
                cur.allocation[c.node] = f;
                if (!opts.full_scan) break;
            }
        }
    }

    // Phase 2: recentre on the transport-cost 1-Median, re-scoring the full
    // objective (fixed costs and depot legs move with the site).
    std::vector<NodeId> sites = cur.facilities;
    for (NodeId f : sites) {
        std::vector<NodeId> mem = cur.members(f);
        NodeId h = one_median(inst, mem, params);
        if (h == f) continue;
        Network trial_net = cur;
        for (NodeId i : mem) trial_net.allocation[i] = h;
        trial_net.facilities.erase(
            std::find(trial_net.facilities.begin(), trial_net.facilities.end(), f));
        trial_net.facilities.insert(
            std::upper_bound(trial_net.facilities.begin(), trial_net.facilities.end(), h), h);
        double trial = detail::plex_of(inst, params, trial_net, scratch);
        if (opts.unguarded_recentre || detail::improves(trial, z, opts.min_gain)) {
            Move m{MoveKind::recentre_facility, kUnassigned, f, h, {}, z, trial};
            for (NodeId i : mem) m.reassignments.emplace_back(i, h);
            result.moves.push_back(std::move(m));
            cur = std::move(trial_net);
            z = trial;
        }
    }

    detail::finish_result(inst, params, cur, z, result);
    return result;
}

// Rationalisation. For each facility, the candidate pool is its n_tail most
// distant allocated nodes; the node whose removal raises net profit the
// most is abandoned, the incumbent updated, and the pool re-scanned until
// no removal improves or the pool is exhausted.
inline RestructureResult rationalise(const Instance& inst, const Network& net,
                                     const CostParams& params,
                                     const RestructureOptions& opts = {}) {
    if (opts.n_tail && *opts.n_tail < 1) throw ValidationError("rationalise: n_tail must be >= 1");
    RestructureResult result;
    detail::EvalScratch scratch;
    double z = 0.0;
    detail::begin_result(inst, net, params, result, z, scratch);

    Network cur = net;
    for (NodeId f : net.facilities) {
        std::vector<NodeId> mem = cur.members(f);
        std::vector<NodeId> candidates;
        for (NodeId i : mem) {
            if (i != f) candidates.push_back(i);  // the facility's own node stays
        }
        std::stable_sort(candidates.begin(), candidates.end(), [&](NodeId a, NodeId b) {
            double da = inst.dist(a, f), db = inst.dist(b, f);
            if (da != db) return da > db;
            return a < b;
        });
        std::size_t pool = opts.n_tail
                               ? static_cast<std::size_t>(*opts.n_tail)
                               : static_cast<std::size_t>(
                                     std::max<double>(1.0, std::ceil(0.25 * mem.size())));
        candidates.resize(std::min(pool, candidates.size()));

        while (!candidates.empty()) {
            double best_z = -std::numeric_limits<double>::infinity();
            std::size_t best_idx = 0;
            for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
                NodeId i = candidates[idx];
                cur.allocation[i] = kUnassigned;
                double trial = detail::plex_of(inst, params, cur, scratch);
                cur.allocation[i] = f;
                if (trial > best_z) {
                    best_z = trial;
                    best_idx = idx;
                }
            }
            if (!detail::improves(best_z, z, opts.min_gain)) break;
            NodeId removed = candidates[best_idx];
            cur.allocation[removed] = kUnassigned;
            Move m{MoveKind::drop_node, removed, f, kUnassigned, {{removed, kUnassigned}}, z, best_z};
            result.moves.push_back(std::move(m));
            z = best_z;
            candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(best_idx));
        }
    }

    detail::finish_result(inst, params, cur, z, result);
    return result;
}

// Reduction. Repeatedly closes the facility whose removal improves net
// profit the most. With reallocate=false the closed facility's demand is
// abandoned; with reallocate=true it moves to the nearest survivors.
inline RestructureResult reduce(const Instance& inst, const Network& net, const CostParams& params,
                                bool reallocate, const RestructureOptions& opts = {}) {
    RestructureResult result;
    detail::EvalScratch scratch;
    double z = 0.0;
    detail::begin_result(inst, net, params, result, z, scratch);
    if (net.facilities.size() < 2) {
        throw ValidationError("reduce: needs at least two open facilities");
    }

    Network cur = net;
    while (cur.facilities.size() >= 2) {
        double best_z = -std::numeric_limits<double>::infinity();
        NodeId best_f = kUnassigned;
        Network best_net;
        for (NodeId f : cur.facilities) {
            Network trial_net = remove_facility(inst, cur, f, reallocate);
            double trial = detail::plex_of(inst, params, trial_net, scratch);
            if (trial > best_z) {
                best_z = trial;
                best_f = f;
                best_net = std::move(trial_net);
            }
        }
        if (!detail::improves(best_z, z, opts.min_gain)) break;
        Move m{reallocate ? MoveKind::reallocate_orphans : MoveKind::drop_facility,
               kUnassigned,
               best_f,
               kUnassigned,
               {},
               z,
               best_z};
        for (NodeId i : cur.members(best_f)) m.reassignments.emplace_back(i, best_net.allocation[i]);
        result.moves.push_back(std::move(m));
        cur = std::move(best_net);
        z = best_z;
    }

    detail::finish_result(inst, params, cur, z, result);
    return result;
}

// Applies a recorded move sequence to `start`; the result must reproduce
// the run's final network exactly.
inline Network replay_moves(const Network& start, std::span<const Move> moves) {
    Network net = start;
    for (const Move& m : moves) {
        switch (m.kind) {
            case MoveKind::transfer_node:
            case MoveKind::drop_node:
                for (const auto& [i, target] : m.reassignments) net.allocation[i] = target;
                break;
            case MoveKind::recentre_facility:
                net.facilities.erase(std::find(net.facilities.begin(), net.facilities.end(), m.from));
                net.facilities.insert(
                    std::upper_bound(net.facilities.begin(), net.facilities.end(), m.to), m.to);
                for (const auto& [i, target] : m.reassignments) net.allocation[i] = target;
                break;
            case MoveKind::drop_facility:
            case MoveKind::reallocate_orphans:
                net.facilities.erase(std::find(net.facilities.begin(), net.facilities.end(), m.from));
                for (const auto& [i, target] : m.reassignments) net.allocation[i] = target;
                break;
        }
    }
    return net;
}

}  // namespace locplex
