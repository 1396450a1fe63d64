#pragma once

// The pars-complexity measure: Shannon entropy (base 2) of a revenue-share
// vector, plus its two-level decomposition into a central coordination term
// and demand-weighted local terms.

#include <cmath>
#include <map>
#include <span>

#include "locplex/types.hpp"

namespace locplex {

namespace detail {

// Entropy in bits of the normalized weights w/sum(w), with the continuity
// convention 0*log2(1/0) = 0. Returns 0 when the total weight is zero.
// Uses sum w_i/T * log2(T/w_i) = log2(T) - (1/T) * sum w_i*log2(w_i).
inline double entropy_bits(std::span<const double> weights) {
    double total = 0.0;
    double wlog = 0.0;
    for (double w : weights) {
        if (w > 0.0) {
            total += w;
            wlog += w * std::log2(w);
        }
    }
    if (total <= 0.0) return 0.0;
    double bits = std::log2(total) - wlog / total;
    return bits < 0.0 ? 0.0 : bits;  // clamp -0.0 / rounding residue on degenerate vectors
}

}  // namespace detail

// System pars-complexity C_p(p) = sum_i p_i * log2(1/p_i), in bits.
// Lies in [0, log2(|p|)]; zero iff some p_i = 1.
inline double pars_complexity(const WeightVector& p) {
    return detail::entropy_bits(std::span<const double>(p.values()));
}

struct FacilityComplexity {
    double share = 0.0;  // q_f: fraction of covered demand served by f
    double bits = 0.0;   // local complexity of the single-facility system
};

// Two-level view of system complexity: total = central + sum_f share*bits.
struct ComplexityBreakdown {
    double total = 0.0;    // bits, over the covered demand shares
    double central = 0.0;  // sum_f q_f * log2(1/q_f)
    std::map<NodeId, FacilityComplexity> per_facility;

    double weighted_local() const {
        double sum = 0.0;
        for (const auto& [f, fc] : per_facility) sum += fc.share * fc.bits;
        return sum;
    }
};

// Computes the decomposition over the network's covered nodes. Facilities
// with zero covered demand get share 0 and local bits 0 by convention.
inline ComplexityBreakdown decompose(const Instance& inst, const Network& net) {
    const int n = inst.size();
    if (static_cast<int>(net.allocation.size()) != n) {
        throw ValidationError("decompose: allocation size does not match instance");
    }
    double covered_total = net.covered_demand(inst);
    if (covered_total <= 0.0) throw ValidationError("decompose: covered demand is zero");

    ComplexityBreakdown out;
    std::vector<double> global_shares;
    global_shares.reserve(net.allocation.size());
    for (NodeId i = 0; i < n; ++i) {
        if (net.covers(i)) global_shares.push_back(inst.demand[i] / covered_total);
    }
    out.total = detail::entropy_bits(global_shares);

    for (NodeId f : net.facilities) {
        std::vector<double> local;
        double local_total = 0.0;
        for (NodeId i = 0; i < n; ++i) {
            if (net.allocation[i] == f) {
                local.push_back(inst.demand[i]);
                local_total += inst.demand[i];
            }
        }
        FacilityComplexity fc;
        fc.share = local_total / covered_total;
        fc.bits = detail::entropy_bits(local);
        out.per_facility.emplace(f, fc);
        if (fc.share > 0.0) out.central += fc.share * std::log2(1.0 / fc.share);
    }
    return out;
}

// With the covered demand fixed, total pars-complexity depends only on the
// global share vector, so any two full partitions of the same node set must
// agree. Returns true iff the totals match within 1e-9.
inline bool closed_system_invariance_check(const Instance& inst, const Network& a,
                                           const Network& b) {
    if (a.covered_nodes() != b.covered_nodes()) {
        throw ValidationError("closed_system_invariance_check: networks cover different node sets");
    }
    return std::abs(decompose(inst, a).total - decompose(inst, b).total) <= 1e-9;
}

}  // namespace locplex
