#pragma once

// Experiment harness: synthetic instance generation, parameter-grid runs
// over (alpha, gamma, rho, phi, K) cells with per-cell restructuring
// summaries, profit-vs-K curve tables, and the qualitative pattern checks
// reported with every grid run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "locplex/complexity.hpp"
#include "locplex/economics.hpp"
#include "locplex/restructuring.hpp"
#include "locplex/solvers.hpp"
#include "locplex/types.hpp"

namespace locplex {

// Grid transport costs are quoted in cents/(km*ton); model parameters are
// currency/(km*ton).
inline constexpr double kCentsPerCurrencyUnit = 100.0;

// Synthetic instance: n sites uniform in a 1000 x 735 km box, Euclidean
// distances scaled by a 1.3 road-circuity factor, populations log-uniform
// in [5e4, 3e6], demands W_i = 500*ln(population). The depot is the
// highest-demand node. Deterministic per seed.
inline Instance synth_instance(int n, std::uint64_t seed, double circuity = 1.3) {
    if (n < 2) throw ValidationError("synth_instance: n must be >= 2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, 1000.0);
    std::uniform_real_distribution<double> uy(0.0, 735.0);
    std::uniform_real_distribution<double> ulogpop(std::log(5.0e4), std::log(3.0e6));

    std::vector<double> x(n), y(n);
    Instance inst;
    inst.demand.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i] = ux(rng);
        y[i] = uy(rng);
        double population = std::exp(ulogpop(rng));
        inst.demand[i] = 500.0 * std::log(population);
    }
    inst.dist = Matrix(n, n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double d = circuity * std::hypot(x[i] - x[j], y[i] - y[j]);
            inst.dist(i, j) = d;
            inst.dist(j, i) = d;
        }
    }
    int depot = 0;
    for (int i = 1; i < n; ++i) {
        if (inst.demand[i] > inst.demand[depot]) depot = i;
    }
    inst.depot = depot;
    return inst;
}

enum class Strategy { rebalance, rationalise, reduce_abandon, reduce_reallocate };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::rebalance: return "rebalance";
        case Strategy::rationalise: return "rationalise";
        case Strategy::reduce_abandon: return "reduce-abandon";
        case Strategy::reduce_reallocate: return "reduce-reallocate";
    }
    return "?";
}

// Experimental design of one campaign: alpha in {0.025..0.15}, gamma and
// rho in cents/(km*ton) with rho < gamma enforced per cell, phi in
// {50k, 70k, 80k}, K in 2..9.
struct GridSpec {
    std::vector<double> alphas{0.025, 0.05, 0.075, 0.1, 0.125, 0.15};
    std::vector<double> gammas{8.3, 16.6, 33.3, 66.6, 100.0, 200.0, 400.0};
    std::vector<double> rhos{0.0, 8.3, 16.6, 33.3, 66.6, 100.0, 200.0};
    std::vector<double> phis{50000.0, 70000.0, 80000.0};
    int k_min = 2;
    int k_max = 9;
    std::vector<Strategy> strategies{Strategy::rebalance, Strategy::rationalise,
                                     Strategy::reduce_abandon, Strategy::reduce_reallocate};
    // r, currency/ton. Calibrated so that margins stay positive across the
    // default gamma range on synthetic geometry: profits and facility
    // revenues then stay positive in every grid cell, which keeps the
    // relative-improvement ratios well-behaved.
    double unit_revenue = 4000.0;
    std::uint64_t seed = 0;
    SolverOptions solver{};
    RestructureOptions restructure{};
};

struct StrategySummary {
    Strategy strategy;
    bool fired = false;
    double z_before = 0.0;
    double z_after = 0.0;
    double dz_pct = 0.0;  // (z_after - z_before) / |z_before|
    double c_alpha_before = 0.0;
    double c_alpha_after = 0.0;
    double dc_pct = 0.0;  // (c_after - c_before) / |c_before|
    int moves = 0;
    int final_k = 0;
    int covered = 0;
    double total_cp_before = 0.0;
    double total_cp_after = 0.0;
};

// One experiment cell: the K-Median solution evaluated under a complexity
// parameterisation, plus the outcome of every requested strategy.
struct RunRecord {
    double alpha = 0.0;
    double gamma_cents = 0.0;
    double rho_cents = 0.0;
    double phi = 0.0;
    int k = 0;
    std::string solver_mode;
    long long solver_iterations = 0;
    double z_kmedian = 0.0;    // forecast profit Z^K
    double revenue = 0.0;      // sum_f R(f)
    double z_plex = 0.0;       // observed profit of the K-Median network
    double c_alpha = 0.0;      // complexity cost of the K-Median network
    double total_cp = 0.0;     // system complexity in bits
    bool is_k_star = false;    // argmax_K of Z^K within its (gamma,rho,phi) family
    bool is_k_circ = false;    // argmax_K of the observed profit within (gamma,rho,phi,alpha)
    std::vector<StrategySummary> strategies;
};

namespace detail {

inline double relative_delta(double after, double before) {
    double scale = std::abs(before);
    if (scale < 1e-12) scale = 1e-12;
    return (after - before) / scale;
}

inline StrategySummary summarize(Strategy strat, const Instance& inst, const CostParams& params,
                                 const RestructureResult& res) {
    StrategySummary s;
    s.strategy = strat;
    s.fired = res.fired();
    s.z_before = res.z_before;
    s.z_after = res.z_after;
    s.dz_pct = relative_delta(res.z_after, res.z_before);
    s.c_alpha_before = res.c_alpha_before;
    s.c_alpha_after = res.c_alpha_after;
    s.dc_pct = relative_delta(res.c_alpha_after, res.c_alpha_before);
    s.moves = static_cast<int>(res.moves.size());
    s.final_k = res.final_network.k();
    s.covered = static_cast<int>(res.covered_nodes.size());
    return s;
}

}  // namespace detail

// Full per-cell evidence for audits: the solved network plus every
// strategy's complete result (move trails included).
struct CellDetail {
    const RunRecord* record;
    const Network* solution;
    const std::vector<std::pair<Strategy, RestructureResult>>* strategy_runs;
};

// Runs every admissible grid cell in canonical order (gamma, rho, phi,
// alpha, K ascending) and streams one RunRecord per cell to `sink`.
// Inadmissible cells (rho >= gamma) are reported through `on_skip`.
// Deterministic: identical spec and instance give an identical stream.
inline void run_grid(const Instance& inst, const GridSpec& spec,
                     const std::function<void(const RunRecord&)>& sink,
                     const std::function<void(const std::string&)>& on_skip = {},
                     const std::function<void(const CellDetail&)>& on_detail = {}) {
    validate_instance(inst).require_ok("grid instance");
    auto sorted_unique = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const std::vector<double> alphas = sorted_unique(spec.alphas);
    const std::vector<double> gammas = sorted_unique(spec.gammas);
    const std::vector<double> rhos = sorted_unique(spec.rhos);
    const std::vector<double> phis = sorted_unique(spec.phis);

    for (double gamma : gammas) {
        for (double rho : rhos) {
            if (rho > 0.0 && rho >= gamma) {
                if (on_skip) {
                    std::ostringstream os;
                    os << "skipped cells gamma=" << gamma << " rho=" << rho
                       << ": rho must be < gamma";
                    on_skip(os.str());
                }
                continue;
            }
            for (double phi : phis) {
                // One K-Median solve per (gamma, rho, phi, K); alpha only
                // affects evaluation and restructuring.
                std::vector<RunRecord> family;
                for (int k = spec.k_min; k <= spec.k_max; ++k) {
                    CostParams base;
                    base.r = spec.unit_revenue;
                    base.gamma = gamma / kCentsPerCurrencyUnit;
                    base.rho = rho / kCentsPerCurrencyUnit;
                    base.phi = PerNodeValue(phi);
                    base.alpha = PerNodeValue(0.0);
                    SolveResult sol = solve_kmedian(inst, base, k, spec.solver);

                    for (double alpha : alphas) {
                        CostParams params = base;
                        params.alpha = PerNodeValue(alpha);
                        ProfitReport pr = z_plex(inst, sol.network, params);
                        std::vector<std::pair<Strategy, RestructureResult>> runs;

                        RunRecord rec;
                        rec.alpha = alpha;
                        rec.gamma_cents = gamma;
                        rec.rho_cents = rho;
                        rec.phi = phi;
                        rec.k = k;
                        rec.solver_mode = to_string(sol.mode);
                        rec.solver_iterations = sol.iterations;
                        rec.z_kmedian = sol.objective;
                        rec.revenue = 0.0;
                        for (const auto& [f, r] : pr.revenue_by_facility) rec.revenue += r;
                        rec.z_plex = pr.net_profit_plex;
                        rec.c_alpha = pr.complexity_cost;
                        rec.total_cp = decompose(inst, sol.network).total;

                        for (Strategy strat : spec.strategies) {
                            RestructureResult res;
                            switch (strat) {
                                case Strategy::rebalance:
                                    res = rebalance(inst, sol.network, params, spec.restructure);
                                    break;
                                case Strategy::rationalise:
                                    res = rationalise(inst, sol.network, params, spec.restructure);
                                    break;
                                case Strategy::reduce_abandon:
                                    res = reduce(inst, sol.network, params, false, spec.restructure);
                                    break;
                                case Strategy::reduce_reallocate:
                                    res = reduce(inst, sol.network, params, true, spec.restructure);
                                    break;
                            }
                            StrategySummary sum = detail::summarize(strat, inst, params, res);
                            sum.total_cp_before = rec.total_cp;
                            sum.total_cp_after = decompose(inst, res.final_network).total;
                            rec.strategies.push_back(std::move(sum));
                            if (on_detail) runs.emplace_back(strat, std::move(res));
                        }
                        if (on_detail) {
                            on_detail(CellDetail{&rec, &sol.network, &runs});
                        }
                        family.push_back(std::move(rec));
                    }
                }
                // K* / K-circle markers within the (gamma, rho, phi) family;
                // ties are all marked.
                double best_zk = -std::numeric_limits<double>::infinity();
                for (const RunRecord& r : family) best_zk = std::max(best_zk, r.z_kmedian);
                std::map<double, double> best_zplex_by_alpha;
                for (const RunRecord& r : family) {
                    auto [it, inserted] = best_zplex_by_alpha.emplace(r.alpha, r.z_plex);
                    if (!inserted) it->second = std::max(it->second, r.z_plex);
                }
                auto tied = [](double v, double best) {
                    return std::abs(v - best) <= 1e-12 * std::max(1.0, std::abs(best));
                };
                for (RunRecord& r : family) {
                    r.is_k_star = tied(r.z_kmedian, best_zk);
                    r.is_k_circ = tied(r.z_plex, best_zplex_by_alpha.at(r.alpha));
                }
                std::stable_sort(family.begin(), family.end(),
                                 [](const RunRecord& a, const RunRecord& b) {
                                     if (a.alpha != b.alpha) return a.alpha < b.alpha;
                                     return a.k < b.k;
                                 });
                for (const RunRecord& r : family) sink(r);
            }
        }
    }
}

// Profit-vs-K decomposition. Per K: revenue and forecast profit Z^K at the
// K-Median solution, the observed profit of that solution, the
// complexity-aware optimum Z^K_Plex (exact when the enumeration fits the
// budget, otherwise local search, labeled), and the two cost components:
// intrinsic = Z^K - Z^K_Plex, avoidable = Z^K_Plex - observed.
struct CurveRow {
    int k = 0;
    double revenue = 0.0;
    double z_kmedian = 0.0;
    double z_kmedianplex = 0.0;
    double z_plex_observed = 0.0;
    double intrinsic_cost = 0.0;
    double avoidable_cost = 0.0;
    double total_complexity_cost = 0.0;
    std::string kmedian_mode;
    std::string kmedianplex_mode;
};

inline std::vector<CurveRow> profit_curves(const Instance& inst, const CostParams& params,
                                           int k_min, int k_max, SolverOptions opts = {}) {
    validate_instance(inst).require_ok("profit_curves instance");
    if (k_min < 1 || k_max > inst.size() || k_min > k_max) {
        throw ValidationError("profit_curves: K range out of bounds");
    }
    std::vector<CurveRow> rows;
    for (int k = k_min; k <= k_max; ++k) {
        SolverOptions cell = opts;
        cell.mode = detail::choose_capped(inst.size(), k, opts.enumeration_budget) <=
                            opts.enumeration_budget
                        ? SolveMode::exact
                        : SolveMode::local_search;
        CostParams blind = params;
        blind.alpha = PerNodeValue(0.0);
        SolveResult med = solve_kmedian(inst, blind, k, cell);
        SolveResult plex = solve_kmedianplex(inst, params, k, cell);
        ProfitReport observed = z_plex(inst, med.network, params);

        CurveRow row;
        row.k = k;
        for (const auto& [f, r] : observed.revenue_by_facility) row.revenue += r;
        row.z_kmedian = med.objective;
        row.z_kmedianplex = plex.objective;
        row.z_plex_observed = observed.net_profit_plex;
        row.intrinsic_cost = row.z_kmedian - row.z_kmedianplex;
        row.avoidable_cost = row.z_kmedianplex - row.z_plex_observed;
        row.total_complexity_cost = row.z_kmedian - row.z_plex_observed;
        row.kmedian_mode = to_string(med.mode);
        row.kmedianplex_mode = to_string(plex.mode);
        rows.push_back(std::move(row));
    }
    return rows;
}

// Qualitative pattern checks over a finished grid, reported with every
// campaign:
//  (a) rebalancing never raises the complexity cost;
//  (b) mean rebalancing improvement is non-decreasing in alpha over
//      {0.075, 0.1, 0.125} and larger at K=9 than at K=5, measured over
//      the no-distribution-cost cells (rho = 0) at those alphas;
//  (c) rationalisation improves in fewer than 25% of cells;
//  (d) reduction lowers complexity cost when demand is abandoned and
//      raises it when demand is reallocated, wherever it fires.
struct PatternSummary {
    bool rebalance_dc_nonpositive = true;
    int rebalance_dc_violations = 0;
    bool rebalance_monotone_alpha = true;
    bool rebalance_k9_gt_k5 = true;
    std::map<double, double> mean_rebalance_dz_by_alpha;
    double mean_rebalance_dz_k5 = 0.0;
    double mean_rebalance_dz_k9 = 0.0;
    double rationalise_improvement_rate = 0.0;
    bool rationalise_rate_below_25pct = true;
    int reduce_abandon_dc_violations = 0;
    int reduce_reallocate_dc_violations = 0;
    bool reduce_abandon_dc_nonpositive = true;
    bool reduce_reallocate_dc_nonnegative = true;

    bool all_pass() const {
        return rebalance_dc_nonpositive && rebalance_monotone_alpha && rebalance_k9_gt_k5 &&
               rationalise_rate_below_25pct && reduce_abandon_dc_nonpositive &&
               reduce_reallocate_dc_nonnegative;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << "pattern (a) rebalance dC_alpha <= 0 in all cells: "
           << (rebalance_dc_nonpositive ? "pass" : "FAIL") << " (" << rebalance_dc_violations
           << " violations)\n";
        os << "pattern (b) mean rebalance dZ% non-decreasing in alpha {0.075,0.1,0.125}: "
           << (rebalance_monotone_alpha ? "pass" : "FAIL") << " [";
        for (const auto& [a, v] : mean_rebalance_dz_by_alpha) os << " " << a << ":" << v;
        os << " ]; K9 > K5: " << (rebalance_k9_gt_k5 ? "pass" : "FAIL") << " ("
           << mean_rebalance_dz_k9 << " vs " << mean_rebalance_dz_k5 << ")\n";
        os << "pattern (c) rationalisation improves in < 25% of cells: "
           << (rationalise_rate_below_25pct ? "pass" : "FAIL") << " (rate "
           << rationalise_improvement_rate * 100.0 << "%)\n";
        os << "pattern (d) reduce/abandon dC_alpha <= 0 where fired: "
           << (reduce_abandon_dc_nonpositive ? "pass" : "FAIL") << " ("
           << reduce_abandon_dc_violations << " violations); reduce/reallocate dC_alpha >= 0: "
           << (reduce_reallocate_dc_nonnegative ? "pass" : "FAIL") << " ("
           << reduce_reallocate_dc_violations << " violations)\n";
        return os.str();
    }
};

inline PatternSummary check_patterns(std::span<const RunRecord> records) {
    PatternSummary out;
    std::map<double, std::pair<double, long>> dz_by_alpha;
    std::pair<double, long> dz_k5{0.0, 0}, dz_k9{0.0, 0};
    long rationalise_cells = 0, rationalise_fired = 0;
    for (const RunRecord& rec : records) {
        for (const StrategySummary& s : rec.strategies) {
            switch (s.strategy) {
                case Strategy::rebalance: {
                    if (s.dc_pct > 0.0) {
                        out.rebalance_dc_nonpositive = false;
                        ++out.rebalance_dc_violations;
                    }
                    // pattern (b) scope: no distribution costs,
                    // alpha in {0.075, 0.1, 0.125}
                    bool ladder = rec.alpha == 0.075 || rec.alpha == 0.1 || rec.alpha == 0.125;
                    if (rec.rho_cents == 0.0 && ladder) {
                        auto& acc = dz_by_alpha[rec.alpha];
                        acc.first += s.dz_pct;
                        acc.second += 1;
                        if (rec.k == 5) {
                            dz_k5.first += s.dz_pct;
                            dz_k5.second += 1;
                        }
                        if (rec.k == 9) {
                            dz_k9.first += s.dz_pct;
                            dz_k9.second += 1;
                        }
                    }
                    break;
                }
                case Strategy::rationalise:
                    ++rationalise_cells;
                    if (s.fired) ++rationalise_fired;
                    break;
                case Strategy::reduce_abandon:
                    if (s.fired && s.dc_pct > 0.0) {
                        out.reduce_abandon_dc_nonpositive = false;
                        ++out.reduce_abandon_dc_violations;
                    }
                    break;
                case Strategy::reduce_reallocate:
                    if (s.fired && s.dc_pct < 0.0) {
                        out.reduce_reallocate_dc_nonnegative = false;
                        ++out.reduce_reallocate_dc_violations;
                    }
                    break;
            }
        }
    }
    const std::vector<double> ladder{0.075, 0.1, 0.125};
    double prev = -std::numeric_limits<double>::infinity();
    for (double a : ladder) {
        auto it = dz_by_alpha.find(a);
        if (it == dz_by_alpha.end() || it->second.second == 0) continue;
        double mean = it->second.first / it->second.second;
        out.mean_rebalance_dz_by_alpha[a] = mean;
        if (mean < prev) out.rebalance_monotone_alpha = false;
        prev = mean;
    }
    if (dz_k5.second > 0 && dz_k9.second > 0) {
        out.mean_rebalance_dz_k5 = dz_k5.first / dz_k5.second;
        out.mean_rebalance_dz_k9 = dz_k9.first / dz_k9.second;
        out.rebalance_k9_gt_k5 = out.mean_rebalance_dz_k9 > out.mean_rebalance_dz_k5;
    }
    if (rationalise_cells > 0) {
        out.rationalise_improvement_rate =
            static_cast<double>(rationalise_fired) / static_cast<double>(rationalise_cells);
        out.rationalise_rate_below_25pct = out.rationalise_improvement_rate < 0.25;
    }
    return out;
}

}  // namespace locplex
