// Command-line front end: evaluate a network, solve the facility-choice
// problems, run a restructuring strategy, sweep a parameter grid, or
// generate a synthetic instance. Exit codes: 0 ok, 2 validation error,
// 3 enumeration budget exceeded, 4 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "locplex/locplex.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("LOCPLEX_OUT_DIR");
    return env && *env ? env : ".";
}

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << "\n";
    } else {
        locplex::atomic_write(out_path, content);
    }
}

std::vector<locplex::NodeId> parse_id_list(const std::string& s) {
    std::vector<locplex::NodeId> ids;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        ids.push_back(std::stoi(tok));
    }
    if (ids.empty()) throw locplex::ValidationError("empty facility list");
    return ids;
}

std::string params_hash(const locplex::CostParams& p, std::uint64_t seed) {
    json j{{"r", p.r}, {"gamma", p.gamma}, {"rho", p.rho}, {"seed", seed}};
    if (p.phi.is_uniform()) j["phi"] = p.phi.uniform_value();
    else j["phi"] = p.phi.per_node_values();
    if (p.alpha.is_uniform()) j["alpha"] = p.alpha.uniform_value();
    else j["alpha"] = p.alpha.per_node_values();
    return locplex::hash_hex(locplex::fnv1a_hash(j.dump()));
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const std::string& nodes, const std::string& distances,
                 const std::string& facilities, locplex::CostParams params, int depot,
                 const std::string& out, const std::string& format) {
    std::optional<locplex::NodeId> depot_opt;
    if (depot >= 0) depot_opt = depot;
    locplex::Instance inst = locplex::load_instance(nodes, distances, depot_opt);
    locplex::validate_params(params, inst.size()).require_ok("params");

    std::vector<locplex::NodeId> fac = parse_id_list(facilities);
    locplex::Network net = locplex::allocate_nearest(inst, fac);
    locplex::ProfitReport profit = locplex::z_plex(inst, net, params);
    locplex::ComplexityBreakdown cb = locplex::decompose(inst, net);

    std::string hash = params_hash(params, 0);
    if (format == "csv") {
        std::ostringstream os;
        os << "# config_hash=" << hash << " seed=0\n";
        os << "metric,value\n";
        os << "total_cp," << cb.total << "\n";
        os << "central_cp," << cb.central << "\n";
        os << "weighted_local_cp," << cb.weighted_local() << "\n";
        os << "gross_profit," << profit.gross_profit << "\n";
        os << "complexity_cost," << profit.complexity_cost << "\n";
        os << "fixed_cost_total," << profit.fixed_cost_total << "\n";
        os << "net_profit_plex," << profit.net_profit_plex << "\n";
        os << "net_profit_kmedian," << profit.net_profit_kmedian << "\n";
        for (const auto& [f, fc] : cb.per_facility) {
            os << "facility_" << f << "_share," << fc.share << "\n";
            os << "facility_" << f << "_bits," << fc.bits << "\n";
            os << "facility_" << f << "_revenue," << profit.revenue_by_facility.at(f) << "\n";
        }
        emit(os.str(), out);
    } else {
        json doc{{"config_hash", hash},
                 {"seed", 0},
                 {"facilities", net.facilities},
                 {"profit", locplex::to_json(profit)},
                 {"complexity", locplex::to_json(cb)}};
        emit(doc.dump(2), out);
    }
    if (!profit.negative_penalty_facilities.empty()) {
        std::cerr << "warning: penalty factor 1 - alpha*C_p went negative at "
                  << profit.negative_penalty_facilities.size() << " facilities\n";
    }
    return 0;
}

int cmd_solve(const locplex::RunConfig& cfg, const std::string& problem, const fs::path& out_dir) {
    locplex::Instance inst = locplex::instance_from_config(cfg);
    locplex::SolveResult result = problem == "kmedian"
                                      ? locplex::solve_kmedian(inst, cfg.params, cfg.k, cfg.solver)
                                      : locplex::solve_kmedianplex(inst, cfg.params, cfg.k, cfg.solver);

    std::string provenance = "config_hash=" + cfg.config_hash() + " seed=" + std::to_string(cfg.seed);
    fs::create_directories(out_dir);
    locplex::write_network_csv(out_dir / "network.csv", result.network, provenance);

    json summary{{"config_hash", cfg.config_hash()},
                 {"seed", cfg.seed},
                 {"problem", problem},
                 {"k", cfg.k},
                 {"mode", locplex::to_string(result.mode)},
                 {"iterations", result.iterations},
                 {"objective", result.objective},
                 {"facilities", result.network.facilities}};
    if (result.rebalance_improved) {
        summary["rebalance_improved"] = {{"objective", result.rebalance_improved->objective},
                                         {"transfers", result.rebalance_improved->transfers}};
        locplex::write_network_csv(out_dir / "network_rebalance_improved.csv",
                                   result.rebalance_improved->network, provenance);
    }
    locplex::atomic_write(out_dir / "solution.json", summary.dump(2) + "\n");
    std::cout << "objective " << result.objective << " (" << locplex::to_string(result.mode)
              << ", " << result.iterations << " iterations)\n";
    return 0;
}

int cmd_restructure(const locplex::RunConfig& cfg, const std::string& strategy,
                    const fs::path& out_dir) {
    locplex::Instance inst = locplex::instance_from_config(cfg);
    locplex::Network start;
    if (cfg.network_path) {
        start = locplex::read_network_csv(*cfg.network_path, inst);
    } else {
        throw locplex::ValidationError("restructure needs a 'network' path in the config");
    }

    locplex::RestructureResult res;
    if (strategy == "rebalance") {
        res = locplex::rebalance(inst, start, cfg.params, cfg.restructure);
    } else if (strategy == "rationalise") {
        res = locplex::rationalise(inst, start, cfg.params, cfg.restructure);
    } else if (strategy == "reduce") {
        res = locplex::reduce(inst, start, cfg.params, cfg.reallocate, cfg.restructure);
    } else {
        throw locplex::ValidationError("unknown strategy: " + strategy);
    }

    std::string provenance = "config_hash=" + cfg.config_hash() + " seed=" + std::to_string(cfg.seed);
    fs::create_directories(out_dir);
    locplex::write_network_csv(out_dir / "network.csv", res.final_network, provenance);

    std::ostringstream moves;
    moves << "# " << provenance << "\n";
    moves << "step,kind,node,from,to,objective_before,objective_after\n";
    for (std::size_t i = 0; i < res.moves.size(); ++i) {
        const locplex::Move& m = res.moves[i];
        moves << i << "," << locplex::to_string(m.kind) << "," << m.node << "," << m.from << ","
              << m.to << "," << m.objective_before << "," << m.objective_after << "\n";
    }
    locplex::atomic_write(out_dir / "moves.csv", moves.str());

    json move_log = json::array();
    for (const auto& m : res.moves) move_log.push_back(locplex::to_json(m));
    json summary{{"config_hash", cfg.config_hash()},
                 {"seed", cfg.seed},
                 {"strategy", strategy},
                 {"reallocate", cfg.reallocate},
                 {"z_before", res.z_before},
                 {"z_after", res.z_after},
                 {"c_alpha_before", res.c_alpha_before},
                 {"c_alpha_after", res.c_alpha_after},
                 {"moves", move_log},
                 {"covered_nodes", res.covered_nodes.size()},
                 {"final_k", res.final_network.k()},
                 {"notes", res.notes}};
    locplex::atomic_write(out_dir / "summary.json", summary.dump(2) + "\n");
    for (const auto& note : res.notes) std::cerr << "note: " << note << "\n";
    std::cout << "z " << res.z_before << " -> " << res.z_after << " (" << res.moves.size()
              << " moves)\n";
    return 0;
}

int cmd_grid(const locplex::RunConfig& cfg, const fs::path& out_dir) {
    locplex::Instance inst = locplex::instance_from_config(cfg);
    fs::create_directories(out_dir);
    std::string provenance =
        "config_hash=" + cfg.config_hash() + " seed=" + std::to_string(cfg.seed);

    // Records stream to disk incrementally; final files land atomically.
    fs::path csv_tmp = out_dir / "records.csv.tmp";
    fs::path jsonl_tmp = out_dir / "records.jsonl.tmp";
    std::ofstream csv(csv_tmp, std::ios::trunc);
    std::ofstream jsonl(jsonl_tmp, std::ios::trunc);
    if (!csv || !jsonl) throw locplex::ValidationError("cannot write under " + out_dir.string());
    csv << "# " << provenance << "\n" << locplex::grid_csv_header() << "\n";

    std::vector<locplex::RunRecord> records;
    std::vector<std::string> skips;
    locplex::run_grid(
        inst, cfg.grid,
        [&](const locplex::RunRecord& rec) {
            csv << locplex::grid_csv_row(rec) << "\n";
            json j = locplex::to_json(rec);
            j["config_hash"] = cfg.config_hash();
            j["seed"] = cfg.seed;
            jsonl << j.dump() << "\n";
            records.push_back(rec);
        },
        [&](const std::string& reason) { skips.push_back(reason); });
    csv.close();
    jsonl.close();
    fs::rename(csv_tmp, out_dir / "records.csv");
    fs::rename(jsonl_tmp, out_dir / "records.jsonl");

    locplex::PatternSummary patterns = locplex::check_patterns(records);
    std::ostringstream pat;
    pat << "# " << provenance << "\n";
    pat << "records: " << records.size() << "\n";
    for (const auto& s : skips) pat << "skip: " << s << "\n";
    pat << patterns.to_string();
    locplex::atomic_write(out_dir / "patterns.txt", pat.str());
    std::cout << records.size() << " records written to " << (out_dir / "records.csv").string()
              << "\n"
              << patterns.to_string();
    return 0;
}

int cmd_curves(const locplex::RunConfig& cfg, int k_min, int k_max, const fs::path& out_dir) {
    locplex::Instance inst = locplex::instance_from_config(cfg);
    auto rows = locplex::profit_curves(inst, cfg.params, k_min, k_max, cfg.solver);
    std::ostringstream os;
    os << "# config_hash=" << cfg.config_hash() << " seed=" << cfg.seed << "\n";
    os << "k,revenue,z_kmedian,z_kmedianplex,z_plex_observed,intrinsic_cost,avoidable_cost,"
          "total_complexity_cost,kmedian_mode,kmedianplex_mode\n";
    for (const auto& row : rows) {
        os << row.k << "," << row.revenue << "," << row.z_kmedian << "," << row.z_kmedianplex
           << "," << row.z_plex_observed << "," << row.intrinsic_cost << ","
           << row.avoidable_cost << "," << row.total_complexity_cost << "," << row.kmedian_mode
           << "," << row.kmedianplex_mode << "\n";
    }
    fs::create_directories(out_dir);
    locplex::atomic_write(out_dir / "curves.csv", os.str());
    std::cout << rows.size() << " curve rows written to " << (out_dir / "curves.csv").string()
              << "\n";
    return 0;
}

int cmd_synth(int n, std::uint64_t seed, const fs::path& out_dir) {
    locplex::Instance inst = locplex::synth_instance(n, seed);
    fs::create_directories(out_dir);
    locplex::write_nodes_csv(out_dir / "nodes.csv", inst);
    locplex::write_distance_csv(out_dir / "distances.csv", inst);
    json meta{{"n", n},
              {"seed", seed},
              {"depot", *inst.depot},
              {"config_hash", locplex::hash_hex(locplex::fnv1a_hash("synth:" + std::to_string(n) +
                                                                    ":" + std::to_string(seed)))}};
    locplex::atomic_write(out_dir / "meta.json", meta.dump(2) + "\n");
    std::cout << "wrote " << n << "-node instance to " << out_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Locational-complexity analysis of distribution networks"};
    app.require_subcommand(1);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Profit + complexity breakdown of a network");
    std::string ev_nodes, ev_dist, ev_fac, ev_out, ev_format = "json";
    locplex::CostParams ev_params;
    double ev_phi = 0.0, ev_alpha = 0.0;
    int ev_depot = -1;
    evaluate->add_option("--nodes", ev_nodes, "node CSV file")->required();
    evaluate->add_option("--distances", ev_dist, "distance CSV file")->required();
    evaluate->add_option("--facilities", ev_fac, "comma-separated facility ids")->required();
    evaluate->add_option("--r", ev_params.r, "unit revenue (currency/ton)")->required();
    evaluate->add_option("--gamma", ev_params.gamma, "last-leg cost (currency/(km*ton))");
    evaluate->add_option("--rho", ev_params.rho, "first-leg cost (currency/(km*ton))");
    evaluate->add_option("--phi", ev_phi, "facility fixed cost");
    evaluate->add_option("--alpha", ev_alpha, "complexity cost factor in [0,1)");
    evaluate->add_option("--depot", ev_depot, "depot node id (required when rho > 0)");
    evaluate->add_option("--out", ev_out, "output file (default stdout)");
    evaluate->add_option("--format", ev_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    // solve
    auto* solve = app.add_subcommand("solve", "Solve the facility-choice problem");
    std::string so_config, so_problem = "kmedianplex", so_mode, so_out;
    int so_k = 0;
    long long so_budget = 0;
    std::uint64_t so_seed = 0;
    bool so_seed_set = false;
    solve->add_option("--config", so_config, "run config JSON")->required();
    solve->add_option("--problem", so_problem, "kmedian or kmedianplex")
        ->check(CLI::IsMember({"kmedian", "kmedianplex"}));
    solve->add_option("--k", so_k, "number of facilities (overrides config)");
    solve->add_option("--mode", so_mode, "exact or local")->check(CLI::IsMember({"exact", "local"}));
    solve->add_option("--budget", so_budget, "exact-mode enumeration budget");
    solve->add_option("--seed", so_seed, "seed override")->each([&](const std::string&) {
        so_seed_set = true;
    });
    solve->add_option("--out", so_out, "output directory");

    // restructure
    auto* restructure = app.add_subcommand("restructure", "Apply an improvement strategy");
    std::string re_config, re_strategy, re_out;
    bool re_reallocate = false;
    double re_min_gain = -1.0;
    int re_n_tail = 0;
    restructure->add_option("--config", re_config, "run config JSON")->required();
    restructure->add_option("--strategy", re_strategy, "rebalance, rationalise or reduce")
        ->required()
        ->check(CLI::IsMember({"rebalance", "rationalise", "reduce"}));
    restructure->add_flag("--reallocate", re_reallocate,
                          "reduce: reallocate orphaned demand instead of abandoning it");
    restructure->add_option("--min-gain", re_min_gain, "relative improvement threshold");
    restructure->add_option("--n-tail", re_n_tail, "rationalise: candidate pool per facility");
    restructure->add_option("--out", re_out, "output directory");

    // grid
    auto* grid = app.add_subcommand("grid", "Run a parameter-grid campaign");
    std::string gr_config, gr_out;
    std::uint64_t gr_seed = 0;
    bool gr_seed_set = false;
    grid->add_option("--config", gr_config, "run config JSON")->required();
    grid->add_option("--seed", gr_seed, "seed override")->each([&](const std::string&) {
        gr_seed_set = true;
    });
    grid->add_option("--out", gr_out, "output directory");

    // curves
    auto* curves = app.add_subcommand("curves", "Profit-vs-K decomposition table");
    std::string cu_config, cu_out;
    int cu_kmin = 1, cu_kmax = 9;
    curves->add_option("--config", cu_config, "run config JSON")->required();
    curves->add_option("--k-min", cu_kmin, "first K");
    curves->add_option("--k-max", cu_kmax, "last K");
    curves->add_option("--out", cu_out, "output directory");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic instance");
    int sy_n = 125;
    std::uint64_t sy_seed = 0;
    std::string sy_out;
    synth->add_option("--n", sy_n, "number of nodes")->required();
    synth->add_option("--seed", sy_seed, "generator seed");
    synth->add_option("--out", sy_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (*evaluate) {
            ev_params.phi = locplex::PerNodeValue(ev_phi);
            ev_params.alpha = locplex::PerNodeValue(ev_alpha);
            return cmd_evaluate(ev_nodes, ev_dist, ev_fac, ev_params, ev_depot, ev_out, ev_format);
        }
        if (*solve) {
            locplex::RunConfig cfg = locplex::load_run_config(so_config);
            if (so_k > 0) cfg.k = so_k;
            if (!so_mode.empty()) {
                cfg.solver.mode =
                    so_mode == "exact" ? locplex::SolveMode::exact : locplex::SolveMode::local_search;
            }
            if (so_budget > 0) cfg.solver.enumeration_budget = so_budget;
            if (so_seed_set) cfg.seed = so_seed;
            fs::path out = so_out.empty() ? fs::path(default_out_dir()) : fs::path(so_out);
            return cmd_solve(cfg, so_problem, out);
        }
        if (*restructure) {
            locplex::RunConfig cfg = locplex::load_run_config(re_config);
            if (re_reallocate) cfg.reallocate = true;
            if (re_min_gain >= 0.0) cfg.restructure.min_gain = re_min_gain;
            if (re_n_tail > 0) cfg.restructure.n_tail = re_n_tail;
            fs::path out = re_out.empty() ? fs::path(default_out_dir()) : fs::path(re_out);
            return cmd_restructure(cfg, re_strategy, out);
        }
        if (*grid) {
            locplex::RunConfig cfg = locplex::load_run_config(gr_config);
            if (gr_seed_set) {
                cfg.seed = gr_seed;
                cfg.grid.seed = gr_seed;
            }
            fs::path out = gr_out.empty() ? fs::path(default_out_dir()) : fs::path(gr_out);
            return cmd_grid(cfg, out);
        }
        if (*curves) {
            locplex::RunConfig cfg = locplex::load_run_config(cu_config);
            fs::path out = cu_out.empty() ? fs::path(default_out_dir()) : fs::path(cu_out);
            return cmd_curves(cfg, cu_kmin, cu_kmax, out);
        }
        if (*synth) {
            fs::path out = sy_out.empty() ? fs::path(default_out_dir()) : fs::path(sy_out);
            return cmd_synth(sy_n, sy_seed, out);
        }
    } catch (const locplex::BudgetError& e) {
        std::cout << json{{"error", "budget"}, {"details", e.what()}}.dump() << "\n";
        return 3;
    } catch (const locplex::ValidationError& e) {
        std::cout << json{{"error", "validation"}, {"details", e.what()}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cout << json{{"error", "internal"}, {"details", e.what()}}.dump() << "\n";
        return 4;
    }
    return 0;
}
