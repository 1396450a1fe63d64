#pragma once

// File formats and run configuration. Node tables and distance matrices
// come in as CSV (dense matrix or sparse from,to,km triplets), networks
// round-trip through node,facility CSV, and campaigns are driven by a JSON
// config. Every artifact written here carries the config hash and seed.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "locplex/harness.hpp"
#include "locplex/restructuring.hpp"
#include "locplex/solvers.hpp"
#include "locplex/types.hpp"

namespace locplex {

// ---------------------------------------------------------------------------
// Small CSV helpers. Fields are plain (no quoting); names containing commas
// are rejected on write.

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        std::size_t start = 0;
        while (start < field.size() && field[start] == ' ') ++start;
        out.push_back(field.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace detail

// Writes content to <path>.tmp and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ValidationError("cannot open " + tmp.string() + " for writing");
        os << content;
        os.flush();
        if (!os) throw ValidationError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// FNV-1a 64-bit; used for provenance hashes of canonicalized configs.
inline std::uint64_t fnv1a_hash(std::string_view data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Node table: CSV with header id,name,demand[,population][,x,y]. When
// population is present and demand absent, demand = 500*ln(population).

struct NodeTable {
    std::vector<std::string> names;
    std::vector<double> demand;
    std::vector<double> x, y;  // optional, reporting only
    bool has_xy = false;
};

inline NodeTable read_nodes_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open node file " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("node file is empty: " + path.string());
    auto header = detail::split_csv_line(line);
    int col_id = -1, col_name = -1, col_demand = -1, col_pop = -1, col_x = -1, col_y = -1;
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        if (header[c] == "id") col_id = c;
        else if (header[c] == "name") col_name = c;
        else if (header[c] == "demand") col_demand = c;
        else if (header[c] == "population") col_pop = c;
        else if (header[c] == "x") col_x = c;
        else if (header[c] == "y") col_y = c;
    }
    if (col_id < 0) throw ValidationError("node file missing 'id' column");
    if (col_demand < 0 && col_pop < 0) {
        throw ValidationError("node file needs a 'demand' or 'population' column");
    }

    struct Row {
        long id;
        std::string name;
        double demand;
        double x = 0.0, y = 0.0;
    };
    std::vector<Row> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        auto field = [&](int c) -> std::string {
            return (c >= 0 && c < static_cast<int>(f.size())) ? f[c] : std::string();
        };
        Row row;
        double idv = 0.0;
        if (!detail::parse_double(field(col_id), idv)) {
            throw ValidationError("node file line " + std::to_string(lineno) + ": bad id");
        }
        row.id = static_cast<long>(idv);
        row.name = col_name >= 0 ? field(col_name) : std::to_string(row.id);
        std::string dm = field(col_demand);
        if (col_demand >= 0 && !dm.empty()) {
            if (!detail::parse_double(dm, row.demand) || row.demand <= 0.0) {
                throw ValidationError("node file line " + std::to_string(lineno) +
                                      ": demand must be positive");
            }
        } else {
            double pop = 0.0;
            if (!detail::parse_double(field(col_pop), pop) || pop < 1.0) {
                throw ValidationError("node file line " + std::to_string(lineno) +
                                      ": population must be >= 1");
            }
            row.demand = 500.0 * std::log(pop);
        }
        if (col_x >= 0 && col_y >= 0) {
            detail::parse_double(field(col_x), row.x);
            detail::parse_double(field(col_y), row.y);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError("node file has no data rows: " + path.string());

    // ids may be arbitrary; remap to dense 0..N-1 in ascending id order.
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].id == rows[i - 1].id) {
            throw ValidationError("node file has duplicate id " + std::to_string(rows[i].id));
        }
    }
    NodeTable table;
    table.has_xy = col_x >= 0 && col_y >= 0;
    for (const Row& row : rows) {
        table.names.push_back(row.name);
        table.demand.push_back(row.demand);
        if (table.has_xy) {
            table.x.push_back(row.x);
            table.y.push_back(row.y);
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Distance file: dense N x N CSV (rows of N values, no header) or sparse
// triplets behind a from,to,km header. Sparse form requires full coverage
// of all ordered off-diagonal pairs.

inline Matrix read_distance_csv(const std::filesystem::path& path, int n) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open distance file " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("distance file is empty: " + path.string());
    auto first = detail::split_csv_line(line);
    double probe = 0.0;
    bool sparse = !first.empty() && !detail::parse_double(first[0], probe);

    Matrix m(n, n, 0.0);
    if (!sparse) {
        std::vector<std::vector<std::string>> rows;
        rows.push_back(first);
        while (std::getline(is, line)) {
            if (!line.empty()) rows.push_back(detail::split_csv_line(line));
        }
        if (static_cast<int>(rows.size()) != n) {
            throw ValidationError("distance matrix has " + std::to_string(rows.size()) +
                                  " rows, expected " + std::to_string(n));
        }
        for (int i = 0; i < n; ++i) {
            if (static_cast<int>(rows[i].size()) != n) {
                throw ValidationError("distance matrix row " + std::to_string(i) + " has " +
                                      std::to_string(rows[i].size()) + " columns, expected " +
                                      std::to_string(n));
            }
            for (int j = 0; j < n; ++j) {
                double v = 0.0;
                if (!detail::parse_double(rows[i][j], v)) {
                    throw ValidationError("distance matrix has a non-numeric entry at row " +
                                          std::to_string(i));
                }
                m(i, j) = v;
            }
        }
        return m;
    }

    if (first.size() < 3 || first[0] != "from" || first[1] != "to") {
        throw ValidationError("sparse distance file must start with a from,to,km header");
    }
    std::vector<bool> seen(static_cast<std::size_t>(n) * n, false);
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        double a = 0.0, b = 0.0, km = 0.0;
        if (f.size() < 3 || !detail::parse_double(f[0], a) || !detail::parse_double(f[1], b) ||
            !detail::parse_double(f[2], km)) {
            throw ValidationError("sparse distance file line " + std::to_string(lineno) +
                                  ": expected from,to,km");
        }
        int i = static_cast<int>(a), j = static_cast<int>(b);
        if (i < 0 || i >= n || j < 0 || j >= n) {
            throw ValidationError("sparse distance file line " + std::to_string(lineno) +
                                  ": node id out of range");
        }
        m(i, j) = km;
        seen[static_cast<std::size_t>(i) * n + j] = true;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && !seen[static_cast<std::size_t>(i) * n + j]) {
                throw ValidationError("sparse distance file coverage error: missing pair " +
                                      std::to_string(i) + "," + std::to_string(j));
            }
        }
    }
    return m;
}

inline Instance load_instance(const std::filesystem::path& nodes_path,
                              const std::filesystem::path& dist_path,
                              std::optional<NodeId> depot = std::nullopt,
                              NodeTable* table_out = nullptr) {
    NodeTable table = read_nodes_csv(nodes_path);
    Instance inst;
    inst.demand = table.demand;
    inst.dist = read_distance_csv(dist_path, static_cast<int>(table.demand.size()));
    inst.depot = depot;
    validate_instance(inst).require_ok("instance");
    if (table_out) *table_out = std::move(table);
    return inst;
}

inline void write_nodes_csv(const std::filesystem::path& path, const Instance& inst,
                            const std::vector<std::string>* names = nullptr) {
    std::ostringstream os;
    os << "id,name,demand\n";
    for (int i = 0; i < inst.size(); ++i) {
        std::string name = names ? (*names)[i] : std::to_string(i);
        if (name.find(',') != std::string::npos || name.find('"') != std::string::npos) {
            throw ValidationError("node name contains a CSV delimiter: " + name);
        }
        os << i << "," << name << "," << detail::format_double(inst.demand[i]) << "\n";
    }
    atomic_write(path, os.str());
}

inline void write_distance_csv(const std::filesystem::path& path, const Instance& inst) {
    std::ostringstream os;
    for (int i = 0; i < inst.size(); ++i) {
        for (int j = 0; j < inst.size(); ++j) {
            if (j) os << ",";
            os << detail::format_double(inst.dist(i, j));
        }
        os << "\n";
    }
    atomic_write(path, os.str());
}

// ---------------------------------------------------------------------------
// Network file: node,facility rows over the covered nodes.

inline void write_network_csv(const std::filesystem::path& path, const Network& net,
                              const std::string& provenance_comment = {}) {
    std::ostringstream os;
    if (!provenance_comment.empty()) os << "# " << provenance_comment << "\n";
    os << "node,facility\n";
    for (NodeId i = 0; i < static_cast<NodeId>(net.allocation.size()); ++i) {
        if (net.allocation[i] != kUnassigned) os << i << "," << net.allocation[i] << "\n";
    }
    atomic_write(path, os.str());
}

inline Network read_network_csv(const std::filesystem::path& path, const Instance& inst) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open network file " + path.string());
    Network net;
    net.allocation.assign(inst.size(), kUnassigned);
    std::string line;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // node,facility header
            continue;
        }
        auto f = detail::split_csv_line(line);
        double a = 0.0, b = 0.0;
        if (f.size() < 2 || !detail::parse_double(f[0], a) || !detail::parse_double(f[1], b)) {
            throw ValidationError("network file line " + std::to_string(lineno) +
                                  ": expected node,facility");
        }
        int node = static_cast<int>(a), fac = static_cast<int>(b);
        if (node < 0 || node >= inst.size() || fac < 0 || fac >= inst.size()) {
            throw ValidationError("network file line " + std::to_string(lineno) +
                                  ": id out of range");
        }
        net.allocation[node] = fac;
    }
    for (NodeId f : net.allocation) {
        if (f != kUnassigned &&
            std::find(net.facilities.begin(), net.facilities.end(), f) == net.facilities.end()) {
            net.facilities.push_back(f);
        }
    }
    std::sort(net.facilities.begin(), net.facilities.end());
    validate_network(inst, net).require_ok("network file " + path.string());
    return net;
}

// ---------------------------------------------------------------------------
// Run configuration (JSON).

struct RunConfig {
    // instance: either file paths or a synthetic spec
    std::optional<std::string> nodes_path;
    std::optional<std::string> distances_path;
    std::optional<int> synth_n;
    std::optional<NodeId> depot;
    std::optional<std::string> network_path;  // restructure input
    CostParams params;                        // gamma/rho in currency/(km*ton)
    int k = 5;
    GridSpec grid;
    SolverOptions solver;
    RestructureOptions restructure;
    bool reallocate = false;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    nlohmann::json raw;  // canonical source for hashing

    std::string config_hash() const { return hash_hex(fnv1a_hash(raw.dump())); }
};

inline RunConfig parse_run_config(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.raw = j;
    if (j.contains("instance")) {
        const auto& inst = j.at("instance");
        if (inst.contains("nodes")) cfg.nodes_path = inst.at("nodes").get<std::string>();
        if (inst.contains("distances")) cfg.distances_path = inst.at("distances").get<std::string>();
        if (inst.contains("synth")) cfg.synth_n = inst.at("synth").at("n").get<int>();
        if (inst.contains("depot")) cfg.depot = inst.at("depot").get<int>();
    }
    if (j.contains("network")) cfg.network_path = j.at("network").get<std::string>();
    if (j.contains("params")) {
        const auto& p = j.at("params");
        cfg.params.r = p.value("r", 0.0);
        cfg.params.gamma = p.value("gamma", 0.0);
        cfg.params.rho = p.value("rho", 0.0);
        if (p.contains("phi")) {
            if (p.at("phi").is_array()) {
                cfg.params.phi = PerNodeValue::per_node(p.at("phi").get<std::vector<double>>());
            } else {
                cfg.params.phi = PerNodeValue(p.at("phi").get<double>());
            }
        }
        if (p.contains("alpha")) {
            if (p.at("alpha").is_array()) {
                cfg.params.alpha = PerNodeValue::per_node(p.at("alpha").get<std::vector<double>>());
            } else {
                cfg.params.alpha = PerNodeValue(p.at("alpha").get<double>());
            }
        }
    }
    cfg.k = j.value("k", 5);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.out_dir = j.value("out_dir", std::string("."));
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        std::string mode = s.value("mode", "local");
        cfg.solver.mode = mode == "exact" ? SolveMode::exact : SolveMode::local_search;
        cfg.solver.enumeration_budget = s.value("budget", cfg.solver.enumeration_budget);
        cfg.solver.min_gain = s.value("min_gain", cfg.solver.min_gain);
    }
    if (j.contains("strategy")) {
        const auto& s = j.at("strategy");
        cfg.restructure.min_gain = s.value("min_gain", cfg.restructure.min_gain);
        cfg.restructure.full_scan = s.value("full_scan", cfg.restructure.full_scan);
        cfg.restructure.unguarded_recentre =
            s.value("unguarded_recentre", cfg.restructure.unguarded_recentre);
        if (s.contains("n_tail")) cfg.restructure.n_tail = s.at("n_tail").get<int>();
        cfg.reallocate = s.value("reallocate", cfg.reallocate);
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (g.contains("alphas")) cfg.grid.alphas = g.at("alphas").get<std::vector<double>>();
        if (g.contains("gammas")) cfg.grid.gammas = g.at("gammas").get<std::vector<double>>();
        if (g.contains("rhos")) cfg.grid.rhos = g.at("rhos").get<std::vector<double>>();
        if (g.contains("phis")) cfg.grid.phis = g.at("phis").get<std::vector<double>>();
        cfg.grid.k_min = g.value("k_min", cfg.grid.k_min);
        cfg.grid.k_max = g.value("k_max", cfg.grid.k_max);
        cfg.grid.unit_revenue = g.value("unit_revenue", cfg.grid.unit_revenue);
        if (g.contains("strategies")) {
            cfg.grid.strategies.clear();
            for (const auto& name : g.at("strategies")) {
                std::string s = name.get<std::string>();
                if (s == "rebalance") cfg.grid.strategies.push_back(Strategy::rebalance);
                else if (s == "rationalise") cfg.grid.strategies.push_back(Strategy::rationalise);
                else if (s == "reduce-abandon") cfg.grid.strategies.push_back(Strategy::reduce_abandon);
                else if (s == "reduce-reallocate")
                    cfg.grid.strategies.push_back(Strategy::reduce_reallocate);
                else throw ValidationError("unknown strategy in config: " + s);
            }
        }
    }
    cfg.grid.seed = cfg.seed;
    cfg.grid.solver = cfg.solver;
    cfg.grid.restructure = cfg.restructure;
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config parse error: " + std::string(e.what()));
    }
    return parse_run_config(j);
}

inline Instance instance_from_config(const RunConfig& cfg) {
    if (cfg.synth_n) return synth_instance(*cfg.synth_n, cfg.seed);
    if (!cfg.nodes_path || !cfg.distances_path) {
        throw ValidationError("config needs instance.nodes + instance.distances or instance.synth");
    }
    return load_instance(*cfg.nodes_path, *cfg.distances_path, cfg.depot);
}

// ---------------------------------------------------------------------------
// Grid record serialization: CSV (wide, one row per record) and JSON lines.

inline std::string grid_csv_header() {
    std::string h =
        "alpha,gamma,rho,phi,k,solver_mode,solver_iterations,z_kmedian,revenue,z_plex,c_alpha,"
        "total_cp,is_k_star,is_k_circ";
    for (const char* s : {"rebalance", "rationalise", "reduce_abandon", "reduce_reallocate"}) {
        for (const char* col : {"fired", "dz_pct", "dc_pct", "moves", "final_k", "covered"}) {
            h += ",";
            h += s;
            h += "_";
            h += col;
        }
    }
    return h;
}

inline std::string grid_csv_row(const RunRecord& rec) {
    std::ostringstream os;
    os << detail::format_double(rec.alpha) << "," << detail::format_double(rec.gamma_cents) << ","
       << detail::format_double(rec.rho_cents) << "," << detail::format_double(rec.phi) << ","
       << rec.k << "," << rec.solver_mode << "," << rec.solver_iterations << ","
       << detail::format_double(rec.z_kmedian) << "," << detail::format_double(rec.revenue) << ","
       << detail::format_double(rec.z_plex) << "," << detail::format_double(rec.c_alpha) << ","
       << detail::format_double(rec.total_cp) << "," << (rec.is_k_star ? 1 : 0) << ","
       << (rec.is_k_circ ? 1 : 0);
    const Strategy order[] = {Strategy::rebalance, Strategy::rationalise, Strategy::reduce_abandon,
                              Strategy::reduce_reallocate};
    for (Strategy want : order) {
        const StrategySummary* found = nullptr;
        for (const auto& s : rec.strategies) {
            if (s.strategy == want) {
                found = &s;
                break;
            }
        }
        if (!found) {
            os << ",,,,,,";
            continue;
        }
        os << "," << (found->fired ? 1 : 0) << "," << detail::format_double(found->dz_pct) << ","
           << detail::format_double(found->dc_pct) << "," << found->moves << "," << found->final_k
           << "," << found->covered;
    }
    return os.str();
}

inline nlohmann::json to_json(const StrategySummary& s) {
    return nlohmann::json{{"strategy", to_string(s.strategy)},
                          {"fired", s.fired},
                          {"z_before", s.z_before},
                          {"z_after", s.z_after},
                          {"dz_pct", s.dz_pct},
                          {"c_alpha_before", s.c_alpha_before},
                          {"c_alpha_after", s.c_alpha_after},
                          {"dc_pct", s.dc_pct},
                          {"moves", s.moves},
                          {"final_k", s.final_k},
                          {"covered", s.covered},
                          {"total_cp_before", s.total_cp_before},
                          {"total_cp_after", s.total_cp_after}};
}

inline nlohmann::json to_json(const RunRecord& rec) {
    nlohmann::json strategies = nlohmann::json::array();
    for (const auto& s : rec.strategies) strategies.push_back(to_json(s));
    return nlohmann::json{{"alpha", rec.alpha},
                          {"gamma", rec.gamma_cents},
                          {"rho", rec.rho_cents},
                          {"phi", rec.phi},
                          {"k", rec.k},
                          {"solver_mode", rec.solver_mode},
                          {"solver_iterations", rec.solver_iterations},
                          {"z_kmedian", rec.z_kmedian},
                          {"revenue", rec.revenue},
                          {"z_plex", rec.z_plex},
                          {"c_alpha", rec.c_alpha},
                          {"total_cp", rec.total_cp},
                          {"is_k_star", rec.is_k_star},
                          {"is_k_circ", rec.is_k_circ},
                          {"strategies", strategies}};
}

inline nlohmann::json to_json(const ProfitReport& pr) {
    nlohmann::json rev = nlohmann::json::object();
    for (const auto& [f, r] : pr.revenue_by_facility) rev[std::to_string(f)] = r;
    return nlohmann::json{{"revenue_by_facility", rev},
                          {"gross_profit", pr.gross_profit},
                          {"complexity_cost", pr.complexity_cost},
                          {"fixed_cost_total", pr.fixed_cost_total},
                          {"net_profit_plex", pr.net_profit_plex},
                          {"net_profit_kmedian", pr.net_profit_kmedian},
                          {"negative_penalty_facilities", pr.negative_penalty_facilities}};
}

inline nlohmann::json to_json(const ComplexityBreakdown& cb) {
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [f, fc] : cb.per_facility) {
        per[std::to_string(f)] = nlohmann::json{{"share", fc.share}, {"bits", fc.bits}};
    }
    return nlohmann::json{{"total", cb.total},
                          {"central", cb.central},
                          {"weighted_local", cb.weighted_local()},
                          {"per_facility", per}};
}

inline nlohmann::json to_json(const Move& m) {
    nlohmann::json re = nlohmann::json::array();
    for (const auto& [node, target] : m.reassignments) re.push_back({node, target});
    return nlohmann::json{{"kind", to_string(m.kind)},       {"node", m.node},
                          {"from", m.from},                  {"to", m.to},
                          {"reassignments", re},             {"objective_before", m.objective_before},
                          {"objective_after", m.objective_after}};
}

}  // namespace locplex
