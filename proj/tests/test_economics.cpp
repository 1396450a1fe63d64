#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "locplex/economics.hpp"
#include "support.hpp"

using namespace locplex;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Two-node line instance: depot at 0, facility at 1, served node at 2.
Instance line_instance() {
    Instance inst;
    inst.demand = {0.0, 2.0, 2.0};
    inst.dist = Matrix(3, 3, 0.0);
    auto set = [&](int i, int j, double d) {
        inst.dist(i, j) = d;
        inst.dist(j, i) = d;
    };
    set(0, 1, 4.0);
    set(1, 2, 3.0);
    set(0, 2, 7.0);
    inst.depot = 0;
    return inst;
}

Network two_facility_random_network(std::mt19937_64& rng, const Instance& inst) {
    return testsupport::random_partition(rng, inst, 2);
}

}  // namespace

TEST_CASE("facility revenue: single node at distance 2") {
    Instance inst;
    inst.demand = {0.0, 5.0};
    inst.dist = Matrix(2, 2, 0.0);
    inst.dist(0, 1) = inst.dist(1, 0) = 2.0;
    Network net;
    net.facilities = {0};
    net.allocation = {0, 0};
    CostParams p;
    p.r = 10.0;
    p.gamma = 1.0;
    // facility serves itself (w=0) plus the node: (10 - 1*2) * 5
    CHECK(facility_revenue(inst, net, p, 0) == 40.0);
}

TEST_CASE("facility serving only itself earns r * W") {
    Instance inst;
    inst.demand = {7.0};
    inst.dist = Matrix(1, 1, 0.0);
    Network net;
    net.facilities = {0};
    net.allocation = {0};
    CostParams p;
    p.r = 13.0;
    p.gamma = 4.0;
    CHECK(facility_revenue(inst, net, p, 0) == 13.0 * 7.0);
}

TEST_CASE("two-leg revenue with first-leg distribution costs") {
    // depot 0, facility 1 (zero demand), served nodes 2 and 3 at last-leg
    // distances 1 and 3 with W = 2 each; d(depot, facility) = 4.
    Instance inst;
    inst.demand = {0.0, 0.0, 2.0, 2.0};
    inst.dist = Matrix(4, 4, 0.0);
    inst.dist(0, 1) = inst.dist(1, 0) = 4.0;  // depot -> facility
    inst.dist(1, 2) = inst.dist(2, 1) = 1.0;
    inst.dist(1, 3) = inst.dist(3, 1) = 3.0;
    inst.dist(0, 2) = inst.dist(2, 0) = 5.0;
    inst.dist(0, 3) = inst.dist(3, 0) = 7.0;
    inst.dist(2, 3) = inst.dist(3, 2) = 4.0;
    inst.depot = 0;
    Network net;
    net.facilities = {1};
    net.allocation = {1, 1, 1, 1};
    CostParams p;
    p.r = 10.0;
    p.gamma = 1.0;
    p.rho = 0.5;
    // (10 - 0.5*4 - 1*1)*2 + (10 - 0.5*4 - 1*3)*2 = 14 + 10 = 24
    CHECK(facility_revenue(inst, net, p, 1) == 24.0);
}

TEST_CASE("rho > 0 without a depot is rejected") {
    Instance inst = line_instance();
    inst.depot.reset();
    Network net;
    net.facilities = {1};
    net.allocation = {1, 1, 1};
    CostParams p;
    p.r = 10.0;
    p.gamma = 1.0;
    p.rho = 0.5;
    CHECK_THROWS_AS(facility_revenue(inst, net, p, 1), ValidationError);
    CHECK_THROWS_AS(z_plex(inst, net, p), ValidationError);
}

TEST_CASE("rho = 0 reduces the two-leg revenue to the single-leg form") {
    std::mt19937_64 rng(3);
    Instance inst = testsupport::random_instance(rng, 12);
    Network net = testsupport::random_partition(rng, inst, 3);
    CostParams p;
    p.r = 50.0;
    p.gamma = 0.05;
    p.rho = 0.0;
    for (NodeId f : net.facilities) {
        double single_leg = 0.0;
        for (NodeId i : net.members(f)) {
            single_leg += (p.r - p.gamma * inst.dist(f, i)) * inst.demand[i];
        }
        CHECK_THAT(facility_revenue(inst, net, p, f), WithinRel(single_leg, 1e-12));
    }
}

TEST_CASE("gross profit with alpha 0 equals total revenue") {
    std::mt19937_64 rng(5);
    Instance inst = testsupport::random_instance(rng, 10);
    Network net = two_facility_random_network(rng, inst);
    CostParams p;
    p.r = 40.0;
    p.gamma = 0.02;
    double revenue = 0.0;
    for (NodeId f : net.facilities) revenue += facility_revenue(inst, net, p, f);
    CHECK_THAT(gross_profit(inst, net, p), WithinRel(revenue, 1e-12));
    CHECK(complexity_cost(inst, net, p) == 0.0);
}

TEST_CASE("single-node facilities carry no penalty") {
    Instance inst;
    inst.demand = {3.0, 4.0};
    inst.dist = Matrix(2, 2, 0.0);
    inst.dist(0, 1) = inst.dist(1, 0) = 10.0;
    Network net;
    net.facilities = {0, 1};
    net.allocation = {0, 1};
    CostParams p;
    p.r = 10.0;
    p.gamma = 1.0;
    p.alpha = PerNodeValue(0.3);
    CHECK(complexity_cost(inst, net, p) == 0.0);
    CHECK_THAT(gross_profit(inst, net, p), WithinRel(10.0 * 7.0, 1e-12));
}

TEST_CASE("gross profit matches a term-by-term recomputation") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        Instance inst = testsupport::random_instance(rng, 10);
        Network net = two_facility_random_network(rng, inst);
        CostParams p;
        p.r = 60.0;
        p.gamma = 0.03;
        p.alpha = PerNodeValue(0.15);
        double expected = 0.0;
        for (NodeId f : net.facilities) {
            auto mem = net.members(f);
            double bits = pars_complexity(demand_shares(inst, mem));
            expected += (1.0 - 0.15 * bits) * facility_revenue(inst, net, p, f);
        }
        REQUIRE_THAT(gross_profit(inst, net, p), WithinRel(expected, 1e-12));
    }
}

TEST_CASE("identity: gross profit + complexity cost = revenue") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        Instance inst = testsupport::random_instance(rng, 14);
        Network net = testsupport::random_partition(rng, inst, 4);
        CostParams p;
        p.r = 100.0;
        p.gamma = 0.05;
        p.alpha = PerNodeValue(0.12);
        double revenue = 0.0;
        for (NodeId f : net.facilities) revenue += facility_revenue(inst, net, p, f);
        REQUIRE_THAT(gross_profit(inst, net, p) + complexity_cost(inst, net, p),
                     WithinRel(revenue, 1e-9));
    }
}

TEST_CASE("z_plex report satisfies its internal identities") {
    std::mt19937_64 rng(21);
    Instance inst = testsupport::table2_instance();
    inst.depot = 5;
    Network net = testsupport::table2_network();
    CostParams p;
    p.r = 120.0;
    p.gamma = 0.4;
    p.rho = 0.1;
    p.phi = PerNodeValue(150.0);
    p.alpha = PerNodeValue(0.1);
    ProfitReport pr = z_plex(inst, net, p);

    CHECK_THAT(pr.net_profit_plex, WithinRel(pr.gross_profit - pr.fixed_cost_total, 1e-6));
    CHECK_THAT(pr.net_profit_kmedian - pr.net_profit_plex, WithinRel(pr.complexity_cost, 1e-6));
    CHECK_THAT(pr.fixed_cost_total, WithinRel(3 * 150.0, 1e-12));
    double revenue = 0.0;
    for (const auto& [f, r] : pr.revenue_by_facility) revenue += r;
    CHECK_THAT(pr.net_profit_kmedian, WithinRel(revenue - pr.fixed_cost_total, 1e-9));
}

TEST_CASE("alpha 0 collapses the two objectives exactly") {
    std::mt19937_64 rng(33);
    Instance inst = testsupport::random_instance(rng, 15);
    Network net = testsupport::random_partition(rng, inst, 4);
    CostParams p;
    p.r = 75.0;
    p.gamma = 0.04;
    p.phi = PerNodeValue(10.0);
    ProfitReport pr = z_plex(inst, net, p);
    CHECK(pr.net_profit_plex == pr.net_profit_kmedian);
}

TEST_CASE("net profit is strictly decreasing in alpha when revenues are positive") {
    std::mt19937_64 rng(41);
    Instance inst = testsupport::random_instance(rng, 12);
    Network net = testsupport::random_partition(rng, inst, 3);
    CostParams p;
    p.r = 500.0;  // wide margins keep every R(f) positive
    p.gamma = 0.01;
    double prev = std::numeric_limits<double>::infinity();
    bool has_complexity = decompose(inst, net).weighted_local() > 0.0;
    REQUIRE(has_complexity);
    for (double alpha : {0.0, 0.05, 0.1, 0.2, 0.4}) {
        p.alpha = PerNodeValue(alpha);
        double z = z_plex(inst, net, p).net_profit_plex;
        CHECK(z < prev);
        prev = z;
    }
}

TEST_CASE("scalar alpha and the matching per-facility vector agree") {
    std::mt19937_64 rng(55);
    Instance inst = testsupport::random_instance(rng, 10);
    Network net = testsupport::random_partition(rng, inst, 3);
    CostParams scalar;
    scalar.r = 90.0;
    scalar.gamma = 0.02;
    scalar.alpha = PerNodeValue(0.11);
    CostParams vec = scalar;
    vec.alpha = PerNodeValue::per_node(std::vector<double>(10, 0.11));
    CHECK(z_plex(inst, net, scalar).net_profit_plex == z_plex(inst, net, vec).net_profit_plex);
    CHECK(gross_profit(inst, net, scalar) == gross_profit(inst, net, vec));
}

TEST_CASE("negative penalty factors are reported, not rejected") {
    // alpha close to 1 with a high-entropy facility pushes 1 - alpha*C_p < 0
    Instance inst;
    inst.demand = {1, 1, 1, 1, 1, 1, 1, 1};
    inst.dist = Matrix(8, 8, 1.0);
    for (int i = 0; i < 8; ++i) inst.dist(i, i) = 0.0;
    Network net;
    net.facilities = {0};
    net.allocation.assign(8, 0);
    CostParams p;
    p.r = 10.0;
    p.gamma = 0.0;
    p.alpha = PerNodeValue(0.5);  // local C_p = 3 bits -> factor = -0.5
    ProfitReport pr = z_plex(inst, net, p);
    REQUIRE(pr.negative_penalty_facilities == std::vector<NodeId>{0});
    CHECK_THAT(pr.gross_profit, WithinRel(80.0 * (1.0 - 0.5 * 3.0), 1e-12));
}
