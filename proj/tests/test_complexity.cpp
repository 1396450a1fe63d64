#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "locplex/complexity.hpp"
#include "support.hpp"

using namespace locplex;
using Catch::Matchers::WithinAbs;

namespace {

const std::vector<double> kTable2Shares = {0.020, 0.030, 0.070, 0.040, 0.040, 0.090, 0.110,
                                           0.055, 0.030, 0.130, 0.085, 0.075, 0.111, 0.114};

}  // namespace

TEST_CASE("pars_complexity reproduces the worked 14-node value") {
    CHECK_THAT(pars_complexity(WeightVector(kTable2Shares)), WithinAbs(3.624, 1e-3));
}

TEST_CASE("pars_complexity of the facility-A share vector") {
    WeightVector qa({0.10, 0.15, 0.35, 0.20, 0.20});
    CHECK_THAT(pars_complexity(qa), WithinAbs(2.202, 1e-3));
}

TEST_CASE("single pars has zero complexity") {
    CHECK(pars_complexity(WeightVector({1.0})) == 0.0);
}

TEST_CASE("uniform shares attain the log2 maximum") {
    WeightVector u(std::vector<double>(8, 0.125));
    CHECK(pars_complexity(u) == 3.0);
}

TEST_CASE("zero entries contribute nothing") {
    WeightVector p({0.5, 0.0, 0.5});
    CHECK_THAT(pars_complexity(p), WithinAbs(1.0, 1e-12));
}

TEST_CASE("decompose reproduces the worked two-level table") {
    Instance inst = testsupport::table2_instance();
    Network net = testsupport::table2_network();
    ComplexityBreakdown cb = decompose(inst, net);

    CHECK_THAT(cb.total, WithinAbs(3.624, 1e-3));
    CHECK_THAT(cb.central, WithinAbs(1.485, 1e-3));
    CHECK_THAT(cb.weighted_local(), WithinAbs(2.138, 1e-3));
    REQUIRE(cb.per_facility.size() == 3);
    CHECK_THAT(cb.per_facility.at(0).share, WithinAbs(0.200, 1e-3));
    CHECK_THAT(cb.per_facility.at(5).share, WithinAbs(0.500, 1e-3));
    CHECK_THAT(cb.per_facility.at(11).share, WithinAbs(0.300, 1e-3));
    CHECK_THAT(cb.per_facility.at(0).bits, WithinAbs(2.202, 1e-3));
    CHECK_THAT(cb.per_facility.at(5).bits, WithinAbs(2.460, 1e-3));
    CHECK_THAT(cb.per_facility.at(11).bits, WithinAbs(1.561, 1e-3));
    CHECK_THAT(cb.central + cb.weighted_local(), WithinAbs(cb.total, 1e-9));
}

TEST_CASE("closing facility C and reallocating reproduces the restructured values") {
    Instance inst = testsupport::table2_instance();
    Network net = testsupport::table2_network();
    // Node 11 (facility C itself) joins B; nodes 12 and 13 join A.
    Network after;
    after.facilities = {0, 5};
    after.allocation = net.allocation;
    after.allocation[11] = 5;
    after.allocation[12] = 0;
    after.allocation[13] = 0;

    ComplexityBreakdown cb = decompose(inst, after);
    CHECK_THAT(cb.per_facility.at(0).bits, WithinAbs(2.563, 1e-3));
    CHECK_THAT(cb.per_facility.at(5).bits, WithinAbs(2.697, 1e-3));
    CHECK_THAT(cb.central, WithinAbs(0.984, 1e-3));
    CHECK_THAT(cb.total, WithinAbs(3.624, 1e-3));
    CHECK(closed_system_invariance_check(inst, net, after));
}

TEST_CASE("single facility: central term vanishes") {
    Instance inst = testsupport::table2_instance();
    Network net;
    net.facilities = {3};
    net.allocation.assign(inst.size(), 3);
    ComplexityBreakdown cb = decompose(inst, net);
    CHECK_THAT(cb.central, WithinAbs(0.0, 1e-12));
    CHECK_THAT(cb.total, WithinAbs(cb.per_facility.at(3).bits, 1e-9));
}

TEST_CASE("one facility per node: local terms vanish") {
    Instance inst = testsupport::table2_instance();
    Network net;
    for (NodeId i = 0; i < inst.size(); ++i) {
        net.facilities.push_back(i);
        net.allocation.push_back(i);
    }
    ComplexityBreakdown cb = decompose(inst, net);
    for (const auto& [f, fc] : cb.per_facility) CHECK(fc.bits == 0.0);
    CHECK_THAT(cb.total, WithinAbs(cb.central, 1e-9));
}

TEST_CASE("decomposition identity holds on random partitions") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> nd(3, 50);
        int n = nd(rng);
        Instance inst = testsupport::random_instance(rng, n);
        std::uniform_int_distribution<int> kd(1, n);
        Network net = testsupport::random_partition(rng, inst, kd(rng));
        ComplexityBreakdown cb = decompose(inst, net);
        REQUIRE_THAT(cb.central + cb.weighted_local(), WithinAbs(cb.total, 1e-9));
        CHECK(cb.total <= std::log2(static_cast<double>(n)) + 1e-9);
        CHECK(cb.total >= 0.0);
    }
}

TEST_CASE("partition invariance: total depends only on the global shares") {
    std::mt19937_64 rng(11);
    Instance inst = testsupport::random_instance(rng, 20);
    std::vector<NodeId> all(20);
    std::iota(all.begin(), all.end(), 0);
    double oracle = pars_complexity(demand_shares(inst, all));
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<int> kd(1, 20);
        Network net = testsupport::random_partition(rng, inst, kd(rng));
        ComplexityBreakdown cb = decompose(inst, net);
        REQUIRE_THAT(cb.total, WithinAbs(oracle, 1e-9));
    }
    Network two = testsupport::random_partition(rng, inst, 2);
    Network five = testsupport::random_partition(rng, inst, 5);
    CHECK(closed_system_invariance_check(inst, two, five));
}

TEST_CASE("invariance check rejects different node sets") {
    Instance inst = testsupport::table2_instance();
    Network a = testsupport::table2_network();
    Network b = a;
    b.allocation[13] = kUnassigned;
    CHECK_THROWS_AS(closed_system_invariance_check(inst, a, b), ValidationError);
}

TEST_CASE("complexity is zero iff one pars carries everything") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> uw(0.1, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> w(6);
        for (double& v : w) v = uw(rng);
        double total = 0.0;
        for (double v : w) total += v;
        std::vector<double> shares;
        for (double v : w) shares.push_back(v / total);
        // renormalize the tail so the vector passes validation exactly
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < shares.size(); ++i) sum += shares[i];
        shares.back() = 1.0 - sum;
        double bits = pars_complexity(WeightVector(shares));
        CHECK(bits > 0.0);
    }
    CHECK(pars_complexity(WeightVector({0.0, 1.0, 0.0})) == 0.0);
}
