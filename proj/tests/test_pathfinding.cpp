#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "ampf/pathfinding.hpp"
#include "ampf/rng.hpp"

using namespace ampf;

namespace {

struct TestNet {
    Topology topo;
    CostMap cm;
};

// n switches, given undirected edges (a, b, cost); latency encodes the cost so
// the cost map reproduces it exactly with lambda_a=0 trickery avoided: we set
// capacity equal everywhere and measured latency = cost/1000 with lambda_b=0.
TestNet make_net(int n, const std::vector<std::tuple<int, int, double>>& edges) {
    TestNet net;
    for (int i = 0; i < n; ++i) net.topo.switch_names.push_back("s" + std::to_string(i));
    for (const auto& [a, b, cost] : edges) {
        Link l;
        l.a = NodeRef{false, a};
        l.b = NodeRef{false, b};
        l.capacity_bps = 32e6;
        l.base_latency_s = cost / 1000.0;
        l.measured_latency_s = {cost / 1000.0, cost / 1000.0};
        net.topo.links.push_back(l);
    }
    net.cm.lambda_a = 1.0;
    net.cm.lambda_b = 0.0;
    net.cm.recompute(net.topo.links);
    return net;
}

// exhaustive loopless path enumeration (oracle)
void enumerate_paths(const TestNet& net, int at, int dst, std::vector<int>& switches,
                     std::vector<int>& edges, std::set<int>& visited, std::vector<Path>& out) {
    if (at == dst) {
        Path p;
        p.switches = switches;
        p.edges = edges;
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const int dir =
                net.topo.links[static_cast<std::size_t>(edges[i])].direction_from(switches[i]);
            p.total_cost +=
                net.cm.cost[static_cast<std::size_t>(edges[i])][static_cast<std::size_t>(dir)];
        }
        out.push_back(p);
        return;
    }
    for (std::size_t li = 0; li < net.topo.links.size(); ++li) {
        const Link& l = net.topo.links[li];
        if (!l.inter_switch()) continue;
        int next = -1;
        if (l.a.id == at) next = l.b.id;
        else if (l.b.id == at) next = l.a.id;
        else continue;
        if (visited.count(next)) continue;
        visited.insert(next);
        switches.push_back(next);
        edges.push_back(static_cast<int>(li));
        enumerate_paths(net, next, dst, switches, edges, visited, out);
        edges.pop_back();
        switches.pop_back();
        visited.erase(next);
    }
}

std::vector<Path> all_simple_paths(const TestNet& net, int src, int dst) {
    std::vector<Path> out;
    std::vector<int> switches = {src};
    std::vector<int> edges;
    std::set<int> visited = {src};
    enumerate_paths(net, src, dst, switches, edges, visited, out);
    std::sort(out.begin(), out.end(), [](const Path& a, const Path& b) {
        if (a.total_cost != b.total_cost) return a.total_cost < b.total_cost;
        if (a.switches != b.switches) return a.switches < b.switches;
        return a.edges < b.edges;
    });
    return out;
}

TestNet random_net(Rng& rng, int max_nodes = 8) {
    const int n = 3 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(max_nodes - 2)));
    std::vector<std::tuple<int, int, double>> edges;
    // random connected-ish graph: a spanning chain plus extras
    for (int i = 1; i < n; ++i) {
        edges.emplace_back(i - 1, i, std::floor(rng.uniform(1, 20)));
    }
    const int extra = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n * 2)));
    for (int i = 0; i < extra; ++i) {
        const int a = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        const int b = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        if (a == b) continue;
        edges.emplace_back(a, b, std::floor(rng.uniform(1, 20)));
    }
    return make_net(n, edges);
}

} // namespace

TEST_SUITE("pathfinding") {

TEST_CASE("dijkstra: src equals dst") {
    TestNet net = make_net(2, {{0, 1, 3.0}});
    const auto p = dijkstra(net.topo, net.cm, 0, 0);
    REQUIRE(p.has_value());
    CHECK(p->switches == std::vector<int>{0});
    CHECK(p->edges.empty());
    CHECK(p->total_cost == doctest::Approx(0.0));
}

TEST_CASE("dijkstra: parallel edges take the cheaper one") {
    TestNet net = make_net(2, {{0, 1, 3.0}, {0, 1, 5.0}});
    const auto p = dijkstra(net.topo, net.cm, 0, 1);
    REQUIRE(p.has_value());
    CHECK(p->edges == std::vector<int>{0});
    CHECK(p->total_cost == doctest::Approx(3.0));
}

TEST_CASE("dijkstra: disconnected returns none") {
    TestNet net = make_net(3, {{0, 1, 1.0}});
    CHECK(!dijkstra(net.topo, net.cm, 0, 2).has_value());
}

TEST_CASE("dijkstra: unknown switch throws") {
    TestNet net = make_net(2, {{0, 1, 1.0}});
    CHECK_THROWS_AS(dijkstra(net.topo, net.cm, 0, 7), std::invalid_argument);
}

TEST_CASE("dijkstra equals brute-force minimum on random graphs") {
    Rng rng(101);
    for (int trial = 0; trial < 60; ++trial) {
        TestNet net = random_net(rng, 6);
        const int n = net.topo.switch_count();
        const int src = 0;
        const int dst = n - 1;
        const auto brute = all_simple_paths(net, src, dst);
        const auto got = dijkstra(net.topo, net.cm, src, dst);
        if (brute.empty()) {
            CHECK(!got.has_value());
            continue;
        }
        REQUIRE(got.has_value());
        CHECK(got->total_cost == doctest::Approx(brute.front().total_cost).epsilon(1e-9));
        // deterministic tie-break: the lexicographically smallest optimum
        CHECK(got->switches == brute.front().switches);
    }
}

TEST_CASE("yen: line graph has exactly one path") {
    TestNet net = make_net(3, {{0, 1, 1.0}, {1, 2, 1.0}});
    const auto paths = yen_ksp(net.topo, net.cm, 0, 2, 3);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].switches == std::vector<int>{0, 1, 2});
}

TEST_CASE("yen: diamond ordering") {
    // 0-1-3 costs 2+2, 0-2-3 costs 3+3
    TestNet net = make_net(4, {{0, 1, 2.0}, {1, 3, 2.0}, {0, 2, 3.0}, {2, 3, 3.0}});
    const auto paths = yen_ksp(net.topo, net.cm, 0, 3, 2);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].total_cost == doctest::Approx(4.0));
    CHECK(paths[1].total_cost == doctest::Approx(6.0));
    CHECK(paths[0].switches == std::vector<int>{0, 1, 3});
    CHECK(paths[1].switches == std::vector<int>{0, 2, 3});
}

TEST_CASE("yen matches exhaustive top-K on random graphs") {
    Rng rng(202);
    for (int trial = 0; trial < 60; ++trial) {
        TestNet net = random_net(rng, 7);
        const int src = 0;
        const int dst = net.topo.switch_count() - 1;
        const auto brute = all_simple_paths(net, src, dst);
        const auto got = yen_ksp(net.topo, net.cm, src, dst, 5);
        const std::size_t expect = std::min<std::size_t>(5, brute.size());
        REQUIRE(got.size() == expect);
        for (std::size_t i = 0; i < expect; ++i) {
            CHECK(got[i].total_cost == doctest::Approx(brute[i].total_cost).epsilon(1e-9));
        }
    }
}

TEST_CASE("yen output is loopless, distinct, nondecreasing, and prefix-stable") {
    Rng rng(303);
    for (int trial = 0; trial < 40; ++trial) {
        TestNet net = random_net(rng, 8);
        const int src = 0;
        const int dst = net.topo.switch_count() - 1;
        const auto k8 = yen_ksp(net.topo, net.cm, src, dst, 8);
        for (std::size_t i = 0; i < k8.size(); ++i) {
            const auto& p = k8[i];
            std::set<int> seen(p.switches.begin(), p.switches.end());
            CHECK(seen.size() == p.switches.size()); // loopless
            if (i > 0) CHECK(k8[i].total_cost >= k8[i - 1].total_cost - 1e-12);
            for (std::size_t j = i + 1; j < k8.size(); ++j) {
                CHECK(!k8[i].same_route(k8[j]));
            }
        }
        for (int k = 1; k <= static_cast<int>(k8.size()); ++k) {
            const auto kk = yen_ksp(net.topo, net.cm, src, dst, k);
            REQUIRE(kk.size() == static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i) CHECK(kk[static_cast<std::size_t>(i)].same_route(k8[static_cast<std::size_t>(i)]));
        }
    }
}

TEST_CASE("path metadata snapshots bottleneck and latency") {
    TestNet net = make_net(3, {{0, 1, 2.0}, {1, 2, 5.0}});
    net.topo.links[0].reserved_bps[0] = 12e6; // AB 20M in the traversal direction
    net.cm.recompute(net.topo.links);
    const auto p = dijkstra(net.topo, net.cm, 0, 2);
    REQUIRE(p.has_value());
    CHECK(p->bottleneck_ab_bps == doctest::Approx(20e6));
    CHECK(p->total_latency_s == doctest::Approx(0.007));
}

} // TEST_SUITE
