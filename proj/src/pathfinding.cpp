#include "ampf/pathfinding.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace ampf {

namespace {

void fill_metadata(Path& p, const Topology& topo, const CostMap& cost_map) {
    p.total_cost = 0.0;
    p.total_latency_s = 0.0;
    p.bottleneck_ab_bps = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.edges.size(); ++i) {
        const int e = p.edges[i];
        const Link& l = topo.links[static_cast<std::size_t>(e)];
        const int dir = l.direction_from(p.switches[i]);
        p.total_cost += cost_map.cost[static_cast<std::size_t>(e)][static_cast<std::size_t>(dir)];
        // delay feasibility judges the path itself, not today's queue depth,
        // so the latency budget sums propagation latencies
        p.total_latency_s += l.base_latency_s;
        p.bottleneck_ab_bps = std::min(p.bottleneck_ab_bps, l.available_bps(dir));
    }
    if (p.edges.empty()) p.bottleneck_ab_bps = std::numeric_limits<double>::infinity();
}

struct Candidate {
    double cost;
    std::vector<int> switches;
    std::vector<int> edges;

    bool operator>(const Candidate& o) const {
        if (cost != o.cost) return cost > o.cost;
        if (switches != o.switches) return switches > o.switches;
        return edges > o.edges;
    }
};

} // namespace

std::optional<Path> dijkstra(const Topology& topo, const CostMap& cost_map,
                             int src_switch, int dst_switch,
                             const std::set<int>& excluded_edges,
                             const std::set<int>& excluded_switches) {
    const int n = topo.switch_count();
    if (src_switch < 0 || src_switch >= n || dst_switch < 0 || dst_switch >= n) {
        throw std::invalid_argument("dijkstra: unknown switch");
    }
    if (cost_map.cost.size() != topo.links.size()) {
        throw std::runtime_error("dijkstra: cost map does not match topology");
    }
    if (excluded_switches.count(src_switch) || excluded_switches.count(dst_switch)) {
        return std::nullopt;
    }
    if (src_switch == dst_switch) {
        Path p;
        p.switches = {src_switch};
        fill_metadata(p, topo, cost_map);
        return p;
    }

    const auto adjacency = topo.switch_adjacency();
    std::vector<bool> done(static_cast<std::size_t>(n), false);

    std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> pq;
    pq.push(Candidate{0.0, {src_switch}, {}});

    while (!pq.empty()) {
        Candidate cur = pq.top();
        pq.pop();
        const int at = cur.switches.back();
        if (done[static_cast<std::size_t>(at)]) continue;
        done[static_cast<std::size_t>(at)] = true;

        if (at == dst_switch) {
            Path p;
            p.switches = std::move(cur.switches);
            p.edges = std::move(cur.edges);
            fill_metadata(p, topo, cost_map);
            return p;
        }

        for (int e : adjacency[static_cast<std::size_t>(at)]) {
            if (excluded_edges.count(e)) continue;
            const Link& link = topo.links[static_cast<std::size_t>(e)];
            const int dir = link.direction_from(at);
            const double c = cost_map.cost[static_cast<std::size_t>(e)][static_cast<std::size_t>(dir)];
            if (!(c < kUnusableCost)) continue; // unusable or NaN
            const int next = link.other_switch(at);
            if (done[static_cast<std::size_t>(next)] || excluded_switches.count(next)) continue;

            Candidate cand;
            cand.cost = cur.cost + c;
            cand.switches = cur.switches;
            cand.switches.push_back(next);
            cand.edges = cur.edges;
            cand.edges.push_back(e);
            pq.push(std::move(cand));
        }
    }
    return std::nullopt;
}

std::vector<Path> yen_ksp(const Topology& topo, const CostMap& cost_map,
                          int src_switch, int dst_switch, int k) {
    if (k < 1) throw std::invalid_argument("yen_ksp: K must be >= 1");

    std::vector<Path> found;
    auto first = dijkstra(topo, cost_map, src_switch, dst_switch);
    if (!first) return found;
    found.push_back(std::move(*first));

    // candidate pool ordered like the Dijkstra tie-break
    auto cand_less = [](const Path& a, const Path& b) {
        if (a.total_cost != b.total_cost) return a.total_cost < b.total_cost;
        if (a.switches != b.switches) return a.switches < b.switches;
        return a.edges < b.edges;
    };
    std::vector<Path> candidates;

    while (static_cast<int>(found.size()) < k) {
        const Path& prev = found.back();
        for (std::size_t i = 0; i + 1 < prev.switches.size(); ++i) {
            const int spur = prev.switches[i];
            const std::vector<int> root_switches(prev.switches.begin(),
                                                 prev.switches.begin() + static_cast<std::ptrdiff_t>(i) + 1);
            const std::vector<int> root_edges(prev.edges.begin(),
                                              prev.edges.begin() + static_cast<std::ptrdiff_t>(i));

            std::set<int> excluded_edges;
            for (const Path& p : found) {
                if (p.edges.size() >= root_edges.size() + 1 &&
                    std::equal(root_edges.begin(), root_edges.end(), p.edges.begin())) {
                    excluded_edges.insert(p.edges[root_edges.size()]);
                }
            }
            std::set<int> excluded_switches(root_switches.begin(), root_switches.end());
            excluded_switches.erase(spur);

            auto spur_path = dijkstra(topo, cost_map, spur, dst_switch, excluded_edges, excluded_switches);
            if (!spur_path) continue;

            Path total;
            total.switches = root_switches;
            total.switches.insert(total.switches.end(), spur_path->switches.begin() + 1,
                                  spur_path->switches.end());
            total.edges = root_edges;
            total.edges.insert(total.edges.end(), spur_path->edges.begin(), spur_path->edges.end());
            fill_metadata(total, topo, cost_map);

            const auto dup = [&](const Path& p) { return p.same_route(total); };
            if (std::any_of(found.begin(), found.end(), dup) ||
                std::any_of(candidates.begin(), candidates.end(), dup)) {
                continue;
            }
            candidates.push_back(std::move(total));
        }

        if (candidates.empty()) break;
        const auto best = std::min_element(candidates.begin(), candidates.end(), cand_less);
        found.push_back(std::move(*best));
        candidates.erase(best);
    }
    return found;
}

} // namespace ampf
