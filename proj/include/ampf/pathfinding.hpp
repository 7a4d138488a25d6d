#ifndef AMPF_PATHFINDING_HPP
#define AMPF_PATHFINDING_HPP

#include <optional>
#include <set>
#include <vector>

#include "ampf/link_state.hpp"

namespace ampf {

/// A loopless switch-level path. Cost and bottleneck are a snapshot of the
/// cost map and per-direction link state at computation time; total latency
/// is the sum of propagation latencies in the traversal direction.
struct Path {
    std::vector<int> switches; // src..dst, no repeats
    std::vector<int> edges;    // link indices, switches.size()-1 entries
    double total_cost = 0.0;
    double bottleneck_ab_bps = std::numeric_limits<double>::infinity();
    double total_latency_s = 0.0;

    bool empty() const { return edges.empty(); }
    bool same_route(const Path& o) const { return switches == o.switches && edges == o.edges; }
};

/// Minimum-cost path between two switches over the usable links, avoiding the
/// given exclusions. Equal-cost candidates resolve to the lexicographically
/// smallest switch sequence (then edge sequence), which makes the search and
/// everything built on it deterministic. Returns nullopt when disconnected.
std::optional<Path> dijkstra(const Topology& topo, const CostMap& cost_map,
                             int src_switch, int dst_switch,
                             const std::set<int>& excluded_edges = {},
                             const std::set<int>& excluded_switches = {});

/// Yen's algorithm: up to K distinct loopless paths in nondecreasing cost,
/// first entry being the Dijkstra optimum.
std::vector<Path> yen_ksp(const Topology& topo, const CostMap& cost_map,
                          int src_switch, int dst_switch, int k);

} // namespace ampf

#endif // AMPF_PATHFINDING_HPP
