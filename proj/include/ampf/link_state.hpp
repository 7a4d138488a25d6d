#ifndef AMPF_LINK_STATE_HPP
#define AMPF_LINK_STATE_HPP

#include <algorithm>
#include <array>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ampf/flow.hpp"

namespace ampf {

inline constexpr double kUnusableCost = std::numeric_limits<double>::infinity();

struct NodeRef {
    bool is_host = false;
    int id = -1;

    bool operator==(const NodeRef&) const = default;
};

/// A full-duplex link: one latency and capacity, but bandwidth is carried,
/// reserved and accounted per direction (direction 0 is a-to-b), so admission
/// in one direction never charges for the other's traffic.
struct Link {
    NodeRef a;
    NodeRef b;
    double capacity_bps = 0.0;
    double base_latency_s = 0.0; // propagation, shared by both directions
    std::array<double, 2> measured_latency_s{0.0, 0.0}; // probe estimate per direction
    std::array<double, 2> reserved_bps{0.0, 0.0};

    double available_bps(int dir) const { return capacity_bps - reserved_bps[static_cast<std::size_t>(dir)]; }
    /// tighter of the two directions; used for the link-level cost
    double available_bps() const { return std::min(available_bps(0), available_bps(1)); }
    bool inter_switch() const { return !a.is_host && !b.is_host; }
    int other_switch(int sw) const; // for inter-switch links
    /// direction index when traversing from a given switch endpoint
    int direction_from(int sw) const;
};

struct Host {
    std::string name;
    int attach_switch = -1;
    int access_link = -1;
};

struct Topology {
    std::vector<std::string> switch_names;
    std::vector<Host> hosts;
    std::vector<Link> links;

    int switch_count() const { return static_cast<int>(switch_names.size()); }
    int find_switch(const std::string& name) const; // -1 when absent
    int find_host(const std::string& name) const;

    /// inter-switch link indices incident to a switch
    std::vector<std::vector<int>> switch_adjacency() const;

    void validate() const; // throws on malformed topology

    // Text format: `switch <name>`, `host <name> <switch>`,
    // `link <a> <b> <capacity_bps> <latency_s>`; '#' starts a comment.
    static Topology parse(std::istream& in);
    std::string to_text() const;
};

/// Link latency recovered from a probe round trip: the entire trip time minus
/// half of each controller-switch round trip. Returns nullopt when the inputs
/// are inconsistent (non-positive result); the caller keeps the previous value.
std::optional<double> latency_from_probes(double t_total_s, double t_s1_s, double t_s2_s);

/// Directed-edge index for (link, direction); the cost map is addressed by it.
inline int directed_edge(int link, int dir) { return 2 * link + dir; }

/// Available bandwidth of each link normalized by the network-wide maximum.
/// Entries for host access links are left at NaN; they are not costed.
/// Throws when every inter-switch link has zero available bandwidth.
std::vector<double> normalized_ab(const std::vector<Link>& links);

/// Cost of one link: lambda_a * latency-in-milliseconds + lambda_b / NAB.
/// A link with no available bandwidth is unusable (infinite cost).
double link_cost(double latency_s, double nab, double lambda_a, double lambda_b);

struct CostMap {
    /// per directed edge (see directed_edge); NaN for host links, +inf unusable
    std::vector<std::array<double, 2>> cost;
    double lambda_a = 1.0;
    double lambda_b = 1.0;
    double refresh_epoch_s = 100.0;
    bool stale = true;

    void recompute(const std::vector<Link>& links);
    /// Cost-side available bandwidth additionally discounts measured carried
    /// load (per directed edge, bits/s), floored at 2% of capacity so busy
    /// links stay routable. Admission feasibility keeps the reservation ledger.
    void recompute(const std::vector<Link>& links,
                   const std::vector<std::array<double, 2>>& measured_load_bps);
};

/// Sum of directed-edge costs along a path. The two-argument form takes the
/// a-to-b direction of every edge.
double path_cost(const std::vector<int>& edges, const std::vector<int>& dirs,
                 const CostMap& cost_map);
double path_cost(const std::vector<int>& edges, const CostMap& cost_map);

/// Admission: false (and no change) when the direction cannot carry the
/// amount.
bool reserve_bw(Link& link, int dir, double amount_bps);
/// Releasing more than is reserved is a caller bug.
void release_bw(Link& link, int dir, double amount_bps);

} // namespace ampf

#endif // AMPF_LINK_STATE_HPP
