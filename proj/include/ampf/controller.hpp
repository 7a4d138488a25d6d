#ifndef AMPF_CONTROLLER_HPP
#define AMPF_CONTROLLER_HPP

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ampf/classifier.hpp"
#include "ampf/flow.hpp"
#include "ampf/link_state.hpp"
#include "ampf/pathfinding.hpp"
#include "ampf/rng.hpp"

namespace ampf {

enum class Mode { aware, unaware };

struct ClassTable {
    std::array<AppClass, kNumClasses> classes;

    /// 20 ms / 10 Mbps, 40 ms / 5 Mbps, 60 ms / 2 Mbps, best effort / 1 Mbps.
    static ClassTable defaults();
    const AppClass& by_label(int label) const;
};

struct PolicyConfig {
    int n_observe = 50;               // packets observed before classification
    int k_paths = 8;
    double hard_timeout_s = 100.0;    // flow rule hard timeout t
    double epoch_check_offset_s = 10.0; // throughput audit at t - offset
    ClassTable classes = ClassTable::defaults();
    double lambda_a = 1.0;
    double lambda_b = 1.0;
    double control_rtt_s = 0.002;     // controller<->switch round trip
    double refresh_epoch_s = 100.0;   // periodic probe / cost refresh period

    void validate() const;
};

struct FlowRule {
    int switch_id = -1;
    FlowKey match;
    Direction dir = Direction::forward;
    int out_link = -1;
    int priority = 0;
    double hard_timeout_s = 0.0;
    double install_ts = 0.0;

    double expiry() const { return install_ts + hard_timeout_s; }
};

struct ActiveFlowEntry {
    FlowKey key;
    Transport transport = Transport::udp;
    int class_label = 0; // 0 = unclassified
    bool provisional = true;
    bool fallback = false; // admitted without a reservation
    Path current_path;
    int path_version = 0;
    std::uint64_t packets_observed = 0; // forward packets seen at the controller
    double reserved_bps = 0.0;
    std::vector<std::pair<int, int>> reserved_edges; // (link, direction)
    FlowRecord record;
    int reroute_count = 0;
    int assign_count = 0;
    int generation = 0; // bumps on every rule refresh; stale timers are dropped
    double last_install_ts = 0.0;
    double last_check_ts = 0.0;
    std::uint64_t delivered_bytes_at_check = 0;
    std::uint64_t sent_bytes_at_check = 0;
    double achieved_throughput_bps = 0.0;
    bool active = false; // rules alive
};

struct PendingTimer {
    enum class Kind { epoch_check, rule_expiry };
    double time = 0.0;
    Kind kind = Kind::epoch_check;
    FlowKey key;
    int generation = 0;
};

struct PacketInAction {
    enum class Kind { forward, drop_unreachable };
    Kind kind = Kind::drop_unreachable;
    int out_link = -1;
};

enum class EpochDecision { keep, reroute, ended };

struct ControllerStats {
    std::uint64_t packet_ins = 0;
    std::uint64_t classifications = 0;
    std::uint64_t path_assignments = 0;
    std::uint64_t epoch_keeps = 0;
    std::uint64_t reroutes = 0;
    std::uint64_t fallbacks = 0;
    std::uint64_t unreachable_drops = 0;
    std::uint64_t expired_flows = 0;
};

/// The forwarding control plane: flow tables of every switch, link-state
/// ledger, path selection, and the per-flow lifecycle. All methods are meant
/// to be called from a single logical event thread, in timestamp order.
class Controller {
public:
    /// probe_fn(link, direction) returns the current one-way traversal time
    /// of a directed edge (propagation plus queue backlog); the controller
    /// wraps it in the probe round-trip arithmetic. Without it, measured
    /// latencies stay put.
    Controller(const Topology& topo, PolicyConfig cfg, Mode mode,
               std::optional<DecisionTree> tree, std::uint64_t seed,
               std::function<double(int, int)> probe_fn = {},
               std::ostream* event_log = nullptr);

    PacketInAction handle_packet_in(const PacketRecord& pkt, int at_switch, double now);

    /// Highest-priority unexpired rule match, ties to the newest install.
    std::optional<int> lookup_rule(int at_switch, const FlowKey& key, Direction dir,
                                   double now) const;

    /// Probe every inter-switch link and recompute the cost map.
    void measure_and_refresh(double now);

    /// Rebind the live probe source (the simulator wires this to its queues).
    void set_probe_fn(std::function<double(int, int)> fn) { probe_fn_ = std::move(fn); }
    /// Cumulative transmitted bytes per (link, direction): the port counters
    /// behind the carried-load estimate that feeds the cost map.
    void set_tx_bytes_fn(std::function<double(int, int)> fn) { tx_bytes_fn_ = std::move(fn); }
    void set_event_log(std::ostream* log) { event_log_ = log; }

    void on_epoch_timer(const FlowKey& key, int generation, double now,
                        std::uint64_t delivered_bytes_fwd, std::uint64_t sent_bytes_fwd);
    void on_expiry_timer(const FlowKey& key, int generation, double now);

    /// Timers the caller must schedule; cleared by the call.
    std::vector<PendingTimer> take_pending_timers();

    // --- pipeline pieces, exposed for direct testing ---

    /// Median-cost path of the K shortest; nullopt when disconnected.
    std::optional<Path> provisional_path(int src_switch, int dst_switch, double now = 0.0);

    /// Cost-ordered subsequence meeting the class bandwidth bound and, except
    /// for best effort, the class delay bound.
    static std::vector<Path> feasible_paths(const std::vector<Path>& paths, const AppClass& cls);

    /// 0-based index into the cost-ordered feasible list for a class label.
    static std::size_t selected_index(int class_label, std::size_t n_feasible);

    /// Reserve-and-install on the selected feasible path, walking upward on
    /// reservation failure. Returns the index used, or nullopt if every
    /// feasible path refused admission.
    std::optional<std::size_t> assign_path(ActiveFlowEntry& entry, const AppClass& cls,
                                           const std::vector<Path>& feasible, double now);

    EpochDecision epoch_check(const FlowKey& key, double measured_throughput_bps, double now);

    // --- inspection ---
    const std::vector<Link>& links() const { return links_; }
    std::vector<Link>& mutable_links() { return links_; }
    CostMap& cost_map() { return cost_map_; }
    const Topology& topology() const { return topo_; }
    const PolicyConfig& config() const { return cfg_; }
    const ActiveFlowEntry* find_entry(const FlowKey& key) const;
    const ControllerStats& stats() const { return stats_; }
    std::size_t rule_count() const;

    /// Largest absolute gap between each link's reservation ledger and the
    /// per-flow reservations that should add up to it.
    double reservation_audit() const;

private:
    PacketInAction forward_from(const ActiveFlowEntry& entry, int at_switch, Direction dir,
                                double now);
    std::optional<int> next_hop_on_path(const Path& path, int at_switch, Direction dir,
                                        const FlowKey& key) const;
    void install_path_rules(ActiveFlowEntry& entry, const Path& path, int priority, double now,
                            bool skip_fwd_source, bool skip_bwd_source);
    void schedule_flow_timers(ActiveFlowEntry& entry, double now, bool with_epoch);
    void release_reservations(ActiveFlowEntry& entry);
    bool reserve_on(const Path& path, double amount,
                    std::vector<std::pair<int, int>>& reserved_out);
    void classify_and_assign(ActiveFlowEntry& entry, double now);
    void assign_random_path(ActiveFlowEntry& entry, double now);
    void remove_expired_rules(const FlowKey& key, double now);
    void refresh_cost_map();
    void update_load_estimates(double now);
    std::vector<Path> k_paths_between(int src_switch, int dst_switch);
    int attach_switch(HostId host) const;
    void log_event(double now, const std::string& kind, const FlowKey& key, int class_label,
                   const Path* path, const std::string& reason);
    std::string flow_text(const FlowKey& key) const;
    std::string path_text(const Path& path) const;

    const Topology& topo_;
    PolicyConfig cfg_;
    Mode mode_;
    std::optional<DecisionTree> tree_;
    std::function<double(int, int)> probe_fn_;
    std::function<double(int, int)> tx_bytes_fn_;
    std::ostream* event_log_;
    Rng rng_;

    std::vector<Link> links_; // control-plane ledger (latency estimates, reservations)
    CostMap cost_map_;
    std::vector<std::array<double, 2>> load_estimate_bps_; // per directed edge
    std::vector<std::array<double, 2>> load_snapshot_bytes_;
    double last_load_sweep_s_ = -1.0;
    std::map<FlowKey, ActiveFlowEntry> entries_;
    std::vector<std::vector<FlowRule>> rules_; // per switch
    std::vector<PendingTimer> pending_timers_;
    ControllerStats stats_;

    static constexpr int kProvisionalPriority = 100;
    static constexpr int kClassifiedPriorityBase = 200;
};

} // namespace ampf

#endif // AMPF_CONTROLLER_HPP
