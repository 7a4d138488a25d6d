#ifndef AMPF_SIMULATOR_HPP
#define AMPF_SIMULATOR_HPP

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ampf/controller.hpp"
#include "ampf/traces.hpp"

namespace ampf {

/// One traffic source. CBR covers plain and duty-cycled (bursty) constant
/// rate senders; AIMD is the window-based TCP-like sender. Flows with a
/// profile index open with a classifier-visible preamble sampled from that
/// application profile before settling into their steady behavior.
struct TrafficSpec {
    enum class Kind { cbr, aimd };

    Kind kind = Kind::cbr;
    int class_label = 4;
    HostId src_host = 0;
    HostId dst_host = 1;
    std::int64_t flow_id = 0;
    double rate_bps = 1e6; // steady CBR rate
    int packet_size_b = 1250;
    double start_s = 0.0;
    double duration_s = 0.0;
    std::uint64_t rng_seed = 0;
    int profile_index = -1; // into default_app_profiles(); -1 = no preamble

    // duty cycle for bursty background CBR; zeros mean always-on
    double burst_on_min_s = 0.0;
    double burst_on_max_s = 0.0;
    double burst_off_min_s = 0.0;
    double burst_off_max_s = 0.0;

    // uniform fraction by which each CBR interarrival is dithered; 0 keeps
    // the stream exactly periodic
    double iat_jitter_frac = 0.0;

    // nonempty: statically routed through these switches, bypassing the
    // controller entirely (adversarial/test traffic)
    std::vector<int> pinned_switches;

    bool observable = true; // scenario-level marker, not part of the CSV

    FlowKey key() const { return FlowKey{src_host, dst_host, flow_id}; }
};

struct IntervalMetrics {
    double start_s = 0.0;
    double throughput_bps = 0.0;
    double jitter_s = std::numeric_limits<double>::quiet_NaN(); // NaN = undefined (<3 packets)
    double loss_frac = 0.0;
    double delay_s = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t delivered_pkts = 0;
    std::uint64_t sent_pkts = 0;
    std::uint64_t dropped_pkts = 0;
};

struct FlowTotals {
    std::uint64_t sent = 0; // both directions
    std::uint64_t delivered = 0;
    std::uint64_t dropped_queue = 0;
    std::uint64_t dropped_unreachable = 0;
    std::uint64_t fwd_sent_bytes = 0;
    std::uint64_t fwd_delivered_bytes = 0;
};

struct FlowMetrics {
    std::int64_t flow_id = 0;
    int class_label = 0;
    TrafficSpec::Kind kind = TrafficSpec::Kind::cbr;
    bool observable = true;
    double start_s = 0.0;
    double duration_s = 0.0;
    FlowTotals totals;
    std::vector<IntervalMetrics> intervals;

    double long_run_throughput_bps() const {
        return duration_s > 0.0 ? static_cast<double>(totals.fwd_delivered_bytes) * 8.0 / duration_s
                                : 0.0;
    }
    /// Mean of the defined per-interval jitter values.
    double mean_jitter_s() const;
};

struct SimCounters {
    std::uint64_t events = 0;
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped_queue = 0;
    std::uint64_t dropped_unreachable = 0;
    std::uint64_t in_flight_at_end = 0;
    // drops of packets that were emitted onto a path later superseded for
    // their flow: the loss attributable to path switching
    std::uint64_t stale_path_drops = 0;
    // forward packets delivered behind a higher sequence number
    std::uint64_t reorderings = 0;
    std::uint64_t invariant_violations = 0;
};

struct RunResult {
    std::vector<FlowMetrics> flows;
    SimCounters counters;
    ControllerStats controller;
    std::string event_log;
    std::string metrics_csv;
};

struct SimConfig {
    double duration_s = 1100.0; // keep this a multiple of the metrics interval
    double metrics_interval_s = 100.0;
    int queue_limit_bytes = 256 * 1024;
    double probe_period_s = 100.0;
    bool strict_invariants = false; // per-event causality + periodic conservation sweeps
};

/// AIMD sender state. Additive increase of one packet per window of acks,
/// multiplicative halving on loss, at most one halving per in-flight window.
struct AimdState {
    double window_pkts = 4.0;
    double srtt_s = 0.0;
    bool have_rtt = false;
    std::uint64_t next_seq = 0;
    std::uint64_t recovery_seq = 0;

    double rto_s() const { return have_rtt ? 2.0 * srtt_s : 1.0; }
};

void aimd_on_ack(AimdState& s, double rtt_sample_s);
/// Returns true when the window was halved (seq postdates the last recovery).
bool aimd_on_loss(AimdState& s, std::uint64_t seq);

/// Mean absolute difference of consecutive interarrival times. Needs at
/// least two interarrivals (three packets).
std::optional<double> jitter_of(std::span<const double> interarrivals_s);

/// What a probe experiences crossing a directed edge right now: propagation
/// plus the queued transmission backlog ahead of it.
double probe_traversal_s(double base_latency_s, double capacity_bps, double backlog_bytes);

/// Deterministic discrete-event run. The controller must have been built
/// over the same topology; its probe function is wired to the live queues
/// for the duration of the run.
RunResult run_simulation(const Topology& topo, Controller& controller,
                         const std::vector<TrafficSpec>& traffic, const SimConfig& config,
                         std::uint64_t seed);

} // namespace ampf

#endif // AMPF_SIMULATOR_HPP
