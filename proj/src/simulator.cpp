#include "ampf/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace ampf {

double FlowMetrics::mean_jitter_s() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& iv : intervals) {
        if (std::isnan(iv.jitter_s)) continue;
        sum += iv.jitter_s;
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

void aimd_on_ack(AimdState& s, double rtt_sample_s) {
    if (rtt_sample_s > 0.0) {
        if (!s.have_rtt) {
            s.srtt_s = rtt_sample_s;
            s.have_rtt = true;
        } else {
            s.srtt_s = 0.875 * s.srtt_s + 0.125 * rtt_sample_s;
        }
    }
    s.window_pkts += 1.0 / std::max(1.0, std::floor(s.window_pkts));
}

bool aimd_on_loss(AimdState& s, std::uint64_t seq) {
    if (seq < s.recovery_seq) return false; // already reacted to this window
    s.window_pkts = std::max(1.0, s.window_pkts / 2.0);
    s.recovery_seq = s.next_seq;
    return true;
}

std::optional<double> jitter_of(std::span<const double> interarrivals_s) {
    if (interarrivals_s.size() < 2) return std::nullopt;
    double sum = 0.0;
    for (std::size_t i = 1; i < interarrivals_s.size(); ++i) {
        sum += std::abs(interarrivals_s[i] - interarrivals_s[i - 1]);
    }
    return sum / static_cast<double>(interarrivals_s.size() - 1);
}

double probe_traversal_s(double base_latency_s, double capacity_bps, double backlog_bytes) {
    return base_latency_s + backlog_bytes * 8.0 / capacity_bps;
}

namespace {

enum class EvKind : std::uint8_t {
    flow_start,
    pre_emit_fwd,
    pre_emit_bwd,
    steady_start,
    cbr_emit,
    burst_toggle,
    packet_arrival,
    packet_out, // delayed enqueue after a controller packet-out
    transmit_complete,
    ack_arrival,
    rto_check,
    probe_sweep,
    ctrl_epoch,
    ctrl_expiry,
    metrics_tick,
    flow_end,
};

struct SimPacket {
    std::int32_t flow = -1;
    std::int32_t size_b = 0;
    std::uint64_t seq = 0;
    double sent_ts = 0.0;
    std::int8_t dir = 0; // 0 forward, 1 backward
    std::int8_t preamble = 0;
    std::int32_t path_version = 0;
};

struct Event {
    double t = 0.0;
    std::uint64_t order = 0;
    EvKind kind = EvKind::flow_start;
    std::int32_t a = 0;  // flow / port / node, by kind
    std::int64_t b = 0;  // seq / generation / index, by kind
    SimPacket pkt;
};

struct EventAfter {
    bool operator()(const Event& x, const Event& y) const {
        if (x.t != y.t) return x.t > y.t;
        return x.order > y.order;
    }
};

// priority_queue with an inspectable container, for conservation sweeps
class EventQueue : public std::priority_queue<Event, std::vector<Event>, EventAfter> {
public:
    const std::vector<Event>& container() const { return c; }
};

struct Port {
    std::deque<SimPacket> fifo;
    std::int64_t backlog_bytes = 0;
    bool busy = false;
    SimPacket in_transit; // packet currently being transmitted
    double tx_bytes = 0.0; // cumulative, the controller's port counter
};

struct FlowRuntime {
    TrafficSpec spec;
    FlowKey key;
    bool started = false;
    bool ended = false;

    PreambleStream pre;
    bool steady_started = false;
    bool cbr_on = true;
    std::uint64_t emit_gen = 0;
    Rng rng{0};

    struct InFlight {
        double sent_ts = 0.0;
        int acks_beyond = 0; // later-seq acks seen while this one is missing
    };
    AimdState aimd;
    std::map<std::uint64_t, InFlight> outstanding;

    std::uint64_t next_fwd_seq = 0;
    std::uint64_t next_bwd_seq = 0;

    FlowTotals totals;

    // receiver state for the current metrics interval (forward direction)
    double prev_arrival_ts = -1.0;
    double prev_iat = -1.0;
    bool any_delivered = false;
    std::uint64_t highest_delivered_seq = 0;
    std::uint64_t iv_sent = 0;
    std::uint64_t iv_delivered = 0;
    std::uint64_t iv_dropped = 0;
    std::uint64_t iv_delivered_bytes = 0;
    double iv_delay_sum = 0.0;
    double iv_absdiff_sum = 0.0;
    std::uint64_t iv_diff_count = 0;

    std::vector<IntervalMetrics> intervals;
};

class Simulator {
public:
    Simulator(const Topology& topo, Controller& controller,
              const std::vector<TrafficSpec>& traffic, const SimConfig& config,
              std::uint64_t seed)
        : topo_(topo), ctrl_(controller), cfg_(config) {
        validate(traffic);
        ports_.resize(topo_.links.size() * 2);
        flows_.reserve(traffic.size());
        for (const auto& spec : traffic) {
            FlowRuntime fr;
            fr.spec = spec;
            fr.key = spec.key();
            fr.rng = Rng(splitmix64(seed ^ (spec.rng_seed * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL)));
            flow_index_[fr.key] = static_cast<int>(flows_.size());
            flows_.push_back(std::move(fr));
        }
        ctrl_.set_probe_fn([this](int link, int dir) { return probe_traversal(link, dir); });
        ctrl_.set_tx_bytes_fn([this](int link, int dir) {
            return ports_[static_cast<std::size_t>(2 * link + dir)].tx_bytes;
        });
        ctrl_.set_event_log(&event_log_);
    }

    RunResult run() {
        for (std::size_t i = 0; i < flows_.size(); ++i) {
            schedule(flows_[i].spec.start_s, EvKind::flow_start, static_cast<int>(i));
            schedule(flows_[i].spec.start_s + flows_[i].spec.duration_s, EvKind::flow_end,
                     static_cast<int>(i));
        }
        schedule(0.0, EvKind::probe_sweep, 0);
        schedule(cfg_.metrics_interval_s, EvKind::metrics_tick, 0);

        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            if (ev.t > cfg_.duration_s) break;
            if (cfg_.strict_invariants) {
                if (ev.t < now_ - 1e-12) ++counters_.invariant_violations; // causality
                check_per_event_invariants();
            }
            now_ = std::max(now_, ev.t);
            ++counters_.events;
            dispatch(ev);
            drain_controller_timers();
        }

        finalize();
        return assemble_result();
    }

    double probe_traversal(int link, int dir) const {
        const Link& l = topo_.links[static_cast<std::size_t>(link)];
        const Port& port = ports_[static_cast<std::size_t>(2 * link + dir)];
        return probe_traversal_s(l.base_latency_s, l.capacity_bps,
                                 static_cast<double>(port.backlog_bytes));
    }

private:
    // --- node encoding: switches first, then hosts ---
    int encode_host(HostId h) const { return topo_.switch_count() + h; }
    bool is_host_node(int node) const { return node >= topo_.switch_count(); }
    HostId host_of(int node) const { return node - topo_.switch_count(); }

    int node_of(NodeRef ref) const { return ref.is_host ? encode_host(ref.id) : ref.id; }

    int port_from(int link, int from_node) const {
        const Link& l = topo_.links[static_cast<std::size_t>(link)];
        return node_of(l.a) == from_node ? 2 * link : 2 * link + 1;
    }

    int port_dst_node(int port) const {
        const Link& l = topo_.links[static_cast<std::size_t>(port / 2)];
        return port % 2 == 0 ? node_of(l.b) : node_of(l.a);
    }

    void validate(const std::vector<TrafficSpec>& traffic) const {
        topo_.validate();
        for (const auto& spec : traffic) {
            if (spec.duration_s <= 0.0) throw std::invalid_argument("traffic: duration must be > 0");
            if (spec.packet_size_b <= 0) throw std::invalid_argument("traffic: packet size must be > 0");
            if (spec.src_host < 0 || spec.src_host >= static_cast<int>(topo_.hosts.size()) ||
                spec.dst_host < 0 || spec.dst_host >= static_cast<int>(topo_.hosts.size())) {
                throw std::invalid_argument("traffic: unknown host");
            }
            if (spec.kind == TrafficSpec::Kind::cbr) {
                const auto& access =
                    topo_.links[static_cast<std::size_t>(topo_.hosts[static_cast<std::size_t>(spec.src_host)].access_link)];
                if (spec.rate_bps > access.capacity_bps) {
                    throw std::invalid_argument("traffic: CBR rate exceeds access link capacity");
                }
            }
            for (int sw : spec.pinned_switches) {
                if (sw < 0 || sw >= topo_.switch_count()) {
                    throw std::invalid_argument("traffic: pinned path references unknown switch");
                }
            }
        }
    }

    void schedule(double t, EvKind kind, std::int32_t a, std::int64_t b = 0,
                  const SimPacket& pkt = {}) {
        Event ev;
        ev.t = t;
        ev.order = next_order_++;
        ev.kind = kind;
        ev.a = a;
        ev.b = b;
        ev.pkt = pkt;
        queue_.push(ev);
    }

    void drain_controller_timers() {
        for (const auto& timer : ctrl_.take_pending_timers()) {
            const auto it = flow_index_.find(timer.key);
            if (it == flow_index_.end()) continue;
            schedule(timer.time,
                     timer.kind == PendingTimer::Kind::epoch_check ? EvKind::ctrl_epoch
                                                                   : EvKind::ctrl_expiry,
                     it->second, timer.generation);
        }
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EvKind::flow_start: on_flow_start(ev.a); break;
            case EvKind::pre_emit_fwd: on_pre_emit(ev.a, static_cast<std::size_t>(ev.b), false); break;
            case EvKind::pre_emit_bwd: on_pre_emit(ev.a, static_cast<std::size_t>(ev.b), true); break;
            case EvKind::steady_start: on_steady_start(ev.a); break;
            case EvKind::cbr_emit: on_cbr_emit(ev.a, static_cast<std::uint64_t>(ev.b)); break;
            case EvKind::burst_toggle: on_burst_toggle(ev.a); break;
            case EvKind::packet_arrival: on_arrival(ev.pkt, ev.a); break;
            case EvKind::packet_out: enqueue_on_link(ev.pkt, static_cast<int>(ev.b), ev.a); break;
            case EvKind::transmit_complete: on_transmit_complete(ev.a); break;
            case EvKind::ack_arrival: on_ack(ev.a, static_cast<std::uint64_t>(ev.b), ev.pkt.sent_ts); break;
            case EvKind::rto_check: on_rto(ev.a, static_cast<std::uint64_t>(ev.b)); break;
            case EvKind::probe_sweep: on_probe_sweep(); break;
            case EvKind::ctrl_epoch: on_ctrl_epoch(ev.a, static_cast<int>(ev.b)); break;
            case EvKind::ctrl_expiry:
                ctrl_.on_expiry_timer(flows_[static_cast<std::size_t>(ev.a)].key,
                                      static_cast<int>(ev.b), now_);
                break;
            case EvKind::metrics_tick: on_metrics_tick(); break;
            case EvKind::flow_end: flows_[static_cast<std::size_t>(ev.a)].ended = true; break;
        }
    }

    // --- sources ---

    void on_flow_start(int fi) {
        FlowRuntime& f = flows_[static_cast<std::size_t>(fi)];
        f.started = true;
        if (f.spec.profile_index >= 0) {
            const auto& profiles = default_app_profiles();
            const auto& profile = profiles.at(static_cast<std::size_t>(f.spec.profile_index));
            Rng pre_rng = f.rng.fork(1);
            f.pre = sample_preamble(profile, pre_rng, ctrl_.config().n_observe);
            for (std::size_t i = 0; i < f.pre.fwd_offsets_s.size(); ++i) {
                schedule(now_ + f.pre.fwd_offsets_s[i], EvKind::pre_emit_fwd, fi,
                         static_cast<std::int64_t>(i));
            }
            for (std::size_t i = 0; i < f.pre.bwd_offsets_s.size(); ++i) {
                schedule(now_ + f.pre.bwd_offsets_s[i], EvKind::pre_emit_bwd, fi,
                         static_cast<std::int64_t>(i));
            }
            schedule(now_ + f.pre.span_s() + steady_gap(f), EvKind::steady_start, fi);
        } else {
            schedule(now_, EvKind::steady_start, fi);
        }
    }

    double steady_gap(const FlowRuntime& f) const {
        if (f.spec.kind == TrafficSpec::Kind::cbr && f.spec.rate_bps > 0.0) {
            return static_cast<double>(f.spec.packet_size_b) * 8.0 / f.spec.rate_bps;
        }
        return 0.001;
    }

    void on_pre_emit(int fi, std::size_t idx, bool backward) {
        FlowRuntime& f = flows_[static_cast<std::size_t>(fi)];
        if (f.ended) return;
        SimPacket pkt;
        pkt.flow = fi;
        pkt.dir = backward ? 1 : 0;
        pkt.preamble = 1;
        pkt.size_b = backward ? f.pre.bwd_sizes_b[idx] : f.pre.fwd_sizes_b[idx];
        pkt.seq = backward ? f.next_bwd_seq++ : f.next_fwd_seq++;
        emit_packet(f, pkt);
    }

    void on_steady_start(int fi) {
        FlowRuntime& f = flows_[static_cast<std::size_t>(fi)];
        if (f.ended) return;
        f.steady_started = true;
        if (f.spec.kind == TrafficSpec::Kind::cbr) {
            if (f.spec.rate_bps <= 0.0) return;
            if (f.spec.burst_on_max_s > 0.0) {
                f.cbr_on = true;
                schedule(now_ + f.rng.uniform(f.spec.burst_on_min_s, f.spec.burst_on_max_s),
                         EvKind::burst_toggle, fi);
            }
            schedule(now_, EvKind::cbr_emit, fi, static_cast<std::int64_t>(f.emit_gen));
        } else {
            aimd_try_send(fi);
        }
    }

    void on_cbr_emit(int fi, std::uint64_t gen) {
        FlowRuntime& f = flows_[static_cast<std::size_t>(fi)];
        if (f.ended || gen != f.emit_gen || !f.cbr_on) return;
        SimPacket pkt;
        pkt.flow = fi;
        pkt.dir = 0;
        pkt.size_b = f.spec.packet_size_b;
        pkt.seq = f.next_fwd_seq++;
        emit_packet(f, pkt);
        double iat = static_cast<double>(f.spec.packet_size_b) * 8.0 / f.spec.rate_bps;
        if (f.spec.iat_jitter_frac > 0.0) {
            iat *= 1.0 + f.spec.iat_jitter_frac * (2.0 * f.rng.uniform01() - 1.0);
        }
        schedule(now_ + iat, EvKind::cbr_emit, fi, static_cast<std::int64_t>(f.emit_gen));
    }

    void on_burst_toggle(int fi) {
        FlowRuntime& f = flows_[static_cast<std::size_t>(fi)];
        if (f.ended) return;
        f.cbr_on = !f.cbr_on;
        if (f.cbr_on) {
            ++f.emit_gen;
            schedule(now_, EvKind::cbr_emit, fi, static_cast<std::int64_t>(f.emit_gen));
            schedule(now_ + f.rng.uniform(f.spec.burst_on_min_s, f.spec.burst_on_max_s),
                     EvKind::burst_toggle, fi);
        } else {
            ++f.emit_gen; // invalidates the pending emit chain
            schedule(now_ + f.rng.uniform(f.spec.burst_off_min_s, f.spec.burst_off_max_s),
                     EvKind::burst_toggle, fi);
        }
    }

    void aimd_try_send(int fi) {
        FlowRuntime& f = flows_[static_cast<std::size_t>(fi)];
        if (f.ended || !f.steady_started) return;
        while (static_cast<double>(f.outstanding.size()) < std::floor(f.aimd.window_pkts)) {
            SimPacket pkt;
            pkt.flow = fi;
            pkt.dir = 0;
            pkt.size_b = f.spec.packet_size_b;
            pkt.seq = f.aimd.next_seq++;
            f.next_fwd_seq = f.aimd.next_seq;
            f.outstanding.emplace(pkt.seq, FlowRuntime::InFlight{now_, 0});
            emit_packet(f, pkt);
            schedule(now_ + f.aimd.rto_s(), EvKind::rto_check, fi,
                     static_cast<std::int64_t>(pkt.seq));
        }
    }

    void on_ack(int fi, std::uint64_t seq, double sent_ts) {
        FlowRuntime& f = flows_[static_cast<std::size_t>(fi)];
        const auto it = f.outstanding.find(seq);
        if (it == f.outstanding.end()) return; // declared lost earlier or duplicate
        f.outstanding.erase(it);
        aimd_on_ack(f.aimd, now_ - sent_ts);

        // gap detection: packets below an acked sequence are missing; three
        // later acks mark them lost without waiting for the timeout
        std::vector<std::uint64_t> lost;
        for (auto& [missing, state] : f.outstanding) {
            if (missing >= seq) break;
            if (++state.acks_beyond >= 3) lost.push_back(missing);
        }
        for (std::uint64_t missing : lost) {
            f.outstanding.erase(missing);
            aimd_on_loss(f.aimd, missing);
        }
        aimd_try_send(fi);
    }

    void on_rto(int fi, std::uint64_t seq) {
        FlowRuntime& f = flows_[static_cast<std::size_t>(fi)];
        const auto it = f.outstanding.find(seq);
        if (it == f.outstanding.end()) return;
        const double deadline = it->second.sent_ts + f.aimd.rto_s();
        if (now_ + 1e-12 < deadline) {
            schedule(deadline, EvKind::rto_check, fi, static_cast<std::int64_t>(seq));
            return;
        }
        f.outstanding.erase(it);
        aimd_on_loss(f.aimd, seq);
        aimd_try_send(fi);
    }

    // --- data plane ---

    void emit_packet(FlowRuntime& f, SimPacket& pkt) {
        pkt.sent_ts = now_;
        if (const ActiveFlowEntry* entry = ctrl_.find_entry(f.key)) {
            pkt.path_version = entry->path_version;
        }
        ++f.totals.sent;
        ++counters_.sent;
        if (pkt.dir == 0) {
            f.totals.fwd_sent_bytes += static_cast<std::uint64_t>(pkt.size_b);
            ++f.iv_sent;
        }
        const HostId from = pkt.dir == 0 ? f.spec.src_host : f.spec.dst_host;
        const int access = topo_.hosts[static_cast<std::size_t>(from)].access_link;
        enqueue_on_link(pkt, access, encode_host(from));
    }

    void enqueue_on_link(const SimPacket& pkt, int link, int from_node) {
        const int pi = port_from(link, from_node);
        Port& port = ports_[static_cast<std::size_t>(pi)];
        const Link& l = topo_.links[static_cast<std::size_t>(link)];
        if (!port.busy) {
            port.busy = true;
            port.in_transit = pkt;
            schedule(now_ + static_cast<double>(pkt.size_b) * 8.0 / l.capacity_bps,
                     EvKind::transmit_complete, pi);
            return;
        }
        if (port.backlog_bytes + pkt.size_b > cfg_.queue_limit_bytes) {
            drop_packet(pkt, /*queue_drop=*/true, link);
            return;
        }
        port.fifo.push_back(pkt);
        port.backlog_bytes += pkt.size_b;
    }

    void on_transmit_complete(int pi) {
        Port& port = ports_[static_cast<std::size_t>(pi)];
        const Link& l = topo_.links[static_cast<std::size_t>(pi / 2)];
        port.tx_bytes += port.in_transit.size_b;
        schedule(now_ + l.base_latency_s, EvKind::packet_arrival, port_dst_node(pi), 0,
                 port.in_transit);
        if (!port.fifo.empty()) {
            port.in_transit = port.fifo.front();
            port.fifo.pop_front();
            port.backlog_bytes -= port.in_transit.size_b;
            schedule(now_ + static_cast<double>(port.in_transit.size_b) * 8.0 / l.capacity_bps,
                     EvKind::transmit_complete, pi);
        } else {
            port.busy = false;
        }
    }

    void on_arrival(const SimPacket& pkt, int node) {
        FlowRuntime& f = flows_[static_cast<std::size_t>(pkt.flow)];
        if (is_host_node(node)) {
            deliver(f, pkt, host_of(node));
            return;
        }
        const int at_switch = node;

        if (!f.spec.pinned_switches.empty()) {
            if (const auto out = pinned_next_hop(f, at_switch, pkt.dir)) {
                enqueue_on_link(pkt, *out, at_switch);
            } else {
                drop_packet(pkt, false, -1);
            }
            return;
        }

        const Direction dir = pkt.dir == 0 ? Direction::forward : Direction::backward;
        if (const auto out = ctrl_.lookup_rule(at_switch, f.key, dir, now_)) {
            enqueue_on_link(pkt, *out, at_switch);
            return;
        }

        // Table miss: the switch hands the packet to the controller.
        PacketRecord rec;
        rec.timestamp = now_;
        rec.src_host = f.spec.src_host;
        rec.dst_host = f.spec.dst_host;
        rec.size_bytes = pkt.size_b;
        rec.flow_id = f.spec.flow_id;
        rec.direction = dir;
        rec.transport =
            f.spec.kind == TrafficSpec::Kind::aimd ? Transport::tcp : Transport::udp;
        const PacketInAction action = ctrl_.handle_packet_in(rec, at_switch, now_);
        if (action.kind == PacketInAction::Kind::forward) {
            SimPacket updated = pkt;
            if (const ActiveFlowEntry* entry = ctrl_.find_entry(f.key)) {
                updated.path_version = std::max(updated.path_version, entry->path_version);
            }
            // packet-out returns to the switch after a control round trip
            schedule(now_ + ctrl_.config().control_rtt_s, EvKind::packet_out, at_switch,
                     action.out_link, updated);
        } else {
            drop_packet(pkt, false, -1);
        }
    }

    std::optional<int> pinned_next_hop(const FlowRuntime& f, int at_switch, std::int8_t dir) const {
        const auto& sws = f.spec.pinned_switches;
        const auto it = std::find(sws.begin(), sws.end(), at_switch);
        if (it == sws.end()) return std::nullopt;
        const std::size_t pos = static_cast<std::size_t>(it - sws.begin());
        int next_node = -1;
        if (dir == 0) {
            next_node = pos + 1 < sws.size() ? sws[pos + 1]
                                             : encode_host(f.spec.dst_host);
        } else {
            next_node = pos > 0 ? sws[pos - 1] : encode_host(f.spec.src_host);
        }
        return find_link_between(at_switch, next_node);
    }

    std::optional<int> find_link_between(int sw_node, int to_node) const {
        for (std::size_t li = 0; li < topo_.links.size(); ++li) {
            const Link& l = topo_.links[li];
            const int na = node_of(l.a);
            const int nb = node_of(l.b);
            if ((na == sw_node && nb == to_node) || (nb == sw_node && na == to_node)) {
                return static_cast<int>(li);
            }
        }
        return std::nullopt;
    }

    void deliver(FlowRuntime& f, const SimPacket& pkt, HostId at_host) {
        const HostId expected = pkt.dir == 0 ? f.spec.dst_host : f.spec.src_host;
        if (at_host != expected) {
            drop_packet(pkt, false, -1); // misrouted; should not happen
            return;
        }
        ++f.totals.delivered;
        ++counters_.delivered;
        if (pkt.dir == 0) {
            if (f.any_delivered && pkt.seq < f.highest_delivered_seq) ++counters_.reorderings;
            f.any_delivered = true;
            f.highest_delivered_seq = std::max(f.highest_delivered_seq, pkt.seq);
            f.totals.fwd_delivered_bytes += static_cast<std::uint64_t>(pkt.size_b);
            ++f.iv_delivered;
            f.iv_delivered_bytes += static_cast<std::uint64_t>(pkt.size_b);
            f.iv_delay_sum += now_ - pkt.sent_ts;
            if (f.prev_arrival_ts >= 0.0) {
                const double iat = now_ - f.prev_arrival_ts;
                if (f.prev_iat >= 0.0) {
                    f.iv_absdiff_sum += std::abs(iat - f.prev_iat);
                    ++f.iv_diff_count;
                }
                f.prev_iat = iat;
            }
            f.prev_arrival_ts = now_;

            if (f.spec.kind == TrafficSpec::Kind::aimd && !pkt.preamble) {
                SimPacket ack;
                ack.sent_ts = pkt.sent_ts;
                schedule(now_ + ack_delay(f), EvKind::ack_arrival, pkt.flow,
                         static_cast<std::int64_t>(pkt.seq), ack);
            }
        }
    }

    double ack_delay(const FlowRuntime& f) const {
        double prop = 0.0;
        const auto access = [&](HostId h) {
            return topo_.links[static_cast<std::size_t>(topo_.hosts[static_cast<std::size_t>(h)].access_link)]
                .base_latency_s;
        };
        prop += access(f.spec.src_host) + access(f.spec.dst_host);
        if (!f.spec.pinned_switches.empty()) {
            for (std::size_t i = 0; i + 1 < f.spec.pinned_switches.size(); ++i) {
                if (const auto li = find_link_between(f.spec.pinned_switches[i],
                                                      f.spec.pinned_switches[i + 1])) {
                    prop += topo_.links[static_cast<std::size_t>(*li)].base_latency_s;
                }
            }
        } else if (const ActiveFlowEntry* entry = ctrl_.find_entry(f.key)) {
            for (int e : entry->current_path.edges) {
                prop += topo_.links[static_cast<std::size_t>(e)].base_latency_s;
            }
        } else {
            prop += 0.010;
        }
        return prop + 0.0005; // receiver turn-around
    }

    void drop_packet(const SimPacket& pkt, bool queue_drop, int at_link) {
        FlowRuntime& f = flows_[static_cast<std::size_t>(pkt.flow)];
        if (queue_drop) {
            ++f.totals.dropped_queue;
            ++counters_.dropped_queue;
        } else {
            ++f.totals.dropped_unreachable;
            ++counters_.dropped_unreachable;
        }
        if (pkt.dir == 0) ++f.iv_dropped;
        // loss attributable to a path switch: a packet with no route left
        // (black hole), or one emitted before a reroute that got redirected
        // onto the flow's new path and lost there. Congestion drops on the
        // packet's own old path would have happened without the switch.
        if (const ActiveFlowEntry* entry = ctrl_.find_entry(f.key)) {
            if (pkt.path_version < entry->path_version) {
                const auto& edges = entry->current_path.edges;
                const bool on_new_path =
                    at_link >= 0 && std::find(edges.begin(), edges.end(), at_link) != edges.end();
                if (!queue_drop || on_new_path) ++counters_.stale_path_drops;
            } else if (!queue_drop) {
                ++counters_.stale_path_drops; // unroutable on its current path
            }
        }
    }

    // --- control plane hooks ---

    void on_probe_sweep() {
        ctrl_.measure_and_refresh(now_);
        schedule(now_ + cfg_.probe_period_s, EvKind::probe_sweep, 0);
    }

    void on_ctrl_epoch(int fi, int generation) {
        FlowRuntime& f = flows_[static_cast<std::size_t>(fi)];
        ctrl_.on_epoch_timer(f.key, generation, now_, f.totals.fwd_delivered_bytes,
                             f.totals.fwd_sent_bytes);
    }

    // --- metrics ---

    void on_metrics_tick() {
        const double interval_end = now_;
        const double interval_start = interval_end - cfg_.metrics_interval_s;
        for (auto& f : flows_) {
            close_interval(f, interval_start);
        }
        if (cfg_.strict_invariants) conservation_sweep();
        if (interval_end + cfg_.metrics_interval_s <= cfg_.duration_s + 1e-9) {
            schedule(interval_end + cfg_.metrics_interval_s, EvKind::metrics_tick, 0);
        }
    }

    void close_interval(FlowRuntime& f, double interval_start) {
        const double flow_end = f.spec.start_s + f.spec.duration_s;
        const bool alive = f.spec.start_s < interval_start + cfg_.metrics_interval_s &&
                           flow_end > interval_start;
        if (alive) {
            IntervalMetrics iv;
            iv.start_s = interval_start;
            iv.throughput_bps =
                static_cast<double>(f.iv_delivered_bytes) * 8.0 / cfg_.metrics_interval_s;
            if (f.iv_diff_count >= 1 && f.iv_delivered >= 3) {
                iv.jitter_s = f.iv_absdiff_sum / static_cast<double>(f.iv_diff_count);
            }
            const std::uint64_t seen = f.iv_delivered + f.iv_dropped;
            iv.loss_frac = seen > 0 ? static_cast<double>(f.iv_dropped) / static_cast<double>(seen)
                                    : 0.0;
            if (f.iv_delivered > 0) iv.delay_s = f.iv_delay_sum / static_cast<double>(f.iv_delivered);
            iv.delivered_pkts = f.iv_delivered;
            iv.sent_pkts = f.iv_sent;
            iv.dropped_pkts = f.iv_dropped;
            f.intervals.push_back(iv);
        }
        f.iv_sent = f.iv_delivered = f.iv_dropped = 0;
        f.iv_delivered_bytes = 0;
        f.iv_delay_sum = f.iv_absdiff_sum = 0.0;
        f.iv_diff_count = 0;
        f.prev_arrival_ts = -1.0;
        f.prev_iat = -1.0;
    }

    // --- invariants ---

    void check_per_event_invariants() {
        const std::uint64_t accounted =
            counters_.delivered + counters_.dropped_queue + counters_.dropped_unreachable;
        if (accounted > counters_.sent) ++counters_.invariant_violations;
        // reservations only move on controller interactions; audit the ledger
        // whenever one happened since the last event
        const auto& st = ctrl_.stats();
        const std::uint64_t interactions = st.packet_ins + st.path_assignments + st.reroutes +
                                           st.epoch_keeps + st.expired_flows;
        if (interactions != last_ctrl_interactions_) {
            last_ctrl_interactions_ = interactions;
            if (ctrl_.reservation_audit() > 1.0) ++counters_.invariant_violations;
            for (const auto& l : ctrl_.links()) {
                if (l.reserved_bps[0] > l.capacity_bps + 1e-6 ||
                    l.reserved_bps[1] > l.capacity_bps + 1e-6) {
                    ++counters_.invariant_violations;
                }
            }
        }
    }

    void conservation_sweep() {
        std::uint64_t in_network = 0;
        for (const auto& port : ports_) {
            in_network += port.fifo.size() + (port.busy ? 1 : 0);
        }
        for (const auto& ev : queue_.container()) {
            if (ev.kind == EvKind::packet_arrival || ev.kind == EvKind::packet_out) ++in_network;
        }
        const std::uint64_t accounted = counters_.delivered + counters_.dropped_queue +
                                        counters_.dropped_unreachable + in_network;
        if (accounted != counters_.sent) ++counters_.invariant_violations;
        for (const auto& l : ctrl_.links()) {
            for (int d = 0; d < 2; ++d) {
                if (l.reserved_bps[static_cast<std::size_t>(d)] > l.capacity_bps + 1e-6) {
                    ++counters_.invariant_violations;
                }
            }
        }
    }

    void finalize() {
        // close the trailing partial interval if the run stopped between ticks
        std::uint64_t in_network = 0;
        for (const auto& port : ports_) {
            in_network += port.fifo.size() + (port.busy ? 1 : 0);
        }
        for (const auto& ev : queue_.container()) {
            if (ev.kind == EvKind::packet_arrival || ev.kind == EvKind::packet_out) ++in_network;
        }
        counters_.in_flight_at_end = in_network;
    }

    RunResult assemble_result() {
        RunResult result;
        result.counters = counters_;
        result.controller = ctrl_.stats();
        result.event_log = event_log_.str();
        result.flows.reserve(flows_.size());
        for (const auto& f : flows_) {
            FlowMetrics fm;
            fm.flow_id = f.spec.flow_id;
            fm.class_label = f.spec.class_label;
            fm.kind = f.spec.kind;
            fm.observable = f.spec.observable;
            fm.start_s = f.spec.start_s;
            fm.duration_s = f.spec.duration_s;
            fm.totals = f.totals;
            fm.intervals = f.intervals;
            result.flows.push_back(std::move(fm));
        }
        result.metrics_csv = render_csv(result.flows);
        return result;
    }

    static std::string render_csv(const std::vector<FlowMetrics>& flows) {
        std::ostringstream out;
        out << "interval_start,flow_id,class,throughput_bps,jitter_s,loss_frac,delay_s\n";
        // rows ordered by interval start, then flow id
        std::vector<std::pair<double, std::size_t>> starts;
        for (std::size_t i = 0; i < flows.size(); ++i) {
            for (const auto& iv : flows[i].intervals) starts.emplace_back(iv.start_s, i);
        }
        std::stable_sort(starts.begin(), starts.end(),
                         [&](const auto& x, const auto& y) {
                             if (x.first != y.first) return x.first < y.first;
                             return flows[x.second].flow_id < flows[y.second].flow_id;
                         });
        char buf[256];
        for (const auto& [start, fi] : starts) {
            const auto& f = flows[fi];
            const auto it = std::find_if(f.intervals.begin(), f.intervals.end(),
                                         [&](const IntervalMetrics& iv) { return iv.start_s == start; });
            std::snprintf(buf, sizeof(buf), "%.9g,%lld,%d,%.9g,%.9g,%.9g,%.9g\n", start,
                          static_cast<long long>(f.flow_id), f.class_label, it->throughput_bps,
                          it->jitter_s, it->loss_frac, it->delay_s);
            out << buf;
        }
        return out.str();
    }

    const Topology& topo_;
    Controller& ctrl_;
    SimConfig cfg_;

    EventQueue queue_;
    std::uint64_t next_order_ = 0;
    double now_ = 0.0;
    std::uint64_t last_ctrl_interactions_ = 0;

    std::vector<Port> ports_;
    std::vector<FlowRuntime> flows_;
    std::map<FlowKey, int> flow_index_;
    SimCounters counters_;
    std::ostringstream event_log_;
};

} // namespace

RunResult run_simulation(const Topology& topo, Controller& controller,
                         const std::vector<TrafficSpec>& traffic, const SimConfig& config,
                         std::uint64_t seed) {
    Simulator sim(topo, controller, traffic, config, seed);
    return sim.run();
}

} // namespace ampf
