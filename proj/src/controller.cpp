#include "ampf/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ampf {

ClassTable ClassTable::defaults() {
    ClassTable t;
    t.classes[0] = AppClass{1, 10e6, 0.020};
    t.classes[1] = AppClass{2, 5e6, 0.040};
    t.classes[2] = AppClass{3, 2e6, 0.060};
    t.classes[3] = AppClass{4, 1e6, std::numeric_limits<double>::infinity()};
    return t;
}

const AppClass& ClassTable::by_label(int label) const {
    if (label < 1 || label > kNumClasses) {
        throw std::invalid_argument("class label out of range: " + std::to_string(label));
    }
    return classes[static_cast<std::size_t>(label - 1)];
}

void PolicyConfig::validate() const {
    if (n_observe < 2) throw std::invalid_argument("policy: n_observe must be >= 2");
    if (k_paths < 1) throw std::invalid_argument("policy: k_paths must be >= 1");
    if (!(epoch_check_offset_s < hard_timeout_s)) {
        throw std::invalid_argument("policy: epoch_check_offset must be below hard_timeout");
    }
    for (int i = 0; i < kNumClasses; ++i) {
        if (classes.classes[static_cast<std::size_t>(i)].label != i + 1) {
            throw std::invalid_argument("policy: class table labels must be 1..4 in order");
        }
    }
}

Controller::Controller(const Topology& topo, PolicyConfig cfg, Mode mode,
                       std::optional<DecisionTree> tree, std::uint64_t seed,
                       std::function<double(int, int)> probe_fn, std::ostream* event_log)
    : topo_(topo),
      cfg_(cfg),
      mode_(mode),
      tree_(std::move(tree)),
      probe_fn_(std::move(probe_fn)),
      event_log_(event_log),
      rng_(splitmix64(seed ^ 0xa3c59ac2ULL)),
      links_(topo.links),
      rules_(static_cast<std::size_t>(topo.switch_count())) {
    cfg_.validate();
    topo_.validate();
    if (mode_ == Mode::aware && !tree_) {
        throw std::invalid_argument("aware mode needs a trained classifier");
    }
    cost_map_.lambda_a = cfg_.lambda_a;
    cost_map_.lambda_b = cfg_.lambda_b;
    cost_map_.refresh_epoch_s = cfg_.refresh_epoch_s;
    load_estimate_bps_.assign(links_.size(), {0.0, 0.0});
    load_snapshot_bytes_.assign(links_.size(), {0.0, 0.0});
    refresh_cost_map();
}

void Controller::refresh_cost_map() { cost_map_.recompute(links_, load_estimate_bps_); }

void Controller::update_load_estimates(double now) {
    if (!tx_bytes_fn_) return;
    if (last_load_sweep_s_ < 0.0) {
        for (std::size_t li = 0; li < links_.size(); ++li) {
            load_snapshot_bytes_[li] = {tx_bytes_fn_(static_cast<int>(li), 0),
                                        tx_bytes_fn_(static_cast<int>(li), 1)};
        }
        last_load_sweep_s_ = now;
        return;
    }
    const double elapsed = now - last_load_sweep_s_;
    if (elapsed < 1.0) return; // too short a window for a meaningful rate
    for (std::size_t li = 0; li < links_.size(); ++li) {
        if (!links_[li].inter_switch()) continue;
        for (int d = 0; d < 2; ++d) {
            const double bytes = tx_bytes_fn_(static_cast<int>(li), d);
            const double rate =
                (bytes - load_snapshot_bytes_[li][static_cast<std::size_t>(d)]) * 8.0 / elapsed;
            load_snapshot_bytes_[li][static_cast<std::size_t>(d)] = bytes;
            double& est = load_estimate_bps_[li][static_cast<std::size_t>(d)];
            est = 0.5 * est + 0.5 * rate;
        }
    }
    last_load_sweep_s_ = now;
}

int Controller::attach_switch(HostId host) const {
    if (host < 0 || host >= static_cast<int>(topo_.hosts.size())) {
        throw std::invalid_argument("unknown host id");
    }
    return topo_.hosts[static_cast<std::size_t>(host)].attach_switch;
}

void Controller::measure_and_refresh(double now) {
    update_load_estimates(now);
    if (probe_fn_) {
        for (std::size_t li = 0; li < links_.size(); ++li) {
            if (!links_[li].inter_switch()) continue;
            for (int d = 0; d < 2; ++d) {
                const double traversal = probe_fn_(static_cast<int>(li), d);
                const double t_s1 = cfg_.control_rtt_s;
                const double t_s2 = cfg_.control_rtt_s;
                const double t_total = t_s1 / 2.0 + traversal + t_s2 / 2.0;
                if (auto latency = latency_from_probes(t_total, t_s1, t_s2)) {
                    // smooth the estimate so a single sawtooth trough or
                    // spike does not reorder the cost map
                    double& est = links_[li].measured_latency_s[static_cast<std::size_t>(d)];
                    est = 0.5 * est + 0.5 * *latency;
                } // inconsistent probe: previous value retained
            }
        }
    }
    refresh_cost_map();
}

std::vector<Path> Controller::k_paths_between(int src_switch, int dst_switch) {
    if (cost_map_.stale) refresh_cost_map();
    Topology snapshot = topo_;
    snapshot.links = links_; // pathfinding reads AB/latency from the ledger
    return yen_ksp(snapshot, cost_map_, src_switch, dst_switch, cfg_.k_paths);
}

std::optional<Path> Controller::provisional_path(int src_switch, int dst_switch, double now) {
    measure_and_refresh(now);
    const auto ks = k_paths_between(src_switch, dst_switch);
    if (ks.empty()) return std::nullopt;
    return ks[(ks.size() - 1) / 2]; // median by cost, lower median
}

std::vector<Path> Controller::feasible_paths(const std::vector<Path>& paths, const AppClass& cls) {
    std::vector<Path> out;
    for (const auto& p : paths) {
        if (p.bottleneck_ab_bps < cls.min_bw_bps) continue;
        if (!cls.best_effort() && p.total_latency_s > cls.acceptable_delay_s) continue;
        out.push_back(p);
    }
    return out;
}

std::size_t Controller::selected_index(int class_label, std::size_t n_feasible) {
    if (n_feasible == 0) throw std::invalid_argument("selected_index: empty feasible set");
    const double class_interval = static_cast<double>(n_feasible) / kNumClasses;
    const auto idx = static_cast<std::size_t>(std::floor((class_label - 1) * class_interval));
    return std::min(idx, n_feasible - 1);
}

bool Controller::reserve_on(const Path& path, double amount,
                            std::vector<std::pair<int, int>>& reserved_out) {
    reserved_out.clear();
    for (std::size_t i = 0; i < path.edges.size(); ++i) {
        const int e = path.edges[i];
        Link& link = links_[static_cast<std::size_t>(e)];
        const int dir = link.direction_from(path.switches[i]);
        if (!reserve_bw(link, dir, amount)) {
            for (const auto& [re, rd] : reserved_out) {
                release_bw(links_[static_cast<std::size_t>(re)], rd, amount);
            }
            reserved_out.clear();
            return false;
        }
        reserved_out.emplace_back(e, dir);
    }
    return true;
}

void Controller::release_reservations(ActiveFlowEntry& entry) {
    for (const auto& [e, dir] : entry.reserved_edges) {
        release_bw(links_[static_cast<std::size_t>(e)], dir, entry.reserved_bps);
    }
    if (!entry.reserved_edges.empty()) cost_map_.stale = true;
    entry.reserved_edges.clear();
    entry.reserved_bps = 0.0;
}

std::optional<std::size_t> Controller::assign_path(ActiveFlowEntry& entry, const AppClass& cls,
                                                   const std::vector<Path>& feasible, double now) {
    if (feasible.empty()) throw std::invalid_argument("assign_path: empty feasible set");
    release_reservations(entry);
    for (std::size_t idx = selected_index(cls.label, feasible.size()); idx < feasible.size(); ++idx) {
        std::vector<std::pair<int, int>> reserved;
        if (!reserve_on(feasible[idx], cls.min_bw_bps, reserved)) continue;
        entry.reserved_edges = std::move(reserved);
        entry.reserved_bps = cls.min_bw_bps;
        entry.fallback = false;
        entry.current_path = feasible[idx];
        entry.path_version++;
        cost_map_.stale = true;
        const int priority = kClassifiedPriorityBase + entry.assign_count++;
        install_path_rules(entry, entry.current_path, priority, now, false, false);
        schedule_flow_timers(entry, now, true);
        ++stats_.path_assignments;
        return idx;
    }
    return std::nullopt;
}

void Controller::classify_and_assign(ActiveFlowEntry& entry, double now) {
    const FeatureVector fv = extract_features(entry.record);
    entry.class_label = tree_->predict(fv);
    entry.provisional = false;
    ++stats_.classifications;
    log_event(now, "classified", entry.key, entry.class_label, nullptr, "observation-complete");

    const AppClass& cls = cfg_.classes.by_label(entry.class_label);
    measure_and_refresh(now);
    const int src_sw = attach_switch(entry.key.src_host);
    const int dst_sw = attach_switch(entry.key.dst_host);
    const auto ks = k_paths_between(src_sw, dst_sw);
    if (ks.empty()) {
        log_event(now, "assign-failed", entry.key, entry.class_label, nullptr, "disconnected");
        return; // keep running on provisional rules
    }
    const auto feasible = feasible_paths(ks, cls);
    std::optional<std::size_t> chosen;
    if (!feasible.empty()) chosen = assign_path(entry, cls, feasible, now);
    if (!chosen) {
        // No feasible path (or every reservation refused): admit best effort
        // on the cheapest of the K without reserving.
        release_reservations(entry);
        entry.fallback = true;
        entry.current_path = ks.front();
        entry.path_version++;
        const int priority = kClassifiedPriorityBase + entry.assign_count++;
        install_path_rules(entry, entry.current_path, priority, now, false, false);
        schedule_flow_timers(entry, now, true);
        ++stats_.fallbacks;
        ++stats_.path_assignments;
        log_event(now, "path-assigned", entry.key, entry.class_label, &entry.current_path,
                  "fallback-no-feasible");
        return;
    }
    log_event(now, "path-assigned", entry.key, entry.class_label, &entry.current_path,
              "feasible-index-" + std::to_string(*chosen));
}

void Controller::assign_random_path(ActiveFlowEntry& entry, double now) {
    measure_and_refresh(now);
    const int src_sw = attach_switch(entry.key.src_host);
    const int dst_sw = attach_switch(entry.key.dst_host);
    const auto ks = k_paths_between(src_sw, dst_sw);
    if (ks.empty()) {
        log_event(now, "assign-failed", entry.key, entry.class_label, nullptr, "disconnected");
        return;
    }
    entry.current_path = ks[rng_.uniform_int(ks.size())];
    entry.path_version++;
    entry.provisional = false;
    const int priority = kClassifiedPriorityBase + entry.assign_count++;
    install_path_rules(entry, entry.current_path, priority, now, false, false);
    schedule_flow_timers(entry, now, true);
    ++stats_.path_assignments;
    log_event(now, "path-assigned", entry.key, entry.class_label, &entry.current_path, "random");
}

std::optional<int> Controller::next_hop_on_path(const Path& path, int at_switch, Direction dir,
                                                const FlowKey& key) const {
    const auto& sw = path.switches;
    const auto it = std::find(sw.begin(), sw.end(), at_switch);
    if (it == sw.end()) return std::nullopt;
    const std::size_t pos = static_cast<std::size_t>(it - sw.begin());
    if (dir == Direction::forward) {
        if (pos + 1 < sw.size()) return path.edges[pos];
        return topo_.hosts[static_cast<std::size_t>(key.dst_host)].access_link;
    }
    if (pos > 0) return path.edges[pos - 1];
    return topo_.hosts[static_cast<std::size_t>(key.src_host)].access_link;
}

void Controller::install_path_rules(ActiveFlowEntry& entry, const Path& path, int priority,
                                    double now, bool skip_fwd_source, bool skip_bwd_source) {
    const auto& sw = path.switches;
    for (std::size_t i = 0; i < sw.size(); ++i) {
        const int s = sw[i];
        if (!(skip_fwd_source && i == 0)) {
            FlowRule r;
            r.switch_id = s;
            r.match = entry.key;
            r.dir = Direction::forward;
            r.out_link = *next_hop_on_path(path, s, Direction::forward, entry.key);
            r.priority = priority;
            r.hard_timeout_s = cfg_.hard_timeout_s;
            r.install_ts = now;
            rules_[static_cast<std::size_t>(s)].push_back(r);
        }
        if (!(skip_bwd_source && i + 1 == sw.size())) {
            FlowRule r;
            r.switch_id = s;
            r.match = entry.key;
            r.dir = Direction::backward;
            r.out_link = *next_hop_on_path(path, s, Direction::backward, entry.key);
            r.priority = priority;
            r.hard_timeout_s = cfg_.hard_timeout_s;
            r.install_ts = now;
            rules_[static_cast<std::size_t>(s)].push_back(r);
        }
    }
    entry.last_install_ts = now;
    entry.active = true;
}

void Controller::schedule_flow_timers(ActiveFlowEntry& entry, double now, bool with_epoch) {
    entry.generation++;
    if (with_epoch) {
        pending_timers_.push_back(PendingTimer{
            now + cfg_.hard_timeout_s - cfg_.epoch_check_offset_s, PendingTimer::Kind::epoch_check,
            entry.key, entry.generation});
    }
    pending_timers_.push_back(PendingTimer{now + cfg_.hard_timeout_s,
                                           PendingTimer::Kind::rule_expiry, entry.key,
                                           entry.generation});
}

std::vector<PendingTimer> Controller::take_pending_timers() {
    auto out = std::move(pending_timers_);
    pending_timers_.clear();
    return out;
}

PacketInAction Controller::forward_from(const ActiveFlowEntry& entry, int at_switch, Direction dir,
                                        double now) {
    if (auto hop = next_hop_on_path(entry.current_path, at_switch, dir, entry.key)) {
        return PacketInAction{PacketInAction::Kind::forward, *hop};
    }
    // Rescue: the packet sits on a switch that is not part of the current
    // path (stale rules vanished mid-flight). Route it toward the remaining
    // endpoint over the current cost map, one packet-out at a time.
    const HostId to_host = dir == Direction::forward ? entry.key.dst_host : entry.key.src_host;
    const int dst_sw = attach_switch(to_host);
    if (at_switch == dst_sw) {
        return PacketInAction{PacketInAction::Kind::forward,
                              topo_.hosts[static_cast<std::size_t>(to_host)].access_link};
    }
    if (cost_map_.stale) refresh_cost_map();
    Topology snapshot = topo_;
    snapshot.links = links_;
    if (auto p = dijkstra(snapshot, cost_map_, at_switch, dst_sw); p && !p->edges.empty()) {
        return PacketInAction{PacketInAction::Kind::forward, p->edges.front()};
    }
    ++stats_.unreachable_drops;
    log_event(now, "drop-unreachable", entry.key, entry.class_label, nullptr, "no-route");
    return PacketInAction{PacketInAction::Kind::drop_unreachable, -1};
}

PacketInAction Controller::handle_packet_in(const PacketRecord& pkt, int at_switch, double now) {
    ++stats_.packet_ins;
    const FlowKey key{pkt.src_host, pkt.dst_host, pkt.flow_id};
    auto it = entries_.find(key);

    if (it == entries_.end()) {
        ActiveFlowEntry entry;
        entry.key = key;
        entry.transport = pkt.transport;
        entry.record = FlowRecord::fresh(key);

        const int src_sw = attach_switch(key.src_host);
        const int dst_sw = attach_switch(key.dst_host);

        if (mode_ == Mode::unaware) {
            it = entries_.emplace(key, std::move(entry)).first;
            log_event(now, "flow-new", key, 0, nullptr, "unaware");
            assign_random_path(it->second, now);
            if (it->second.current_path.switches.empty()) {
                ++stats_.unreachable_drops;
                return PacketInAction{PacketInAction::Kind::drop_unreachable, -1};
            }
            return forward_from(it->second, at_switch, pkt.direction, now);
        }

        auto prov = provisional_path(src_sw, dst_sw, now);
        if (!prov) {
            ++stats_.unreachable_drops;
            log_event(now, "drop-unreachable", key, 0, nullptr, "no-provisional-path");
            return PacketInAction{PacketInAction::Kind::drop_unreachable, -1};
        }
        entry.current_path = *prov;
        entry.path_version = 1;
        entry.record = update_flow(std::move(entry.record), pkt);
        if (pkt.direction == Direction::forward) entry.packets_observed = 1;
        it = entries_.emplace(key, std::move(entry)).first;
        // The source switch keeps no rule while the flow is provisional, so
        // every packet of the new flow keeps coming to the controller.
        install_path_rules(it->second, it->second.current_path, kProvisionalPriority, now,
                           /*skip_fwd_source=*/true, /*skip_bwd_source=*/true);
        schedule_flow_timers(it->second, now, false);
        log_event(now, "flow-new", key, 0, &it->second.current_path, "provisional");
        return forward_from(it->second, at_switch, pkt.direction, now);
    }

    ActiveFlowEntry& entry = it->second;

    if (mode_ == Mode::unaware) {
        if (!entry.active) {
            assign_random_path(entry, now); // rules lapsed while the flow idled
        }
        return forward_from(entry, at_switch, pkt.direction, now);
    }

    if (entry.provisional) {
        entry.record = update_flow(std::move(entry.record), pkt);
        if (pkt.direction == Direction::forward) ++entry.packets_observed;
        if (!entry.active) { // provisional rules lapsed before enough packets arrived
            install_path_rules(entry, entry.current_path, kProvisionalPriority, now, true, true);
            schedule_flow_timers(entry, now, false);
        }
        if (entry.packets_observed >= static_cast<std::uint64_t>(cfg_.n_observe)) {
            classify_and_assign(entry, now);
        }
        return forward_from(entry, at_switch, pkt.direction, now);
    }

    // Classified already: either a packet raced the rule install, or the
    // flow went idle long enough for its rules to expire and is now back.
    if (!entry.active) {
        const AppClass& cls = cfg_.classes.by_label(entry.class_label);
        measure_and_refresh(now);
        const auto ks = k_paths_between(attach_switch(key.src_host), attach_switch(key.dst_host));
        const auto feasible = feasible_paths(ks, cls);
        std::optional<std::size_t> chosen;
        if (!feasible.empty()) chosen = assign_path(entry, cls, feasible, now);
        if (!chosen && !ks.empty()) {
            entry.fallback = true;
            entry.current_path = ks.front();
            entry.path_version++;
            install_path_rules(entry, entry.current_path,
                               kClassifiedPriorityBase + entry.assign_count++, now, false, false);
            schedule_flow_timers(entry, now, true);
        }
        log_event(now, "readmitted", key, entry.class_label, &entry.current_path, "idle-return");
    }
    return forward_from(entry, at_switch, pkt.direction, now);
}

std::optional<int> Controller::lookup_rule(int at_switch, const FlowKey& key, Direction dir,
                                           double now) const {
    if (at_switch < 0 || at_switch >= topo_.switch_count()) return std::nullopt;
    const FlowRule* best = nullptr;
    for (const auto& r : rules_[static_cast<std::size_t>(at_switch)]) {
        if (r.match != key || r.dir != dir) continue;
        if (now >= r.expiry()) continue; // hard timeout, boundary inclusive
        if (!best || r.priority > best->priority ||
            (r.priority == best->priority && r.install_ts > best->install_ts)) {
            best = &r;
        }
    }
    if (!best) return std::nullopt;
    return best->out_link;
}

EpochDecision Controller::epoch_check(const FlowKey& key, double measured_throughput_bps,
                                      double now) {
    auto it = entries_.find(key);
    if (it == entries_.end() || !it->second.active) return EpochDecision::ended;
    ActiveFlowEntry& entry = it->second;
    entry.achieved_throughput_bps = measured_throughput_bps;

    if (mode_ == Mode::unaware) {
        // No class knowledge: the flow is simply re-placed at random before
        // its rules expire.
        assign_random_path(entry, now);
        ++stats_.reroutes;
        log_event(now, "epoch-reroute", key, 0, &entry.current_path, "unaware-replacement");
        return EpochDecision::reroute;
    }

    const AppClass& cls = cfg_.classes.by_label(entry.class_label);
    const bool bandwidth_checked = entry.transport == Transport::tcp;
    if (!bandwidth_checked || measured_throughput_bps >= cls.min_bw_bps) {
        // Same rules, same priority, fresh timeout.
        install_path_rules(entry, entry.current_path,
                           kClassifiedPriorityBase + entry.assign_count - 1, now, false, false);
        schedule_flow_timers(entry, now, true);
        ++stats_.epoch_keeps;
        log_event(now, "epoch-keep", key, entry.class_label, &entry.current_path,
                  bandwidth_checked ? "throughput-ok" : "jitter-class");
        return EpochDecision::keep;
    }

    // Under-supplied: rebuild the feasible set over fresh measurements and
    // place the flow again before the old rules lapse.
    release_reservations(entry);
    measure_and_refresh(now);
    const auto ks = k_paths_between(attach_switch(key.src_host), attach_switch(key.dst_host));
    const auto feasible = feasible_paths(ks, cls);
    std::optional<std::size_t> chosen;
    if (!feasible.empty()) chosen = assign_path(entry, cls, feasible, now);
    if (!chosen) {
        if (ks.empty()) {
            log_event(now, "assign-failed", key, entry.class_label, nullptr, "disconnected");
            return EpochDecision::ended;
        }
        entry.fallback = true;
        entry.current_path = ks.front();
        entry.path_version++;
        install_path_rules(entry, entry.current_path,
                           kClassifiedPriorityBase + entry.assign_count++, now, false, false);
        schedule_flow_timers(entry, now, true);
        ++stats_.fallbacks;
    }
    entry.reroute_count++;
    ++stats_.reroutes;
    log_event(now, "epoch-reroute", key, entry.class_label, &entry.current_path,
              "throughput-below-min");
    return EpochDecision::reroute;
}

void Controller::on_epoch_timer(const FlowKey& key, int generation, double now,
                                std::uint64_t delivered_bytes_fwd, std::uint64_t sent_bytes_fwd) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return;
    ActiveFlowEntry& entry = it->second;
    if (generation != entry.generation || !entry.active) return; // stale timer

    const bool traffic_seen = sent_bytes_fwd > entry.sent_bytes_at_check;
    const double elapsed = now - entry.last_check_ts;
    const double measured =
        elapsed > 0.0
            ? static_cast<double>(delivered_bytes_fwd - entry.delivered_bytes_at_check) * 8.0 / elapsed
            : 0.0;
    entry.last_check_ts = now;
    entry.delivered_bytes_at_check = delivered_bytes_fwd;
    entry.sent_bytes_at_check = sent_bytes_fwd;

    if (!traffic_seen) {
        // Flow has gone quiet; let the rules expire and reclaim on expiry.
        log_event(now, "epoch-idle", key, entry.class_label, nullptr, "no-traffic");
        return;
    }
    epoch_check(key, measured, now);
}

void Controller::remove_expired_rules(const FlowKey& key, double now) {
    for (auto& table : rules_) {
        std::erase_if(table, [&](const FlowRule& r) { return r.match == key && now >= r.expiry(); });
    }
}

void Controller::on_expiry_timer(const FlowKey& key, int generation, double now) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return;
    ActiveFlowEntry& entry = it->second;
    remove_expired_rules(key, now);
    if (generation != entry.generation) return; // refreshed since; newer rules live on
    release_reservations(entry);
    entry.active = false;
    ++stats_.expired_flows;
    log_event(now, "rules-expired", key, entry.class_label, nullptr, "hard-timeout");
}

const ActiveFlowEntry* Controller::find_entry(const FlowKey& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::size_t Controller::rule_count() const {
    std::size_t n = 0;
    for (const auto& t : rules_) n += t.size();
    return n;
}

double Controller::reservation_audit() const {
    std::vector<std::array<double, 2>> per_link(links_.size(), {0.0, 0.0});
    for (const auto& [key, entry] : entries_) {
        for (const auto& [e, dir] : entry.reserved_edges) {
            per_link[static_cast<std::size_t>(e)][static_cast<std::size_t>(dir)] +=
                entry.reserved_bps;
        }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < links_.size(); ++i) {
        for (int d = 0; d < 2; ++d) {
            worst = std::max(worst, std::abs(per_link[i][static_cast<std::size_t>(d)] -
                                             links_[i].reserved_bps[static_cast<std::size_t>(d)]));
        }
    }
    return worst;
}

std::string Controller::flow_text(const FlowKey& key) const {
    std::ostringstream out;
    const auto name = [&](HostId h) -> std::string {
        if (h >= 0 && h < static_cast<int>(topo_.hosts.size())) {
            return topo_.hosts[static_cast<std::size_t>(h)].name;
        }
        return "h?" + std::to_string(h);
    };
    out << name(key.src_host) << '>' << name(key.dst_host) << '#' << key.flow_id;
    return out.str();
}

std::string Controller::path_text(const Path& path) const {
    if (path.switches.empty()) return "-";
    std::string out;
    for (std::size_t i = 0; i < path.switches.size(); ++i) {
        if (i) out += '-';
        out += topo_.switch_names[static_cast<std::size_t>(path.switches[i])];
    }
    return out;
}

void Controller::log_event(double now, const std::string& kind, const FlowKey& key,
                           int class_label, const Path* path, const std::string& reason) {
    if (!event_log_) return;
    char head[64];
    std::snprintf(head, sizeof(head), "t=%.9f", now);
    *event_log_ << head << " ev=" << kind << " flow=" << flow_text(key)
                << " class=" << class_label << " path=" << (path ? path_text(*path) : "-")
                << " reason=" << reason << '\n';
}

} // namespace ampf
