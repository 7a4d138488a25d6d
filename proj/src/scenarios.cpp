#include "ampf/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ampf {

namespace {

// profile indices in default_app_profiles()
constexpr int kSkype = 0;
constexpr int kYoutube = 1;
constexpr int kFacebook = 4;
constexpr int kDropbox = 5;
constexpr int kFilezilla = 7;

constexpr std::array<int, kNumClasses> kObsProfile = {kSkype, kYoutube, kFacebook, kDropbox};

// flow id blocks; the reporters group by these
constexpr std::int64_t kUdpFwdBase = 10;  // 11..14
constexpr std::int64_t kUdpRevBase = 20;  // 21..24
constexpr std::int64_t kTcpFwdBase = 30;  // 31..34
constexpr std::int64_t kTcpRevBase = 40;  // 41..44
constexpr std::int64_t kLateFlowId = 51;
constexpr std::int64_t kBgFwdBase = 100;  // 101..104
constexpr std::int64_t kBgRevBase = 110;  // 111..114
constexpr std::int64_t kPinnedBase = 200;

} // namespace

Topology default_topology() {
    std::istringstream text(
        "switch s1\n"
        "switch s2\n"
        "switch s3\n"
        "switch s4\n"
        "switch s5\n"
        "host h1 s1\n"
        "host h2 s5\n"
        "link h1 s1 1e9 0.00005\n"
        "link h2 s5 1e9 0.00005\n"
        "link s1 s5 32e6 0.004\n"
        "link s1 s2 32e6 0.002\n"
        "link s2 s5 32e6 0.005\n"
        "link s1 s3 32e6 0.008\n"
        "link s3 s5 32e6 0.008\n"
        "link s1 s4 32e6 0.004\n"
        "link s4 s5 32e6 0.030\n"
        "link s2 s3 32e6 0.006\n"
        "link s3 s4 32e6 0.006\n");
    return Topology::parse(text);
}

std::vector<std::string> scenario_names() {
    return {"udp-jitter", "tcp-throughput", "mixed-throughput", "mixed-jitter",
            "late-flow", "forced-reroute"};
}

namespace {

TrafficSpec udp_observable(int cls, bool reverse, double start, std::uint64_t sub_seed) {
    TrafficSpec t;
    t.kind = TrafficSpec::Kind::cbr;
    t.class_label = cls;
    t.src_host = reverse ? 1 : 0;
    t.dst_host = reverse ? 0 : 1;
    t.flow_id = (reverse ? kUdpRevBase : kUdpFwdBase) + cls;
    t.rate_bps = 2e6;
    t.packet_size_b = 1250;
    t.start_s = start;
    t.duration_s = 1000.0;
    t.rng_seed = sub_seed;
    t.profile_index = kObsProfile[static_cast<std::size_t>(cls - 1)];
    t.observable = true;
    return t;
}

TrafficSpec tcp_observable(int cls, bool reverse, double start, std::uint64_t sub_seed) {
    TrafficSpec t;
    t.kind = TrafficSpec::Kind::aimd;
    t.class_label = cls;
    t.src_host = reverse ? 1 : 0;
    t.dst_host = reverse ? 0 : 1;
    t.flow_id = (reverse ? kTcpRevBase : kTcpFwdBase) + cls;
    t.packet_size_b = 1500;
    t.start_s = start;
    t.duration_s = 1000.0;
    t.rng_seed = sub_seed;
    t.profile_index = kObsProfile[static_cast<std::size_t>(cls - 1)];
    t.observable = true;
    return t;
}

struct BgShape {
    int cls;
    int profile;
    double light_peak_bps;
    double heavy_peak_bps;
};

// Four background senders per direction: a class-2, a class-3 and two class-4
// bulk flows, duty-cycled and dithered so their bursts congest whichever path
// carries them. The jitter experiment runs them lighter than the throughput
// experiments, matching the lightly/heavily loaded experiment split.
const std::array<BgShape, 4>& bg_shapes() {
    static const std::array<BgShape, 4> shapes = {{
        {2, kYoutube, 16e6, 26e6},
        {3, kFacebook, 24e6, 30e6},
        {4, kDropbox, 15e6, 22e6},
        {4, kFilezilla, 15e6, 22e6},
    }};
    return shapes;
}

TrafficSpec background(int slot, bool reverse, bool heavy, double start,
                       std::uint64_t sub_seed) {
    const BgShape& shape = bg_shapes()[static_cast<std::size_t>(slot)];
    TrafficSpec t;
    t.kind = TrafficSpec::Kind::cbr;
    t.class_label = shape.cls;
    t.src_host = reverse ? 1 : 0;
    t.dst_host = reverse ? 0 : 1;
    t.flow_id = (reverse ? kBgRevBase : kBgFwdBase) + slot + 1;
    t.rate_bps = heavy ? shape.heavy_peak_bps : shape.light_peak_bps;
    t.packet_size_b = 1250;
    t.start_s = start;
    t.duration_s = 1000.0;
    t.rng_seed = sub_seed;
    t.profile_index = shape.profile;
    t.burst_on_min_s = 3.0;
    t.burst_on_max_s = 9.0;
    t.burst_off_min_s = 3.0;
    t.burst_off_max_s = 9.0;
    t.iat_jitter_frac = 0.3;
    t.observable = false;
    return t;
}

void add_background(std::vector<TrafficSpec>& out, Rng& rng, bool heavy) {
    for (int rev = 0; rev < 2; ++rev) {
        for (int slot = 0; slot < 4; ++slot) {
            out.push_back(
                background(slot, rev == 1, heavy, rng.uniform(0.0, 5.0), rng.next_u64()));
        }
    }
}

void add_udp_observables(std::vector<TrafficSpec>& out, Rng& rng) {
    for (int rev = 0; rev < 2; ++rev) {
        for (int cls = 1; cls <= kNumClasses; ++cls) {
            out.push_back(udp_observable(cls, rev == 1, rng.uniform(5.0, 30.0), rng.next_u64()));
        }
    }
}

void add_tcp_observables(std::vector<TrafficSpec>& out, Rng& rng) {
    for (int rev = 0; rev < 2; ++rev) {
        for (int cls = 1; cls <= kNumClasses; ++cls) {
            out.push_back(tcp_observable(cls, rev == 1, rng.uniform(5.0, 30.0), rng.next_u64()));
        }
    }
}

} // namespace

std::vector<TrafficSpec> build_scenario(const std::string& name, const Topology& topo,
                                        Rng& run_rng) {
    std::vector<TrafficSpec> traffic;
    if (name == "udp-jitter") {
        add_background(traffic, run_rng, /*heavy=*/false);
        add_udp_observables(traffic, run_rng);
    } else if (name == "tcp-throughput") {
        add_background(traffic, run_rng, /*heavy=*/true);
        add_tcp_observables(traffic, run_rng);
    } else if (name == "mixed-throughput" || name == "mixed-jitter") {
        add_background(traffic, run_rng, /*heavy=*/true);
        add_tcp_observables(traffic, run_rng);
        add_udp_observables(traffic, run_rng);
    } else if (name == "late-flow") {
        // the eight TCP flows keep every path busy; the newcomer has to be
        // placed where its guarantee actually holds
        add_tcp_observables(traffic, run_rng);
        add_udp_observables(traffic, run_rng);
        TrafficSpec late = tcp_observable(1, false, 450.0, run_rng.next_u64());
        late.flow_id = kLateFlowId;
        late.duration_s = 550.0;
        traffic.push_back(late);
    } else if (name == "forced-reroute") {
        // One premium TCP flow settles onto the cheapest path, then a static
        // flood saturates that path so the epoch audit must move the flow.
        TrafficSpec victim = tcp_observable(1, false, 1.0, run_rng.next_u64());
        traffic.push_back(victim);
        const int s1 = topo.find_switch("s1");
        const int s5 = topo.find_switch("s5");
        for (int i = 0; i < 2; ++i) {
            TrafficSpec flood;
            flood.kind = TrafficSpec::Kind::cbr;
            flood.class_label = 4;
            flood.src_host = 0;
            flood.dst_host = 1;
            flood.flow_id = kPinnedBase + i + 1;
            flood.rate_bps = 17e6;
            flood.packet_size_b = 1250;
            flood.start_s = 100.0;
            flood.duration_s = 900.0;
            flood.rng_seed = run_rng.next_u64();
            flood.profile_index = -1;
            flood.pinned_switches = {s1, s5};
            flood.observable = false;
            traffic.push_back(flood);
        }
    } else {
        throw std::invalid_argument("unknown scenario: " + name);
    }
    return traffic;
}

DecisionTree train_default_classifier(int n_train, std::uint64_t seed, const TrainParams& params) {
    const auto examples = generate_traces(default_app_profiles(), n_train, seed);
    return train(examples, params);
}

ClassAggregate aggregate_by_class(const RunResult& result) {
    ClassAggregate agg;
    std::array<double, kNumClasses> jitter_sum{};
    std::array<double, kNumClasses> tcp_sum{};
    for (const auto& f : result.flows) {
        if (!f.observable || f.class_label < 1 || f.class_label > kNumClasses) continue;
        const auto c = static_cast<std::size_t>(f.class_label - 1);
        if (f.kind == TrafficSpec::Kind::cbr) {
            const double j = f.mean_jitter_s();
            if (!std::isnan(j)) {
                jitter_sum[c] += j;
                ++agg.udp_flows[c];
            }
        } else {
            tcp_sum[c] += f.long_run_throughput_bps();
            ++agg.tcp_flows[c];
        }
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (agg.udp_flows[c] > 0) agg.udp_mean_jitter_s[c] = jitter_sum[c] / agg.udp_flows[c];
        if (agg.tcp_flows[c] > 0) agg.tcp_longrun_bps[c] = tcp_sum[c] / agg.tcp_flows[c];
    }
    return agg;
}

namespace {

std::string render_summary(const ExperimentConfig& config, const RunResult& run,
                           const ClassAggregate& agg) {
    std::ostringstream out;
    out << "scenario=" << config.scenario << " mode="
        << (config.mode == Mode::aware ? "aware" : "unaware") << " seed=" << config.seed << "\n";
    out << "packets: sent=" << run.counters.sent << " delivered=" << run.counters.delivered
        << " dropped_queue=" << run.counters.dropped_queue
        << " dropped_unreachable=" << run.counters.dropped_unreachable
        << " in_flight_at_end=" << run.counters.in_flight_at_end
        << " stale_path_drops=" << run.counters.stale_path_drops << "\n";
    out << "controller: packet_ins=" << run.controller.packet_ins
        << " classifications=" << run.controller.classifications
        << " assignments=" << run.controller.path_assignments
        << " reroutes=" << run.controller.reroutes << " keeps=" << run.controller.epoch_keeps
        << " fallbacks=" << run.controller.fallbacks << "\n";
    char buf[160];
    for (int c = 1; c <= kNumClasses; ++c) {
        const auto i = static_cast<std::size_t>(c - 1);
        std::snprintf(buf, sizeof(buf),
                      "class %d: udp_mean_jitter_s=%.9g tcp_longrun_mbps=%.6g\n", c,
                      agg.udp_mean_jitter_s[i], agg.tcp_longrun_bps[i] / 1e6);
        out << buf;
    }
    return out.str();
}

// Per-interval means over the observable flows of each class, one row per
// (interval, class) with any defined values.
std::string render_class_series(const RunResult& run) {
    std::map<double, std::array<std::array<double, 4>, kNumClasses>> acc; // sums
    std::map<double, std::array<std::array<int, 4>, kNumClasses>> counts;
    for (const auto& f : run.flows) {
        if (!f.observable || f.class_label < 1 || f.class_label > kNumClasses) continue;
        const auto c = static_cast<std::size_t>(f.class_label - 1);
        for (const auto& iv : f.intervals) {
            auto& sums = acc[iv.start_s][c];
            auto& n = counts[iv.start_s][c];
            sums[0] += iv.throughput_bps;
            ++n[0];
            if (!std::isnan(iv.jitter_s)) {
                sums[1] += iv.jitter_s;
                ++n[1];
            }
            sums[2] += iv.loss_frac;
            ++n[2];
            if (!std::isnan(iv.delay_s)) {
                sums[3] += iv.delay_s;
                ++n[3];
            }
        }
    }
    std::ostringstream out;
    out << "interval_start,class,throughput_bps,jitter_s,loss_frac,delay_s\n";
    char buf[192];
    for (const auto& [start, per_class] : acc) {
        for (int c = 0; c < kNumClasses; ++c) {
            const auto& n = counts[start][static_cast<std::size_t>(c)];
            if (n[0] == 0) continue;
            const auto& sums = per_class[static_cast<std::size_t>(c)];
            const double nan = std::numeric_limits<double>::quiet_NaN();
            std::snprintf(buf, sizeof(buf), "%.9g,%d,%.9g,%.9g,%.9g,%.9g\n", start, c + 1,
                          sums[0] / n[0], n[1] ? sums[1] / n[1] : nan,
                          n[2] ? sums[2] / n[2] : nan, n[3] ? sums[3] / n[3] : nan);
            out << buf;
        }
    }
    return out.str();
}

} // namespace

void apply_kv_config(ExperimentConfig& config, std::istream& in) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto trim = [](std::string s) {
            const auto from = s.find_first_not_of(" \t\r");
            const auto to = s.find_last_not_of(" \t\r");
            return from == std::string::npos ? std::string{} : s.substr(from, to - from + 1);
        };
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config parse error at line " + std::to_string(line_no) +
                                     ": expected key=value");
        }
        const std::string key = trim(trimmed.substr(0, eq));
        const std::string value = trim(trimmed.substr(eq + 1));
        try {
            if (key == "n_observe") config.policy.n_observe = std::stoi(value);
            else if (key == "k_paths") config.policy.k_paths = std::stoi(value);
            else if (key == "hard_timeout_s") config.policy.hard_timeout_s = std::stod(value);
            else if (key == "epoch_check_offset_s") config.policy.epoch_check_offset_s = std::stod(value);
            else if (key == "lambda_a") config.policy.lambda_a = std::stod(value);
            else if (key == "lambda_b") config.policy.lambda_b = std::stod(value);
            else if (key == "control_rtt_s") config.policy.control_rtt_s = std::stod(value);
            else if (key == "refresh_epoch_s") config.policy.refresh_epoch_s = std::stod(value);
            else if (key == "duration_s") config.sim.duration_s = std::stod(value);
            else if (key == "metrics_interval_s") config.sim.metrics_interval_s = std::stod(value);
            else if (key == "queue_limit_bytes") config.sim.queue_limit_bytes = std::stoi(value);
            else if (key == "train_flows") config.train_flows = std::stoi(value);
            else if (key == "train_seed") config.train_seed = std::stoull(value);
            else if (key == "class1_min_bw_bps") config.policy.classes.classes[0].min_bw_bps = std::stod(value);
            else if (key == "class2_min_bw_bps") config.policy.classes.classes[1].min_bw_bps = std::stod(value);
            else if (key == "class3_min_bw_bps") config.policy.classes.classes[2].min_bw_bps = std::stod(value);
            else if (key == "class4_min_bw_bps") config.policy.classes.classes[3].min_bw_bps = std::stod(value);
            else if (key == "class1_delay_s") config.policy.classes.classes[0].acceptable_delay_s = std::stod(value);
            else if (key == "class2_delay_s") config.policy.classes.classes[1].acceptable_delay_s = std::stod(value);
            else if (key == "class3_delay_s") config.policy.classes.classes[2].acceptable_delay_s = std::stod(value);
            else throw std::runtime_error("unknown key");
        } catch (const std::exception& e) {
            throw std::runtime_error("config parse error at line " + std::to_string(line_no) +
                                     " (" + key + "): " + e.what());
        }
    }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    Topology topo;
    if (config.topology_file.empty()) {
        topo = default_topology();
    } else {
        std::ifstream in(config.topology_file);
        if (!in) throw std::runtime_error("cannot open topology file: " + config.topology_file);
        topo = Topology::parse(in);
    }

    std::optional<DecisionTree> tree;
    if (config.mode == Mode::aware) {
        tree = train_default_classifier(config.train_flows, config.train_seed);
    }

    PolicyConfig policy = config.policy;
    SimConfig sim = config.sim;
    sim.probe_period_s = policy.refresh_epoch_s;

    Rng run_rng(splitmix64(config.seed * 0x6a09e667f3bcc909ULL + 0xb7e15162ULL));
    const auto traffic = build_scenario(config.scenario, topo, run_rng);

    Controller controller(topo, policy, config.mode, std::move(tree), config.seed);
    RunResult run = run_simulation(topo, controller, traffic, sim, config.seed);

    ExperimentResult result;
    result.config = config;
    result.aggregate = aggregate_by_class(run);
    result.summary_text = render_summary(config, run, result.aggregate);
    result.run = std::move(run);

    if (!config.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(config.out_dir);
        {
            std::ofstream out(fs::path(config.out_dir) / "metrics.csv", std::ios::binary);
            out << result.run.metrics_csv;
        }
        {
            std::ofstream out(fs::path(config.out_dir) / "class_series.csv", std::ios::binary);
            out << render_class_series(result.run);
        }
        {
            std::ofstream out(fs::path(config.out_dir) / "events.log", std::ios::binary);
            out << result.run.event_log;
        }
        {
            std::ofstream out(fs::path(config.out_dir) / "summary.txt", std::ios::binary);
            out << result.summary_text;
        }
    }
    return result;
}

} // namespace ampf
