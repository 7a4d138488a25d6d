#ifndef AMPF_SCENARIOS_HPP
#define AMPF_SCENARIOS_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "ampf/simulator.hpp"

namespace ampf {

/// Five-switch replica testbed: hosts h1 (at s1) and h2 (at s5), four
/// edge-disjoint inter-switch paths of increasing latency, 32 Mbps switch
/// links and 1 Gbps host links.
Topology default_topology();

struct ExperimentConfig {
    std::string scenario; // udp-jitter | tcp-throughput | mixed-throughput | mixed-jitter |
                          // late-flow | forced-reroute
    Mode mode = Mode::aware;
    std::uint64_t seed = 1;
    std::string topology_file; // empty = built-in replica topology
    std::string out_dir;       // empty = nothing written to disk
    PolicyConfig policy;
    SimConfig sim;
    int train_flows = 500;
    std::uint64_t train_seed = 12345;
};

/// Flat key=value overrides (n_observe, k_paths, hard_timeout_s, ...).
/// Unknown keys are an error. '#' starts a comment.
void apply_kv_config(ExperimentConfig& config, std::istream& in);

std::vector<std::string> scenario_names();

/// Traffic of one named scenario over a topology. Start times and seeds are
/// drawn from run_rng, so one (scenario, seed) pair fixes everything.
std::vector<TrafficSpec> build_scenario(const std::string& name, const Topology& topo,
                                        Rng& run_rng);

/// Classifier trained on freshly generated synthetic traces.
DecisionTree train_default_classifier(int n_train, std::uint64_t seed,
                                      const TrainParams& params = {});

struct ClassAggregate {
    // observable flows only, indexed by class-1
    std::array<double, kNumClasses> udp_mean_jitter_s;
    std::array<double, kNumClasses> tcp_longrun_bps;
    std::array<int, kNumClasses> udp_flows;
    std::array<int, kNumClasses> tcp_flows;

    ClassAggregate() {
        udp_mean_jitter_s.fill(std::numeric_limits<double>::quiet_NaN());
        tcp_longrun_bps.fill(std::numeric_limits<double>::quiet_NaN());
        udp_flows.fill(0);
        tcp_flows.fill(0);
    }
};

ClassAggregate aggregate_by_class(const RunResult& result);

struct ExperimentResult {
    ExperimentConfig config;
    RunResult run;
    ClassAggregate aggregate;
    std::string summary_text;
};

/// Trains the classifier (aware mode), builds the scenario, runs it, and
/// writes metrics.csv, events.log and summary.txt when out_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

} // namespace ampf

#endif // AMPF_SCENARIOS_HPP
