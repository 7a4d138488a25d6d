#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ampf/scenarios.hpp"

namespace {

int cmd_gen_traces(const std::string& out_file, int n_flows, std::uint64_t seed) {
    const auto examples =
        ampf::generate_traces(ampf::default_app_profiles(), n_flows, seed);
    std::ofstream out(out_file, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open " << out_file << " for writing\n";
        return 1;
    }
    ampf::write_labeled_file(out, examples);
    std::cout << "wrote " << examples.size() << " labeled flows to " << out_file << "\n";
    return 0;
}

int cmd_train(const std::string& train_file, const std::string& test_file,
              const std::string& tree_out, std::size_t min_leaf, double min_gain, int max_depth) {
    std::ifstream train_in(train_file);
    if (!train_in) {
        std::cerr << "error: cannot open " << train_file << "\n";
        return 1;
    }
    const auto train_set = ampf::read_labeled_file(train_in);

    ampf::TrainParams params;
    params.min_leaf_size = min_leaf;
    params.min_gain_ratio = min_gain;
    params.max_depth = max_depth;
    const auto tree = ampf::train(train_set, params);

    std::cout << "trained on " << train_set.size() << " flows: " << tree.leaf_count()
              << " leaves, depth " << tree.depth() << "\n";
    std::cout << "training accuracy: " << ampf::evaluate(tree, train_set) << "\n";

    if (!test_file.empty()) {
        std::ifstream test_in(test_file);
        if (!test_in) {
            std::cerr << "error: cannot open " << test_file << "\n";
            return 1;
        }
        const auto test_set = ampf::read_labeled_file(test_in);
        std::cout << "test accuracy (" << test_set.size()
                  << " flows): " << ampf::evaluate(tree, test_set) << "\n";
        const auto cm = ampf::confusion_matrix(tree, test_set);
        std::cout << "confusion matrix (rows actual, cols predicted):\n";
        for (int r = 0; r < ampf::kNumClasses; ++r) {
            std::cout << "  class " << (r + 1) << ":";
            for (int c = 0; c < ampf::kNumClasses; ++c) {
                std::cout << ' ' << cm[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            }
            std::cout << "\n";
        }
    }

    if (!tree_out.empty()) {
        std::ofstream out(tree_out, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot open " << tree_out << " for writing\n";
            return 1;
        }
        out << tree.serialize();
        std::cout << "tree written to " << tree_out << "\n";
    }
    return 0;
}

int cmd_run(ampf::ExperimentConfig config, int repeat) {
    if (repeat <= 1) {
        const auto result = ampf::run_experiment(config);
        std::cout << result.summary_text;
        if (!config.out_dir.empty()) std::cout << "reports in " << config.out_dir << "\n";
        return 0;
    }
    const std::string base_dir = config.out_dir;
    for (int i = 0; i < repeat; ++i) {
        ampf::ExperimentConfig c = config;
        c.seed = config.seed + static_cast<std::uint64_t>(i);
        if (!base_dir.empty()) {
            c.out_dir = (std::filesystem::path(base_dir) / ("seed-" + std::to_string(c.seed)))
                            .string();
        }
        const auto result = ampf::run_experiment(c);
        std::cout << result.summary_text;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"application-aware multipath forwarding simulator"};
    app.require_subcommand(1);

    // gen-traces
    auto* gen = app.add_subcommand("gen-traces", "generate a labeled synthetic trace file");
    std::string gen_out = "traces.csv";
    int gen_n = 500;
    std::uint64_t gen_seed = 1;
    gen->add_option("--out", gen_out, "output file");
    gen->add_option("--n", gen_n, "number of flows")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "generator seed");

    // train
    auto* tr = app.add_subcommand("train", "train and evaluate the flow classifier");
    std::string train_file, test_file, tree_out;
    std::size_t min_leaf = 2;
    double min_gain = 1e-6;
    int max_depth = 32;
    tr->add_option("--train", train_file, "labeled training file")->required();
    tr->add_option("--test", test_file, "labeled held-out file");
    tr->add_option("--tree-out", tree_out, "write the serialized tree here");
    tr->add_option("--min-leaf", min_leaf, "minimum examples per leaf");
    tr->add_option("--min-gain", min_gain, "minimum information gain per split");
    tr->add_option("--max-depth", max_depth, "maximum tree depth");

    // run
    auto* run = app.add_subcommand("run", "run an experiment scenario");
    ampf::ExperimentConfig config;
    std::string scenario, mode_str = "aware", config_file;
    int repeat = 1;
    run->add_option("scenario", scenario, "one of: udp-jitter tcp-throughput mixed-throughput mixed-jitter late-flow forced-reroute")
        ->required();
    run->add_option("--mode", mode_str, "aware | unaware")
        ->check(CLI::IsMember({"aware", "unaware"}));
    run->add_option("--seed", config.seed, "run seed");
    run->add_option("--topo", config.topology_file, "topology file (default: built-in testbed)");
    run->add_option("--out", config.out_dir, "output directory for reports");
    run->add_option("--config", config_file, "key=value overrides file");
    run->add_option("--duration", config.sim.duration_s, "simulated seconds");
    run->add_option("--repeat", repeat, "run this many consecutive seeds")
        ->check(CLI::PositiveNumber);

    // print-topo
    auto* pt = app.add_subcommand("print-topo", "write the built-in testbed topology");
    std::string topo_out;
    pt->add_option("--out", topo_out, "output file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_traces(gen_out, gen_n, gen_seed);
        if (tr->parsed()) {
            return cmd_train(train_file, test_file, tree_out, min_leaf, min_gain, max_depth);
        }
        if (run->parsed()) {
            config.scenario = scenario;
            config.mode = mode_str == "aware" ? ampf::Mode::aware : ampf::Mode::unaware;
            if (!config_file.empty()) {
                std::ifstream in(config_file);
                if (!in) {
                    std::cerr << "error: cannot open config file " << config_file << "\n";
                    return 1;
                }
                ampf::apply_kv_config(config, in);
            }
            return cmd_run(config, repeat);
        }
        if (pt->parsed()) {
            const std::string text = ampf::default_topology().to_text();
            if (topo_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(topo_out, std::ios::binary);
                out << text;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
