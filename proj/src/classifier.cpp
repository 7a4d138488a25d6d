#include "ampf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ampf {

namespace {

double entropy(const std::array<std::uint64_t, kNumClasses>& counts, std::uint64_t total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

std::array<std::uint64_t, kNumClasses> count_labels(std::span<const LabeledExample> examples) {
    std::array<std::uint64_t, kNumClasses> counts{};
    for (const auto& ex : examples) {
        if (ex.label < 1 || ex.label > kNumClasses) {
            throw std::invalid_argument("label out of range: " + std::to_string(ex.label));
        }
        ++counts[static_cast<std::size_t>(ex.label - 1)];
    }
    return counts;
}

struct SplitScore {
    double gain = 0.0;
    double ratio = 0.0;
};

SplitScore score_partition(const std::array<std::uint64_t, kNumClasses>& left,
                           const std::array<std::uint64_t, kNumClasses>& all,
                           std::uint64_t n_left, std::uint64_t n_total) {
    const std::uint64_t n_right = n_total - n_left;
    std::array<std::uint64_t, kNumClasses> right{};
    for (std::size_t i = 0; i < kNumClasses; ++i) right[i] = all[i] - left[i];

    const double pl = static_cast<double>(n_left) / static_cast<double>(n_total);
    const double pr = static_cast<double>(n_right) / static_cast<double>(n_total);
    double gain = entropy(all, n_total) - pl * entropy(left, n_left) - pr * entropy(right, n_right);
    if (gain < 0.0) gain = 0.0; // rounding guard
    const double split_info = -(pl * std::log2(pl) + pr * std::log2(pr));
    return {gain, split_info > 0.0 ? gain / split_info : 0.0};
}

int majority_label(const std::array<std::uint64_t, kNumClasses>& counts) {
    int best = 1;
    std::uint64_t best_count = counts[0];
    for (int i = 1; i < kNumClasses; ++i) {
        if (counts[static_cast<std::size_t>(i)] > best_count) {
            best_count = counts[static_cast<std::size_t>(i)];
            best = i + 1;
        }
    }
    return best; // lowest label wins ties by scan order
}

} // namespace

double gain_ratio(std::span<const LabeledExample> examples, int feature_index, double threshold) {
    if (examples.empty()) throw std::invalid_argument("gain_ratio: empty example set");

    const auto all = count_labels(examples);
    std::array<std::uint64_t, kNumClasses> left{};
    std::uint64_t n_left = 0;
    for (const auto& ex : examples) {
        if (ex.features.get(feature_index) <= threshold) {
            ++left[static_cast<std::size_t>(ex.label - 1)];
            ++n_left;
        }
    }
    if (n_left == 0 || n_left == examples.size()) {
        throw std::runtime_error("gain_ratio: split leaves one side empty");
    }
    return score_partition(left, all, n_left, examples.size()).ratio;
}

std::optional<SplitChoice> best_split(std::span<const LabeledExample> examples,
                                      const TrainParams& params) {
    if (examples.empty()) throw std::invalid_argument("best_split: empty example set");

    const auto all = count_labels(examples);
    const std::uint64_t n = examples.size();

    std::optional<SplitChoice> best;
    std::vector<std::pair<double, int>> values(examples.size()); // (value, label)

    for (int f = 1; f <= FeatureVector::feature_count; ++f) {
        for (std::size_t i = 0; i < examples.size(); ++i) {
            values[i] = {examples[i].features.get(f), examples[i].label};
        }
        std::sort(values.begin(), values.end());

        // sweep: after position i, left side holds values[0..i]
        std::array<std::uint64_t, kNumClasses> left{};
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            ++left[static_cast<std::size_t>(values[i].second - 1)];
            if (values[i].first == values[i + 1].first) continue; // not a boundary
            const std::uint64_t n_left = i + 1;
            const std::uint64_t n_right = n - n_left;
            if (n_left < params.min_leaf_size || n_right < params.min_leaf_size) continue;

            const double threshold = values[i].first + (values[i + 1].first - values[i].first) / 2.0;
            const auto score = score_partition(left, all, n_left, n);
            if (score.gain < params.min_gain_ratio) continue;

            const bool better =
                !best || score.ratio > best->ratio ||
                (score.ratio == best->ratio &&
                 (f < best->feature_index ||
                  (f == best->feature_index && threshold < best->threshold)));
            if (better) {
                best = SplitChoice{f, threshold, score.gain, score.ratio};
            }
        }
    }
    return best;
}

namespace {

int build_node(DecisionTree& tree, std::vector<LabeledExample>& examples,
               std::size_t lo, std::size_t hi, int depth, const TrainParams& params) {
    const std::span<const LabeledExample> view(examples.data() + lo, hi - lo);
    const auto counts = count_labels(view);

    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.back().counts = counts;

    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](std::uint64_t c) { return c > 0; }) <= 1;
    std::optional<SplitChoice> split;
    if (!pure && depth < params.max_depth && view.size() >= 2 * params.min_leaf_size) {
        split = best_split(view, params);
    }

    if (!split) {
        tree.nodes[static_cast<std::size_t>(node_index)].label = majority_label(counts);
        return node_index;
    }

    const auto mid_it = std::partition(
        examples.begin() + static_cast<std::ptrdiff_t>(lo),
        examples.begin() + static_cast<std::ptrdiff_t>(hi),
        [&](const LabeledExample& ex) {
            return ex.features.get(split->feature_index) <= split->threshold;
        });
    const std::size_t mid = static_cast<std::size_t>(mid_it - examples.begin());

    tree.nodes[static_cast<std::size_t>(node_index)].feature = split->feature_index;
    tree.nodes[static_cast<std::size_t>(node_index)].threshold = split->threshold;
    const int left = build_node(tree, examples, lo, mid, depth + 1, params);
    tree.nodes[static_cast<std::size_t>(node_index)].left = left;
    const int right = build_node(tree, examples, mid, hi, depth + 1, params);
    tree.nodes[static_cast<std::size_t>(node_index)].right = right;
    return node_index;
}

} // namespace

DecisionTree train(std::span<const LabeledExample> examples, const TrainParams& params) {
    if (examples.empty()) throw std::invalid_argument("train: empty training set");
    if (params.min_leaf_size < 1) throw std::invalid_argument("train: min_leaf_size must be >= 1");
    if (params.max_depth < 1) throw std::invalid_argument("train: max_depth must be >= 1");

    std::vector<LabeledExample> working(examples.begin(), examples.end());
    DecisionTree tree;
    tree.nodes.reserve(2 * working.size());
    build_node(tree, working, 0, working.size(), 0, params);
    return tree;
}

int DecisionTree::predict(const FeatureVector& fv) const {
    if (nodes.empty()) throw std::runtime_error("predict: empty tree");
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        i = fv.get(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].label;
}

int DecisionTree::depth() const {
    if (nodes.empty()) return 0;
    // iterative depth over the index-linked tree
    std::vector<std::pair<int, int>> stack{{0, 1}};
    int deepest = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        const Node& n = nodes[static_cast<std::size_t>(i)];
        if (n.is_leaf()) {
            deepest = std::max(deepest, d);
        } else {
            stack.push_back({n.left, d + 1});
            stack.push_back({n.right, d + 1});
        }
    }
    return deepest;
}

std::size_t DecisionTree::leaf_count() const {
    std::size_t k = 0;
    for (const auto& n : nodes) {
        if (n.is_leaf()) ++k;
    }
    return k;
}

namespace {

void serialize_node(const DecisionTree& tree, int index, std::ostringstream& out) {
    const auto& n = tree.nodes[static_cast<std::size_t>(index)];
    char buf[256];
    if (n.is_leaf()) {
        std::snprintf(buf, sizeof(buf), "L %d %llu %llu %llu %llu\n", n.label,
                      static_cast<unsigned long long>(n.counts[0]),
                      static_cast<unsigned long long>(n.counts[1]),
                      static_cast<unsigned long long>(n.counts[2]),
                      static_cast<unsigned long long>(n.counts[3]));
        out << buf;
    } else {
        std::snprintf(buf, sizeof(buf), "S %d %.17g\n", n.feature, n.threshold);
        out << buf;
        serialize_node(tree, n.left, out);
        serialize_node(tree, n.right, out);
    }
}

int deserialize_node(DecisionTree& tree, std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("tree deserialize: truncated input");
    std::istringstream ls(line);
    char tag = 0;
    ls >> tag;
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (tag == 'L') {
        DecisionTree::Node& n = tree.nodes.back();
        if (!(ls >> n.label >> n.counts[0] >> n.counts[1] >> n.counts[2] >> n.counts[3])) {
            throw std::runtime_error("tree deserialize: malformed leaf line: " + line);
        }
        return index;
    }
    if (tag == 'S') {
        int feature = 0;
        double threshold = 0.0;
        if (!(ls >> feature >> threshold)) {
            throw std::runtime_error("tree deserialize: malformed split line: " + line);
        }
        tree.nodes[static_cast<std::size_t>(index)].feature = feature;
        tree.nodes[static_cast<std::size_t>(index)].threshold = threshold;
        const int left = deserialize_node(tree, in);
        tree.nodes[static_cast<std::size_t>(index)].left = left;
        const int right = deserialize_node(tree, in);
        tree.nodes[static_cast<std::size_t>(index)].right = right;
        return index;
    }
    throw std::runtime_error("tree deserialize: unknown node tag in line: " + line);
}

} // namespace

std::string DecisionTree::serialize() const {
    if (nodes.empty()) return {};
    std::ostringstream out;
    serialize_node(*this, 0, out);
    return out.str();
}

DecisionTree DecisionTree::deserialize(std::istream& in) {
    DecisionTree tree;
    deserialize_node(tree, in);
    return tree;
}

double evaluate(const DecisionTree& tree, std::span<const LabeledExample> test) {
    if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
    std::size_t hits = 0;
    for (const auto& ex : test) {
        if (tree.predict(ex.features) == ex.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>
confusion_matrix(const DecisionTree& tree, std::span<const LabeledExample> test) {
    std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> m{};
    for (const auto& ex : test) {
        const int pred = tree.predict(ex.features);
        ++m[static_cast<std::size_t>(ex.label - 1)][static_cast<std::size_t>(pred - 1)];
    }
    return m;
}

} // namespace ampf
