#ifndef AMPF_CLASSIFIER_HPP
#define AMPF_CLASSIFIER_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ampf/flow.hpp"

namespace ampf {

inline constexpr int kNumClasses = 4;

struct TrainParams {
    std::size_t min_leaf_size = 2;
    double min_gain_ratio = 1e-6; // candidate splits must clear this much information gain
    int max_depth = 32;
    std::uint64_t rng_seed = 0; // reserved knob; induction is fully deterministic
};

/// Binary gain-ratio decision tree over the 7 continuous flow features.
/// "value <= threshold" descends left.
class DecisionTree {
public:
    struct Node {
        int feature = 0; // 1..7 for splits, 0 for leaves
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int label = 0; // leaf majority label
        std::array<std::uint64_t, kNumClasses> counts{};

        bool is_leaf() const { return feature == 0; }
    };

    std::vector<Node> nodes; // node 0 is the root

    bool empty() const { return nodes.empty(); }
    int predict(const FeatureVector& fv) const;
    int depth() const;
    std::size_t leaf_count() const;

    // Pre-order text form, one node per line:
    //   S <feature> <threshold>
    //   L <label> <c1> <c2> <c3> <c4>
    std::string serialize() const;
    static DecisionTree deserialize(std::istream& in);
};

/// Information gain / split information (bits) for the binary partition of
/// `examples` at `threshold` on feature `feature_index`. Both sides of the
/// split must be nonempty.
double gain_ratio(std::span<const LabeledExample> examples, int feature_index, double threshold);

struct SplitChoice {
    int feature_index = 0;
    double threshold = 0.0;
    double gain = 0.0;
    double ratio = 0.0;
};

/// Best candidate split: thresholds are midpoints between consecutive
/// distinct sorted values per feature; candidates must leave at least
/// min_leaf_size examples on each side and gain at least min_gain_ratio.
/// Ties on gain ratio break to the lowest feature index, then the lowest
/// threshold. Returns nullopt when no candidate qualifies.
std::optional<SplitChoice> best_split(std::span<const LabeledExample> examples,
                                      const TrainParams& params);

/// Top-down induction. Stops on purity, exhausted candidates, max_depth, or
/// fewer than 2*min_leaf_size examples. Leaf ties go to the lowest label.
DecisionTree train(std::span<const LabeledExample> examples, const TrainParams& params = {});

/// Fraction of examples whose prediction matches the label.
double evaluate(const DecisionTree& tree, std::span<const LabeledExample> test);

/// Row-major confusion matrix: counts[actual-1][predicted-1].
std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses>
confusion_matrix(const DecisionTree& tree, std::span<const LabeledExample> test);

} // namespace ampf

#endif // AMPF_CLASSIFIER_HPP
