#ifndef AMPF_TRACES_HPP
#define AMPF_TRACES_HPP

#include <string>
#include <vector>

#include "ampf/classifier.hpp"
#include "ampf/flow.hpp"
#include "ampf/rng.hpp"

namespace ampf {

/// Per-application traffic signature used both to label training traces and
/// to shape the opening packets of simulated flows, so that the classifier
/// sees the same distribution in training and live operation.
struct SyntheticAppProfile {
    std::string app;
    int class_label = 4;
    double iat_mean_s = 0.0;
    double iat_std_s = 0.0;
    double fwd_len_mean_b = 0.0;
    double fwd_len_std_b = 0.0;
    double bwd_len_mean_b = 0.0;
    double bwd_len_std_b = 0.0;
    double duration_min_s = 0.0;
    double duration_max_s = 0.0;
};

/// Nine applications mapped onto the four priority classes. Profile means
/// are pairwise separated well beyond the per-flow drift, so the generated
/// classes stay separable; the generator depends on that property.
const std::vector<SyntheticAppProfile>& default_app_profiles();

/// A sampled opening burst of one flow: n_fwd forward packets (the first at
/// offset 0) plus reply packets from the responder side.
struct PreambleStream {
    std::vector<double> fwd_offsets_s; // ascending, first is 0
    std::vector<int> fwd_sizes_b;
    std::vector<double> bwd_offsets_s; // ascending
    std::vector<int> bwd_sizes_b;

    double span_s() const { return fwd_offsets_s.empty() ? 0.0 : fwd_offsets_s.back(); }
};

PreambleStream sample_preamble(const SyntheticAppProfile& profile, Rng& rng, int n_fwd = 50);

/// Feature vector a controller would extract after observing the preamble.
FeatureVector observed_features(const PreambleStream& stream);

/// n_flows labeled examples, classes balanced round-robin, applications drawn
/// uniformly within each class. Deterministic for a given seed.
std::vector<LabeledExample> generate_traces(const std::vector<SyntheticAppProfile>& profiles,
                                            int n_flows, std::uint64_t seed);

} // namespace ampf

#endif // AMPF_TRACES_HPP
