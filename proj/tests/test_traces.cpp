#include <doctest.h>

#include <array>
#include <sstream>

#include "ampf/traces.hpp"

using namespace ampf;

TEST_SUITE("traces") {

TEST_CASE("profiles cover all four classes with the expected app mapping") {
    const auto& profiles = default_app_profiles();
    std::array<int, kNumClasses> count{};
    for (const auto& p : profiles) {
        REQUIRE(p.class_label >= 1);
        REQUIRE(p.class_label <= 4);
        ++count[static_cast<std::size_t>(p.class_label - 1)];
        if (p.app == "skype") CHECK(p.class_label == 1);
        if (p.app == "youtube" || p.app == "googledocs") CHECK(p.class_label == 2);
        if (p.app == "gmail" || p.app == "facebook") CHECK(p.class_label == 3);
        if (p.app == "dropbox" || p.app == "copy" || p.app == "filezilla" || p.app == "torrent") {
            CHECK(p.class_label == 4);
        }
    }
    for (int c = 0; c < kNumClasses; ++c) CHECK(count[static_cast<std::size_t>(c)] >= 1);
}

TEST_CASE("generated traces are balanced and deterministic") {
    const auto a = generate_traces(default_app_profiles(), 500, 77);
    const auto b = generate_traces(default_app_profiles(), 500, 77);
    REQUIRE(a.size() == 500);
    std::array<int, kNumClasses> count{};
    for (const auto& ex : a) ++count[static_cast<std::size_t>(ex.label - 1)];
    for (int c = 0; c < kNumClasses; ++c) CHECK(count[static_cast<std::size_t>(c)] == 125);

    std::stringstream fa, fb;
    write_labeled_file(fa, a);
    write_labeled_file(fb, b);
    CHECK(fa.str() == fb.str());

    const auto c = generate_traces(default_app_profiles(), 500, 78);
    std::stringstream fc;
    write_labeled_file(fc, c);
    CHECK(fa.str() != fc.str());
}

TEST_CASE("preamble features look like the profile they came from") {
    Rng rng(5);
    for (const auto& profile : default_app_profiles()) {
        for (int i = 0; i < 5; ++i) {
            Rng flow_rng = rng.fork(static_cast<std::uint64_t>(i) + 1);
            const auto stream = sample_preamble(profile, flow_rng);
            REQUIRE(stream.fwd_offsets_s.size() == 50);
            const FeatureVector fv = observed_features(stream);
            // the 49-interarrival mean concentrates near the profile mean;
            // the per-flow drift is about 8%, so 35% is a generous band
            CHECK(fv.mean_fwd_iat_s == doctest::Approx(profile.iat_mean_s).epsilon(0.35));
            CHECK(fv.mean_fwd_pkt_len_b == doctest::Approx(profile.fwd_len_mean_b).epsilon(0.3));
            CHECK(fv.mean_bwd_pkt_len_b > 0.0);
        }
    }
}

TEST_CASE("held-out accuracy clears the acceptance bar") {
    const auto train_set = generate_traces(default_app_profiles(), 500, 1001);
    const auto test_set = generate_traces(default_app_profiles(), 100, 2002);
    const DecisionTree tree = train(train_set);
    CHECK(evaluate(tree, test_set) >= 0.98);
}

TEST_CASE("train equals test is exact for the separable generator") {
    const auto set = generate_traces(default_app_profiles(), 200, 3003);
    TrainParams params;
    params.min_leaf_size = 1;
    const DecisionTree tree = train(set, params);
    CHECK(evaluate(tree, set) == doctest::Approx(1.0));
}

TEST_CASE("randomized labels land near chance level") {
    // labels drawn independently of the features carry no signal, so the
    // held-out accuracy of the resulting tree is the balanced-class chance
    // rate of 1/4
    auto set = generate_traces(default_app_profiles(), 400, 4004);
    Rng rng(999);
    for (auto& ex : set) ex.label = 1 + static_cast<int>(rng.uniform_int(4));
    const auto holdout = generate_traces(default_app_profiles(), 400, 5005);
    const DecisionTree tree = train(set);
    const double acc = evaluate(tree, holdout);
    CHECK(acc > 0.25 - 0.1);
    CHECK(acc < 0.25 + 0.1);
}

} // TEST_SUITE
