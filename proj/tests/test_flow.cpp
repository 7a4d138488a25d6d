#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "ampf/flow.hpp"
#include "ampf/rng.hpp"

using namespace ampf;

namespace {

PacketRecord pkt(double ts, int size, Direction dir = Direction::forward) {
    PacketRecord p;
    p.timestamp = ts;
    p.src_host = 0;
    p.dst_host = 1;
    p.size_bytes = size;
    p.flow_id = 7;
    p.direction = dir;
    return p;
}

FlowRecord fold(const std::vector<PacketRecord>& packets) {
    FlowRecord r = FlowRecord::fresh(FlowKey{0, 1, 7});
    for (const auto& p : packets) r = update_flow(std::move(r), p);
    return r;
}

// independent statistics oracle: plain two-pass summation
struct BatchStats {
    double mean = 0, std_pop = 0, min = 0, max = 0;
    std::size_t n = 0;
};

BatchStats batch_stats(const std::vector<double>& xs) {
    BatchStats b;
    b.n = xs.size();
    if (xs.empty()) return b;
    double sum = 0;
    b.min = xs[0];
    b.max = xs[0];
    for (double x : xs) {
        sum += x;
        b.min = std::min(b.min, x);
        b.max = std::max(b.max, x);
    }
    b.mean = sum / static_cast<double>(xs.size());
    double sq = 0;
    for (double x : xs) sq += (x - b.mean) * (x - b.mean);
    b.std_pop = std::sqrt(sq / static_cast<double>(xs.size()));
    return b;
}

} // namespace

TEST_SUITE("flow") {

TEST_CASE("first forward packet has no interarrival") {
    const FlowRecord r = fold({pkt(0.0, 100)});
    CHECK(r.fwd_packet_count == 1);
    CHECK(r.fwd_byte_count == 100);
    CHECK(r.fwd_interarrival.count == 0);
    CHECK(r.first_ts == 0.0);
    CHECK(r.last_ts == 0.0);
}

TEST_CASE("second packet yields a single-sample interarrival") {
    const FlowRecord r = fold({pkt(0.0, 100), pkt(0.5, 100)});
    CHECK(r.fwd_interarrival.count == 1);
    CHECK(r.fwd_interarrival.min == doctest::Approx(0.5));
    CHECK(r.fwd_interarrival.mean == doctest::Approx(0.5));
    CHECK(r.fwd_interarrival.max == doctest::Approx(0.5));
}

TEST_CASE("uniform 10ms spacing matches the summation oracle") {
    std::vector<PacketRecord> packets;
    std::vector<double> iats;
    for (int i = 0; i < 50; ++i) {
        packets.push_back(pkt(0.010 * i, 100));
        if (i > 0) iats.push_back(0.010 * i - 0.010 * (i - 1));
    }
    const FlowRecord r = fold(packets);
    const BatchStats oracle = batch_stats(iats);
    CHECK(r.fwd_interarrival.mean == doctest::Approx(oracle.mean).epsilon(1e-12));
    CHECK(r.fwd_interarrival.mean == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(r.fwd_interarrival.std_pop() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("update_flow is a fold equal to batch recomputation") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<PacketRecord> packets;
        std::vector<double> fwd_ts, fwd_sizes;
        double t = 0.0;
        const int n = 3 + static_cast<int>(rng.uniform_int(60));
        for (int i = 0; i < n; ++i) {
            t += rng.uniform(0.0001, 0.3);
            const int size = 40 + static_cast<int>(rng.uniform_int(1460));
            const bool fwd = rng.uniform01() < 0.7;
            packets.push_back(pkt(t, size, fwd ? Direction::forward : Direction::backward));
            if (fwd) {
                fwd_ts.push_back(t);
                fwd_sizes.push_back(size);
            }
        }
        const FlowRecord r = fold(packets);

        std::vector<double> iats;
        for (std::size_t i = 1; i < fwd_ts.size(); ++i) iats.push_back(fwd_ts[i] - fwd_ts[i - 1]);
        const BatchStats iat_oracle = batch_stats(iats);
        const BatchStats len_oracle = batch_stats(fwd_sizes);

        CHECK(r.fwd_packet_count == fwd_ts.size());
        if (!iats.empty()) {
            CHECK(r.fwd_interarrival.mean == doctest::Approx(iat_oracle.mean).epsilon(1e-10));
            CHECK(r.fwd_interarrival.std_pop() ==
                  doctest::Approx(iat_oracle.std_pop).epsilon(1e-8));
            CHECK(r.fwd_interarrival.min == doctest::Approx(iat_oracle.min));
            CHECK(r.fwd_interarrival.max == doctest::Approx(iat_oracle.max));
        }
        if (!fwd_sizes.empty()) {
            CHECK(r.fwd_length.mean == doctest::Approx(len_oracle.mean).epsilon(1e-10));
        }
        // interarrival ordering invariant
        if (r.fwd_interarrival.count >= 2) {
            CHECK(r.fwd_interarrival.min <= r.fwd_interarrival.mean + 1e-12);
            CHECK(r.fwd_interarrival.mean <= r.fwd_interarrival.max + 1e-12);
        }
    }
}

TEST_CASE("update_flow rejects a key mismatch") {
    FlowRecord r = FlowRecord::fresh(FlowKey{0, 1, 7});
    PacketRecord p = pkt(0.0, 100);
    p.flow_id = 8;
    CHECK_THROWS_AS(update_flow(std::move(r), p), std::invalid_argument);
}

TEST_CASE("update_flow rejects out-of-order timestamps") {
    FlowRecord r = fold({pkt(1.0, 100)});
    CHECK_THROWS_AS(update_flow(std::move(r), pkt(0.5, 100)), std::runtime_error);
}

TEST_CASE("extract_features on two packets") {
    const FlowRecord r = fold({pkt(0.0, 100), pkt(1.0, 100)});
    const FeatureVector fv = extract_features(r);
    CHECK(fv.duration_s == doctest::Approx(1.0));
    CHECK(fv.mean_fwd_iat_s == doctest::Approx(1.0));
    CHECK(fv.std_fwd_iat_s == doctest::Approx(0.0));
    CHECK(fv.mean_fwd_pkt_len_b == doctest::Approx(100.0));
    CHECK(fv.mean_bwd_pkt_len_b == 0.0); // no backward packets
}

TEST_CASE("CBR flow at 1 Mbps with 1250 B packets has 10 ms interarrivals") {
    // 1250 bytes * 8 / 1e6 bps = 0.01 s
    std::vector<PacketRecord> packets;
    const double iat = 1250.0 * 8.0 / 1e6;
    for (int i = 0; i < 20; ++i) packets.push_back(pkt(iat * i, 1250));
    const FeatureVector fv = extract_features(fold(packets));
    CHECK(fv.mean_fwd_iat_s == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("extract_features requires two forward packets") {
    const FlowRecord one = fold({pkt(0.0, 100)});
    CHECK_THROWS_AS(extract_features(one), std::runtime_error);
    const FlowRecord bwd_only =
        fold({pkt(0.0, 100), pkt(0.1, 90, Direction::backward)});
    CHECK_THROWS_AS(extract_features(bwd_only), std::runtime_error);
}

TEST_CASE("features are finite, nonnegative, and ordered") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<PacketRecord> packets;
        double t = 0.0;
        for (int i = 0; i < 30; ++i) {
            t += rng.uniform(0.001, 0.2);
            packets.push_back(pkt(t, 40 + static_cast<int>(rng.uniform_int(1400)),
                                  i % 3 == 2 ? Direction::backward : Direction::forward));
        }
        const FeatureVector fv = extract_features(fold(packets));
        for (int f = 1; f <= 7; ++f) {
            CHECK(std::isfinite(fv.get(f)));
            CHECK(fv.get(f) >= 0.0);
        }
        CHECK(fv.min_fwd_iat_s <= fv.mean_fwd_iat_s + 1e-12);
        CHECK(fv.mean_fwd_iat_s <= fv.max_fwd_iat_s + 1e-12);
    }
}

TEST_CASE("labeled trace file round trip with header") {
    std::vector<LabeledExample> examples;
    Rng rng(3);
    for (int i = 0; i < 8; ++i) {
        LabeledExample ex;
        ex.label = 1 + static_cast<int>(rng.uniform_int(4));
        ex.features.duration_s = rng.uniform(0.1, 10);
        ex.features.mean_fwd_iat_s = rng.uniform(0.001, 0.3);
        ex.features.std_fwd_iat_s = rng.uniform(0.0, 0.05);
        ex.features.min_fwd_iat_s = ex.features.mean_fwd_iat_s / 2;
        ex.features.max_fwd_iat_s = ex.features.mean_fwd_iat_s * 2;
        ex.features.mean_fwd_pkt_len_b = rng.uniform(40, 1500);
        ex.features.mean_bwd_pkt_len_b = rng.uniform(0, 1500);
        examples.push_back(ex);
    }
    std::stringstream file;
    write_labeled_file(file, examples);

    std::string first_line;
    std::getline(file, first_line);
    CHECK(first_line == labeled_trace_header());

    file.clear();
    file.seekg(0);
    const auto parsed = read_labeled_file(file);
    REQUIRE(parsed.size() == examples.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].label == examples[i].label);
        for (int f = 1; f <= 7; ++f) {
            CHECK(parsed[i].features.get(f) ==
                  doctest::Approx(examples[i].features.get(f)).epsilon(1e-9));
        }
    }
}

TEST_CASE("trace parse errors carry the line number") {
    std::stringstream bad("label,f1,f2,f3,f4,f5,f6,f7\n1,0.1,0.2\n");
    try {
        read_labeled_file(bad);
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

} // TEST_SUITE
