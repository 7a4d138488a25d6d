#include "ampf/traces.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ampf {

const std::vector<SyntheticAppProfile>& default_app_profiles() {
    //                      app          cls  iat_mu   iat_sd   flen_mu flen_sd blen_mu blen_sd dur_min dur_max
    static const std::vector<SyntheticAppProfile> profiles = {
        {"skype",      1, 0.0200,  0.0020,  220.0,  20.0, 220.0, 20.0,  60.0, 600.0},
        {"youtube",    2, 0.0050,  0.0010, 1400.0,  60.0,  80.0, 10.0,  60.0, 900.0},
        {"googledocs", 2, 0.1200,  0.0250,  420.0,  70.0, 320.0, 50.0, 120.0, 900.0},
        {"gmail",      3, 0.3000,  0.0600,  620.0, 110.0, 520.0, 90.0,  30.0, 300.0},
        {"facebook",   3, 0.2000,  0.0450,  820.0, 140.0, 420.0, 70.0,  60.0, 600.0},
        {"dropbox",    4, 0.0020,  0.0005, 1480.0,  15.0,  64.0,  8.0,  30.0, 600.0},
        {"copy",       4, 0.0026,  0.0006, 1440.0,  30.0,  64.0,  8.0,  30.0, 600.0},
        {"filezilla",  4, 0.0015,  0.0003, 1490.0,   8.0,  52.0,  6.0,  30.0, 600.0},
        {"torrent",    4, 0.0032,  0.0009, 1310.0,  90.0, 210.0, 40.0, 120.0, 900.0},
    };
    return profiles;
}

PreambleStream sample_preamble(const SyntheticAppProfile& profile, Rng& rng, int n_fwd) {
    if (n_fwd < 2) throw std::invalid_argument("sample_preamble: need at least 2 forward packets");

    // Per-flow drift of the profile means, so flows of one app are not clones.
    const double iat_mean = profile.iat_mean_s * std::exp(rng.normal(0.0, 0.08));
    const double len_mean = profile.fwd_len_mean_b * std::exp(rng.normal(0.0, 0.05));
    const double bwd_mean = profile.bwd_len_mean_b * std::exp(rng.normal(0.0, 0.05));

    PreambleStream s;
    s.fwd_offsets_s.reserve(static_cast<std::size_t>(n_fwd));
    s.fwd_sizes_b.reserve(static_cast<std::size_t>(n_fwd));

    double t = 0.0;
    for (int i = 0; i < n_fwd; ++i) {
        if (i > 0) {
            const double iat = std::max(1e-5, rng.normal(iat_mean, profile.iat_std_s));
            t += iat;
        }
        s.fwd_offsets_s.push_back(t);
        const int size = std::max(40, static_cast<int>(std::lround(rng.normal(len_mean, profile.fwd_len_std_b))));
        s.fwd_sizes_b.push_back(size);
    }

    // Responder chatter: roughly one reply per three forward packets, spread
    // over the same span but never at offset 0 (the initiator speaks first).
    const int n_bwd = n_fwd / 3;
    const double span = s.span_s();
    std::vector<double> offs;
    offs.reserve(static_cast<std::size_t>(n_bwd));
    for (int i = 0; i < n_bwd; ++i) offs.push_back(rng.uniform(span * 0.02, span));
    std::sort(offs.begin(), offs.end());
    for (double off : offs) {
        s.bwd_offsets_s.push_back(off);
        const int size = std::max(40, static_cast<int>(std::lround(rng.normal(bwd_mean, profile.bwd_len_std_b))));
        s.bwd_sizes_b.push_back(size);
    }
    return s;
}

FeatureVector observed_features(const PreambleStream& stream) {
    FlowKey key{0, 1, 0};
    FlowRecord rec = FlowRecord::fresh(key);

    // Merge both directions in time order, the way a controller sees them.
    std::size_t fi = 0, bi = 0;
    while (fi < stream.fwd_offsets_s.size() || bi < stream.bwd_offsets_s.size()) {
        const bool take_fwd =
            bi >= stream.bwd_offsets_s.size() ||
            (fi < stream.fwd_offsets_s.size() && stream.fwd_offsets_s[fi] <= stream.bwd_offsets_s[bi]);
        PacketRecord pkt;
        pkt.src_host = 0;
        pkt.dst_host = 1;
        pkt.flow_id = 0;
        if (take_fwd) {
            pkt.timestamp = stream.fwd_offsets_s[fi];
            pkt.size_bytes = stream.fwd_sizes_b[fi];
            pkt.direction = Direction::forward;
            ++fi;
        } else {
            pkt.timestamp = stream.bwd_offsets_s[bi];
            pkt.size_bytes = stream.bwd_sizes_b[bi];
            pkt.direction = Direction::backward;
            ++bi;
        }
        rec = update_flow(std::move(rec), pkt);
    }
    return extract_features(rec);
}

std::vector<LabeledExample> generate_traces(const std::vector<SyntheticAppProfile>& profiles,
                                            int n_flows, std::uint64_t seed) {
    if (n_flows < 1) throw std::invalid_argument("generate_traces: n_flows must be >= 1");
    if (profiles.empty()) throw std::invalid_argument("generate_traces: no profiles");

    std::vector<std::vector<std::size_t>> by_class(kNumClasses);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const int label = profiles[i].class_label;
        if (label < 1 || label > kNumClasses) {
            throw std::invalid_argument("generate_traces: profile class out of range");
        }
        by_class[static_cast<std::size_t>(label - 1)].push_back(i);
    }
    for (int c = 0; c < kNumClasses; ++c) {
        if (by_class[static_cast<std::size_t>(c)].empty()) {
            throw std::invalid_argument("generate_traces: class " + std::to_string(c + 1) +
                                        " has no profile");
        }
    }

    Rng rng(seed);
    std::vector<LabeledExample> out;
    out.reserve(static_cast<std::size_t>(n_flows));
    for (int i = 0; i < n_flows; ++i) {
        const int cls = (i % kNumClasses) + 1; // balanced
        const auto& apps = by_class[static_cast<std::size_t>(cls - 1)];
        const std::size_t app = apps[rng.uniform_int(apps.size())];
        Rng flow_rng = rng.fork(static_cast<std::uint64_t>(i) * 2654435761ULL + app);
        const PreambleStream stream = sample_preamble(profiles[app], flow_rng);
        out.push_back(LabeledExample{observed_features(stream), cls});
    }
    return out;
}

} // namespace ampf
