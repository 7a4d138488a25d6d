#ifndef AMPF_FLOW_HPP
#define AMPF_FLOW_HPP

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace ampf {

using HostId = int;
using SwitchId = int;

enum class Direction : std::uint8_t { forward, backward };
enum class Transport : std::uint8_t { udp, tcp };

/// One observed packet, as seen by the controller.
struct PacketRecord {
    double timestamp = 0.0; // simulation clock, seconds
    HostId src_host = -1;   // flow initiator
    HostId dst_host = -1;
    int size_bytes = 0;
    std::int64_t flow_id = 0;
    Direction direction = Direction::forward;
    Transport transport = Transport::udp;
};

struct FlowKey {
    HostId src_host = -1;
    HostId dst_host = -1;
    std::int64_t flow_id = 0;

    auto operator<=>(const FlowKey&) const = default;
};

/// Single-pass mean/M2 accumulator (Welford). std is the population std.
struct RunningStats {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    void add(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
        if (x < min) min = x;
        if (x > max) max = x;
    }

    double std_pop() const {
        if (count == 0) return 0.0;
        double v = m2 / static_cast<double>(count);
        return v > 0.0 ? std::sqrt(v) : 0.0;
    }
};

struct MeanStats {
    std::uint64_t count = 0;
    double mean = 0.0;

    void add(double x) {
        ++count;
        mean += (x - mean) / static_cast<double>(count);
    }
};

/// Running per-flow statistics. "forward" is the direction of the first
/// observed packet (host pair order in the key).
struct FlowRecord {
    FlowKey key;
    double first_ts = -1.0;
    double last_ts = -1.0;
    std::uint64_t fwd_packet_count = 0;
    std::uint64_t bwd_packet_count = 0;
    std::uint64_t fwd_byte_count = 0;
    std::uint64_t bwd_byte_count = 0;
    RunningStats fwd_interarrival;
    MeanStats fwd_length;
    MeanStats bwd_length;
    double last_fwd_ts = -1.0;

    static FlowRecord fresh(const FlowKey& k) {
        FlowRecord r;
        r.key = k;
        return r;
    }
};

/// The seven classifier inputs. Deliberately holds no port number and no
/// protocol identifier: classification must work without them.
struct FeatureVector {
    double duration_s = 0.0;        // f1
    double mean_fwd_iat_s = 0.0;    // f2
    double std_fwd_iat_s = 0.0;     // f3
    double min_fwd_iat_s = 0.0;     // f4
    double max_fwd_iat_s = 0.0;     // f5
    double mean_fwd_pkt_len_b = 0.0; // f6
    double mean_bwd_pkt_len_b = 0.0; // f7

    static constexpr int feature_count = 7;

    double get(int index) const; // 1-based feature index
};

static_assert(sizeof(FeatureVector) == 7 * sizeof(double),
              "feature vector carries exactly the seven flow-timing/length fields");

/// Priority class with its QoS bounds. acceptable_delay_s is +inf for the
/// best-effort class (delay constraint waived).
struct AppClass {
    int label = 4; // 1 = highest priority
    double min_bw_bps = 0.0;
    double acceptable_delay_s = std::numeric_limits<double>::infinity();

    bool best_effort() const { return !(acceptable_delay_s < std::numeric_limits<double>::infinity()); }
};

/// Folds one packet into the record. Requires a matching key and a
/// timestamp not older than the last observed one.
FlowRecord update_flow(FlowRecord record, const PacketRecord& pkt);

/// Requires at least 2 forward packets. Backward fields are 0 when the flow
/// has no backward packets.
FeatureVector extract_features(const FlowRecord& record);

// Labeled-trace file: header line, then one flow per line,
// `label,f1,f2,f3,f4,f5,f6,f7`.
struct LabeledExample {
    FeatureVector features;
    int label = 0; // 1..4
};

std::string labeled_trace_header();
void write_labeled_file(std::ostream& out, const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> read_labeled_file(std::istream& in); // throws with line number on parse failure

} // namespace ampf

#endif // AMPF_FLOW_HPP
