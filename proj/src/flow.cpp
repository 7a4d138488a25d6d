#include "ampf/flow.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ampf {

double FeatureVector::get(int index) const {
    switch (index) {
        case 1: return duration_s;
        case 2: return mean_fwd_iat_s;
        case 3: return std_fwd_iat_s;
        case 4: return min_fwd_iat_s;
        case 5: return max_fwd_iat_s;
        case 6: return mean_fwd_pkt_len_b;
        case 7: return mean_bwd_pkt_len_b;
        default: throw std::invalid_argument("feature index out of range: " + std::to_string(index));
    }
}

FlowRecord update_flow(FlowRecord record, const PacketRecord& pkt) {
    const FlowKey pkt_key{pkt.src_host, pkt.dst_host, pkt.flow_id};
    if (pkt_key != record.key) {
        throw std::invalid_argument("update_flow: packet does not belong to this flow record");
    }
    if (pkt.size_bytes <= 0) {
        throw std::invalid_argument("update_flow: packet size must be positive");
    }
    if (record.last_ts >= 0.0 && pkt.timestamp < record.last_ts) {
        throw std::runtime_error("update_flow: out-of-order packet timestamp");
    }

    if (record.first_ts < 0.0) record.first_ts = pkt.timestamp;
    record.last_ts = pkt.timestamp;

    if (pkt.direction == Direction::forward) {
        if (record.last_fwd_ts >= 0.0) {
            record.fwd_interarrival.add(pkt.timestamp - record.last_fwd_ts);
        }
        record.last_fwd_ts = pkt.timestamp;
        ++record.fwd_packet_count;
        record.fwd_byte_count += static_cast<std::uint64_t>(pkt.size_bytes);
        record.fwd_length.add(static_cast<double>(pkt.size_bytes));
    } else {
        ++record.bwd_packet_count;
        record.bwd_byte_count += static_cast<std::uint64_t>(pkt.size_bytes);
        record.bwd_length.add(static_cast<double>(pkt.size_bytes));
    }
    return record;
}

FeatureVector extract_features(const FlowRecord& record) {
    if (record.fwd_packet_count < 2) {
        throw std::runtime_error("extract_features: need at least 2 forward packets");
    }
    FeatureVector fv;
    fv.duration_s = record.last_ts - record.first_ts;
    fv.mean_fwd_iat_s = record.fwd_interarrival.mean;
    fv.std_fwd_iat_s = record.fwd_interarrival.std_pop();
    fv.min_fwd_iat_s = record.fwd_interarrival.min;
    fv.max_fwd_iat_s = record.fwd_interarrival.max;
    fv.mean_fwd_pkt_len_b = record.fwd_length.mean;
    fv.mean_bwd_pkt_len_b = record.bwd_packet_count > 0 ? record.bwd_length.mean : 0.0;
    return fv;
}

std::string labeled_trace_header() {
    return "label,duration_s,mean_fwd_iat_s,std_fwd_iat_s,min_fwd_iat_s,max_fwd_iat_s,"
           "mean_fwd_pkt_len_b,mean_bwd_pkt_len_b";
}

void write_labeled_file(std::ostream& out, const std::vector<LabeledExample>& examples) {
    out << labeled_trace_header() << '\n';
    char buf[512];
    for (const auto& ex : examples) {
        const auto& f = ex.features;
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      ex.label, f.duration_s, f.mean_fwd_iat_s, f.std_fwd_iat_s,
                      f.min_fwd_iat_s, f.max_fwd_iat_s, f.mean_fwd_pkt_len_b,
                      f.mean_bwd_pkt_len_b);
        out << buf;
    }
}

namespace {

double parse_field(const std::string& s, int line_no) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("trace parse error at line " + std::to_string(line_no) +
                                 ": bad number '" + s + "'");
    }
}

} // namespace

std::vector<LabeledExample> read_labeled_file(std::istream& in) {
    std::vector<LabeledExample> out;
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!saw_header) {
            saw_header = true; // first non-empty line is the header
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 8) {
            throw std::runtime_error("trace parse error at line " + std::to_string(line_no) +
                                     ": expected 8 comma-separated fields, got " +
                                     std::to_string(fields.size()));
        }
        LabeledExample ex;
        const double label = parse_field(fields[0], line_no);
        ex.label = static_cast<int>(label);
        if (ex.label < 1 || ex.label > 4 || label != ex.label) {
            throw std::runtime_error("trace parse error at line " + std::to_string(line_no) +
                                     ": label must be an integer in 1..4");
        }
        ex.features.duration_s = parse_field(fields[1], line_no);
        ex.features.mean_fwd_iat_s = parse_field(fields[2], line_no);
        ex.features.std_fwd_iat_s = parse_field(fields[3], line_no);
        ex.features.min_fwd_iat_s = parse_field(fields[4], line_no);
        ex.features.max_fwd_iat_s = parse_field(fields[5], line_no);
        ex.features.mean_fwd_pkt_len_b = parse_field(fields[6], line_no);
        ex.features.mean_bwd_pkt_len_b = parse_field(fields[7], line_no);
        out.push_back(ex);
    }
    return out;
}

} // namespace ampf
