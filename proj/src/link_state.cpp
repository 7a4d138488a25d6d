#include "ampf/link_state.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace ampf {

int Link::other_switch(int sw) const {
    if (!a.is_host && a.id == sw) return b.id;
    if (!b.is_host && b.id == sw) return a.id;
    throw std::invalid_argument("other_switch: switch is not an endpoint of this link");
}

int Link::direction_from(int sw) const {
    if (!a.is_host && a.id == sw) return 0;
    if (!b.is_host && b.id == sw) return 1;
    throw std::invalid_argument("direction_from: switch is not an endpoint of this link");
}

int Topology::find_switch(const std::string& name) const {
    for (std::size_t i = 0; i < switch_names.size(); ++i) {
        if (switch_names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

int Topology::find_host(const std::string& name) const {
    for (std::size_t i = 0; i < hosts.size(); ++i) {
        if (hosts[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<std::vector<int>> Topology::switch_adjacency() const {
    std::vector<std::vector<int>> adj(switch_names.size());
    for (std::size_t li = 0; li < links.size(); ++li) {
        const Link& l = links[li];
        if (!l.inter_switch()) continue;
        adj[static_cast<std::size_t>(l.a.id)].push_back(static_cast<int>(li));
        adj[static_cast<std::size_t>(l.b.id)].push_back(static_cast<int>(li));
    }
    return adj;
}

void Topology::validate() const {
    for (const auto& h : hosts) {
        if (h.attach_switch < 0 || h.attach_switch >= switch_count()) {
            throw std::runtime_error("topology: host " + h.name + " attached to unknown switch");
        }
        if (h.access_link < 0) {
            throw std::runtime_error("topology: host " + h.name + " has no access link");
        }
    }
    for (const auto& l : links) {
        if (l.capacity_bps <= 0.0) throw std::runtime_error("topology: link capacity must be positive");
        if (l.base_latency_s <= 0.0) throw std::runtime_error("topology: link latency must be positive");
        if (l.a == l.b) throw std::runtime_error("topology: self-loop link");
        for (const auto& end : {l.a, l.b}) {
            const int limit = end.is_host ? static_cast<int>(hosts.size()) : switch_count();
            if (end.id < 0 || end.id >= limit) {
                throw std::runtime_error("topology: link endpoint out of range");
            }
        }
    }
}

Topology Topology::parse(std::istream& in) {
    Topology topo;
    std::string line;
    int line_no = 0;
    struct PendingLink {
        std::string a, b;
        double cap, lat;
        int line_no;
    };
    std::vector<PendingLink> pending;
    std::vector<std::pair<std::string, std::string>> pending_hosts; // (host, switch)

    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        if (kind == "switch") {
            std::string name;
            if (!(ls >> name)) throw std::runtime_error("topology parse error at line " + std::to_string(line_no));
            topo.switch_names.push_back(name);
        } else if (kind == "host") {
            std::string name, sw;
            if (!(ls >> name >> sw)) throw std::runtime_error("topology parse error at line " + std::to_string(line_no));
            pending_hosts.emplace_back(name, sw);
        } else if (kind == "link") {
            PendingLink pl;
            pl.line_no = line_no;
            if (!(ls >> pl.a >> pl.b >> pl.cap >> pl.lat)) {
                throw std::runtime_error("topology parse error at line " + std::to_string(line_no));
            }
            pending.push_back(pl);
        } else {
            throw std::runtime_error("topology parse error at line " + std::to_string(line_no) +
                                     ": unknown directive '" + kind + "'");
        }
    }

    for (const auto& [hname, sname] : pending_hosts) {
        const int sw = topo.find_switch(sname);
        if (sw < 0) throw std::runtime_error("topology: host " + hname + " references unknown switch " + sname);
        topo.hosts.push_back(Host{hname, sw, -1});
    }

    auto resolve = [&](const std::string& name, int line) -> NodeRef {
        const int sw = topo.find_switch(name);
        if (sw >= 0) return NodeRef{false, sw};
        const int h = topo.find_host(name);
        if (h >= 0) return NodeRef{true, h};
        throw std::runtime_error("topology parse error at line " + std::to_string(line) +
                                 ": unknown node '" + name + "'");
    };

    for (const auto& pl : pending) {
        Link l;
        l.a = resolve(pl.a, pl.line_no);
        l.b = resolve(pl.b, pl.line_no);
        l.capacity_bps = pl.cap;
        l.base_latency_s = pl.lat;
        l.measured_latency_s = {pl.lat, pl.lat};
        const int li = static_cast<int>(topo.links.size());
        topo.links.push_back(l);
        for (const auto& end : {l.a, l.b}) {
            if (end.is_host) topo.hosts[static_cast<std::size_t>(end.id)].access_link = li;
        }
    }

    topo.validate();
    return topo;
}

std::string Topology::to_text() const {
    std::ostringstream out;
    for (const auto& s : switch_names) out << "switch " << s << '\n';
    for (const auto& h : hosts) out << "host " << h.name << ' ' << switch_names[static_cast<std::size_t>(h.attach_switch)] << '\n';
    char buf[256];
    for (const auto& l : links) {
        const std::string an = l.a.is_host ? hosts[static_cast<std::size_t>(l.a.id)].name
                                           : switch_names[static_cast<std::size_t>(l.a.id)];
        const std::string bn = l.b.is_host ? hosts[static_cast<std::size_t>(l.b.id)].name
                                           : switch_names[static_cast<std::size_t>(l.b.id)];
        std::snprintf(buf, sizeof(buf), "link %s %s %.10g %.10g\n", an.c_str(), bn.c_str(),
                      l.capacity_bps, l.base_latency_s);
        out << buf;
    }
    return out.str();
}

std::optional<double> latency_from_probes(double t_total_s, double t_s1_s, double t_s2_s) {
    if (t_total_s <= 0.0 || t_s1_s <= 0.0 || t_s2_s <= 0.0) return std::nullopt;
    const double latency = t_total_s - t_s1_s / 2.0 - t_s2_s / 2.0;
    if (latency <= 0.0) return std::nullopt;
    return latency;
}

std::vector<double> normalized_ab(const std::vector<Link>& links) {
    double max_ab = 0.0;
    for (const auto& l : links) {
        if (l.inter_switch()) max_ab = std::max(max_ab, l.available_bps());
    }
    if (max_ab <= 0.0) {
        throw std::runtime_error("normalized_ab: no inter-switch link has available bandwidth");
    }
    std::vector<double> nab(links.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (links[i].inter_switch()) nab[i] = links[i].available_bps() / max_ab;
    }
    return nab;
}

double link_cost(double latency_s, double nab, double lambda_a, double lambda_b) {
    if (!(nab > 0.0)) return kUnusableCost;
    return lambda_a * (latency_s * 1e3) + lambda_b / nab;
}

void CostMap::recompute(const std::vector<Link>& links) {
    recompute(links, std::vector<std::array<double, 2>>(links.size(), {0.0, 0.0}));
}

void CostMap::recompute(const std::vector<Link>& links,
                        const std::vector<std::array<double, 2>>& measured_load_bps) {
    if (measured_load_bps.size() != links.size()) {
        throw std::invalid_argument("cost map: load vector does not match the link set");
    }
    // Cost-side AB per directed edge: reservations make a direction unusable
    // when they exhaust it; measured load only discounts it, floored so busy
    // links stay routable.
    std::vector<std::array<double, 2>> ab(links.size(), {0.0, 0.0});
    double max_ab = 0.0;
    for (std::size_t i = 0; i < links.size(); ++i) {
        const Link& l = links[i];
        if (!l.inter_switch()) continue;
        for (int d = 0; d < 2; ++d) {
            double& entry = ab[i][static_cast<std::size_t>(d)];
            if (l.available_bps(d) <= 0.0) {
                entry = 0.0;
            } else {
                const double committed = std::max(l.reserved_bps[static_cast<std::size_t>(d)],
                                                  measured_load_bps[i][static_cast<std::size_t>(d)]);
                entry = std::max(0.02 * l.capacity_bps, l.capacity_bps - committed);
            }
            max_ab = std::max(max_ab, entry);
        }
    }
    if (max_ab <= 0.0) {
        throw std::runtime_error("cost map: no inter-switch link has available bandwidth");
    }
    const auto nan2 = std::array<double, 2>{std::numeric_limits<double>::quiet_NaN(),
                                            std::numeric_limits<double>::quiet_NaN()};
    cost.assign(links.size(), nan2);
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (!links[i].inter_switch()) continue;
        for (int d = 0; d < 2; ++d) {
            cost[i][static_cast<std::size_t>(d)] =
                link_cost(links[i].measured_latency_s[static_cast<std::size_t>(d)],
                          ab[i][static_cast<std::size_t>(d)] / max_ab, lambda_a, lambda_b);
        }
    }
    stale = false;
}

double path_cost(const std::vector<int>& edges, const std::vector<int>& dirs,
                 const CostMap& cost_map) {
    if (dirs.size() != edges.size()) {
        throw std::invalid_argument("path_cost: one direction per edge required");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const int e = edges[i];
        if (e < 0 || static_cast<std::size_t>(e) >= cost_map.cost.size()) {
            throw std::runtime_error("path_cost: edge index not present in cost map");
        }
        total += cost_map.cost[static_cast<std::size_t>(e)][static_cast<std::size_t>(dirs[i])];
    }
    return total;
}

double path_cost(const std::vector<int>& edges, const CostMap& cost_map) {
    return path_cost(edges, std::vector<int>(edges.size(), 0), cost_map);
}

bool reserve_bw(Link& link, int dir, double amount_bps) {
    if (amount_bps < 0.0) throw std::invalid_argument("reserve_bw: negative amount");
    if (dir != 0 && dir != 1) throw std::invalid_argument("reserve_bw: direction must be 0 or 1");
    if (amount_bps > link.available_bps(dir)) return false;
    link.reserved_bps[static_cast<std::size_t>(dir)] += amount_bps;
    return true;
}

void release_bw(Link& link, int dir, double amount_bps) {
    if (amount_bps < 0.0) throw std::invalid_argument("release_bw: negative amount");
    if (dir != 0 && dir != 1) throw std::invalid_argument("release_bw: direction must be 0 or 1");
    double& reserved = link.reserved_bps[static_cast<std::size_t>(dir)];
    if (amount_bps > reserved + 1e-6) { // micro-bps slack absorbs float drift
        throw std::logic_error("release_bw: releasing more than is reserved");
    }
    reserved = std::max(0.0, reserved - amount_bps);
}

} // namespace ampf
