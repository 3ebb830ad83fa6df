#include "hullstate/network.hpp"

#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace hullstate {

using nlohmann::json;

namespace {

double require_number(const json& j, const char* key, ErrorCode code, const char* what) {
    if (!j.contains(key) || !j.at(key).is_number())
        raise(code, std::string("missing numeric field '") + key + "' in " + what);
    return j.at(key).get<double>();
}

}  // namespace

Network Network::parse(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(ErrorCode::InvalidArgument, std::string("malformed network document: ") + e.what());
    }

    Network net;
    if (!doc.contains("base") || !doc.at("base").is_object())
        raise(ErrorCode::UnitMissing, "network document lacks a 'base' object");
    const json& base = doc.at("base");
    net.s_base_kva_ = require_number(base, "s_kva", ErrorCode::UnitMissing, "base");
    net.v_base_kv_ = require_number(base, "v_kv", ErrorCode::UnitMissing, "base");
    if (net.s_base_kva_ <= 0.0 || net.v_base_kv_ <= 0.0)
        raise(ErrorCode::UnitMissing, "base quantities must be positive");

    if (!doc.contains("buses") || !doc.at("buses").is_array() || doc.at("buses").empty())
        raise(ErrorCode::InvalidArgument, "network document lacks buses");
    for (const json& jb : doc.at("buses")) {
        Bus b;
        b.id = jb.at("id").is_string() ? jb.at("id").get<std::string>()
                                       : jb.at("id").dump();
        const std::string kind = jb.value("kind", "pq");
        if (kind == "slack")
            b.kind = BusKind::Slack;
        else if (kind == "pq")
            b.kind = BusKind::PQ;
        else
            raise(ErrorCode::InvalidArgument, "unknown bus kind '" + kind + "'");
        b.p_load_kw = jb.value("p_load_kw", 0.0);
        b.q_load_kvar = jb.value("q_load_kvar", 0.0);
        b.dg_kva = jb.value("dg_kva", 0.0);
        b.dg_pf = jb.value("dg_pf", 0.95);
        if (b.dg_kva > 0.0 && (b.dg_pf <= 0.0 || b.dg_pf > 1.0))
            raise(ErrorCode::InvalidArgument, "dg_pf out of (0,1] at bus " + b.id);
        net.buses_.push_back(std::move(b));
    }

    if (!doc.contains("branches") || !doc.at("branches").is_array())
        raise(ErrorCode::InvalidArgument, "network document lacks branches");
    for (const json& jb : doc.at("branches")) {
        Branch br;
        br.from_id = jb.at("from").is_string() ? jb.at("from").get<std::string>()
                                               : jb.at("from").dump();
        br.to_id = jb.at("to").is_string() ? jb.at("to").get<std::string>()
                                           : jb.at("to").dump();
        br.r_ohm = require_number(jb, "r_ohm", ErrorCode::UnitMissing, "branch");
        br.x_ohm = require_number(jb, "x_ohm", ErrorCode::UnitMissing, "branch");
        net.branches_.push_back(std::move(br));
    }

    net.finalize();
    return net;
}

Network Network::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoFailure, "cannot open network document " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void Network::finalize() {
    index_.clear();
    slack_ = -1;
    int slack_count = 0;
    for (int i = 0; i < bus_count(); ++i) {
        const Bus& b = buses_[static_cast<std::size_t>(i)];
        if (!index_.emplace(b.id, i).second)
            raise(ErrorCode::DuplicateBusId, "bus id '" + b.id + "' appears twice");
        if (b.kind == BusKind::Slack) {
            slack_ = i;
            ++slack_count;
        }
    }
    if (slack_count != 1)
        raise(ErrorCode::NoSlackBus,
              "expected exactly one slack bus, found " + std::to_string(slack_count));

    const double z_base = v_base_kv_ * v_base_kv_ * 1000.0 / s_base_kva_;  // ohm
    adjacency_.assign(buses_.size(), {});
    for (int bi = 0; bi < branch_count(); ++bi) {
        Branch& br = branches_[static_cast<std::size_t>(bi)];
        br.from = bus_index(br.from_id);
        br.to = bus_index(br.to_id);
        if (br.from == br.to)
            raise(ErrorCode::NonRadialTopology, "self-loop at bus " + br.from_id);
        const Complex z(br.r_ohm / z_base, br.x_ohm / z_base);
        if (std::abs(z) == 0.0)
            raise(ErrorCode::ZeroImpedance,
                  "zero series impedance on branch " + br.from_id + "-" + br.to_id);
        br.admittance_pu = 1.0 / z;
        adjacency_[static_cast<std::size_t>(br.from)].push_back({br.to, bi});
        adjacency_[static_cast<std::size_t>(br.to)].push_back({br.from, bi});
    }

    // connectivity from the slack, then the radial branch count
    std::vector<char> seen(buses_.size(), 0);
    std::queue<int> q;
    q.push(slack_);
    seen[static_cast<std::size_t>(slack_)] = 1;
    int reached = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (const Neighbor& nb : adjacency_[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(nb.bus)]) {
                seen[static_cast<std::size_t>(nb.bus)] = 1;
                ++reached;
                q.push(nb.bus);
            }
        }
    }
    if (reached != bus_count())
        raise(ErrorCode::DisconnectedGraph,
              std::to_string(bus_count() - reached) + " buses unreachable from the slack");
    if (branch_count() != bus_count() - 1)
        raise(ErrorCode::NonRadialTopology,
              "radial feeder requires n_branch = n_bus - 1, got " +
                  std::to_string(branch_count()) + " branches for " +
                  std::to_string(bus_count()) + " buses");
}

std::string Network::to_json() const {
    json doc;
    doc["base"] = {{"s_kva", s_base_kva_}, {"v_kv", v_base_kv_}};
    doc["buses"] = json::array();
    for (const Bus& b : buses_) {
        json jb = {{"id", b.id},
                   {"kind", b.kind == BusKind::Slack ? "slack" : "pq"},
                   {"p_load_kw", b.p_load_kw},
                   {"q_load_kvar", b.q_load_kvar}};
        if (b.dg_kva > 0.0) {
            jb["dg_kva"] = b.dg_kva;
            jb["dg_pf"] = b.dg_pf;
        }
        doc["buses"].push_back(std::move(jb));
    }
    doc["branches"] = json::array();
    for (const Branch& br : branches_) {
        doc["branches"].push_back({{"from", br.from_id},
                                   {"to", br.to_id},
                                   {"r_ohm", br.r_ohm},
                                   {"x_ohm", br.x_ohm}});
    }
    return doc.dump(1);
}

int Network::bus_index(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) raise(ErrorCode::UnknownElement, "unknown bus '" + id + "'");
    return it->second;
}

int Network::branch_index(int i, int k) const {
    for (const Neighbor& nb : neighbors(i))
        if (nb.bus == k) return nb.branch;
    raise(ErrorCode::UnknownElement,
          "no branch between " + bus(i).id + " and " + bus(k).id);
}

int Network::branch_index(const std::string& from, const std::string& to) const {
    return branch_index(bus_index(from), bus_index(to));
}

Complex Network::branch_admittance(int i, int k) const {
    return branches_[static_cast<std::size_t>(branch_index(i, k))].admittance_pu;
}

Complex Network::load_pu(int bus_i) const {
    const Bus& b = bus(bus_i);
    return Complex(b.p_load_kw, b.q_load_kvar) / s_base_kva_;
}

Complex Network::dg_injection_pu(int bus_i) const {
    const Bus& b = bus(bus_i);
    if (b.dg_kva <= 0.0) return {0.0, 0.0};
    const double p = b.dg_kva * b.dg_pf;
    const double q = b.dg_kva * std::sqrt(std::max(0.0, 1.0 - b.dg_pf * b.dg_pf));
    return Complex(p, q) / s_base_kva_;
}

Complex Network::net_injection_pu(int bus_i) const {
    return dg_injection_pu(bus_i) - load_pu(bus_i);
}

Network Network::with_scaled_loads(double factor) const {
    if (factor < 0.0) raise(ErrorCode::InvalidArgument, "negative load scale");
    Network out = *this;
    for (Bus& b : out.buses_) {
        b.p_load_kw *= factor;
        b.q_load_kvar *= factor;
    }
    return out;
}

}  // namespace hullstate
