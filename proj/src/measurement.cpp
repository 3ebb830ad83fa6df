#include "hullstate/measurement.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace hullstate {

using nlohmann::json;

const char* kind_name(MeasurementKind kind) {
    switch (kind) {
        case MeasurementKind::Vmag: return "vmag";
        case MeasurementKind::Pflow: return "pflow";
        case MeasurementKind::Qflow: return "qflow";
        case MeasurementKind::Pinj: return "pinj";
        case MeasurementKind::Qinj: return "qinj";
    }
    return "unknown";
}

namespace {

MeasurementKind kind_from_name(const std::string& name) {
    if (name == "vmag") return MeasurementKind::Vmag;
    if (name == "pflow") return MeasurementKind::Pflow;
    if (name == "qflow") return MeasurementKind::Qflow;
    if (name == "pinj") return MeasurementKind::Pinj;
    if (name == "qinj") return MeasurementKind::Qinj;
    raise(ErrorCode::InvalidArgument, "unknown measurement kind '" + name + "'");
}

std::pair<std::string, std::string> split_branch_name(const std::string& name) {
    const auto dash = name.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == name.size())
        raise(ErrorCode::InvalidArgument, "branch name '" + name + "' is not 'from-to'");
    return {name.substr(0, dash), name.substr(dash + 1)};
}

}  // namespace

double sigma_from_max_error(double true_value, double rate) {
    if (rate <= 0.0) raise(ErrorCode::InvalidArgument, "noise rate must be positive");
    return std::max(rate * std::abs(true_value) / 3.0, kSigmaFloor);
}

PlacementSpec PlacementSpec::parse(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(ErrorCode::InvalidArgument, std::string("malformed placement document: ") + e.what());
    }
    PlacementSpec spec;
    for (const json& v : doc.value("vmag", json::array()))
        spec.vmag_buses.push_back(v.get<std::string>());
    for (const json& v : doc.value("flow", json::array()))
        spec.flow_branches.push_back(v.get<std::string>());
    for (const json& v : doc.value("inj_pseudo", json::array()))
        spec.injection_buses.push_back(v.get<std::string>());
    if (doc.contains("rates")) {
        spec.scada_rate = doc.at("rates").value("scada", spec.scada_rate);
        spec.pseudo_rate = doc.at("rates").value("pseudo", spec.pseudo_rate);
    }
    if (spec.scada_rate < 0.0 || spec.scada_rate >= 1.0 || spec.pseudo_rate < 0.0 ||
        spec.pseudo_rate >= 1.0)
        raise(ErrorCode::InvalidArgument, "noise rates must lie in [0,1)");
    return spec;
}

PlacementSpec PlacementSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoFailure, "cannot open placement document " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

MeasurementSet synthesize(const Network& net, const PowerFlowSolution& sol,
                          const PlacementSpec& spec) {
    if (!sol.converged)
        raise(ErrorCode::InvalidArgument, "measurement synthesis needs a converged power flow");

    MeasurementSet ms;
    // A rate of exactly zero means noise-free measurements; sigma falls back
    // to the floor so downstream weights stay finite.
    const auto sigma_or_floor = [](double value, double rate) {
        return rate > 0.0 ? sigma_from_max_error(value, rate) : kSigmaFloor;
    };

    for (const std::string& id : spec.vmag_buses) {
        const int k = net.bus_index(id);
        Measurement m;
        m.kind = MeasurementKind::Vmag;
        m.klass = MeasurementClass::Scada;
        m.bus = k;
        m.true_value = std::abs(sol.states.voltage(k));
        m.noisy_value = m.true_value;
        m.sigma = sigma_or_floor(m.true_value, spec.scada_rate);
        ms.items.push_back(m);
    }
    for (const std::string& name : spec.flow_branches) {
        const auto [from, to] = split_branch_name(name);
        const int bi = net.branch_index(from, to);
        // measured at the named from side
        const Complex s =
            branch_flow(net, sol.states, net.bus_index(from), net.bus_index(to));
        for (const bool active : {true, false}) {
            Measurement m;
            m.kind = active ? MeasurementKind::Pflow : MeasurementKind::Qflow;
            m.klass = MeasurementClass::Scada;
            m.branch = bi;
            m.bus = net.bus_index(from);  // metered side of the branch
            m.true_value = active ? s.real() : s.imag();
            m.noisy_value = m.true_value;
            m.sigma = sigma_or_floor(m.true_value, spec.scada_rate);
            ms.items.push_back(m);
        }
    }
    for (const std::string& id : spec.injection_buses) {
        const int k = net.bus_index(id);
        const Complex s = sol.injections[static_cast<std::size_t>(k)];
        for (const bool active : {true, false}) {
            Measurement m;
            m.kind = active ? MeasurementKind::Pinj : MeasurementKind::Qinj;
            m.klass = MeasurementClass::Pseudo;
            m.bus = k;
            m.true_value = active ? s.real() : s.imag();
            m.noisy_value = m.true_value;
            m.sigma = sigma_or_floor(m.true_value, spec.pseudo_rate);
            ms.items.push_back(m);
        }
    }

    ms.redundancy = redundancy(ms, net);
    if (ms.redundancy < 1.0)
        raise(ErrorCode::InsufficientRedundancy,
              "m = " + std::to_string(ms.items.size()) + " measurements for n = " +
                  std::to_string(2 * net.bus_count()) + " states");
    return ms;
}

MeasurementSet corrupt(const MeasurementSet& ms, std::uint64_t seed) {
    MeasurementSet out = ms;
    out.rng_seed = seed;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (Measurement& m : out.items) m.noisy_value = m.true_value + m.sigma * unit(rng);
    return out;
}

double redundancy(const MeasurementSet& ms, const Network& net) {
    return static_cast<double>(ms.items.size()) / (2.0 * net.bus_count());
}

std::string MeasurementSet::to_json() const {
    json doc;
    doc["rng_seed"] = rng_seed;
    doc["redundancy"] = redundancy;
    doc["items"] = json::array();
    for (const Measurement& m : items) {
        doc["items"].push_back({{"kind", kind_name(m.kind)},
                                {"klass", m.klass == MeasurementClass::Scada ? "scada" : "pseudo"},
                                {"bus", m.bus},
                                {"branch", m.branch},
                                {"true_value", m.true_value},
                                {"noisy_value", m.noisy_value},
                                {"sigma", m.sigma}});
    }
    return doc.dump();
}

MeasurementSet MeasurementSet::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        raise(ErrorCode::InvalidArgument, std::string("malformed measurement set: ") + e.what());
    }
    MeasurementSet ms;
    ms.rng_seed = doc.value("rng_seed", 0ULL);
    ms.redundancy = doc.value("redundancy", 0.0);
    for (const json& jm : doc.value("items", json::array())) {
        Measurement m;
        m.kind = kind_from_name(jm.at("kind").get<std::string>());
        m.klass = jm.at("klass").get<std::string>() == "scada" ? MeasurementClass::Scada
                                                               : MeasurementClass::Pseudo;
        m.bus = jm.value("bus", -1);
        m.branch = jm.value("branch", -1);
        m.true_value = jm.at("true_value").get<double>();
        m.noisy_value = jm.at("noisy_value").get<double>();
        m.sigma = jm.at("sigma").get<double>();
        ms.items.push_back(m);
    }
    return ms;
}

}  // namespace hullstate
