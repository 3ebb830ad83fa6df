#pragma once

#include <complex>
#include <string>
#include <unordered_map>
#include <vector>

#include "hullstate/errors.hpp"

namespace hullstate {

using Complex = std::complex<double>;

enum class BusKind { Slack, PQ };

struct Bus {
    std::string id;
    BusKind kind = BusKind::PQ;
    double p_load_kw = 0.0;
    double q_load_kvar = 0.0;
    double dg_kva = 0.0;   // installed DG capacity; zero when absent
    double dg_pf = 0.95;   // DG power factor, reactive power injected
};

struct Branch {
    std::string from_id, to_id;
    int from = -1, to = -1;  // bus indices in document order
    double r_ohm = 0.0, x_ohm = 0.0;
    Complex admittance_pu;   // series admittance y = 1/z in per-unit
};

/// Radial distribution network in per-unit. Immutable after parse; bus order
/// is document order and fixes the column order of every downstream matrix.
class Network {
public:
    static Network parse(const std::string& json_text);
    static Network load(const std::string& path);
    std::string to_json() const;

    int bus_count() const { return static_cast<int>(buses_.size()); }
    int branch_count() const { return static_cast<int>(branches_.size()); }
    const Bus& bus(int i) const { return buses_[static_cast<std::size_t>(i)]; }
    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Branch>& branches() const { return branches_; }
    int slack_index() const { return slack_; }
    double s_base_kva() const { return s_base_kva_; }
    double v_base_kv() const { return v_base_kv_; }

    /// Index of a bus id; throws UnknownElement.
    int bus_index(const std::string& id) const;
    /// Branch joining buses i and k in either orientation; throws UnknownElement.
    int branch_index(int i, int k) const;
    int branch_index(const std::string& from, const std::string& to) const;

    /// Series admittance y_ik = y_ki between adjacent buses.
    Complex branch_admittance(int i, int k) const;

    /// Net scheduled complex injection (DG minus load) in per-unit,
    /// positive into the network.
    Complex net_injection_pu(int bus) const;
    Complex load_pu(int bus) const;
    Complex dg_injection_pu(int bus) const;

    struct Neighbor {
        int bus;
        int branch;
    };
    const std::vector<Neighbor>& neighbors(int bus) const {
        return adjacency_[static_cast<std::size_t>(bus)];
    }

    /// Copy with all loads multiplied by `factor` (DG injections unchanged).
    Network with_scaled_loads(double factor) const;

private:
    void finalize();  // indices, per-unit conversion, validation

    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    double s_base_kva_ = 0.0;
    double v_base_kv_ = 0.0;
    int slack_ = -1;
    std::unordered_map<std::string, int> index_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

}  // namespace hullstate
