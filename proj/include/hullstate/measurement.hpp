#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hullstate/network.hpp"
#include "hullstate/power_flow.hpp"

namespace hullstate {

enum class MeasurementKind { Vmag, Pflow, Qflow, Pinj, Qinj };
enum class MeasurementClass { Scada, Pseudo };

const char* kind_name(MeasurementKind kind);

struct Measurement {
    MeasurementKind kind;
    MeasurementClass klass;
    int bus = -1;     // Vmag / Pinj / Qinj location; for flows, the metered side
    int branch = -1;  // Pflow / Qflow
    double true_value = 0.0;
    double noisy_value = 0.0;
    double sigma = 0.0;
};

/// Ordered measurement list; the order fixes the row order of every matrix
/// built downstream.
struct MeasurementSet {
    std::vector<Measurement> items;
    std::uint64_t rng_seed = 0;
    double redundancy = 0.0;

    std::size_t size() const { return items.size(); }
    std::string to_json() const;
    static MeasurementSet from_json(const std::string& text);
};

/// Placement scheme plus noise rates: which buses get voltage-magnitude
/// meters, which branches get P/Q flow pairs, which buses get pseudo P/Q
/// injection pairs.
struct PlacementSpec {
    std::vector<std::string> vmag_buses;
    std::vector<std::string> flow_branches;  // "from-to"
    std::vector<std::string> injection_buses;
    double scada_rate = 0.01;
    double pseudo_rate = 0.20;

    static PlacementSpec parse(const std::string& json_text);
    static PlacementSpec load(const std::string& path);
};

/// Sigma floor for near-zero true values; keeps WLS weights finite where a
/// branch carries no flow.
inline constexpr double kSigmaFloor = 1e-4;

/// sigma = rate * |true| / 3 (the 3-sigma rule), floored at kSigmaFloor.
double sigma_from_max_error(double true_value, double rate);

/// True measurement values from a converged power flow; noisy_value starts
/// equal to true_value. Row order: vmag entries, then P,Q per flow branch,
/// then P,Q per injection bus, each in spec order.
MeasurementSet synthesize(const Network& net, const PowerFlowSolution& sol,
                          const PlacementSpec& spec);

/// Adds seeded Gaussian noise, one draw per measurement in row order.
/// Same seed, same set: bit-identical output.
MeasurementSet corrupt(const MeasurementSet& ms, std::uint64_t seed);

/// m / n with n = 2 * bus_count: the state count including the
/// constraint-fixed slack pair.
double redundancy(const MeasurementSet& ms, const Network& net);

}  // namespace hullstate
