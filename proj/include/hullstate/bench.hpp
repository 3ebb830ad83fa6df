#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hullstate/krawczyk.hpp"
#include "hullstate/measurement.hpp"
#include "hullstate/network.hpp"
#include "hullstate/wls.hpp"

namespace hullstate {

/// One benchmark run description. Per-trial seeds are base_seed + trial index.
struct Scenario {
    std::string network_path;
    std::string placement_path;
    std::string method = "compare";  // wls | interval | compare
    int trials = 1000;
    std::uint64_t base_seed = 1;
    // max-error rates; negative keeps the placement document's rates and
    // zero (on both) disables corruption entirely
    double noise_scada = -1.0;
    double noise_pseudo = -1.0;
    double load_scale = 1.0;
    int threads = 0;             // 0: HULLSTATE_THREADS or hardware default
    int timing_repeats = 30;     // single-shot interval timing repeats
    WlsOptions wls;
    KrawczykOptions krawczyk;

    std::uint64_t hash() const;  // identifies the accuracy-relevant fields
};

/// Per-method accuracy/timing report. For a WLS campaign the per-bus numbers
/// are RMSE across trials plus the per-bus worst |error|; for a single-shot
/// interval estimate both collapse to the one sample's |error|.
struct EstimateReport {
    std::string method;
    std::uint64_t scenario_hash = 0;
    std::uint64_t base_seed = 0;
    int trials = 1;
    double redundancy = 0.0;
    double load_scale = 1.0;
    double min_voltage = 0.0, max_voltage = 0.0;  // true profile

    std::vector<std::string> bus_ids;
    std::vector<double> bus_err_real, bus_err_imag;      // RMSE (campaign) or |err|
    std::vector<double> bus_worst_real, bus_worst_imag;  // max over trials

    double max_err_real = 0.0, max_err_imag = 0.0;   // max over buses of bus_err_*
    double worst_trial_mae_real = 0.0;               // max over trials of per-trial MAE
    double worst_trial_mae_imag = 0.0;

    double mean_iterations = 0.0;
    int max_iterations = 0;
    double solve_ms_mean = 0.0;    // per-trial mean (campaign)
    double solve_ms_median = 0.0;  // median over timing repeats (single shot)
    double solve_ms_total = 0.0;
    int timing_repeats = 0;

    double beta = 0.0;              // interval method only
    int krawczyk_iterations = 0;
};

struct CompareReport {
    EstimateReport wls;
    EstimateReport interval;
    double time_ratio = 0.0;  // interval median / wls mean trial
};

/// Inputs resolved from a scenario: network (loads scaled), truth, and the
/// synthesized true-value measurement set.
struct ResolvedScenario {
    Network net;
    PowerFlowSolution truth;
    MeasurementSet true_measurements;
    PlacementSpec placement;
};

ResolvedScenario resolve(const Scenario& sc);
ResolvedScenario resolve(const Scenario& sc, const Network& net, const PlacementSpec& spec);

/// Monte Carlo WLS campaign: one corruption + Gauss-Newton per trial,
/// parallel across trials (HULLSTATE_THREADS caps the worker count),
/// deterministic metrics for a fixed (scenario, base_seed).
EstimateReport run_wls_campaign(const ResolvedScenario& rs, const Scenario& sc);

/// Single random sampling solved by the interval estimator; wall clock is the
/// median over timing repeats after warm-up.
EstimateReport run_interval_once(const ResolvedScenario& rs, const Scenario& sc);

/// Runs both methods sequentially and reports the timing ratio.
CompareReport compare(const ResolvedScenario& rs, const Scenario& sc);

/// Lossless JSON or plot-ready long-format CSV (bus, part, method, error).
std::string report_to_json(const std::vector<EstimateReport>& reports, double time_ratio);
std::string report_to_csv(const std::vector<EstimateReport>& reports);
void emit_report(const std::vector<EstimateReport>& reports, double time_ratio,
                 const std::string& format, const std::string& path);

/// Parses a JSON report back into memory (round-trip safe).
std::vector<EstimateReport> reports_from_json(const std::string& text, double* time_ratio);

}  // namespace hullstate
