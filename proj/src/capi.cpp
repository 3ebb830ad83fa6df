#include "hullstate.h"

#include <cstring>
#include <memory>
#include <string>

#include "hullstate/bench.hpp"

using namespace hullstate;

namespace {

thread_local std::string g_last_error;

hs_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return HS_E_INVALID_ARGUMENT;
        case ErrorCode::DuplicateBusId:
        case ErrorCode::NoSlackBus:
        case ErrorCode::DisconnectedGraph:
        case ErrorCode::NonRadialTopology:
        case ErrorCode::UnitMissing:
        case ErrorCode::ZeroImpedance:
        case ErrorCode::UnpairedPQ: return HS_E_PARSE;
        case ErrorCode::UnknownElement: return HS_E_UNKNOWN_ELEMENT;
        case ErrorCode::InsufficientRedundancy:
        case ErrorCode::RankDeficient: return HS_E_UNOBSERVABLE;
        case ErrorCode::DimensionMismatch: return HS_E_DIMENSION;
        case ErrorCode::EmptyIntersection: return HS_E_EMPTY_INTERSECTION;
        case ErrorCode::SingularMatrix: return HS_E_SINGULAR;
        case ErrorCode::ContractionFailure: return HS_E_CONTRACTION;
        case ErrorCode::NonConvergence: return HS_E_NON_CONVERGENCE;
        case ErrorCode::IterationCap: return HS_E_ITERATION_CAP;
        case ErrorCode::IoFailure: return HS_E_IO;
    }
    return HS_E_INTERNAL;
}

template <typename Fn>
hs_status guarded(Fn&& fn) {
    try {
        fn();
        return HS_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HS_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return HS_E_INTERNAL;
    }
}

Scenario scenario_of(const hs_options& o, const char* method) {
    Scenario sc;
    sc.method = method ? method : "compare";
    sc.trials = o.trials;
    sc.base_seed = o.base_seed;
    sc.noise_scada = o.noise_scada;
    sc.noise_pseudo = o.noise_pseudo;
    sc.load_scale = o.load_scale;
    sc.threads = o.threads;
    sc.timing_repeats = o.timing_repeats;
    sc.wls.tolerance = o.wls_tolerance;
    sc.wls.max_iterations = o.wls_max_iterations;
    sc.krawczyk.epsilon = o.krawczyk_epsilon;
    sc.krawczyk.max_iterations = o.krawczyk_max_iterations;
    return sc;
}

}  // namespace

struct hs_network {
    Network net;
};
struct hs_placement {
    PlacementSpec spec;
};
struct hs_report {
    std::vector<EstimateReport> reports;
    double time_ratio = 0.0;
};

extern "C" {

const char* hs_status_name(hs_status status) {
    switch (status) {
        case HS_OK: return "ok";
        case HS_E_INVALID_ARGUMENT: return "invalid_argument";
        case HS_E_PARSE: return "parse_error";
        case HS_E_IO: return "io_failure";
        case HS_E_UNKNOWN_ELEMENT: return "unknown_element";
        case HS_E_UNOBSERVABLE: return "unobservable";
        case HS_E_NON_CONVERGENCE: return "non_convergence";
        case HS_E_SINGULAR: return "singular_matrix";
        case HS_E_CONTRACTION: return "contraction_failure";
        case HS_E_EMPTY_INTERSECTION: return "empty_intersection";
        case HS_E_ITERATION_CAP: return "iteration_cap";
        case HS_E_DIMENSION: return "dimension_mismatch";
        case HS_E_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* hs_last_error(void) { return g_last_error.c_str(); }

hs_status hs_network_load_file(const char* path, hs_network** out) {
    if (!path || !out) {
        g_last_error = "null argument";
        return HS_E_INVALID_ARGUMENT;
    }
    return guarded([&] { *out = new hs_network{Network::load(path)}; });
}

hs_status hs_network_parse(const char* json_text, hs_network** out) {
    if (!json_text || !out) {
        g_last_error = "null argument";
        return HS_E_INVALID_ARGUMENT;
    }
    return guarded([&] { *out = new hs_network{Network::parse(json_text)}; });
}

void hs_network_free(hs_network* net) { delete net; }

int hs_network_bus_count(const hs_network* net) { return net ? net->net.bus_count() : 0; }

int hs_network_branch_count(const hs_network* net) {
    return net ? net->net.branch_count() : 0;
}

hs_status hs_placement_load_file(const char* path, hs_placement** out) {
    if (!path || !out) {
        g_last_error = "null argument";
        return HS_E_INVALID_ARGUMENT;
    }
    return guarded([&] { *out = new hs_placement{PlacementSpec::load(path)}; });
}

hs_status hs_placement_parse(const char* json_text, hs_placement** out) {
    if (!json_text || !out) {
        g_last_error = "null argument";
        return HS_E_INVALID_ARGUMENT;
    }
    return guarded([&] { *out = new hs_placement{PlacementSpec::parse(json_text)}; });
}

void hs_placement_free(hs_placement* placement) { delete placement; }

void hs_options_init(hs_options* opts) {
    if (!opts) return;
    const Scenario defaults;
    opts->trials = defaults.trials;
    opts->base_seed = defaults.base_seed;
    opts->noise_scada = defaults.noise_scada;
    opts->noise_pseudo = defaults.noise_pseudo;
    opts->load_scale = defaults.load_scale;
    opts->threads = defaults.threads;
    opts->timing_repeats = defaults.timing_repeats;
    opts->wls_tolerance = defaults.wls.tolerance;
    opts->wls_max_iterations = defaults.wls.max_iterations;
    opts->krawczyk_epsilon = defaults.krawczyk.epsilon;
    opts->krawczyk_max_iterations = defaults.krawczyk.max_iterations;
}

hs_status hs_run(const hs_network* net, const hs_placement* placement,
                 const hs_options* opts, const char* method, hs_report** out) {
    if (!net || !placement || !opts || !method || !out) {
        g_last_error = "null argument";
        return HS_E_INVALID_ARGUMENT;
    }
    const std::string name = method;
    if (name != "wls" && name != "interval" && name != "compare") {
        g_last_error = "method must be wls, interval or compare";
        return HS_E_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const Scenario sc = scenario_of(*opts, method);
        const ResolvedScenario rs = resolve(sc, net->net, placement->spec);
        auto rep = std::make_unique<hs_report>();
        if (name == "wls") {
            rep->reports.push_back(run_wls_campaign(rs, sc));
        } else if (name == "interval") {
            rep->reports.push_back(run_interval_once(rs, sc));
        } else {
            const CompareReport both = compare(rs, sc);
            rep->reports.push_back(both.wls);
            rep->reports.push_back(both.interval);
            rep->time_ratio = both.time_ratio;
        }
        *out = rep.release();
    });
}

hs_status hs_report_render(const hs_report* report, const char* format, char** out_text) {
    if (!report || !format || !out_text) {
        g_last_error = "null argument";
        return HS_E_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const std::string fmt = format;
        std::string text;
        if (fmt == "json")
            text = report_to_json(report->reports, report->time_ratio);
        else if (fmt == "csv")
            text = report_to_csv(report->reports);
        else
            raise(ErrorCode::InvalidArgument, "unknown report format '" + fmt + "'");
        char* buf = new char[text.size() + 1];
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *out_text = buf;
    });
}

hs_status hs_report_write(const hs_report* report, const char* format, const char* path) {
    if (!report || !format || !path) {
        g_last_error = "null argument";
        return HS_E_INVALID_ARGUMENT;
    }
    return guarded(
        [&] { emit_report(report->reports, report->time_ratio, format, path); });
}

hs_status hs_report_summary(const hs_report* report, const char* method, hs_summary* out) {
    if (!report || !method || !out) {
        g_last_error = "null argument";
        return HS_E_INVALID_ARGUMENT;
    }
    for (const EstimateReport& r : report->reports) {
        if (r.method == method) {
            out->max_err_real = r.max_err_real;
            out->max_err_imag = r.max_err_imag;
            out->worst_trial_mae_real = r.worst_trial_mae_real;
            out->solve_ms = r.method == "wls" ? r.solve_ms_mean : r.solve_ms_median;
            out->beta = r.beta;
            out->iterations = r.max_iterations;
            out->redundancy = r.redundancy;
            out->min_voltage = r.min_voltage;
            out->max_voltage = r.max_voltage;
            return HS_OK;
        }
    }
    g_last_error = std::string("report has no '") + method + "' entry";
    return HS_E_INVALID_ARGUMENT;
}

double hs_report_time_ratio(const hs_report* report) {
    return report ? report->time_ratio : 0.0;
}

void hs_report_free(hs_report* report) { delete report; }

void hs_string_free(char* text) { delete[] text; }

}  // extern "C"
