#include "hullstate/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace hullstate {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a_str(std::uint64_t h, const std::string& s) {
    return fnv1a(h, s.data(), s.size());
}

int worker_count(const Scenario& sc, int trials) {
    int want = sc.threads > 0 ? sc.threads
                              : static_cast<int>(std::thread::hardware_concurrency());
    if (want <= 0) want = 1;
    // HULLSTATE_THREADS caps trial parallelism regardless of the request
    if (const char* env = std::getenv("HULLSTATE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) want = std::min(want, cap);
    }
    return std::max(1, std::min(want, trials));
}

struct TrialErrors {
    std::vector<double> err_real, err_imag;  // per bus, signed
    double solve_ms = 0.0;
    int iterations = 0;
};

std::vector<double> abs_errors(const StateVector& estimate, const StateVector& truth,
                               bool imag_part) {
    std::vector<double> out(static_cast<std::size_t>(truth.bus_count()));
    for (int k = 0; k < truth.bus_count(); ++k) {
        const Complex e = estimate.voltage(k) - truth.voltage(k);
        out[static_cast<std::size_t>(k)] = imag_part ? e.imag() : e.real();
    }
    return out;
}

void fill_profile(EstimateReport& rep, const ResolvedScenario& rs) {
    double lo = 2.0, hi = 0.0;
    for (int k = 0; k < rs.net.bus_count(); ++k) {
        const double v = std::abs(rs.truth.states.voltage(k));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    rep.min_voltage = lo;
    rep.max_voltage = hi;
    rep.redundancy = rs.true_measurements.redundancy;
    rep.bus_ids.clear();
    for (const Bus& b : rs.net.buses()) rep.bus_ids.push_back(b.id);
}

MeasurementSet trial_measurements(const ResolvedScenario& rs, std::uint64_t seed) {
    if (rs.placement.scada_rate == 0.0 && rs.placement.pseudo_rate == 0.0) {
        MeasurementSet exact = rs.true_measurements;
        exact.rng_seed = seed;
        return exact;
    }
    return corrupt(rs.true_measurements, seed);
}

}  // namespace

std::uint64_t Scenario::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    h = fnv1a_str(h, network_path);
    h = fnv1a_str(h, placement_path);
    h = fnv1a_str(h, method);
    h = fnv1a(h, &trials, sizeof trials);
    h = fnv1a(h, &base_seed, sizeof base_seed);
    h = fnv1a(h, &noise_scada, sizeof noise_scada);
    h = fnv1a(h, &noise_pseudo, sizeof noise_pseudo);
    h = fnv1a(h, &load_scale, sizeof load_scale);
    h = fnv1a(h, &wls.tolerance, sizeof wls.tolerance);
    h = fnv1a(h, &wls.max_iterations, sizeof wls.max_iterations);
    h = fnv1a(h, &krawczyk.epsilon, sizeof krawczyk.epsilon);
    h = fnv1a(h, &krawczyk.max_iterations, sizeof krawczyk.max_iterations);
    return h;
}

ResolvedScenario resolve(const Scenario& sc, const Network& base_net,
                         const PlacementSpec& spec) {
    ResolvedScenario rs{base_net.with_scaled_loads(sc.load_scale), {}, {}, spec};
    if (sc.noise_scada >= 0.0) rs.placement.scada_rate = sc.noise_scada;
    if (sc.noise_pseudo >= 0.0) rs.placement.pseudo_rate = sc.noise_pseudo;
    rs.truth = solve_power_flow(rs.net);
    rs.true_measurements = synthesize(rs.net, rs.truth, rs.placement);
    return rs;
}

ResolvedScenario resolve(const Scenario& sc) {
    const Network net = Network::load(sc.network_path);
    const PlacementSpec spec = PlacementSpec::load(sc.placement_path);
    return resolve(sc, net, spec);
}

EstimateReport run_wls_campaign(const ResolvedScenario& rs, const Scenario& sc) {
    if (sc.trials < 1) raise(ErrorCode::InvalidArgument, "campaign needs trials >= 1");
    const int nbus = rs.net.bus_count();
    const int trials = sc.trials;
    std::vector<TrialErrors> results(static_cast<std::size_t>(trials));

    const auto run_trial = [&](int t) {
        const MeasurementSet ms = trial_measurements(rs, sc.base_seed + static_cast<std::uint64_t>(t));
        const auto started = Clock::now();
        WlsResult wls;
        try {
            wls = gauss_newton(rs.net, ms, sc.wls);
        } catch (const Error& e) {
            raise(e.code(), "trial " + std::to_string(t) + ": " + e.what());
        }
        TrialErrors& out = results[static_cast<std::size_t>(t)];
        out.solve_ms = ms_since(started);
        out.iterations = wls.iterations;
        out.err_real = abs_errors(wls.state, rs.truth.states, false);
        out.err_imag = abs_errors(wls.state, rs.truth.states, true);
    };

    const int workers = worker_count(sc, trials);
    if (workers == 1) {
        for (int t = 0; t < trials; ++t) run_trial(t);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1))
                        run_trial(t);
                } catch (...) {
                    failures[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool) th.join();
        for (const std::exception_ptr& p : failures)
            if (p) std::rethrow_exception(p);
    }

    EstimateReport rep;
    rep.method = "wls";
    rep.scenario_hash = sc.hash();
    rep.base_seed = sc.base_seed;
    rep.trials = trials;
    rep.load_scale = sc.load_scale;
    rep.timing_repeats = trials;
    fill_profile(rep, rs);

    rep.bus_err_real.assign(static_cast<std::size_t>(nbus), 0.0);
    rep.bus_err_imag.assign(static_cast<std::size_t>(nbus), 0.0);
    rep.bus_worst_real.assign(static_cast<std::size_t>(nbus), 0.0);
    rep.bus_worst_imag.assign(static_cast<std::size_t>(nbus), 0.0);
    double iter_sum = 0.0;
    for (const TrialErrors& tr : results) {
        double mae_real = 0.0, mae_imag = 0.0;
        for (int k = 0; k < nbus; ++k) {
            const double er = tr.err_real[static_cast<std::size_t>(k)];
            const double ei = tr.err_imag[static_cast<std::size_t>(k)];
            rep.bus_err_real[static_cast<std::size_t>(k)] += er * er;
            rep.bus_err_imag[static_cast<std::size_t>(k)] += ei * ei;
            rep.bus_worst_real[static_cast<std::size_t>(k)] =
                std::max(rep.bus_worst_real[static_cast<std::size_t>(k)], std::abs(er));
            rep.bus_worst_imag[static_cast<std::size_t>(k)] =
                std::max(rep.bus_worst_imag[static_cast<std::size_t>(k)], std::abs(ei));
            mae_real = std::max(mae_real, std::abs(er));
            mae_imag = std::max(mae_imag, std::abs(ei));
        }
        rep.worst_trial_mae_real = std::max(rep.worst_trial_mae_real, mae_real);
        rep.worst_trial_mae_imag = std::max(rep.worst_trial_mae_imag, mae_imag);
        rep.solve_ms_total += tr.solve_ms;
        iter_sum += tr.iterations;
        rep.max_iterations = std::max(rep.max_iterations, tr.iterations);
    }
    for (int k = 0; k < nbus; ++k) {
        rep.bus_err_real[static_cast<std::size_t>(k)] =
            std::sqrt(rep.bus_err_real[static_cast<std::size_t>(k)] / trials);
        rep.bus_err_imag[static_cast<std::size_t>(k)] =
            std::sqrt(rep.bus_err_imag[static_cast<std::size_t>(k)] / trials);
        rep.max_err_real = std::max(rep.max_err_real, rep.bus_err_real[static_cast<std::size_t>(k)]);
        rep.max_err_imag = std::max(rep.max_err_imag, rep.bus_err_imag[static_cast<std::size_t>(k)]);
    }
    rep.mean_iterations = iter_sum / trials;
    rep.solve_ms_mean = rep.solve_ms_total / trials;
    rep.solve_ms_median = rep.solve_ms_mean;
    return rep;
}

EstimateReport run_interval_once(const ResolvedScenario& rs, const Scenario& sc) {
    const MeasurementSet ms = trial_measurements(rs, sc.base_seed);

    EstimateScratch scratch;
    IntervalEstimate est = hullstate::estimate(rs.net, ms, sc.krawczyk, scratch);

    // timing: warm-up plus repeated solves on reused buffers, median reported
    const int repeats = std::max(1, sc.timing_repeats);
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(repeats));
    for (int warm = 0; warm < 2; ++warm)
        (void)hullstate::estimate(rs.net, ms, sc.krawczyk, scratch);
    for (int r = 0; r < repeats; ++r) {
        const IntervalEstimate timed = hullstate::estimate(rs.net, ms, sc.krawczyk, scratch);
        times.push_back(timed.build_solve_ms);
    }
    std::sort(times.begin(), times.end());
    const double median = times[times.size() / 2];

    EstimateReport rep;
    rep.method = "interval";
    rep.scenario_hash = sc.hash();
    rep.base_seed = sc.base_seed;
    rep.trials = 1;
    rep.load_scale = sc.load_scale;
    fill_profile(rep, rs);

    rep.bus_err_real = abs_errors(est.state, rs.truth.states, false);
    rep.bus_err_imag = abs_errors(est.state, rs.truth.states, true);
    for (double& v : rep.bus_err_real) v = std::abs(v);
    for (double& v : rep.bus_err_imag) v = std::abs(v);
    rep.bus_worst_real = rep.bus_err_real;
    rep.bus_worst_imag = rep.bus_err_imag;
    rep.max_err_real = *std::max_element(rep.bus_err_real.begin(), rep.bus_err_real.end());
    rep.max_err_imag = *std::max_element(rep.bus_err_imag.begin(), rep.bus_err_imag.end());
    rep.worst_trial_mae_real = rep.max_err_real;
    rep.worst_trial_mae_imag = rep.max_err_imag;
    rep.mean_iterations = est.enclosure.iterations;
    rep.max_iterations = est.enclosure.iterations;
    rep.krawczyk_iterations = est.enclosure.iterations;
    rep.beta = est.enclosure.beta;
    rep.solve_ms_median = median;
    rep.solve_ms_mean = median;
    rep.solve_ms_total = est.build_solve_ms;
    rep.timing_repeats = repeats;
    return rep;
}

CompareReport compare(const ResolvedScenario& rs, const Scenario& sc) {
    // timing runs are sequential so contention cannot skew the ratio
    Scenario sequential = sc;
    sequential.threads = 1;
    CompareReport rep;
    rep.wls = run_wls_campaign(rs, sequential);
    rep.interval = run_interval_once(rs, sequential);

    // paired re-timing: alternate one WLS trial with one interval solve so
    // both sides sample the same machine conditions and transient stalls
    // cancel out of the ratio
    const int pairs = std::max(sc.timing_repeats, 30);
    const MeasurementSet interval_ms = trial_measurements(rs, sc.base_seed);
    EstimateScratch scratch;
    (void)hullstate::estimate(rs.net, interval_ms, sc.krawczyk, scratch);
    (void)gauss_newton(rs.net, interval_ms, sc.wls);
    std::vector<double> interval_times;
    double wls_total = 0.0;
    interval_times.reserve(static_cast<std::size_t>(pairs));
    for (int r = 0; r < pairs; ++r) {
        const MeasurementSet trial_ms = trial_measurements(
            rs, sc.base_seed + static_cast<std::uint64_t>(r % std::max(1, sc.trials)));
        const auto wls_started = Clock::now();
        (void)gauss_newton(rs.net, trial_ms, sc.wls);
        wls_total += ms_since(wls_started);
        const IntervalEstimate timed =
            hullstate::estimate(rs.net, interval_ms, sc.krawczyk, scratch);
        interval_times.push_back(timed.build_solve_ms);
    }
    std::sort(interval_times.begin(), interval_times.end());
    rep.interval.solve_ms_median = interval_times[interval_times.size() / 2];
    rep.interval.timing_repeats = pairs;
    rep.wls.solve_ms_mean = wls_total / pairs;
    rep.time_ratio = rep.interval.solve_ms_median / rep.wls.solve_ms_mean;
    return rep;
}

namespace {

json report_json(const EstimateReport& r) {
    return json{{"method", r.method},
                {"scenario_hash", r.scenario_hash},
                {"base_seed", r.base_seed},
                {"trials", r.trials},
                {"redundancy", r.redundancy},
                {"load_scale", r.load_scale},
                {"min_voltage", r.min_voltage},
                {"max_voltage", r.max_voltage},
                {"bus_ids", r.bus_ids},
                {"bus_err_real", r.bus_err_real},
                {"bus_err_imag", r.bus_err_imag},
                {"bus_worst_real", r.bus_worst_real},
                {"bus_worst_imag", r.bus_worst_imag},
                {"max_err_real", r.max_err_real},
                {"max_err_imag", r.max_err_imag},
                {"worst_trial_mae_real", r.worst_trial_mae_real},
                {"worst_trial_mae_imag", r.worst_trial_mae_imag},
                {"mean_iterations", r.mean_iterations},
                {"max_iterations", r.max_iterations},
                {"solve_ms_mean", r.solve_ms_mean},
                {"solve_ms_median", r.solve_ms_median},
                {"solve_ms_total", r.solve_ms_total},
                {"timing_repeats", r.timing_repeats},
                {"beta", r.beta},
                {"krawczyk_iterations", r.krawczyk_iterations}};
}

EstimateReport report_from_json(const json& j) {
    EstimateReport r;
    r.method = j.at("method").get<std::string>();
    r.scenario_hash = j.at("scenario_hash").get<std::uint64_t>();
    r.base_seed = j.at("base_seed").get<std::uint64_t>();
    r.trials = j.at("trials").get<int>();
    r.redundancy = j.at("redundancy").get<double>();
    r.load_scale = j.at("load_scale").get<double>();
    r.min_voltage = j.at("min_voltage").get<double>();
    r.max_voltage = j.at("max_voltage").get<double>();
    r.bus_ids = j.at("bus_ids").get<std::vector<std::string>>();
    r.bus_err_real = j.at("bus_err_real").get<std::vector<double>>();
    r.bus_err_imag = j.at("bus_err_imag").get<std::vector<double>>();
    r.bus_worst_real = j.at("bus_worst_real").get<std::vector<double>>();
    r.bus_worst_imag = j.at("bus_worst_imag").get<std::vector<double>>();
    r.max_err_real = j.at("max_err_real").get<double>();
    r.max_err_imag = j.at("max_err_imag").get<double>();
    r.worst_trial_mae_real = j.at("worst_trial_mae_real").get<double>();
    r.worst_trial_mae_imag = j.at("worst_trial_mae_imag").get<double>();
    r.mean_iterations = j.at("mean_iterations").get<double>();
    r.max_iterations = j.at("max_iterations").get<int>();
    r.solve_ms_mean = j.at("solve_ms_mean").get<double>();
    r.solve_ms_median = j.at("solve_ms_median").get<double>();
    r.solve_ms_total = j.at("solve_ms_total").get<double>();
    r.timing_repeats = j.at("timing_repeats").get<int>();
    r.beta = j.at("beta").get<double>();
    r.krawczyk_iterations = j.at("krawczyk_iterations").get<int>();
    return r;
}

}  // namespace

std::string report_to_json(const std::vector<EstimateReport>& reports, double time_ratio) {
    json doc;
    doc["reports"] = json::array();
    for (const EstimateReport& r : reports) doc["reports"].push_back(report_json(r));
    if (time_ratio > 0.0) doc["time_ratio"] = time_ratio;
    return doc.dump(1);
}

std::vector<EstimateReport> reports_from_json(const std::string& text, double* time_ratio) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        raise(ErrorCode::InvalidArgument, std::string("malformed report: ") + e.what());
    }
    std::vector<EstimateReport> out;
    for (const json& j : doc.at("reports")) out.push_back(report_from_json(j));
    if (time_ratio) *time_ratio = doc.value("time_ratio", 0.0);
    return out;
}

std::string report_to_csv(const std::vector<EstimateReport>& reports) {
    std::string out = "bus,part,method,error\n";
    char line[160];
    for (const EstimateReport& r : reports) {
        for (std::size_t k = 0; k < r.bus_ids.size(); ++k) {
            std::snprintf(line, sizeof line, "%s,real,%s,%.17g\n", r.bus_ids[k].c_str(),
                          r.method.c_str(), r.bus_err_real[k]);
            out += line;
            std::snprintf(line, sizeof line, "%s,imag,%s,%.17g\n", r.bus_ids[k].c_str(),
                          r.method.c_str(), r.bus_err_imag[k]);
            out += line;
        }
    }
    return out;
}

void emit_report(const std::vector<EstimateReport>& reports, double time_ratio,
                 const std::string& format, const std::string& path) {
    std::string text;
    if (format == "json")
        text = report_to_json(reports, time_ratio);
    else if (format == "csv")
        text = report_to_csv(reports);
    else
        raise(ErrorCode::InvalidArgument, "unknown report format '" + format + "'");
    std::ofstream out(path);
    if (!out) raise(ErrorCode::IoFailure, "cannot open " + path + " for writing");
    out << text;
    if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

}  // namespace hullstate
