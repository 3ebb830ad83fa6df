/* hullstate: distribution-network state estimation with interval enclosures.
 *
 * C interface to the shared library. All objects are opaque handles created
 * and destroyed through these functions; every fallible call returns an
 * hs_status and leaves a thread-local message readable via hs_last_error().
 */
#ifndef HULLSTATE_H
#define HULLSTATE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hs_status {
    HS_OK = 0,
    HS_E_INVALID_ARGUMENT = 1,
    HS_E_PARSE = 2,             /* malformed or inconsistent input document */
    HS_E_IO = 3,
    HS_E_UNKNOWN_ELEMENT = 4,
    HS_E_UNOBSERVABLE = 5,      /* rank deficiency / insufficient redundancy */
    HS_E_NON_CONVERGENCE = 6,
    HS_E_SINGULAR = 7,
    HS_E_CONTRACTION = 8,       /* ||I - CA|| >= 1 */
    HS_E_EMPTY_INTERSECTION = 9,
    HS_E_ITERATION_CAP = 10,
    HS_E_DIMENSION = 11,
    HS_E_INTERNAL = 99
} hs_status;

const char* hs_status_name(hs_status status);

/* Thread-local detail for the most recent failing call. */
const char* hs_last_error(void);

typedef struct hs_network hs_network;
typedef struct hs_placement hs_placement;
typedef struct hs_report hs_report;

/* ---- input documents -------------------------------------------------- */

hs_status hs_network_load_file(const char* path, hs_network** out);
hs_status hs_network_parse(const char* json_text, hs_network** out);
void hs_network_free(hs_network* net);
int hs_network_bus_count(const hs_network* net);
int hs_network_branch_count(const hs_network* net);

hs_status hs_placement_load_file(const char* path, hs_placement** out);
hs_status hs_placement_parse(const char* json_text, hs_placement** out);
void hs_placement_free(hs_placement* placement);

/* ---- scenario options -------------------------------------------------- */

typedef struct hs_options {
    int trials;             /* Monte Carlo trials for the WLS campaign */
    uint64_t base_seed;     /* per-trial seeds are base_seed + index */
    double noise_scada;     /* max-error rate; negative keeps the placement
                               document's rate, 0 on both disables noise */
    double noise_pseudo;    /* ditto for pseudo-measurements */
    double load_scale;      /* multiplies all loads before the truth solve */
    int threads;            /* trial parallelism; 0 = HULLSTATE_THREADS/auto */
    int timing_repeats;     /* interval solve repeats for the median time */
    double wls_tolerance;
    int wls_max_iterations;
    double krawczyk_epsilon;
    int krawczyk_max_iterations;
} hs_options;

void hs_options_init(hs_options* opts); /* fills in the defaults */

/* ---- running ------------------------------------------------------------ */

/* method: "wls", "interval" or "compare". */
hs_status hs_run(const hs_network* net, const hs_placement* placement,
                 const hs_options* opts, const char* method, hs_report** out);

/* format: "json" or "csv". The returned string belongs to the caller; free
 * it with hs_string_free. */
hs_status hs_report_render(const hs_report* report, const char* format, char** out_text);
hs_status hs_report_write(const hs_report* report, const char* format, const char* path);

/* Headline numbers for quick consumption (returns HS_E_INVALID_ARGUMENT when
 * the report does not contain the requested method). */
typedef struct hs_summary {
    double max_err_real;
    double max_err_imag;
    double worst_trial_mae_real;
    double solve_ms;        /* mean per trial (wls) or median repeat (interval) */
    double beta;            /* interval only */
    int iterations;
    double redundancy;
    double min_voltage;
    double max_voltage;
} hs_summary;

hs_status hs_report_summary(const hs_report* report, const char* method, hs_summary* out);
/* Timing ratio interval/wls; 0 unless the report came from "compare". */
double hs_report_time_ratio(const hs_report* report);

void hs_report_free(hs_report* report);
void hs_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* HULLSTATE_H */
