#include <cstring>
#include <string>

#include "doctest.h"
#include "hullstate.h"

namespace {

std::string data_path(const char* name) {
    return std::string(HULLSTATE_DATA_DIR) + "/" + name;
}

struct Loaded {
    hs_network* net = nullptr;
    hs_placement* placement = nullptr;
    Loaded() {
        REQUIRE(hs_network_load_file(data_path("ieee34_mod.json").c_str(), &net) == HS_OK);
        REQUIRE(hs_placement_load_file(data_path("table1.json").c_str(), &placement) == HS_OK);
    }
    ~Loaded() {
        hs_placement_free(placement);
        hs_network_free(net);
    }
};

}  // namespace

TEST_CASE("c api loads the bundled documents") {
    Loaded f;
    CHECK(hs_network_bus_count(f.net) == 34);
    CHECK(hs_network_branch_count(f.net) == 33);
}

TEST_CASE("c api reports io and parse failures with categories") {
    hs_network* net = nullptr;
    CHECK(hs_network_load_file("/no/such/file.json", &net) == HS_E_IO);
    CHECK(std::strlen(hs_last_error()) > 0);
    CHECK(hs_network_parse("{not json", &net) == HS_E_INVALID_ARGUMENT);
    CHECK(hs_network_parse(R"({"base": {"s_kva": 1, "v_kv": 1},
        "buses": [{"id": "a", "kind": "slack"}, {"id": "a", "kind": "pq"}],
        "branches": []})",
                           &net) == HS_E_PARSE);
    CHECK(hs_network_load_file(nullptr, &net) == HS_E_INVALID_ARGUMENT);
    CHECK(std::string(hs_status_name(HS_E_PARSE)) == "parse_error");
    CHECK(std::string(hs_status_name(HS_OK)) == "ok");
}

TEST_CASE("c api runs a comparison end to end") {
    Loaded f;
    hs_options opts;
    hs_options_init(&opts);
    CHECK(opts.noise_scada < 0.0);  // inherit the placement document's rates
    CHECK(opts.noise_pseudo < 0.0);
    opts.trials = 15;
    opts.base_seed = 5;
    opts.timing_repeats = 3;

    hs_report* report = nullptr;
    REQUIRE(hs_run(f.net, f.placement, &opts, "compare", &report) == HS_OK);

    hs_summary wls, interval;
    REQUIRE(hs_report_summary(report, "wls", &wls) == HS_OK);
    REQUIRE(hs_report_summary(report, "interval", &interval) == HS_OK);
    CHECK(wls.max_err_real > 1e-5);
    CHECK(wls.max_err_real < 1e-2);
    CHECK(interval.beta > 0.0);
    CHECK(interval.beta < 1.0);
    CHECK(interval.redundancy == doctest::Approx(80.0 / 68.0));
    CHECK(hs_report_time_ratio(report) > 0.0);

    char* text = nullptr;
    REQUIRE(hs_report_render(report, "json", &text) == HS_OK);
    CHECK(std::string(text).find("\"method\": \"interval\"") != std::string::npos);
    hs_string_free(text);

    char* csv = nullptr;
    REQUIRE(hs_report_render(report, "csv", &csv) == HS_OK);
    CHECK(std::string(csv).rfind("bus,part,method,error", 0) == 0);
    hs_string_free(csv);

    CHECK(hs_report_render(report, "xml", &text) == HS_E_INVALID_ARGUMENT);
    hs_summary missing;
    CHECK(hs_report_summary(report, "nope", &missing) == HS_E_INVALID_ARGUMENT);
    hs_report_free(report);
}

TEST_CASE("c api surfaces estimation failures") {
    Loaded f;
    hs_options opts;
    hs_options_init(&opts);
    opts.trials = 1;
    hs_report* report = nullptr;
    CHECK(hs_run(f.net, f.placement, &opts, "bogus", &report) == HS_E_INVALID_ARGUMENT);

    // an unobservable placement: magnitudes only
    hs_placement* thin = nullptr;
    REQUIRE(hs_placement_parse(R"({"vmag": ["800", "802", "806", "808"]})", &thin) == HS_OK);
    const hs_status status = hs_run(f.net, thin, &opts, "wls", &report);
    CHECK(status == HS_E_UNOBSERVABLE);
    hs_placement_free(thin);
}

TEST_CASE("c api writes report files") {
    Loaded f;
    hs_options opts;
    hs_options_init(&opts);
    opts.trials = 3;
    opts.timing_repeats = 2;
    hs_report* report = nullptr;
    REQUIRE(hs_run(f.net, f.placement, &opts, "interval", &report) == HS_OK);
    CHECK(hs_report_write(report, "csv", "/tmp/hullstate_capi_test.csv") == HS_OK);
    CHECK(hs_report_write(report, "json", "/nonexistent_dir/x.json") == HS_E_IO);
    hs_report_free(report);
}
