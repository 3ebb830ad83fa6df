#include <complex>

#include "doctest.h"
#include "hullstate/network.hpp"
#include "hullstate/power_flow.hpp"
#include "oracles.hpp"

using namespace hullstate;

namespace {

const char* kTwoBusDoc = R"({
  "base": {"s_kva": 2500.0, "v_kv": 24.9},
  "buses": [
    {"id": "1", "kind": "slack"},
    {"id": "2", "kind": "pq", "p_load_kw": 250.0, "q_load_kvar": 125.0}
  ],
  "branches": [{"from": "1", "to": "2", "r_ohm": 2.48004, "x_ohm": 4.96008}]
})";

ErrorCode code_of(const std::string& doc) {
    try {
        Network::parse(doc);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a parse failure");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("two-bus document parses to the expected admittance") {
    const Network net = Network::parse(kTwoBusDoc);
    CHECK(net.bus_count() == 2);
    CHECK(net.slack_index() == 0);
    // z = 0.01 + j0.02 p.u., y = 1/z = 20 - j40
    const Complex y = net.branch_admittance(0, 1);
    CHECK(y.real() == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(y.imag() == doctest::Approx(-40.0).epsilon(1e-9));
    CHECK(net.branch_admittance(1, 0) == y);  // symmetric lookup
    CHECK(net.load_pu(1).real() == doctest::Approx(0.1));
    CHECK(net.load_pu(1).imag() == doctest::Approx(0.05));
    CHECK(net.net_injection_pu(1) == -net.load_pu(1));
}

TEST_CASE("document validation failures carry precise codes") {
    CHECK(code_of(R"({"base": {"s_kva": 100, "v_kv": 1},
        "buses": [{"id": "a", "kind": "slack"}, {"id": "a", "kind": "pq"}],
        "branches": [{"from": "a", "to": "a", "r_ohm": 1, "x_ohm": 1}]})") ==
          ErrorCode::DuplicateBusId);

    CHECK(code_of(R"({"base": {"s_kva": 100, "v_kv": 1},
        "buses": [{"id": "a", "kind": "slack"}, {"id": "b", "kind": "slack"}],
        "branches": [{"from": "a", "to": "b", "r_ohm": 1, "x_ohm": 1}]})") ==
          ErrorCode::NoSlackBus);

    CHECK(code_of(R"({"base": {"s_kva": 100, "v_kv": 1},
        "buses": [{"id": "a", "kind": "pq"}, {"id": "b", "kind": "pq"}],
        "branches": [{"from": "a", "to": "b", "r_ohm": 1, "x_ohm": 1}]})") ==
          ErrorCode::NoSlackBus);

    CHECK(code_of(R"({"buses": [{"id": "a", "kind": "slack"}], "branches": []})") ==
          ErrorCode::UnitMissing);

    CHECK(code_of(R"({"base": {"s_kva": 100},
        "buses": [{"id": "a", "kind": "slack"}], "branches": []})") ==
          ErrorCode::UnitMissing);

    // three buses, one isolated
    CHECK(code_of(R"({"base": {"s_kva": 100, "v_kv": 1},
        "buses": [{"id": "a", "kind": "slack"}, {"id": "b", "kind": "pq"},
                  {"id": "c", "kind": "pq"}],
        "branches": [{"from": "a", "to": "b", "r_ohm": 1, "x_ohm": 1},
                     {"from": "a", "to": "b", "r_ohm": 2, "x_ohm": 2}]})") ==
          ErrorCode::DisconnectedGraph);

    // loop a-b-c-a
    CHECK(code_of(R"({"base": {"s_kva": 100, "v_kv": 1},
        "buses": [{"id": "a", "kind": "slack"}, {"id": "b", "kind": "pq"},
                  {"id": "c", "kind": "pq"}],
        "branches": [{"from": "a", "to": "b", "r_ohm": 1, "x_ohm": 1},
                     {"from": "b", "to": "c", "r_ohm": 1, "x_ohm": 1},
                     {"from": "c", "to": "a", "r_ohm": 1, "x_ohm": 1}]})") ==
          ErrorCode::NonRadialTopology);

    CHECK(code_of(R"({"base": {"s_kva": 100, "v_kv": 1},
        "buses": [{"id": "a", "kind": "slack"}, {"id": "b", "kind": "pq"}],
        "branches": [{"from": "a", "to": "b", "r_ohm": 0, "x_ohm": 0}]})") ==
          ErrorCode::ZeroImpedance);

    CHECK(code_of(R"({"base": {"s_kva": 100, "v_kv": 1},
        "buses": [{"id": "a", "kind": "slack"}, {"id": "b", "kind": "pq"}],
        "branches": [{"from": "a", "to": "zz", "r_ohm": 1, "x_ohm": 1}]})") ==
          ErrorCode::UnknownElement);
}

TEST_CASE("bundled 34-bus document") {
    const Network net = Network::load(oracles::data_path("ieee34_mod.json"));
    CHECK(net.bus_count() == 34);
    CHECK(net.branch_count() == 33);
    for (const char* id : {"822", "838", "856", "864"}) {
        const Bus& b = net.bus(net.bus_index(id));
        CHECK(b.dg_kva == doctest::Approx(200.0));
        CHECK(b.dg_pf == doctest::Approx(0.95));
    }
    // all non-slack buses carry load (keeps Table-1 pseudo coverage complete)
    for (int k = 0; k < net.bus_count(); ++k)
        if (k != net.slack_index()) CHECK(net.bus(k).p_load_kw > 0.0);
}

TEST_CASE("per-unit round trip preserves the document") {
    const Network net = Network::load(oracles::data_path("ieee34_mod.json"));
    const Network again = Network::parse(net.to_json());
    REQUIRE(again.bus_count() == net.bus_count());
    for (int k = 0; k < net.bus_count(); ++k) {
        CHECK(again.bus(k).id == net.bus(k).id);
        CHECK(again.bus(k).p_load_kw == net.bus(k).p_load_kw);
        CHECK(again.bus(k).q_load_kvar == net.bus(k).q_load_kvar);
        CHECK(again.bus(k).dg_kva == net.bus(k).dg_kva);
    }
    for (int b = 0; b < net.branch_count(); ++b) {
        CHECK(again.branches()[b].r_ohm == net.branches()[b].r_ohm);
        CHECK(again.branches()[b].x_ohm == net.branches()[b].x_ohm);
        CHECK(again.branches()[b].admittance_pu == net.branches()[b].admittance_pu);
    }
}

TEST_CASE("zero-load network solves flat in one mismatch evaluation") {
    const Network net = Network::parse(R"({
        "base": {"s_kva": 100, "v_kv": 1},
        "buses": [{"id": "a", "kind": "slack"}, {"id": "b", "kind": "pq"},
                  {"id": "c", "kind": "pq"}],
        "branches": [{"from": "a", "to": "b", "r_ohm": 0.1, "x_ohm": 0.2},
                     {"from": "b", "to": "c", "r_ohm": 0.1, "x_ohm": 0.2}]})");
    const PowerFlowSolution sol = solve_power_flow(net);
    CHECK(sol.converged);
    CHECK(sol.iterations == 1);
    for (int k = 0; k < net.bus_count(); ++k) {
        CHECK(sol.states.voltage(k) == Complex(1.0, 0.0));
    }
    for (const Complex& s : sol.branch_flows) CHECK(std::abs(s) == 0.0);
}

TEST_CASE("two-bus power flow matches the fixed-point oracle") {
    const Network net = Network::parse(kTwoBusDoc);
    const PowerFlowSolution sol = solve_power_flow(net);
    REQUIRE(sol.converged);
    const Complex v2_oracle =
        oracles::two_bus_fixed_point(Complex(0.01, 0.02), Complex(-0.1, -0.05));
    CHECK(std::abs(sol.states.voltage(1) - v2_oracle) < 1e-10);
    // frozen from the oracle iteration
    CHECK(sol.states.voltage(1).real() == doctest::Approx(0.9979937248600629).epsilon(1e-12));
    CHECK(sol.states.voltage(1).imag() == doctest::Approx(-0.0015).epsilon(1e-9));

    // slack flow covers the load plus series losses
    const Complex s12 = branch_flow(net, sol.states, 0, 1);
    const Complex loss = oracles::total_losses(net, sol.states);
    CHECK(std::abs(s12 - (Complex(0.1, 0.05) + loss)) < 1e-12);

    // injection convention: leaf load bus reports the negated load
    const Complex s2 = bus_injection(net, sol.states, 1);
    CHECK(std::abs(s2 - Complex(-0.1, -0.05)) < 1e-9);
}

TEST_CASE("34-bus profile stays inside normal limits") {
    const Network net = Network::load(oracles::data_path("ieee34_mod.json"));
    const PowerFlowSolution sol = solve_power_flow(net);
    REQUIRE(sol.converged);
    for (int k = 0; k < net.bus_count(); ++k) {
        const double mag = std::abs(sol.states.voltage(k));
        CHECK(mag >= 0.95);
        CHECK(mag <= 1.05);
    }
}

TEST_CASE("power balance: injections equal series losses") {
    for (const char* file : {"two_bus.json", "six_bus.json", "ieee34_mod.json"}) {
        const Network net = Network::load(oracles::data_path(file));
        const PowerFlowSolution sol = solve_power_flow(net);
        REQUIRE(sol.converged);
        Complex injected(0, 0);
        for (const Complex& s : sol.injections) injected += s;
        const Complex losses = oracles::total_losses(net, sol.states);
        CHECK(std::abs(injected - losses) < 1e-8);
    }
}

TEST_CASE("identical voltages produce zero branch flow") {
    const Network net = Network::parse(kTwoBusDoc);
    StateVector x(2);  // flat: V identical on both ends
    CHECK(std::abs(branch_flow(net, x, 0, 1)) == 0.0);
    CHECK_THROWS_AS(bus_injection(net, x, 7), Error);
    CHECK_THROWS_AS(net.branch_index("1", "zz"), Error);
}

TEST_CASE("load scaling multiplies loads only") {
    const Network net = Network::load(oracles::data_path("ieee34_mod.json"));
    const Network scaled = net.with_scaled_loads(1.5);
    for (int k = 0; k < net.bus_count(); ++k) {
        CHECK(scaled.bus(k).p_load_kw == doctest::Approx(1.5 * net.bus(k).p_load_kw));
        CHECK(scaled.dg_injection_pu(k) == net.dg_injection_pu(k));
    }
    CHECK_THROWS_AS(net.with_scaled_loads(-1.0), Error);
}
