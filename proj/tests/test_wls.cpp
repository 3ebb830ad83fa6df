#include <random>

#include "doctest.h"
#include "hullstate/wls.hpp"
#include "oracles.hpp"

using namespace hullstate;

namespace {

PlacementSpec full_placement(const Network& net) {
    PlacementSpec spec;
    for (int k = 0; k < net.bus_count(); ++k) {
        spec.vmag_buses.push_back(net.bus(k).id);
        if (k != net.slack_index()) spec.injection_buses.push_back(net.bus(k).id);
    }
    return spec;
}

}  // namespace

TEST_CASE("h at the flat state: unit magnitudes, zero powers") {
    const Network net = Network::load(oracles::data_path("six_bus.json"));
    PlacementSpec spec = full_placement(net);
    spec.flow_branches = {"n1-n2", "n2-n5"};
    const PowerFlowSolution sol = solve_power_flow(net);
    const MeasurementSet ms = synthesize(net, sol, spec);
    const Eigen::VectorXd h = h_eval(net, StateVector::flat(net.bus_count()), ms);
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const double expected = ms.items[i].kind == MeasurementKind::Vmag ? 1.0 : 0.0;
        CHECK(h(static_cast<Eigen::Index>(i)) == doctest::Approx(expected));
    }
}

TEST_CASE("h at the power-flow solution reproduces the synthesized truth") {
    const Network net = Network::load(oracles::data_path("ieee34_mod.json"));
    const PlacementSpec spec = PlacementSpec::load(oracles::data_path("table1.json"));
    const PowerFlowSolution sol = solve_power_flow(net);
    const MeasurementSet ms = synthesize(net, sol, spec);
    const Eigen::VectorXd h = h_eval(net, sol.states, ms);
    for (std::size_t i = 0; i < ms.size(); ++i)
        CHECK(std::abs(h(static_cast<Eigen::Index>(i)) - ms.items[i].true_value) < 1e-10);
}

TEST_CASE("single-branch flow against hand complex arithmetic") {
    const Network net = Network::load(oracles::data_path("two_bus.json"));
    StateVector x(2);
    x.set_voltage(1, Complex(0.98, 0.0));
    const Complex y(20.0, -40.0);
    const Complex expected = Complex(1, 0) * std::conj(y * (Complex(1, 0) - Complex(0.98, 0)));
    CHECK(std::abs(branch_flow(net, x, 0, 1) - expected) < 1e-9);
}

TEST_CASE("analytic Jacobian matches central differences near flat") {
    const Network net = Network::load(oracles::data_path("six_bus.json"));
    PlacementSpec spec = full_placement(net);
    spec.flow_branches = {"n1-n2", "n3-n4", "n5-n6"};
    const PowerFlowSolution sol = solve_power_flow(net);
    const MeasurementSet ms = synthesize(net, sol, spec);

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
        StateVector x(net.bus_count());
        for (int k = 0; k < net.bus_count(); ++k) {
            if (k == net.slack_index()) continue;
            x.set_voltage(k, Complex(1.0 + u(rng), u(rng)));
        }
        const Eigen::MatrixXd analytic = jacobian(net, x, ms);
        const Eigen::MatrixXd numeric = oracles::finite_difference_jacobian(net, x, ms);
        CHECK((analytic - numeric).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("voltage-magnitude row gradient at the flat state") {
    const Network net = Network::load(oracles::data_path("two_bus.json"));
    PlacementSpec spec;
    spec.vmag_buses = {"1", "2"};
    spec.injection_buses = {"1", "2"};
    const PowerFlowSolution sol = solve_power_flow(net);
    const MeasurementSet ms = synthesize(net, sol, spec);
    const Eigen::MatrixXd jac = jacobian(net, StateVector::flat(2), ms);
    CHECK(jac(1, 0) == doctest::Approx(1.0));  // d|V2|/dV2r
    CHECK(jac(1, 1) == doctest::Approx(0.0));  // d|V2|/dV2x
}

TEST_CASE("zero rows occur only for the fixed-reference magnitude") {
    const Network net = Network::load(oracles::data_path("ieee34_mod.json"));
    const PlacementSpec spec = PlacementSpec::load(oracles::data_path("table1.json"));
    const PowerFlowSolution sol = solve_power_flow(net);
    const MeasurementSet ms = synthesize(net, sol, spec);
    const Eigen::MatrixXd jac = jacobian(net, sol.states, ms);
    for (Eigen::Index r = 0; r < jac.rows(); ++r) {
        const Measurement& m = ms.items[static_cast<std::size_t>(r)];
        const bool slack_vmag =
            m.kind == MeasurementKind::Vmag && m.bus == net.slack_index();
        if (slack_vmag)
            CHECK(jac.row(r).cwiseAbs().maxCoeff() == 0.0);  // reference eliminated
        else
            CHECK(jac.row(r).cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("zero-noise measurements recover the generating state") {
    for (const char* file : {"two_bus.json", "six_bus.json", "ieee34_mod.json"}) {
        const Network net = Network::load(oracles::data_path(file));
        const PowerFlowSolution sol = solve_power_flow(net);
        PlacementSpec spec = full_placement(net);
        if (std::string(file) == "ieee34_mod.json")
            spec = PlacementSpec::load(oracles::data_path("table1.json"));
        const MeasurementSet ms = synthesize(net, sol, spec);  // noisy == true
        const WlsResult fit = gauss_newton(net, ms);
        REQUIRE(fit.converged);
        CHECK(fit.step_norms.size() == static_cast<std::size_t>(fit.iterations));
        CHECK(fit.step_norms.back() < 1e-6);
        for (int k = 0; k < net.bus_count(); ++k)
            CHECK(std::abs(fit.state.voltage(k) - sol.states.voltage(k)) < 1e-8);
    }
}

TEST_CASE("stationarity at the optimum, measured as the next step") {
    const Network net = Network::load(oracles::data_path("ieee34_mod.json"));
    const PlacementSpec spec = PlacementSpec::load(oracles::data_path("table1.json"));
    const PowerFlowSolution sol = solve_power_flow(net);
    const MeasurementSet ms = corrupt(synthesize(net, sol, spec), 5);
    const WlsOptions opts;
    const WlsResult fit = gauss_newton(net, ms, opts);
    REQUIRE(fit.converged);

    // one more normal-equation solve from the converged state
    const Eigen::MatrixXd jac = jacobian(net, fit.state, ms);
    Eigen::VectorXd z(static_cast<Eigen::Index>(ms.size())), w(static_cast<Eigen::Index>(ms.size()));
    for (std::size_t i = 0; i < ms.size(); ++i) {
        z(static_cast<Eigen::Index>(i)) = ms.items[i].noisy_value;
        w(static_cast<Eigen::Index>(i)) = 1.0 / (ms.items[i].sigma * ms.items[i].sigma);
    }
    const Eigen::VectorXd residual = z - h_eval(net, fit.state, ms);
    const Eigen::MatrixXd weighted = w.asDiagonal() * jac;
    const Eigen::VectorXd next_step =
        (jac.transpose() * weighted).ldlt().solve(weighted.transpose() * residual);
    CHECK(next_step.cwiseAbs().maxCoeff() <= 10.0 * opts.tolerance);
}

TEST_CASE("objective decreases across accepted iterations") {
    const Network net = Network::load(oracles::data_path("ieee34_mod.json"));
    const PlacementSpec spec = PlacementSpec::load(oracles::data_path("table1.json"));
    const PowerFlowSolution sol = solve_power_flow(net);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const MeasurementSet ms = corrupt(synthesize(net, sol, spec), seed);
        const WlsResult fit = gauss_newton(net, ms);
        REQUIRE(fit.objective_trace.size() >= 2);
        for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
            CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1] * (1 + 1e-12));
    }
}

TEST_CASE("a magnitude-only placement is unobservable") {
    const Network net = Network::load(oracles::data_path("two_bus.json"));
    const PowerFlowSolution sol = solve_power_flow(net);
    PlacementSpec spec;
    spec.vmag_buses = {"1", "1", "2", "2"};  // V_x columns untouched: singular gain
    const MeasurementSet ms = synthesize(net, sol, spec);
    CHECK_THROWS_AS(gauss_newton(net, ms), Error);
    try {
        gauss_newton(net, ms);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularMatrix);
    }
}

TEST_CASE("iteration cap raises non-convergence") {
    const Network net = Network::load(oracles::data_path("ieee34_mod.json"));
    const PlacementSpec spec = PlacementSpec::load(oracles::data_path("table1.json"));
    const PowerFlowSolution sol = solve_power_flow(net);
    const MeasurementSet ms = corrupt(synthesize(net, sol, spec), 9);
    WlsOptions opts;
    opts.max_iterations = 1;
    CHECK_THROWS_AS(gauss_newton(net, ms, opts), Error);
}
