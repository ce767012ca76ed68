#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qevae/pqc.hpp"
#include "qevae/rng.hpp"
#include "qevae/state.hpp"

using namespace qevae;

namespace {
const double kPi = std::numbers::pi;
}

TEST_CASE("Z map, n=1, reps=1, x=0") {
    auto spec = FeatureMapSpec::z_map(1);
    std::vector<double> x = {0.0};
    Circuit c = build_feature_map(spec, x);
    REQUIRE(c.ops.size() == 2);
    CHECK(c.ops[0] == GateOp::h(0));
    CHECK(c.ops[1] == GateOp::phase(0, 0.0));
    Distribution d = probabilities(run(c));
    CHECK(d.probs[0] == doctest::Approx(0.5));
    CHECK(d.probs[1] == doctest::Approx(0.5));
}

TEST_CASE("Z map at reps=1 is uniform for any x") {
    Rng rng(1);
    auto spec = FeatureMapSpec::z_map(3);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> x = {rng.uniform(-2, 2), rng.uniform(-2, 2),
                                 rng.uniform(-2, 2)};
        Distribution d = probabilities(run(build_feature_map(spec, x)));
        for (double p : d.probs)
            CHECK(p == doctest::Approx(1.0 / 8).epsilon(1e-9));
    }
}

TEST_CASE("ZZ map at reps=1 is uniform for any x") {
    Rng rng(2);
    auto spec = FeatureMapSpec::zz_map(3);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> x = {rng.uniform(-2, 2), rng.uniform(-2, 2),
                                 rng.uniform(-2, 2)};
        Distribution d = probabilities(run(build_feature_map(spec, x)));
        for (double p : d.probs)
            CHECK(p == doctest::Approx(1.0 / 8).epsilon(1e-9));
    }
}

TEST_CASE("ZZ map at x=(pi,pi) has zero pair coupling") {
    auto spec = FeatureMapSpec::zz_map(2);
    std::vector<double> x = {kPi, kPi};
    Circuit c = build_feature_map(spec, x);
    // H H PHASE(2pi) PHASE(2pi) CX PHASE(0) CX
    REQUIRE(c.ops.size() == 7);
    CHECK(c.ops[2] == GateOp::phase(0, 2 * kPi));
    CHECK(c.ops[3] == GateOp::phase(1, 2 * kPi));
    CHECK(c.ops[4] == GateOp::cx(0, 1));
    CHECK(c.ops[5].kind == GateKind::Phase);
    CHECK(c.ops[5].angle == doctest::Approx(0.0));
    CHECK(c.ops[6] == GateOp::cx(0, 1));
}

TEST_CASE("feature map determinism and input dependencies") {
    auto spec = FeatureMapSpec::zz_map(3, 2);
    std::vector<double> x = {0.3, -0.7, 1.1};
    std::vector<AngleDep> deps;
    Circuit a = build_feature_map(spec, x, deps);
    Circuit b = build_feature_map(spec, x);
    CHECK(a == b);
    CHECK(!deps.empty());
    for (const AngleDep &d : deps) {
        CHECK(d.op_index >= 0);
        CHECK(d.op_index < static_cast<int>(a.ops.size()));
        CHECK(is_parameterized(a.ops[static_cast<std::size_t>(d.op_index)]
                                   .kind));
        CHECK(d.input_index >= 0);
        CHECK(d.input_index < 3);
    }
    // single-qubit phase angles depend on their input with coefficient 2
    CHECK(deps[0].coeff == doctest::Approx(2.0));
}

TEST_CASE("feature map rejects dimension mismatch") {
    auto spec = FeatureMapSpec::z_map(3);
    std::vector<double> x = {0.1, 0.2};
    CHECK_THROWS_AS((void)build_feature_map(spec, x), std::invalid_argument);
}

TEST_CASE("two-local parameter count and gate counts") {
    AnsatzSpec spec;
    spec.n_qubits = 4;
    spec.reps = 2;
    CHECK(spec.n_params() == 16);
    std::vector<double> theta(16, 0.3);
    Circuit c = build_two_local(spec, theta);
    auto counts = gate_counts(c);
    CHECK(counts[GateKind::RX] == 8);
    CHECK(counts[GateKind::RY] == 8);
    CHECK(counts[GateKind::CX] == 6);
    CHECK(total_gates(c) == 22);
}

TEST_CASE("two-local with zero angles is a CX chain") {
    AnsatzSpec spec;
    spec.n_qubits = 3;
    spec.reps = 1;
    std::vector<double> theta(6, 0.0);
    StateVector s = run(build_two_local(spec, theta));
    CHECK(std::abs(s.amps[0] - cdouble{1, 0}) < 1e-12);
}

TEST_CASE("two-local rejects wrong parameter count") {
    AnsatzSpec spec;
    spec.n_qubits = 3;
    spec.reps = 2;
    std::vector<double> theta(5, 0.0);
    CHECK_THROWS_AS((void)build_two_local(spec, theta),
                    std::invalid_argument);
}

TEST_CASE("every two-local parameter is live") {
    AnsatzSpec spec;
    spec.n_qubits = 3;
    spec.reps = 2;
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> theta(
            static_cast<std::size_t>(spec.n_params()));
        for (double &t : theta)
            t = rng.uniform(0, 2 * kPi);
        const Distribution base =
            probabilities(run(build_two_local(spec, theta)));
        for (std::size_t k = 0; k < theta.size(); ++k) {
            std::vector<double> shifted = theta;
            shifted[k] += kPi;
            const Distribution d =
                probabilities(run(build_two_local(spec, shifted)));
            double mx = 0;
            for (std::size_t i = 0; i < d.dim(); ++i)
                mx = std::max(mx, std::abs(d.probs[i] - base.probs[i]));
            CHECK(mx > 1e-6);
        }
    }
}

TEST_CASE("random product circuit structure") {
    Circuit c = build_random_product_circuit(4, 9);
    for (const GateOp &op : c.ops)
        CHECK(op.kind != GateKind::CX);
    CHECK(c.ops.size() == 12); // RX, RY, RZ per qubit
    CHECK(build_random_product_circuit(4, 9) == c);
    CHECK(build_random_product_circuit(4, 10) != c);

    // joint distribution factorizes into 1-qubit marginals
    Distribution d = probabilities(run(c));
    std::vector<double> p1(4, 0.0); // P(bit q = 1)
    for (std::size_t x = 0; x < d.dim(); ++x)
        for (int q = 0; q < 4; ++q)
            if (x & (std::size_t{1} << q))
                p1[static_cast<std::size_t>(q)] += d.probs[x];
    for (std::size_t x = 0; x < d.dim(); ++x) {
        double prod = 1.0;
        for (int q = 0; q < 4; ++q) {
            const double p = p1[static_cast<std::size_t>(q)];
            prod *= (x & (std::size_t{1} << q)) ? p : 1.0 - p;
        }
        CHECK(std::abs(d.probs[x] - prod) < 1e-10);
    }
}

TEST_CASE("random layered circuit structure") {
    Circuit c = build_random_layered_circuit(4, 20, 1);
    auto counts = gate_counts(c);
    CHECK(counts[GateKind::RX] == 80);
    CHECK(counts[GateKind::RY] == 80);
    CHECK(counts[GateKind::CX] == 60);
    CHECK(build_random_layered_circuit(4, 20, 1) == c);

    Circuit one = build_random_layered_circuit(4, 1, 2);
    CHECK(gate_counts(one)[GateKind::CX] == 3);
}

TEST_CASE("empty circuit gate counts") {
    Circuit c;
    c.n_qubits = 2;
    CHECK(gate_counts(c).empty());
    CHECK(total_gates(c) == 0);
}

TEST_CASE("QASM format basics") {
    Circuit c;
    c.n_qubits = 1;
    c.ops = {GateOp::h(0)};
    const std::string text = to_qasm(c);
    CHECK(text.find("OPENQASM 2.0;") != std::string::npos);
    CHECK(text.find("h q[0];") != std::string::npos);
    CHECK(text.find("measure") != std::string::npos);

    Circuit r;
    r.n_qubits = 2;
    r.ops = {GateOp::rx(1, kPi / 2)};
    CHECK(to_qasm(r).find("rx(1.5707963267948966) q[1];") !=
          std::string::npos);
}

TEST_CASE("QASM Bell body") {
    Circuit c;
    c.n_qubits = 2;
    c.ops = {GateOp::h(0), GateOp::cx(0, 1)};
    const std::string text = to_qasm(c);
    // body after the register declarations: h, cx, 2 measures
    CHECK(text.find("h q[0];") != std::string::npos);
    CHECK(text.find("cx q[0],q[1];") != std::string::npos);
    CHECK(text.find("measure q[0] -> c[0];") != std::string::npos);
    CHECK(text.find("measure q[1] -> c[1];") != std::string::npos);
}

TEST_CASE("QASM round-trip over builder outputs") {
    Rng rng(4);
    std::vector<Circuit> circuits;
    circuits.push_back(build_random_product_circuit(3, 5));
    circuits.push_back(build_random_layered_circuit(4, 3, 6));
    std::vector<double> x = {0.2, -0.4, 1.3};
    circuits.push_back(build_feature_map(FeatureMapSpec::zz_map(3), x));
    AnsatzSpec aspec;
    aspec.n_qubits = 3;
    aspec.reps = 2;
    std::vector<double> theta(
        static_cast<std::size_t>(aspec.n_params()));
    for (double &t : theta)
        t = rng.uniform(0, 2 * kPi);
    circuits.push_back(build_two_local(aspec, theta));
    for (const Circuit &c : circuits)
        CHECK(parse_qasm(to_qasm(c)) == c);
}

TEST_CASE("gate name round-trip") {
    for (GateKind k : {GateKind::H, GateKind::X, GateKind::Y, GateKind::Z,
                       GateKind::S, GateKind::RX, GateKind::RY, GateKind::RZ,
                       GateKind::Phase, GateKind::CX})
        CHECK(gate_kind_from_name(gate_name(k)) == k);
    CHECK(gate_kind_from_name("p") == GateKind::Phase);
}
