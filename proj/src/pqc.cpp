#include "qevae/pqc.hpp"

#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qevae/rng.hpp"

namespace qevae {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_pairs(const FeatureMapSpec &spec) {
    if (spec.kind == FeatureMapSpec::Kind::Z &&
        !spec.entanglement_pairs.empty())
        throw std::invalid_argument("Z feature map takes no pairs");
    for (auto [i, j] : spec.entanglement_pairs) {
        if (i == j || i < 0 || j < 0 || i >= spec.n_qubits ||
            j >= spec.n_qubits)
            throw std::invalid_argument("bad entanglement pair");
    }
}

std::string format_angle(double a) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", a);
    return buf;
}

} // namespace

FeatureMapSpec FeatureMapSpec::z_map(int n_qubits, int reps) {
    return {Kind::Z, n_qubits, reps, {}};
}

FeatureMapSpec FeatureMapSpec::zz_map(int n_qubits, int reps) {
    FeatureMapSpec spec{Kind::ZZ, n_qubits, reps, {}};
    for (int i = 0; i + 1 < n_qubits; ++i)
        spec.entanglement_pairs.emplace_back(i, i + 1);
    return spec;
}

Circuit build_feature_map(const FeatureMapSpec &spec,
                          std::span<const double> x) {
    std::vector<AngleDep> deps;
    return build_feature_map(spec, x, deps);
}

Circuit build_feature_map(const FeatureMapSpec &spec, std::span<const double> x,
                          std::vector<AngleDep> &deps) {
    validate_pairs(spec);
    if (static_cast<int>(x.size()) != spec.n_qubits)
        throw std::invalid_argument("feature-map input length mismatch");
    if (spec.reps < 1)
        throw std::invalid_argument("feature-map reps must be >= 1");

    const double pi = std::numbers::pi;
    Circuit c;
    c.n_qubits = spec.n_qubits;
    deps.clear();
    for (int rep = 0; rep < spec.reps; ++rep) {
        for (int q = 0; q < spec.n_qubits; ++q)
            c.ops.push_back(GateOp::h(q));
        for (int q = 0; q < spec.n_qubits; ++q) {
            deps.push_back({static_cast<int>(c.ops.size()), q, 2.0});
            c.ops.push_back(GateOp::phase(q, 2.0 * x[q]));
        }
        if (spec.kind == FeatureMapSpec::Kind::ZZ) {
            for (auto [i, j] : spec.entanglement_pairs) {
                c.ops.push_back(GateOp::cx(i, j));
                const double angle = 2.0 * (pi - x[i]) * (pi - x[j]);
                const int idx = static_cast<int>(c.ops.size());
                deps.push_back({idx, i, -2.0 * (pi - x[j])});
                deps.push_back({idx, j, -2.0 * (pi - x[i])});
                c.ops.push_back(GateOp::phase(j, angle));
                c.ops.push_back(GateOp::cx(i, j));
            }
        }
    }
    return c;
}

Circuit build_two_local(const AnsatzSpec &spec, std::span<const double> theta) {
    if (static_cast<int>(theta.size()) != spec.n_params())
        throw std::invalid_argument("ansatz parameter count mismatch");
    Circuit c;
    c.n_qubits = spec.n_qubits;
    std::size_t k = 0;
    for (int rep = 0; rep < spec.reps; ++rep) {
        for (GateKind kind : spec.rotation_kinds)
            for (int q = 0; q < spec.n_qubits; ++q)
                c.ops.push_back({kind, q, -1, theta[k++]});
        for (int q = 0; q + 1 < spec.n_qubits; ++q)
            c.ops.push_back(GateOp::cx(q, q + 1));
    }
    return c;
}

Circuit build_random_product_circuit(int n_qubits, std::uint64_t seed) {
    if (n_qubits < 1)
        throw std::invalid_argument("n_qubits must be >= 1");
    Rng rng(seed);
    Circuit c;
    c.n_qubits = n_qubits;
    for (int q = 0; q < n_qubits; ++q) {
        c.ops.push_back(GateOp::rx(q, rng.uniform(0, kTwoPi)));
        c.ops.push_back(GateOp::ry(q, rng.uniform(0, kTwoPi)));
        c.ops.push_back(GateOp::rz(q, rng.uniform(0, kTwoPi)));
    }
    return c;
}

Circuit build_random_layered_circuit(int n_qubits, int layers,
                                     std::uint64_t seed) {
    if (n_qubits < 2 || layers < 1)
        throw std::invalid_argument("need n_qubits >= 2 and layers >= 1");
    Rng rng(seed);
    Circuit c;
    c.n_qubits = n_qubits;
    for (int layer = 0; layer < layers; ++layer) {
        for (int q = 0; q < n_qubits; ++q)
            c.ops.push_back(GateOp::rx(q, rng.uniform(0, kTwoPi)));
        for (int q = 0; q < n_qubits; ++q)
            c.ops.push_back(GateOp::ry(q, rng.uniform(0, kTwoPi)));
        for (int q = 0; q + 1 < n_qubits; ++q)
            c.ops.push_back(GateOp::cx(q, q + 1));
    }
    return c;
}

std::string gate_name(GateKind kind) {
    switch (kind) {
    case GateKind::H:
        return "h";
    case GateKind::X:
        return "x";
    case GateKind::Y:
        return "y";
    case GateKind::Z:
        return "z";
    case GateKind::S:
        return "s";
    case GateKind::RX:
        return "rx";
    case GateKind::RY:
        return "ry";
    case GateKind::RZ:
        return "rz";
    case GateKind::Phase:
        return "u1";
    case GateKind::CX:
        return "cx";
    }
    throw std::invalid_argument("unknown gate kind");
}

GateKind gate_kind_from_name(const std::string &name) {
    if (name == "h")
        return GateKind::H;
    if (name == "x")
        return GateKind::X;
    if (name == "y")
        return GateKind::Y;
    if (name == "z")
        return GateKind::Z;
    if (name == "s")
        return GateKind::S;
    if (name == "rx")
        return GateKind::RX;
    if (name == "ry")
        return GateKind::RY;
    if (name == "rz")
        return GateKind::RZ;
    if (name == "u1" || name == "p")
        return GateKind::Phase;
    if (name == "cx")
        return GateKind::CX;
    throw std::invalid_argument("unknown gate name: " + name);
}

std::string to_qasm(const Circuit &circuit) {
    std::ostringstream out;
    out << "OPENQASM 2.0;\n";
    out << "include \"qelib1.inc\";\n";
    out << "qreg q[" << circuit.n_qubits << "];\n";
    out << "creg c[" << circuit.n_qubits << "];\n";
    for (const GateOp &op : circuit.ops) {
        out << gate_name(op.kind);
        if (is_parameterized(op.kind))
            out << "(" << format_angle(op.angle) << ")";
        out << " q[" << op.q0 << "]";
        if (op.kind == GateKind::CX)
            out << ",q[" << op.q1 << "]";
        out << ";\n";
    }
    for (int q = 0; q < circuit.n_qubits; ++q)
        out << "measure q[" << q << "] -> c[" << q << "];\n";
    return out.str();
}

Circuit parse_qasm(const std::string &text) {
    // Minimal parser for the subset this project emits.
    Circuit c;
    std::istringstream in(text);
    std::string line;
    bool have_qreg = false;
    while (std::getline(in, line)) {
        // strip whitespace and comments
        if (auto pos = line.find("//"); pos != std::string::npos)
            line = line.substr(0, pos);
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        if (line.empty())
            continue;
        if (line.starts_with("OPENQASM") || line.starts_with("include") ||
            line.starts_with("creg") || line.starts_with("measure") ||
            line.starts_with("barrier"))
            continue;
        if (line.starts_with("qreg")) {
            auto l = line.find('['), r = line.find(']');
            if (l == std::string::npos || r == std::string::npos)
                throw std::runtime_error("malformed qreg line");
            c.n_qubits = std::stoi(line.substr(l + 1, r - l - 1));
            have_qreg = true;
            continue;
        }
        // gate line: name[(angle)] q[i][,q[j]];
        std::size_t name_end = line.find_first_of("( \t");
        if (name_end == std::string::npos)
            throw std::runtime_error("malformed gate line: " + line);
        GateOp op{gate_kind_from_name(line.substr(0, name_end)), 0};
        std::size_t cursor = name_end;
        if (line[cursor] == '(') {
            std::size_t close = line.find(')', cursor);
            if (close == std::string::npos)
                throw std::runtime_error("unterminated angle: " + line);
            op.angle = std::stod(line.substr(cursor + 1, close - cursor - 1));
            cursor = close + 1;
        }
        std::vector<int> qubits;
        while (true) {
            std::size_t l = line.find('[', cursor);
            if (l == std::string::npos)
                break;
            std::size_t r = line.find(']', l);
            if (r == std::string::npos)
                throw std::runtime_error("malformed qubit ref: " + line);
            qubits.push_back(std::stoi(line.substr(l + 1, r - l - 1)));
            cursor = r + 1;
        }
        if (op.kind == GateKind::CX) {
            if (qubits.size() != 2)
                throw std::runtime_error("cx needs two qubits: " + line);
            op.q0 = qubits[0];
            op.q1 = qubits[1];
        } else {
            if (qubits.size() != 1)
                throw std::runtime_error("expected one qubit: " + line);
            op.q0 = qubits[0];
        }
        c.ops.push_back(op);
    }
    if (!have_qreg)
        throw std::runtime_error("no qreg declaration found");
    return c;
}

std::map<GateKind, int> gate_counts(const Circuit &circuit) {
    std::map<GateKind, int> counts;
    for (const GateOp &op : circuit.ops)
        ++counts[op.kind];
    return counts;
}

int total_gates(const Circuit &circuit) {
    return static_cast<int>(circuit.ops.size());
}

} // namespace qevae
