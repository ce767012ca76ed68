#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qevae/state.hpp"

namespace qevae {

struct FeatureMapSpec {
    enum class Kind { Z, ZZ };

    Kind kind = Kind::Z;
    int n_qubits = 0;
    int reps = 1;
    std::vector<std::pair<int, int>> entanglement_pairs; // ZZ only

    static FeatureMapSpec z_map(int n_qubits, int reps = 1);
    /// ZZ map with linear pairs (0,1), (1,2), ...
    static FeatureMapSpec zz_map(int n_qubits, int reps = 1);

    bool operator==(const FeatureMapSpec &) const = default;
};

struct AnsatzSpec {
    int n_qubits = 0;
    int reps = 2;
    std::vector<GateKind> rotation_kinds{GateKind::RX, GateKind::RY};
    // entanglement: linear CX chain (the only supported scheme)

    int n_params() const {
        return reps * static_cast<int>(rotation_kinds.size()) * n_qubits;
    }

    bool operator==(const AnsatzSpec &) const = default;
};

/// Tracks how one circuit angle depends on the feature-map inputs:
/// d(angle of ops[op_index]) / d(x[input_index]) = coeff.
struct AngleDep {
    int op_index;
    int input_index;
    double coeff;
};

Circuit build_feature_map(const FeatureMapSpec &spec,
                          std::span<const double> x);
/// Same circuit; additionally records input dependencies of every angle.
Circuit build_feature_map(const FeatureMapSpec &spec, std::span<const double> x,
                          std::vector<AngleDep> &deps);

Circuit build_two_local(const AnsatzSpec &spec, std::span<const double> theta);

Circuit build_random_product_circuit(int n_qubits, std::uint64_t seed);
Circuit build_random_layered_circuit(int n_qubits, int layers,
                                     std::uint64_t seed);

std::string to_qasm(const Circuit &circuit);
Circuit parse_qasm(const std::string &text);

std::map<GateKind, int> gate_counts(const Circuit &circuit);
int total_gates(const Circuit &circuit);

std::string gate_name(GateKind kind);
GateKind gate_kind_from_name(const std::string &name);

} // namespace qevae
