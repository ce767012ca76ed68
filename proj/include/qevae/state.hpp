#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qevae {

using cdouble = std::complex<double>;

enum class GateKind { H, X, Y, Z, S, RX, RY, RZ, Phase, CX };

/// True for RX/RY/RZ/Phase, the kinds that carry an angle.
bool is_parameterized(GateKind kind);

struct GateOp {
    GateKind kind;
    int q0;           // target (single-qubit) or control (CX)
    int q1 = -1;      // CX target, unused otherwise
    double angle = 0; // radians, RX/RY/RZ/Phase only

    static GateOp h(int q) { return {GateKind::H, q}; }
    static GateOp x(int q) { return {GateKind::X, q}; }
    static GateOp y(int q) { return {GateKind::Y, q}; }
    static GateOp z(int q) { return {GateKind::Z, q}; }
    static GateOp s(int q) { return {GateKind::S, q}; }
    static GateOp rx(int q, double a) { return {GateKind::RX, q, -1, a}; }
    static GateOp ry(int q, double a) { return {GateKind::RY, q, -1, a}; }
    static GateOp rz(int q, double a) { return {GateKind::RZ, q, -1, a}; }
    static GateOp phase(int q, double a) { return {GateKind::Phase, q, -1, a}; }
    static GateOp cx(int control, int target) {
        return {GateKind::CX, control, target};
    }

    bool operator==(const GateOp &) const = default;
};

struct Circuit {
    int n_qubits = 0;
    std::vector<GateOp> ops;

    bool operator==(const Circuit &) const = default;
};

/// Dense n-qubit statevector. Qubit 0 is the least-significant bit of the
/// amplitude index (little-endian throughout the project).
struct StateVector {
    int n_qubits = 0;
    std::vector<cdouble> amps;

    static StateVector zero_state(int n_qubits);
    std::size_t dim() const { return amps.size(); }
    double norm() const;
};

struct Distribution {
    int n_qubits = 0;
    std::vector<double> probs;

    static Distribution uniform(int n_qubits);
    std::size_t dim() const { return probs.size(); }
    double sum() const;
};

/// Strided-pair kernel; `parallel` selects the OpenMP path. Both paths are
/// bit-identical; the simulator switches to OpenMP above a size threshold.
void apply_gate_kernel(StateVector &state, const GateOp &op, bool parallel);

void apply_gate_inplace(StateVector &state, const GateOp &op);
StateVector apply_gate(const StateVector &state, const GateOp &op);

StateVector run(const Circuit &circuit);
StateVector run(const Circuit &circuit, StateVector initial);

Distribution probabilities(const StateVector &state);

/// Bitstring for index x: leftmost character is qubit n-1 (most-significant
/// bit), so the string reads |q_{n-1} ... q_0>.
std::string index_to_bitstring(std::size_t x, int n_qubits);
std::size_t bitstring_to_index(const std::string &bits);

/// Seeded iid sampling; identical (dist, shots, seed) gives identical output.
std::vector<std::string> sample(const Distribution &dist, int shots,
                                std::uint64_t rng_seed);

namespace ref {
/// Serial reference: embeds the op into a dense 2^n x 2^n unitary and
/// multiplies. Exponentially slower than the kernel path; kept for tests and
/// the kernel benchmark baseline.
StateVector apply_gate(const StateVector &state, const GateOp &op);
} // namespace ref

} // namespace qevae
