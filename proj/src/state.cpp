#include "qevae/state.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qevae/rng.hpp"

namespace qevae {

namespace {

constexpr std::size_t kParallelThreshold = std::size_t{1} << 14;

using Mat2 = std::array<cdouble, 4>; // row-major [m00 m01 m10 m11]

Mat2 single_qubit_matrix(GateKind kind, double angle) {
    const cdouble i{0.0, 1.0};
    const double s2 = 1.0 / std::numbers::sqrt2;
    switch (kind) {
    case GateKind::H:
        return {s2, s2, s2, -s2};
    case GateKind::X:
        return {0, 1, 1, 0};
    case GateKind::Y:
        return {0, -i, i, 0};
    case GateKind::Z:
        return {1, 0, 0, -1};
    case GateKind::S:
        return {1, 0, 0, i};
    case GateKind::RX: {
        double c = std::cos(angle / 2), s = std::sin(angle / 2);
        return {c, -i * s, -i * s, c};
    }
    case GateKind::RY: {
        double c = std::cos(angle / 2), s = std::sin(angle / 2);
        return {c, -s, s, c};
    }
    case GateKind::RZ: {
        double c = std::cos(angle / 2), s = std::sin(angle / 2);
        return {c - i * s, 0, 0, c + i * s};
    }
    case GateKind::Phase:
        return {1, 0, 0, std::exp(i * angle)};
    default:
        throw std::invalid_argument("not a single-qubit gate");
    }
}

void validate(const StateVector &state, const GateOp &op) {
    if (op.q0 < 0 || op.q0 >= state.n_qubits)
        throw std::out_of_range("gate qubit index out of range");
    if (op.kind == GateKind::CX) {
        if (op.q1 < 0 || op.q1 >= state.n_qubits)
            throw std::out_of_range("CX target index out of range");
        if (op.q1 == op.q0)
            throw std::invalid_argument("CX control equals target");
    } else if (op.q1 != -1) {
        throw std::invalid_argument("single-qubit gate with two indices");
    }
    if (is_parameterized(op.kind) && !std::isfinite(op.angle))
        throw std::invalid_argument("missing angle on rotation gate");
}

void apply_single(StateVector &state, const Mat2 &m, int target,
                  bool parallel) {
    const std::size_t dim = state.dim();
    const std::size_t mask = std::size_t{1} << target;
    const std::size_t lo = mask - 1;
    const std::size_t hi = ~lo;
    cdouble *a = state.amps.data();
    const std::int64_t half = static_cast<std::int64_t>(dim >> 1);

#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t k = 0; k < half; ++k) {
        const std::size_t i = static_cast<std::size_t>(k);
        const std::size_t i0 = ((i & hi) << 1) | (i & lo);
        const std::size_t i1 = i0 | mask;
        const cdouble a0 = a[i0];
        const cdouble a1 = a[i1];
        a[i0] = m[0] * a0 + m[1] * a1;
        a[i1] = m[2] * a0 + m[3] * a1;
    }
}

void apply_cx(StateVector &state, int control, int target, bool parallel) {
    const std::size_t dim = state.dim();
    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t tmask = std::size_t{1} << target;
    cdouble *a = state.amps.data();
    const std::int64_t n = static_cast<std::int64_t>(dim);

#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t k = 0; k < n; ++k) {
        const std::size_t i = static_cast<std::size_t>(k);
        if ((i & cmask) && !(i & tmask))
            std::swap(a[i], a[i | tmask]);
    }
}

} // namespace

bool is_parameterized(GateKind kind) {
    return kind == GateKind::RX || kind == GateKind::RY ||
           kind == GateKind::RZ || kind == GateKind::Phase;
}

StateVector StateVector::zero_state(int n_qubits) {
    if (n_qubits < 1)
        throw std::invalid_argument("n_qubits must be >= 1");
    StateVector s;
    s.n_qubits = n_qubits;
    s.amps.assign(std::size_t{1} << n_qubits, cdouble{0.0, 0.0});
    s.amps[0] = 1.0;
    return s;
}

double StateVector::norm() const {
    double acc = 0;
    for (const cdouble &a : amps)
        acc += std::norm(a);
    return std::sqrt(acc);
}

Distribution Distribution::uniform(int n_qubits) {
    Distribution d;
    d.n_qubits = n_qubits;
    d.probs.assign(std::size_t{1} << n_qubits,
                   1.0 / static_cast<double>(std::size_t{1} << n_qubits));
    return d;
}

double Distribution::sum() const {
    double acc = 0;
    for (double p : probs)
        acc += p;
    return acc;
}

void apply_gate_kernel(StateVector &state, const GateOp &op, bool parallel) {
    validate(state, op);
    if (op.kind == GateKind::CX) {
        apply_cx(state, op.q0, op.q1, parallel);
    } else {
        apply_single(state, single_qubit_matrix(op.kind, op.angle), op.q0,
                     parallel);
    }
}

void apply_gate_inplace(StateVector &state, const GateOp &op) {
    apply_gate_kernel(state, op, state.dim() >= kParallelThreshold);
}

StateVector apply_gate(const StateVector &state, const GateOp &op) {
    StateVector out = state;
    apply_gate_inplace(out, op);
    return out;
}

StateVector run(const Circuit &circuit) {
    return run(circuit, StateVector::zero_state(circuit.n_qubits));
}

StateVector run(const Circuit &circuit, StateVector initial) {
    if (initial.n_qubits != circuit.n_qubits)
        throw std::invalid_argument("circuit/state qubit count mismatch");
    for (const GateOp &op : circuit.ops)
        apply_gate_inplace(initial, op);
    return initial;
}

Distribution probabilities(const StateVector &state) {
    Distribution d;
    d.n_qubits = state.n_qubits;
    d.probs.resize(state.dim());
    for (std::size_t x = 0; x < state.dim(); ++x)
        d.probs[x] = std::norm(state.amps[x]);
    return d;
}

std::string index_to_bitstring(std::size_t x, int n_qubits) {
    std::string s(static_cast<std::size_t>(n_qubits), '0');
    for (int q = 0; q < n_qubits; ++q)
        if (x & (std::size_t{1} << q))
            s[static_cast<std::size_t>(n_qubits - 1 - q)] = '1';
    return s;
}

std::size_t bitstring_to_index(const std::string &bits) {
    std::size_t x = 0;
    for (char c : bits) {
        if (c != '0' && c != '1')
            throw std::invalid_argument("bitstring must be 0/1");
        x = (x << 1) | static_cast<std::size_t>(c - '0');
    }
    return x;
}

std::vector<std::string> sample(const Distribution &dist, int shots,
                                std::uint64_t rng_seed) {
    if (shots < 1)
        throw std::invalid_argument("shots must be >= 1");
    std::vector<double> cdf(dist.dim());
    double acc = 0;
    for (std::size_t x = 0; x < dist.dim(); ++x) {
        acc += dist.probs[x];
        cdf[x] = acc;
    }
    Rng rng(rng_seed);
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(shots));
    for (int s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        std::size_t x = 0;
        while (x + 1 < cdf.size() && cdf[x] <= u)
            ++x;
        out.push_back(index_to_bitstring(x, dist.n_qubits));
    }
    return out;
}

namespace ref {

StateVector apply_gate(const StateVector &state, const GateOp &op) {
    validate(state, op);
    const std::size_t dim = state.dim();

    // Full embedded unitary, built entry-wise.
    std::vector<cdouble> u(dim * dim, cdouble{0.0, 0.0});
    if (op.kind == GateKind::CX) {
        const std::size_t cmask = std::size_t{1} << op.q0;
        const std::size_t tmask = std::size_t{1} << op.q1;
        for (std::size_t col = 0; col < dim; ++col) {
            const std::size_t row = (col & cmask) ? (col ^ tmask) : col;
            u[row * dim + col] = 1.0;
        }
    } else {
        const Mat2 m = single_qubit_matrix(op.kind, op.angle);
        const std::size_t mask = std::size_t{1} << op.q0;
        for (std::size_t col = 0; col < dim; ++col) {
            const std::size_t bc = (col & mask) ? 1 : 0;
            for (std::size_t br = 0; br < 2; ++br) {
                const std::size_t row = (col & ~mask) | (br ? mask : 0);
                u[row * dim + col] = m[br * 2 + bc];
            }
        }
    }

    StateVector out;
    out.n_qubits = state.n_qubits;
    out.amps.assign(dim, cdouble{0.0, 0.0});
    for (std::size_t row = 0; row < dim; ++row) {
        cdouble acc{0.0, 0.0};
        for (std::size_t col = 0; col < dim; ++col)
            acc += u[row * dim + col] * state.amps[col];
        out.amps[row] = acc;
    }
    return out;
}

} // namespace ref

} // namespace qevae
