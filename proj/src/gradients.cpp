#include "qevae/gradients.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qevae {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

struct TracedCircuit {
    Circuit circuit;
    std::vector<AngleDep> input_deps; // feature-map angles
    std::vector<int> theta_ops;       // op index carrying theta_k
};

TracedCircuit trace_decoder(const DecoderSpec &spec, std::span<const double> z,
                            std::span<const double> theta) {
    if (spec.feature_map.n_qubits != spec.ansatz.n_qubits)
        throw std::invalid_argument("feature map / ansatz qubit mismatch");
    TracedCircuit t;
    t.circuit = build_feature_map(spec.feature_map, z, t.input_deps);
    const int offset = static_cast<int>(t.circuit.ops.size());
    Circuit v = build_two_local(spec.ansatz, theta);
    t.circuit.ops.insert(t.circuit.ops.end(), v.ops.begin(), v.ops.end());
    // Parameters bind to rotation gates in construction order.
    for (int i = 0; i < static_cast<int>(v.ops.size()); ++i)
        if (is_parameterized(v.ops[i].kind))
            t.theta_ops.push_back(offset + i);
    return t;
}

Distribution run_probs(const Circuit &c) { return probabilities(run(c)); }

/// dp/d(angle of ops[op_index]) for every outcome, via +-pi/2 shifts.
std::vector<double> shift_column(const Circuit &base, int op_index) {
    Circuit plus = base;
    plus.ops[static_cast<std::size_t>(op_index)].angle += kHalfPi;
    Circuit minus = base;
    minus.ops[static_cast<std::size_t>(op_index)].angle -= kHalfPi;
    const Distribution pp = run_probs(plus);
    const Distribution pm = run_probs(minus);
    std::vector<double> col(pp.dim());
    for (std::size_t x = 0; x < pp.dim(); ++x)
        col[x] = 0.5 * (pp.probs[x] - pm.probs[x]);
    return col;
}

} // namespace

Circuit build_decoder_circuit(const DecoderSpec &spec,
                              std::span<const double> z,
                              std::span<const double> theta) {
    return trace_decoder(spec, z, theta).circuit;
}

Distribution decoder_distribution(const DecoderSpec &spec,
                                  std::span<const double> z,
                                  std::span<const double> theta) {
    return run_probs(build_decoder_circuit(spec, z, theta));
}

GradMatrix dist_grad_theta(const DecoderSpec &spec, std::span<const double> z,
                           std::span<const double> theta) {
    const TracedCircuit t = trace_decoder(spec, z, theta);
    const std::size_t dim = std::size_t{1} << spec.n_qubits();
    const std::size_t np = t.theta_ops.size();
    GradMatrix g(dim, np);

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(np); ++k) {
        const std::vector<double> col =
            shift_column(t.circuit, t.theta_ops[static_cast<std::size_t>(k)]);
        for (std::size_t x = 0; x < dim; ++x)
            g.at(x, static_cast<std::size_t>(k)) = col[x];
    }
    return g;
}

GradMatrix dist_grad_input(const DecoderSpec &spec, std::span<const double> z,
                           std::span<const double> theta) {
    const TracedCircuit t = trace_decoder(spec, z, theta);
    const std::size_t dim = std::size_t{1} << spec.n_qubits();
    GradMatrix g(dim, z.size());

    const std::size_t nd = t.input_deps.size();
    std::vector<std::vector<double>> cols(nd);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t d = 0; d < static_cast<std::int64_t>(nd); ++d) {
        cols[static_cast<std::size_t>(d)] = shift_column(
            t.circuit, t.input_deps[static_cast<std::size_t>(d)].op_index);
    }
    // Fixed-order accumulation keeps parallel and serial output identical.
    for (std::size_t d = 0; d < nd; ++d) {
        const AngleDep &dep = t.input_deps[d];
        for (std::size_t x = 0; x < dim; ++x)
            g.at(x, static_cast<std::size_t>(dep.input_index)) +=
                dep.coeff * cols[d][x];
    }
    return g;
}

GradientRecord logprob_grad(const DecoderSpec &spec, std::span<const double> z,
                            std::span<const double> theta, std::size_t outcome,
                            double eps_clamp) {
    const Distribution p = decoder_distribution(spec, z, theta);
    const double denom = std::max(p.probs[outcome], eps_clamp);
    const GradMatrix gt = dist_grad_theta(spec, z, theta);
    const GradMatrix gi = dist_grad_input(spec, z, theta);
    GradientRecord rec;
    rec.d_theta.resize(gt.cols);
    for (std::size_t k = 0; k < gt.cols; ++k)
        rec.d_theta[k] = gt.at(outcome, k) / denom;
    rec.d_input.resize(gi.cols);
    for (std::size_t j = 0; j < gi.cols; ++j)
        rec.d_input[j] = gi.at(outcome, j) / denom;
    return rec;
}

std::pair<GradMatrix, GradMatrix>
finite_diff_grads(const DecoderSpec &spec, std::span<const double> z,
                  std::span<const double> theta, double h) {
    if (h <= 0)
        throw std::invalid_argument("h must be > 0");
    const std::size_t dim = std::size_t{1} << spec.n_qubits();
    std::vector<double> zv(z.begin(), z.end());
    std::vector<double> tv(theta.begin(), theta.end());

    GradMatrix gt(dim, tv.size());
    for (std::size_t k = 0; k < tv.size(); ++k) {
        const double orig = tv[k];
        tv[k] = orig + h;
        const Distribution pp = decoder_distribution(spec, zv, tv);
        tv[k] = orig - h;
        const Distribution pm = decoder_distribution(spec, zv, tv);
        tv[k] = orig;
        for (std::size_t x = 0; x < dim; ++x)
            gt.at(x, k) = (pp.probs[x] - pm.probs[x]) / (2.0 * h);
    }

    GradMatrix gi(dim, zv.size());
    for (std::size_t j = 0; j < zv.size(); ++j) {
        const double orig = zv[j];
        zv[j] = orig + h;
        const Distribution pp = decoder_distribution(spec, zv, tv);
        zv[j] = orig - h;
        const Distribution pm = decoder_distribution(spec, zv, tv);
        zv[j] = orig;
        for (std::size_t x = 0; x < dim; ++x)
            gi.at(x, j) = (pp.probs[x] - pm.probs[x]) / (2.0 * h);
    }
    return {gt, gi};
}

} // namespace qevae
