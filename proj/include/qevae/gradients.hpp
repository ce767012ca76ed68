#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qevae/pqc.hpp"
#include "qevae/state.hpp"

namespace qevae {

/// Feature map followed by a two-local ansatz: the QeVAE decoder circuit
/// family U(theta, z) = V_theta * U_phi(z).
struct DecoderSpec {
    FeatureMapSpec feature_map;
    AnsatzSpec ansatz;

    int n_qubits() const { return feature_map.n_qubits; }
    int n_params() const { return ansatz.n_params(); }

    bool operator==(const DecoderSpec &) const = default;
};

Circuit build_decoder_circuit(const DecoderSpec &spec,
                              std::span<const double> z,
                              std::span<const double> theta);

Distribution decoder_distribution(const DecoderSpec &spec,
                                  std::span<const double> z,
                                  std::span<const double> theta);

/// Row-major (n_outcomes x n_cols) gradient matrix.
struct GradMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    GradMatrix() = default;
    GradMatrix(std::size_t r, std::size_t c)
        : rows(r), cols(c), data(r * c, 0.0) {}
    double &at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const {
        return data[r * cols + c];
    }
};

struct GradientRecord {
    std::vector<double> d_theta;
    std::vector<double> d_input;
};

/// d p(x|z) / d theta_k via the parameter-shift rule, exact for the
/// RX/RY/RZ/Phase generators used by the ansatz.
GradMatrix dist_grad_theta(const DecoderSpec &spec, std::span<const double> z,
                           std::span<const double> theta);

/// d p(x|z) / d z_j: shift rule per angle occurrence, chain-ruled through the
/// feature-map angle functions.
GradMatrix dist_grad_input(const DecoderSpec &spec, std::span<const double> z,
                           std::span<const double> theta);

/// Gradients of log p(x|z); probability clamped at eps to stay finite.
GradientRecord logprob_grad(const DecoderSpec &spec, std::span<const double> z,
                            std::span<const double> theta, std::size_t outcome,
                            double eps_clamp = 1e-12);

/// Central finite differences of the exact probabilities; test oracle,
/// independent of the shift-rule path.
std::pair<GradMatrix, GradMatrix>
finite_diff_grads(const DecoderSpec &spec, std::span<const double> z,
                  std::span<const double> theta, double h);

} // namespace qevae
