#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qevae/rng.hpp"

namespace qevae {

struct DenseLayer {
    int in = 0, out = 0;
    std::vector<double> W; // out x in, row-major
    std::vector<double> b;

    static DenseLayer zeros(int in, int out);
    /// Fan-in uniform init U(-1/sqrt(in), 1/sqrt(in)).
    static DenseLayer init_uniform(int in, int out, Rng &rng);
    static DenseLayer init_normal(int in, int out, Rng &rng, double stddev);

    std::vector<double> forward(std::span<const double> x) const;
    /// Accumulates dW/db into `grad` and, if `dx` is non-null, writes the
    /// input gradient.
    void backward(std::span<const double> x, std::span<const double> dy,
                  DenseLayer &grad, std::vector<double> *dx) const;

    std::size_t n_params() const { return W.size() + b.size(); }
    void pack(std::vector<double> &out_vec) const;
    void unpack(const double *&p);
};

void leaky_relu(std::vector<double> &v, double leak);
/// Elementwise d(leaky_relu)/dx given the pre-activation values.
void leaky_relu_backward(std::span<const double> pre, std::vector<double> &dv,
                         double leak);

/// VAE encoder: two LeakyReLU hidden layers (widths 8 and 7) and linear
/// mu / logvar heads.
struct EncoderNet {
    DenseLayer h1, h2, head_mu, head_logvar;
    double leak = 0.01;
    int latent_dim = 0;

    static EncoderNet init(int n_inputs, int latent_dim, Rng &rng);
    static EncoderNet zeros_like(const EncoderNet &net);

    struct Cache {
        std::vector<double> x, pre1, act1, pre2, act2, mu, logvar;
    };

    void forward(std::span<const double> x, Cache &cache) const;
    void backward(const Cache &cache, std::span<const double> dmu,
                  std::span<const double> dlogvar, EncoderNet &grad) const;

    std::size_t n_params() const;
    void pack(std::vector<double> &out_vec) const;
    void unpack(const double *&p);
};

/// Linear map from latent space to the feature-map input.
struct Preprocessor {
    DenseLayer layer;

    static Preprocessor init(int latent_dim, int n_qubits, Rng &rng);

    std::size_t n_params() const { return layer.n_params(); }
};

std::vector<double> reparameterize(std::span<const double> mu,
                                   std::span<const double> logvar,
                                   std::span<const double> eps);

double kl_gaussian(std::span<const double> mu, std::span<const double> logvar);
void kl_gaussian_grad(std::span<const double> mu,
                      std::span<const double> logvar,
                      std::vector<double> &dmu, std::vector<double> &dlogvar);

/// Feedforward net with LeakyReLU hidden layers and sigmoid outputs (the
/// classical-VAE decoder).
struct Mlp {
    std::vector<DenseLayer> layers;
    double leak = 0.01;

    /// widths = [in, hidden..., out]
    static Mlp init(const std::vector<int> &widths, Rng &rng);
    static Mlp zeros_like(const Mlp &net);

    struct Cache {
        std::vector<std::vector<double>> inputs; // input to each layer
        std::vector<double> logits;              // final pre-sigmoid
        std::vector<std::vector<double>> pres;   // hidden pre-activations
    };

    std::vector<double> forward(std::span<const double> x,
                                Cache &cache) const;
    /// Upstream gradient on the final pre-sigmoid values.
    void backward_from_logits(const Cache &cache,
                              std::span<const double> dlogits, Mlp &grad,
                              std::vector<double> *dx) const;

    std::size_t n_params() const;
    void pack(std::vector<double> &out_vec) const;
    void unpack(const double *&p);
};

struct AdamState {
    double lr = 0.001;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long t = 0;
    std::vector<double> m, v;

    explicit AdamState(double learning_rate = 0.001) : lr(learning_rate) {}

    /// In-place descent step with bias correction.
    void step(std::vector<double> &params, const std::vector<double> &grads);
};

} // namespace qevae
