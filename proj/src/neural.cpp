#include "qevae/neural.hpp"

#include <cmath>
#include <stdexcept>

namespace qevae {

DenseLayer DenseLayer::zeros(int in, int out) {
    DenseLayer l;
    l.in = in;
    l.out = out;
    l.W.assign(static_cast<std::size_t>(in) * out, 0.0);
    l.b.assign(static_cast<std::size_t>(out), 0.0);
    return l;
}

DenseLayer DenseLayer::init_uniform(int in, int out, Rng &rng) {
    DenseLayer l = zeros(in, out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double &w : l.W)
        w = rng.uniform(-bound, bound);
    for (double &bb : l.b)
        bb = rng.uniform(-bound, bound);
    return l;
}

DenseLayer DenseLayer::init_normal(int in, int out, Rng &rng, double stddev) {
    DenseLayer l = zeros(in, out);
    for (double &w : l.W)
        w = stddev * rng.normal();
    for (double &bb : l.b)
        bb = stddev * rng.normal();
    return l;
}

std::vector<double> DenseLayer::forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != in)
        throw std::invalid_argument("dense layer input size mismatch");
    std::vector<double> y(static_cast<std::size_t>(out));
    for (int r = 0; r < out; ++r) {
        double acc = b[static_cast<std::size_t>(r)];
        const double *row = W.data() + static_cast<std::size_t>(r) * in;
        for (int c = 0; c < in; ++c)
            acc += row[c] * x[static_cast<std::size_t>(c)];
        y[static_cast<std::size_t>(r)] = acc;
    }
    return y;
}

void DenseLayer::backward(std::span<const double> x,
                          std::span<const double> dy, DenseLayer &grad,
                          std::vector<double> *dx) const {
    for (int r = 0; r < out; ++r) {
        const double g = dy[static_cast<std::size_t>(r)];
        grad.b[static_cast<std::size_t>(r)] += g;
        double *grow = grad.W.data() + static_cast<std::size_t>(r) * in;
        for (int c = 0; c < in; ++c)
            grow[c] += g * x[static_cast<std::size_t>(c)];
    }
    if (dx) {
        dx->assign(static_cast<std::size_t>(in), 0.0);
        for (int r = 0; r < out; ++r) {
            const double g = dy[static_cast<std::size_t>(r)];
            const double *row = W.data() + static_cast<std::size_t>(r) * in;
            for (int c = 0; c < in; ++c)
                (*dx)[static_cast<std::size_t>(c)] += g * row[c];
        }
    }
}

void DenseLayer::pack(std::vector<double> &out_vec) const {
    out_vec.insert(out_vec.end(), W.begin(), W.end());
    out_vec.insert(out_vec.end(), b.begin(), b.end());
}

void DenseLayer::unpack(const double *&p) {
    for (double &w : W)
        w = *p++;
    for (double &bb : b)
        bb = *p++;
}

void leaky_relu(std::vector<double> &v, double leak) {
    for (double &x : v)
        if (x < 0)
            x *= leak;
}

void leaky_relu_backward(std::span<const double> pre, std::vector<double> &dv,
                         double leak) {
    for (std::size_t i = 0; i < dv.size(); ++i)
        if (pre[i] < 0)
            dv[i] *= leak;
}

EncoderNet EncoderNet::init(int n_inputs, int latent_dim, Rng &rng) {
    EncoderNet net;
    net.latent_dim = latent_dim;
    net.h1 = DenseLayer::init_uniform(n_inputs, 8, rng);
    net.h2 = DenseLayer::init_uniform(8, 7, rng);
    net.head_mu = DenseLayer::init_uniform(7, latent_dim, rng);
    net.head_logvar = DenseLayer::init_uniform(7, latent_dim, rng);
    return net;
}

EncoderNet EncoderNet::zeros_like(const EncoderNet &net) {
    EncoderNet g;
    g.latent_dim = net.latent_dim;
    g.leak = net.leak;
    g.h1 = DenseLayer::zeros(net.h1.in, net.h1.out);
    g.h2 = DenseLayer::zeros(net.h2.in, net.h2.out);
    g.head_mu = DenseLayer::zeros(net.head_mu.in, net.head_mu.out);
    g.head_logvar =
        DenseLayer::zeros(net.head_logvar.in, net.head_logvar.out);
    return g;
}

void EncoderNet::forward(std::span<const double> x, Cache &cache) const {
    cache.x.assign(x.begin(), x.end());
    cache.pre1 = h1.forward(x);
    cache.act1 = cache.pre1;
    leaky_relu(cache.act1, leak);
    cache.pre2 = h2.forward(cache.act1);
    cache.act2 = cache.pre2;
    leaky_relu(cache.act2, leak);
    cache.mu = head_mu.forward(cache.act2);
    cache.logvar = head_logvar.forward(cache.act2);
}

void EncoderNet::backward(const Cache &cache, std::span<const double> dmu,
                          std::span<const double> dlogvar,
                          EncoderNet &grad) const {
    std::vector<double> da2_mu, da2_lv;
    head_mu.backward(cache.act2, dmu, grad.head_mu, &da2_mu);
    head_logvar.backward(cache.act2, dlogvar, grad.head_logvar, &da2_lv);
    std::vector<double> da2(da2_mu.size());
    for (std::size_t i = 0; i < da2.size(); ++i)
        da2[i] = da2_mu[i] + da2_lv[i];
    leaky_relu_backward(cache.pre2, da2, leak);
    std::vector<double> da1;
    h2.backward(cache.act1, da2, grad.h2, &da1);
    leaky_relu_backward(cache.pre1, da1, leak);
    h1.backward(cache.x, da1, grad.h1, nullptr);
}

std::size_t EncoderNet::n_params() const {
    return h1.n_params() + h2.n_params() + head_mu.n_params() +
           head_logvar.n_params();
}

void EncoderNet::pack(std::vector<double> &out_vec) const {
    h1.pack(out_vec);
    h2.pack(out_vec);
    head_mu.pack(out_vec);
    head_logvar.pack(out_vec);
}

void EncoderNet::unpack(const double *&p) {
    h1.unpack(p);
    h2.unpack(p);
    head_mu.unpack(p);
    head_logvar.unpack(p);
}

Preprocessor Preprocessor::init(int latent_dim, int n_qubits, Rng &rng) {
    // Init near N(0, 0.5) keeps the feature-map angles in a trainable range.
    Preprocessor p;
    p.layer = DenseLayer::init_normal(latent_dim, n_qubits, rng, 0.5);
    return p;
}

std::vector<double> reparameterize(std::span<const double> mu,
                                   std::span<const double> logvar,
                                   std::span<const double> eps) {
    if (mu.size() != logvar.size() || mu.size() != eps.size())
        throw std::invalid_argument("reparameterize length mismatch");
    std::vector<double> z(mu.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = mu[i] + std::exp(0.5 * logvar[i]) * eps[i];
    return z;
}

double kl_gaussian(std::span<const double> mu,
                   std::span<const double> logvar) {
    if (mu.size() != logvar.size())
        throw std::invalid_argument("kl_gaussian length mismatch");
    double acc = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        acc += mu[i] * mu[i] + std::exp(logvar[i]) - logvar[i] - 1.0;
    return 0.5 * acc;
}

void kl_gaussian_grad(std::span<const double> mu,
                      std::span<const double> logvar,
                      std::vector<double> &dmu, std::vector<double> &dlogvar) {
    dmu.resize(mu.size());
    dlogvar.resize(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        dmu[i] = mu[i];
        dlogvar[i] = 0.5 * (std::exp(logvar[i]) - 1.0);
    }
}

Mlp Mlp::init(const std::vector<int> &widths, Rng &rng) {
    if (widths.size() < 2)
        throw std::invalid_argument("mlp needs at least input and output");
    Mlp net;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i)
        net.layers.push_back(
            DenseLayer::init_uniform(widths[i], widths[i + 1], rng));
    return net;
}

Mlp Mlp::zeros_like(const Mlp &net) {
    Mlp g;
    g.leak = net.leak;
    for (const DenseLayer &l : net.layers)
        g.layers.push_back(DenseLayer::zeros(l.in, l.out));
    return g;
}

std::vector<double> Mlp::forward(std::span<const double> x,
                                 Cache &cache) const {
    cache.inputs.clear();
    cache.pres.clear();
    std::vector<double> cur(x.begin(), x.end());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        cache.inputs.push_back(cur);
        cur = layers[i].forward(cur);
        if (i + 1 < layers.size()) {
            cache.pres.push_back(cur);
            leaky_relu(cur, leak);
        }
    }
    cache.logits = cur;
    std::vector<double> out(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i)
        out[i] = 1.0 / (1.0 + std::exp(-cur[i]));
    return out;
}

void Mlp::backward_from_logits(const Cache &cache,
                               std::span<const double> dlogits, Mlp &grad,
                               std::vector<double> *dx) const {
    std::vector<double> cur(dlogits.begin(), dlogits.end());
    for (std::size_t i = layers.size(); i-- > 0;) {
        std::vector<double> dinput;
        const bool need_dx = (i > 0) || (dx != nullptr);
        layers[i].backward(cache.inputs[i], cur, grad.layers[i],
                           need_dx ? &dinput : nullptr);
        if (i > 0) {
            leaky_relu_backward(cache.pres[i - 1], dinput, leak);
            cur = std::move(dinput);
        } else if (dx) {
            *dx = std::move(dinput);
        }
    }
}

std::size_t Mlp::n_params() const {
    std::size_t n = 0;
    for (const DenseLayer &l : layers)
        n += l.n_params();
    return n;
}

void Mlp::pack(std::vector<double> &out_vec) const {
    for (const DenseLayer &l : layers)
        l.pack(out_vec);
}

void Mlp::unpack(const double *&p) {
    for (DenseLayer &l : layers)
        l.unpack(p);
}

void AdamState::step(std::vector<double> &params,
                     const std::vector<double> &grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam: param/grad length mismatch");
    if (m.empty()) {
        m.assign(params.size(), 0.0);
        v.assign(params.size(), 0.0);
    }
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace qevae
