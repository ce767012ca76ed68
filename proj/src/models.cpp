#include "qevae/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qevae/eval.hpp"
#include "qevae/pqc.hpp"
#include "qevae/rng.hpp"

namespace qevae {

namespace {

constexpr double kLogClamp = 1e-12;

/// Bitstring -> 0/1 reals indexed by qubit (qubit 0 = last character).
std::vector<double> bits_vector(const std::string &s) {
    std::vector<double> v(s.size());
    for (std::size_t q = 0; q < s.size(); ++q)
        v[q] = (s[s.size() - 1 - q] == '1') ? 1.0 : 0.0;
    return v;
}

struct ItemGrads {
    double loss = 0;
    EncoderNet d_encoder;  // valid when latent > 0
    DenseLayer d_preproc;  // valid when latent > 0
    std::vector<double> d_theta;
};

} // namespace

QevaeModel QevaeModel::init(const DecoderSpec &decoder, int latent_dim,
                            std::uint64_t seed) {
    if (decoder.feature_map.n_qubits != decoder.ansatz.n_qubits)
        throw std::invalid_argument("decoder qubit count mismatch");
    if (latent_dim < 0 || latent_dim > decoder.n_qubits())
        throw std::invalid_argument("latent_dim must be in [0, n_qubits]");
    QevaeModel m;
    m.n_qubits = decoder.n_qubits();
    m.latent_dim = latent_dim;
    m.decoder = decoder;
    Rng rng(seed);
    if (latent_dim > 0) {
        m.encoder = EncoderNet::init(m.n_qubits, latent_dim, rng);
        m.preproc = Preprocessor::init(latent_dim, m.n_qubits, rng);
    }
    m.theta.resize(static_cast<std::size_t>(decoder.n_params()));
    for (double &t : m.theta)
        t = rng.uniform(-0.1, 0.1);
    return m;
}

std::vector<double> QevaeModel::feature_input(std::span<const double> z) const {
    if (latent_dim == 0)
        return std::vector<double>(static_cast<std::size_t>(n_qubits), 0.0);
    if (static_cast<int>(z.size()) != latent_dim)
        throw std::invalid_argument("latent vector length mismatch");
    return preproc->layer.forward(z);
}

std::vector<double> QevaeModel::encoder_params() const {
    std::vector<double> p;
    if (encoder)
        encoder->pack(p);
    return p;
}

void QevaeModel::set_encoder_params(std::span<const double> p) {
    if (!encoder) {
        if (!p.empty())
            throw std::invalid_argument("model has no encoder");
        return;
    }
    if (p.size() != encoder->n_params())
        throw std::invalid_argument("encoder parameter count mismatch");
    const double *ptr = p.data();
    encoder->unpack(ptr);
}

std::vector<double> QevaeModel::decoder_params() const {
    std::vector<double> p;
    if (preproc)
        preproc->layer.pack(p);
    p.insert(p.end(), theta.begin(), theta.end());
    return p;
}

void QevaeModel::set_decoder_params(std::span<const double> p) {
    const std::size_t np = preproc ? preproc->layer.n_params() : 0;
    if (p.size() != np + theta.size())
        throw std::invalid_argument("decoder parameter count mismatch");
    if (preproc) {
        const double *ptr = p.data();
        preproc->layer.unpack(ptr);
    }
    std::copy(p.begin() + static_cast<std::ptrdiff_t>(np), p.end(),
              theta.begin());
}

CvaeModel CvaeModel::init(int n_qubits, int latent_dim,
                          const std::vector<int> &hidden_widths,
                          std::uint64_t seed) {
    if (latent_dim < 1)
        throw std::invalid_argument("cvae needs latent_dim >= 1");
    CvaeModel m;
    m.n_qubits = n_qubits;
    m.latent_dim = latent_dim;
    Rng rng(seed);
    m.encoder = EncoderNet::init(n_qubits, latent_dim, rng);
    std::vector<int> widths{latent_dim};
    widths.insert(widths.end(), hidden_widths.begin(), hidden_widths.end());
    widths.push_back(n_qubits);
    m.decoder = Mlp::init(widths, rng);
    return m;
}

std::vector<double> CvaeModel::encoder_params() const {
    std::vector<double> p;
    encoder.pack(p);
    return p;
}

void CvaeModel::set_encoder_params(std::span<const double> p) {
    if (p.size() != encoder.n_params())
        throw std::invalid_argument("encoder parameter count mismatch");
    const double *ptr = p.data();
    encoder.unpack(ptr);
}

std::vector<double> CvaeModel::decoder_params() const {
    std::vector<double> p;
    decoder.pack(p);
    return p;
}

void CvaeModel::set_decoder_params(std::span<const double> p) {
    if (p.size() != decoder.n_params())
        throw std::invalid_argument("decoder parameter count mismatch");
    const double *ptr = p.data();
    decoder.unpack(ptr);
}

std::string schedule_name(TrainConfig::Schedule s) {
    switch (s) {
    case TrainConfig::Schedule::Fixed:
        return "fixed";
    case TrainConfig::Schedule::Anneal:
        return "anneal";
    case TrainConfig::Schedule::Step:
        return "step";
    }
    throw std::invalid_argument("unknown schedule");
}

TrainConfig::Schedule schedule_from_name(const std::string &name) {
    if (name == "fixed")
        return TrainConfig::Schedule::Fixed;
    if (name == "anneal")
        return TrainConfig::Schedule::Anneal;
    if (name == "step")
        return TrainConfig::Schedule::Step;
    throw std::invalid_argument("unknown schedule: " + name);
}

double beta_at(TrainConfig::Schedule schedule, double beta_target, int epoch,
               int max_epochs) {
    switch (schedule) {
    case TrainConfig::Schedule::Fixed:
        return beta_target;
    case TrainConfig::Schedule::Anneal:
        return beta_target *
               std::min(1.0, static_cast<double>(epoch) /
                                 (static_cast<double>(max_epochs) / 2.0));
    case TrainConfig::Schedule::Step:
        // boundary inclusive: beta_target from epoch == max_epochs/4 on
        return (4 * epoch < max_epochs) ? 0.0 : beta_target;
    }
    throw std::invalid_argument("unknown schedule");
}

std::string history_csv(const TrainHistory &history) {
    std::ostringstream out;
    out << "epoch,train_loss,val_loss,beta,fidelity\n";
    char buf[160];
    for (const EpochStats &e : history.epochs) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n",
                      e.epoch, e.train_loss, e.val_loss, e.beta, e.fidelity);
        out << buf;
    }
    return out.str();
}

ElboResult elbo_loss(const QevaeModel &model,
                     std::span<const std::string> batch, double beta_now,
                     const std::vector<std::vector<double>> &eps) {
    if (batch.empty())
        throw std::invalid_argument("batch must be nonempty");
    ElboResult res;
    const double w = 1.0 / static_cast<double>(batch.size());

    if (model.latent_dim == 0) {
        // The decoder distribution is shared by the whole batch.
        const std::vector<double> a = model.feature_input({});
        const Distribution p =
            decoder_distribution(model.decoder, a, model.theta);
        const GradMatrix gt = dist_grad_theta(model.decoder, a, model.theta);
        res.d_decoder.assign(model.theta.size(), 0.0);
        for (const std::string &s : batch) {
            const std::size_t x = bitstring_to_index(s);
            const double pc = std::max(p.probs[x], kLogClamp);
            res.loss += -std::log(pc) * w;
            for (std::size_t k = 0; k < model.theta.size(); ++k)
                res.d_decoder[k] += -gt.at(x, k) / pc * w;
        }
        return res;
    }

    const std::size_t nb = batch.size();
    if (eps.size() < nb)
        throw std::invalid_argument("need one eps draw per batch item");
    std::vector<ItemGrads> items(nb);

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(nb); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        ItemGrads &item = items[i];
        const std::string &s = batch[i];
        const std::size_t x = bitstring_to_index(s);
        const std::vector<double> xin = bits_vector(s);

        EncoderNet::Cache cache;
        model.encoder->forward(xin, cache);
        const std::vector<double> z =
            reparameterize(cache.mu, cache.logvar, eps[i]);
        const std::vector<double> a = model.preproc->layer.forward(z);

        const Distribution p =
            decoder_distribution(model.decoder, a, model.theta);
        const double pc = std::max(p.probs[x], kLogClamp);
        const double kl = kl_gaussian(cache.mu, cache.logvar);
        item.loss = -std::log(pc) + beta_now * kl;

        // d loss / d theta
        const GradMatrix gt = dist_grad_theta(model.decoder, a, model.theta);
        item.d_theta.resize(model.theta.size());
        for (std::size_t k = 0; k < model.theta.size(); ++k)
            item.d_theta[k] = -gt.at(x, k) / pc;

        // d loss / d feature input
        const GradMatrix gi = dist_grad_input(model.decoder, a, model.theta);
        std::vector<double> da(a.size());
        for (std::size_t j = 0; j < a.size(); ++j)
            da[j] = -gi.at(x, j) / pc;

        item.d_preproc = DenseLayer::zeros(model.preproc->layer.in,
                                           model.preproc->layer.out);
        std::vector<double> dz;
        model.preproc->layer.backward(z, da, item.d_preproc, &dz);

        std::vector<double> dmu_kl, dlv_kl;
        kl_gaussian_grad(cache.mu, cache.logvar, dmu_kl, dlv_kl);
        std::vector<double> dmu(dz.size()), dlv(dz.size());
        for (std::size_t j = 0; j < dz.size(); ++j) {
            dmu[j] = dz[j] + beta_now * dmu_kl[j];
            dlv[j] = dz[j] * 0.5 * std::exp(0.5 * cache.logvar[j]) *
                         eps[i][j] +
                     beta_now * dlv_kl[j];
        }
        item.d_encoder = EncoderNet::zeros_like(*model.encoder);
        model.encoder->backward(cache, dmu, dlv, item.d_encoder);
    }

    // Deterministic fixed-order reduction.
    EncoderNet ge = EncoderNet::zeros_like(*model.encoder);
    DenseLayer gp =
        DenseLayer::zeros(model.preproc->layer.in, model.preproc->layer.out);
    std::vector<double> gtheta(model.theta.size(), 0.0);
    for (const ItemGrads &item : items) {
        res.loss += item.loss * w;
        auto axpy = [&](std::vector<double> &dst,
                        const std::vector<double> &src) {
            for (std::size_t j = 0; j < dst.size(); ++j)
                dst[j] += w * src[j];
        };
        axpy(ge.h1.W, item.d_encoder.h1.W);
        axpy(ge.h1.b, item.d_encoder.h1.b);
        axpy(ge.h2.W, item.d_encoder.h2.W);
        axpy(ge.h2.b, item.d_encoder.h2.b);
        axpy(ge.head_mu.W, item.d_encoder.head_mu.W);
        axpy(ge.head_mu.b, item.d_encoder.head_mu.b);
        axpy(ge.head_logvar.W, item.d_encoder.head_logvar.W);
        axpy(ge.head_logvar.b, item.d_encoder.head_logvar.b);
        axpy(gp.W, item.d_preproc.W);
        axpy(gp.b, item.d_preproc.b);
        axpy(gtheta, item.d_theta);
    }
    ge.pack(res.d_encoder);
    gp.pack(res.d_decoder);
    res.d_decoder.insert(res.d_decoder.end(), gtheta.begin(), gtheta.end());
    return res;
}

double elbo_loss_value(const QevaeModel &model,
                       std::span<const std::string> batch, double beta_now,
                       const std::vector<std::vector<double>> &eps) {
    if (batch.empty())
        throw std::invalid_argument("batch must be nonempty");
    const double w = 1.0 / static_cast<double>(batch.size());
    double loss = 0;

    if (model.latent_dim == 0) {
        const std::vector<double> a = model.feature_input({});
        const Distribution p =
            decoder_distribution(model.decoder, a, model.theta);
        for (const std::string &s : batch)
            loss += -std::log(std::max(p.probs[bitstring_to_index(s)],
                                       kLogClamp)) *
                    w;
        return loss;
    }

    const std::size_t nb = batch.size();
    std::vector<double> losses(nb, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(nb); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const std::string &s = batch[i];
        EncoderNet::Cache cache;
        model.encoder->forward(bits_vector(s), cache);
        const std::vector<double> z =
            reparameterize(cache.mu, cache.logvar, eps[i]);
        const Distribution p = decoder_distribution(
            model.decoder, model.preproc->layer.forward(z), model.theta);
        losses[i] =
            -std::log(std::max(p.probs[bitstring_to_index(s)], kLogClamp)) +
            beta_now * kl_gaussian(cache.mu, cache.logvar);
    }
    for (double l : losses)
        loss += l * w;
    return loss;
}

ElboResult cvae_elbo_loss(const CvaeModel &model,
                          std::span<const std::string> batch, double beta_now,
                          const std::vector<std::vector<double>> &eps) {
    if (batch.empty())
        throw std::invalid_argument("batch must be nonempty");
    const double w = 1.0 / static_cast<double>(batch.size());
    ElboResult res;

    EncoderNet ge = EncoderNet::zeros_like(model.encoder);
    Mlp gd = Mlp::zeros_like(model.decoder);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::string &s = batch[i];
        const std::vector<double> xin = bits_vector(s);

        EncoderNet::Cache cache;
        model.encoder.forward(xin, cache);
        const std::vector<double> z =
            reparameterize(cache.mu, cache.logvar, eps[i]);
        Mlp::Cache dcache;
        const std::vector<double> sig = model.decoder.forward(z, dcache);

        double recon = 0;
        std::vector<double> dlogits(sig.size());
        for (std::size_t q = 0; q < sig.size(); ++q) {
            const double pq = std::min(std::max(sig[q], kLogClamp),
                                       1.0 - kLogClamp);
            recon -= xin[q] * std::log(pq) +
                     (1.0 - xin[q]) * std::log(1.0 - pq);
            dlogits[q] = (sig[q] - xin[q]) * w;
        }
        const double kl = kl_gaussian(cache.mu, cache.logvar);
        res.loss += (recon + beta_now * kl) * w;

        std::vector<double> dz;
        model.decoder.backward_from_logits(dcache, dlogits, gd, &dz);
        // dz already carries the 1/batch weight via dlogits
        std::vector<double> dmu_kl, dlv_kl;
        kl_gaussian_grad(cache.mu, cache.logvar, dmu_kl, dlv_kl);
        std::vector<double> dmu(dz.size()), dlv(dz.size());
        for (std::size_t j = 0; j < dz.size(); ++j) {
            dmu[j] = dz[j] + w * beta_now * dmu_kl[j];
            dlv[j] = dz[j] * 0.5 * std::exp(0.5 * cache.logvar[j]) *
                         eps[i][j] +
                     w * beta_now * dlv_kl[j];
        }
        model.encoder.backward(cache, dmu, dlv, ge);
    }
    ge.pack(res.d_encoder);
    gd.pack(res.d_decoder);
    return res;
}

namespace {

struct TrainHooks {
    std::function<ElboResult(std::span<const std::string>, double,
                             const std::vector<std::vector<double>> &)>
        batch_loss;
    std::function<double(std::span<const std::string>, double,
                         const std::vector<std::vector<double>> &)>
        batch_value;
    std::function<double()> fidelity_now; // NaN when unavailable
    std::function<std::vector<double>()> get_encoder, get_decoder;
    std::function<void(std::span<const double>)> set_encoder, set_decoder;
};

TrainHistory training_loop(const MeasurementDataset &dataset,
                           const TrainConfig &config, int latent_dim,
                           const TrainHooks &hooks) {
    if (dataset.train_idx.empty() || dataset.val_idx.empty())
        throw std::invalid_argument("dataset split missing");

    std::vector<std::string> train_set, val_set;
    for (int i : dataset.train_idx)
        train_set.push_back(dataset.samples[static_cast<std::size_t>(i)]);
    for (int i : dataset.val_idx)
        val_set.push_back(dataset.samples[static_cast<std::size_t>(i)]);

    Rng rng(config.seed);
    // Fixed validation noise keeps the early-stopping signal comparable
    // across epochs.
    Rng val_rng(mix_seed(config.seed, 1));
    std::vector<std::vector<double>> val_eps(val_set.size());
    for (auto &e : val_eps) {
        e.resize(static_cast<std::size_t>(latent_dim));
        for (double &v : e)
            v = val_rng.normal();
    }

    TrainHistory history;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_enc, best_dec;
    int bad_epochs = 0;

    std::vector<AdamState> opt;
    opt.emplace_back(config.lr_encoder);
    opt.emplace_back(config.lr_decoder);

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const double beta_now = beta_at(config.schedule, config.beta, epoch,
                                        config.max_epochs);
        // seeded shuffle
        for (std::size_t i = train_set.size(); i > 1; --i)
            std::swap(train_set[i - 1], train_set[rng.index(i)]);

        double train_loss = 0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < train_set.size();
             start += static_cast<std::size_t>(config.batch)) {
            const std::size_t stop = std::min(
                start + static_cast<std::size_t>(config.batch),
                train_set.size());
            std::span<const std::string> batch(train_set.data() + start,
                                               stop - start);
            std::vector<std::vector<double>> eps(batch.size());
            for (auto &e : eps) {
                e.resize(static_cast<std::size_t>(latent_dim));
                for (double &v : e)
                    v = rng.normal();
            }
            const ElboResult res = hooks.batch_loss(batch, beta_now, eps);
            train_loss += res.loss * static_cast<double>(batch.size());
            seen += batch.size();

            if (!res.d_encoder.empty()) {
                std::vector<double> p = hooks.get_encoder();
                opt[0].step(p, res.d_encoder);
                hooks.set_encoder(p);
            }
            std::vector<double> p = hooks.get_decoder();
            opt[1].step(p, res.d_decoder);
            hooks.set_decoder(p);
        }
        train_loss /= static_cast<double>(seen);

        // Validation always at the target beta.
        const double val_loss =
            hooks.batch_value(val_set, config.beta, val_eps);
        const double fid = hooks.fidelity_now();
        history.epochs.push_back(
            {epoch, train_loss, val_loss, beta_now, fid});
        history.stopped_epoch = epoch;

        if (val_loss < best_val - 1e-12) {
            best_val = val_loss;
            history.best_epoch = epoch;
            best_enc = hooks.get_encoder();
            best_dec = hooks.get_decoder();
            bad_epochs = 0;
        } else {
            ++bad_epochs;
            if (bad_epochs >= config.patience)
                break;
        }
    }

    history.best_val_loss = best_val;
    if (!best_dec.empty() || !best_enc.empty()) {
        hooks.set_encoder(best_enc);
        hooks.set_decoder(best_dec);
    }
    return history;
}

} // namespace

std::pair<QevaeModel, TrainHistory> train(QevaeModel model,
                                          const MeasurementDataset &dataset,
                                          const TrainConfig &config) {
    if (model.n_qubits != dataset.n_qubits)
        throw std::invalid_argument("model/dataset qubit mismatch");

    // Fixed prior samples for the per-epoch fidelity probe.
    std::vector<std::vector<double>> fid_zs;
    if (dataset.exact_dist && model.latent_dim > 0) {
        Rng fz(mix_seed(config.seed, 2));
        fid_zs.resize(static_cast<std::size_t>(config.fidelity_z_samples));
        for (auto &z : fid_zs) {
            z.resize(static_cast<std::size_t>(model.latent_dim));
            for (double &v : z)
                v = fz.normal();
        }
    }

    TrainHooks hooks;
    hooks.batch_loss = [&model](std::span<const std::string> b, double beta,
                                const std::vector<std::vector<double>> &eps) {
        return elbo_loss(model, b, beta, eps);
    };
    hooks.batch_value = [&model](std::span<const std::string> b, double beta,
                                 const std::vector<std::vector<double>> &eps) {
        return elbo_loss_value(model, b, beta, eps);
    };
    hooks.fidelity_now = [&]() {
        if (!dataset.exact_dist)
            return std::numeric_limits<double>::quiet_NaN();
        const Distribution d = average_decoder_distribution(model, fid_zs);
        return fidelity(d, *dataset.exact_dist);
    };
    hooks.get_encoder = [&model]() { return model.encoder_params(); };
    hooks.get_decoder = [&model]() { return model.decoder_params(); };
    hooks.set_encoder = [&model](std::span<const double> p) {
        model.set_encoder_params(p);
    };
    hooks.set_decoder = [&model](std::span<const double> p) {
        model.set_decoder_params(p);
    };

    TrainHistory history =
        training_loop(dataset, config, model.latent_dim, hooks);
    return {std::move(model), std::move(history)};
}

std::pair<QevaeModel, TrainHistory>
train_qcbm(QevaeModel model, const MeasurementDataset &dataset,
           const TrainConfig &config) {
    if (model.latent_dim != 0)
        throw std::invalid_argument("QCBM training requires latent_dim = 0");
    return train(std::move(model), dataset, config);
}

std::pair<CvaeModel, TrainHistory>
train_cvae(CvaeModel model, const MeasurementDataset &dataset,
           const TrainConfig &config) {
    if (model.n_qubits != dataset.n_qubits)
        throw std::invalid_argument("model/dataset qubit mismatch");

    Rng fz_seed(mix_seed(config.seed, 2));
    const std::uint64_t fid_seed = fz_seed.next_u64();

    TrainHooks hooks;
    hooks.batch_loss = [&model](std::span<const std::string> b, double beta,
                                const std::vector<std::vector<double>> &eps) {
        return cvae_elbo_loss(model, b, beta, eps);
    };
    hooks.batch_value = [&model](std::span<const std::string> b, double beta,
                                 const std::vector<std::vector<double>> &eps) {
        return cvae_elbo_loss(model, b, beta, eps).loss;
    };
    hooks.fidelity_now = [&]() {
        if (!dataset.exact_dist)
            return std::numeric_limits<double>::quiet_NaN();
        Rng r(fid_seed);
        return fidelity(cvae_distribution(model, 512, r),
                        *dataset.exact_dist);
    };
    hooks.get_encoder = [&model]() { return model.encoder_params(); };
    hooks.get_decoder = [&model]() { return model.decoder_params(); };
    hooks.set_encoder = [&model](std::span<const double> p) {
        model.set_encoder_params(p);
    };
    hooks.set_decoder = [&model](std::span<const double> p) {
        model.set_decoder_params(p);
    };

    TrainHistory history =
        training_loop(dataset, config, model.latent_dim, hooks);
    return {std::move(model), std::move(history)};
}

} // namespace qevae
