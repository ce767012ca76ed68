#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qevae/datasets.hpp"
#include "qevae/gradients.hpp"
#include "qevae/neural.hpp"

namespace qevae {

/// Hybrid model: classical encoder -> latent Gaussian -> linear preprocessor
/// -> quantum decoder. latent_dim = 0 drops the encoder and preprocessor
/// entirely (the QCBM limit).
struct QevaeModel {
    int n_qubits = 0;
    int latent_dim = 0;
    std::optional<EncoderNet> encoder;
    std::optional<Preprocessor> preproc;
    DecoderSpec decoder;
    std::vector<double> theta;

    static QevaeModel init(const DecoderSpec &decoder, int latent_dim,
                           std::uint64_t seed);

    /// Feature-map input for a latent sample (zeros when latent_dim = 0).
    std::vector<double> feature_input(std::span<const double> z) const;

    std::vector<double> encoder_params() const;
    void set_encoder_params(std::span<const double> p);
    /// Preprocessor weights followed by theta.
    std::vector<double> decoder_params() const;
    void set_decoder_params(std::span<const double> p);
};

struct CvaeModel {
    int n_qubits = 0;
    int latent_dim = 0;
    EncoderNet encoder;
    Mlp decoder; // latent -> hidden -> n sigmoid bit probabilities

    static CvaeModel init(int n_qubits, int latent_dim,
                          const std::vector<int> &hidden_widths,
                          std::uint64_t seed);

    std::vector<double> encoder_params() const;
    void set_encoder_params(std::span<const double> p);
    std::vector<double> decoder_params() const;
    void set_decoder_params(std::span<const double> p);
};

struct TrainConfig {
    double lr_encoder = 0.005;
    double lr_decoder = 0.005;
    int batch = 32;
    double beta = 1.0;
    enum class Schedule { Fixed, Anneal, Step } schedule = Schedule::Fixed;
    int patience = 5;
    int max_epochs = 500;
    std::uint64_t seed = 0;
    int fidelity_z_samples = 512; // per-epoch fidelity tracking
};

std::string schedule_name(TrainConfig::Schedule s);
TrainConfig::Schedule schedule_from_name(const std::string &name);

double beta_at(TrainConfig::Schedule schedule, double beta_target, int epoch,
               int max_epochs);

struct EpochStats {
    int epoch;
    double train_loss, val_loss, beta, fidelity;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int stopped_epoch = -1;
    int best_epoch = -1;
    double best_val_loss = 0;
};

/// CSV with header epoch,train_loss,val_loss,beta,fidelity.
std::string history_csv(const TrainHistory &history);

struct ElboResult {
    double loss = 0;
    std::vector<double> d_encoder; // empty when latent_dim = 0
    std::vector<double> d_decoder; // preprocessor grads then theta grads
};

/// Negative beta-ELBO averaged over the batch, one latent sample per datum
/// (eps[i] supplies datum i's standard-normal draw; unused at latent 0).
ElboResult elbo_loss(const QevaeModel &model,
                     std::span<const std::string> batch, double beta_now,
                     const std::vector<std::vector<double>> &eps);
double elbo_loss_value(const QevaeModel &model,
                       std::span<const std::string> batch, double beta_now,
                       const std::vector<std::vector<double>> &eps);

ElboResult cvae_elbo_loss(const CvaeModel &model,
                          std::span<const std::string> batch, double beta_now,
                          const std::vector<std::vector<double>> &eps);

std::pair<QevaeModel, TrainHistory> train(QevaeModel model,
                                          const MeasurementDataset &dataset,
                                          const TrainConfig &config);

/// QCBM training: requires latent_dim = 0; same code path as train().
std::pair<QevaeModel, TrainHistory>
train_qcbm(QevaeModel model, const MeasurementDataset &dataset,
           const TrainConfig &config);

std::pair<CvaeModel, TrainHistory>
train_cvae(CvaeModel model, const MeasurementDataset &dataset,
           const TrainConfig &config);

struct Checkpoint {
    std::string model_kind; // qevae | qcbm | cvae
    TrainConfig config;
    TrainHistory history;
    std::optional<QevaeModel> qevae;
    std::optional<CvaeModel> cvae;
};

void save_checkpoint(const Checkpoint &ckpt, const std::string &path);
Checkpoint load_checkpoint(const std::string &path);

} // namespace qevae
