#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qevae/io.hpp"
#include "qevae/models.hpp"
#include "qevae/pqc.hpp"

namespace qevae {

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write_file(const std::string &path, const std::string &content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open file for writing: " + tmp);
        out << content;
        if (!out)
            throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
}

namespace {

using nlohmann::json;

json layer_to_json(const DenseLayer &l) {
    return json{{"in", l.in}, {"out", l.out}, {"W", l.W}, {"b", l.b}};
}

DenseLayer layer_from_json(const json &j) {
    DenseLayer l = DenseLayer::zeros(j.at("in").get<int>(),
                                     j.at("out").get<int>());
    l.W = j.at("W").get<std::vector<double>>();
    l.b = j.at("b").get<std::vector<double>>();
    if (l.W.size() != static_cast<std::size_t>(l.in) * l.out ||
        l.b.size() != static_cast<std::size_t>(l.out))
        throw std::runtime_error("dense layer shape mismatch in checkpoint");
    return l;
}

json encoder_to_json(const EncoderNet &net) {
    return json{{"latent_dim", net.latent_dim},
                {"leak", net.leak},
                {"h1", layer_to_json(net.h1)},
                {"h2", layer_to_json(net.h2)},
                {"head_mu", layer_to_json(net.head_mu)},
                {"head_logvar", layer_to_json(net.head_logvar)}};
}

EncoderNet encoder_from_json(const json &j) {
    EncoderNet net;
    net.latent_dim = j.at("latent_dim").get<int>();
    net.leak = j.at("leak").get<double>();
    net.h1 = layer_from_json(j.at("h1"));
    net.h2 = layer_from_json(j.at("h2"));
    net.head_mu = layer_from_json(j.at("head_mu"));
    net.head_logvar = layer_from_json(j.at("head_logvar"));
    return net;
}

json feature_map_to_json(const FeatureMapSpec &spec) {
    return json{{"kind",
                 spec.kind == FeatureMapSpec::Kind::Z ? "z" : "zz"},
                {"n_qubits", spec.n_qubits},
                {"reps", spec.reps},
                {"pairs", spec.entanglement_pairs}};
}

FeatureMapSpec feature_map_from_json(const json &j) {
    FeatureMapSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "z")
        spec.kind = FeatureMapSpec::Kind::Z;
    else if (kind == "zz")
        spec.kind = FeatureMapSpec::Kind::ZZ;
    else
        throw std::runtime_error("unknown feature map kind: " + kind);
    spec.n_qubits = j.at("n_qubits").get<int>();
    spec.reps = j.at("reps").get<int>();
    spec.entanglement_pairs =
        j.at("pairs").get<std::vector<std::pair<int, int>>>();
    return spec;
}

json ansatz_to_json(const AnsatzSpec &spec) {
    std::vector<std::string> rot;
    for (GateKind k : spec.rotation_kinds)
        rot.push_back(gate_name(k));
    return json{{"n_qubits", spec.n_qubits},
                {"reps", spec.reps},
                {"rotations", rot}};
}

AnsatzSpec ansatz_from_json(const json &j) {
    AnsatzSpec spec;
    spec.n_qubits = j.at("n_qubits").get<int>();
    spec.reps = j.at("reps").get<int>();
    spec.rotation_kinds.clear();
    for (const auto &name : j.at("rotations"))
        spec.rotation_kinds.push_back(
            gate_kind_from_name(name.get<std::string>()));
    return spec;
}

json config_to_json(const TrainConfig &c) {
    return json{{"lr_encoder", c.lr_encoder},
                {"lr_decoder", c.lr_decoder},
                {"batch", c.batch},
                {"beta", c.beta},
                {"schedule", schedule_name(c.schedule)},
                {"patience", c.patience},
                {"max_epochs", c.max_epochs},
                {"seed", c.seed},
                {"fidelity_z_samples", c.fidelity_z_samples}};
}

TrainConfig config_from_json(const json &j) {
    TrainConfig c;
    c.lr_encoder = j.at("lr_encoder").get<double>();
    c.lr_decoder = j.at("lr_decoder").get<double>();
    c.batch = j.at("batch").get<int>();
    c.beta = j.at("beta").get<double>();
    c.schedule = schedule_from_name(j.at("schedule").get<std::string>());
    c.patience = j.at("patience").get<int>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.fidelity_z_samples = j.at("fidelity_z_samples").get<int>();
    return c;
}

json history_to_json(const TrainHistory &h) {
    json rows = json::array();
    for (const EpochStats &e : h.epochs)
        rows.push_back(json::array(
            {e.epoch, e.train_loss, e.val_loss, e.beta, e.fidelity}));
    return json{{"epochs", rows},
                {"stopped_epoch", h.stopped_epoch},
                {"best_epoch", h.best_epoch},
                {"best_val_loss", h.best_val_loss}};
}

TrainHistory history_from_json(const json &j) {
    TrainHistory h;
    for (const auto &row : j.at("epochs"))
        h.epochs.push_back({row.at(0).get<int>(), row.at(1).get<double>(),
                            row.at(2).get<double>(), row.at(3).get<double>(),
                            row.at(4).get<double>()});
    h.stopped_epoch = j.at("stopped_epoch").get<int>();
    h.best_epoch = j.at("best_epoch").get<int>();
    h.best_val_loss = j.at("best_val_loss").get<double>();
    return h;
}

} // namespace

void save_checkpoint(const Checkpoint &ckpt, const std::string &path) {
    json j;
    j["schema_version"] = 1;
    j["model_kind"] = ckpt.model_kind;
    j["train_config"] = config_to_json(ckpt.config);
    j["history"] = history_to_json(ckpt.history);
    if (ckpt.qevae) {
        const QevaeModel &m = *ckpt.qevae;
        j["n_qubits"] = m.n_qubits;
        j["latent_dim"] = m.latent_dim;
        j["encoder"] = m.encoder ? encoder_to_json(*m.encoder) : json();
        j["preproc"] =
            m.preproc ? layer_to_json(m.preproc->layer) : json();
        j["feature_map"] = feature_map_to_json(m.decoder.feature_map);
        j["ansatz"] = ansatz_to_json(m.decoder.ansatz);
        j["theta"] = m.theta;
    } else if (ckpt.cvae) {
        const CvaeModel &m = *ckpt.cvae;
        j["n_qubits"] = m.n_qubits;
        j["latent_dim"] = m.latent_dim;
        j["encoder"] = encoder_to_json(m.encoder);
        json layers = json::array();
        for (const DenseLayer &l : m.decoder.layers)
            layers.push_back(layer_to_json(l));
        j["cvae_decoder"] = json{{"leak", m.decoder.leak},
                                 {"layers", layers}};
    } else {
        throw std::invalid_argument("checkpoint holds no model");
    }
    atomic_write_file(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string &path) {
    json j = json::parse(read_file(path));
    if (!j.contains("schema_version") ||
        j.at("schema_version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint schema_version");
    Checkpoint ckpt;
    ckpt.model_kind = j.at("model_kind").get<std::string>();
    ckpt.config = config_from_json(j.at("train_config"));
    ckpt.history = history_from_json(j.at("history"));
    if (ckpt.model_kind == "cvae") {
        CvaeModel m;
        m.n_qubits = j.at("n_qubits").get<int>();
        m.latent_dim = j.at("latent_dim").get<int>();
        m.encoder = encoder_from_json(j.at("encoder"));
        m.decoder.leak = j.at("cvae_decoder").at("leak").get<double>();
        for (const auto &lj : j.at("cvae_decoder").at("layers"))
            m.decoder.layers.push_back(layer_from_json(lj));
        ckpt.cvae = std::move(m);
    } else if (ckpt.model_kind == "qevae" || ckpt.model_kind == "qcbm") {
        QevaeModel m;
        m.n_qubits = j.at("n_qubits").get<int>();
        m.latent_dim = j.at("latent_dim").get<int>();
        if (!j.at("encoder").is_null())
            m.encoder = encoder_from_json(j.at("encoder"));
        if (!j.at("preproc").is_null()) {
            Preprocessor p;
            p.layer = layer_from_json(j.at("preproc"));
            m.preproc = std::move(p);
        }
        m.decoder.feature_map = feature_map_from_json(j.at("feature_map"));
        m.decoder.ansatz = ansatz_from_json(j.at("ansatz"));
        m.theta = j.at("theta").get<std::vector<double>>();
        ckpt.qevae = std::move(m);
    } else {
        throw std::runtime_error("unknown model_kind: " + ckpt.model_kind);
    }
    return ckpt;
}

} // namespace qevae
