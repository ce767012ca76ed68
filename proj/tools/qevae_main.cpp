#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "qevae/datasets.hpp"
#include "qevae/eval.hpp"
#include "qevae/io.hpp"
#include "qevae/models.hpp"
#include "qevae/pqc.hpp"
#include "qevae/rng.hpp"

namespace {

using namespace qevae;
using nlohmann::json;

double entropy_bits(const Distribution &d) {
    double h = 0;
    for (double p : d.probs)
        if (p > 0)
            h -= p * std::log2(p);
    return h;
}

std::vector<double> parse_list_d(const std::string &s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            out.push_back(std::stod(tok));
    return out;
}

std::vector<int> parse_list_i(const std::string &s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            out.push_back(std::stoi(tok));
    return out;
}

std::vector<std::string> parse_list_s(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            out.push_back(tok);
    return out;
}

struct TrainFlags {
    std::string model_kind = "qevae";
    int latent = -1; // default: n_qubits (qevae/cvae), 0 (qcbm)
    std::string feature_map = "zz";
    int fmap_reps = 1;
    int ansatz_reps = 2;
    std::string cvae_hidden = "8";
    TrainConfig config;
};

void add_train_options(CLI::App *cmd, TrainFlags &f) {
    cmd->add_option("--model", f.model_kind, "qevae | qcbm | cvae")
        ->check(CLI::IsMember({"qevae", "qcbm", "cvae"}));
    cmd->add_option("--latent", f.latent, "latent dimension");
    cmd->add_option("--feature-map", f.feature_map, "z | zz")
        ->check(CLI::IsMember({"z", "zz"}));
    cmd->add_option("--feature-map-reps", f.fmap_reps)
        ->check(CLI::PositiveNumber);
    cmd->add_option("--ansatz-reps", f.ansatz_reps)
        ->check(CLI::PositiveNumber);
    cmd->add_option("--cvae-hidden", f.cvae_hidden,
                    "comma list of CVAE decoder hidden widths");
    cmd->add_option("--lr-encoder", f.config.lr_encoder)
        ->check(CLI::Range(0.001, 0.01));
    cmd->add_option("--lr-decoder", f.config.lr_decoder)
        ->check(CLI::Range(0.001, 0.009));
    cmd->add_option("--batch", f.config.batch)->check(CLI::Range(16, 64));
    cmd->add_option("--beta", f.config.beta)->check(CLI::Range(0.5, 2.0));
    cmd->add_option("--schedule", f.config.schedule,
                    "fixed | anneal | step")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, TrainConfig::Schedule>{
                {"fixed", TrainConfig::Schedule::Fixed},
                {"anneal", TrainConfig::Schedule::Anneal},
                {"step", TrainConfig::Schedule::Step}}));
    cmd->add_option("--patience", f.config.patience)
        ->check(CLI::Range(5, 7));
    cmd->add_option("--max-epochs", f.config.max_epochs)
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.config.seed);
}

Checkpoint train_one(const TrainFlags &flags,
                     const MeasurementDataset &ds) {
    TrainFlags f = flags;
    const int n = ds.n_qubits;
    if (f.model_kind == "qcbm") {
        if (f.latent > 0)
            throw CLI::ValidationError("--latent",
                                       "qcbm forces latent size 0");
        f.latent = 0;
    }
    if (f.latent < 0)
        f.latent = n;
    if (f.latent > n)
        throw CLI::ValidationError("--latent", "latent must be <= qubits");

    Checkpoint ckpt;
    ckpt.model_kind = f.model_kind;
    ckpt.config = f.config;
    if (f.model_kind == "cvae") {
        if (f.latent < 1)
            throw CLI::ValidationError("--latent",
                                       "cvae needs latent >= 1");
        CvaeModel model =
            CvaeModel::init(n, f.latent, parse_list_i(f.cvae_hidden),
                            mix_seed(f.config.seed, 3));
        auto [trained, history] = train_cvae(model, ds, f.config);
        ckpt.cvae = std::move(trained);
        ckpt.history = std::move(history);
    } else {
        DecoderSpec spec;
        spec.feature_map = f.feature_map == "z"
                               ? FeatureMapSpec::z_map(n, f.fmap_reps)
                               : FeatureMapSpec::zz_map(n, f.fmap_reps);
        spec.ansatz.n_qubits = n;
        spec.ansatz.reps = f.ansatz_reps;
        QevaeModel model =
            QevaeModel::init(spec, f.latent, mix_seed(f.config.seed, 3));
        auto [trained, history] = train(model, ds, f.config);
        ckpt.qevae = std::move(trained);
        ckpt.history = std::move(history);
    }
    return ckpt;
}

double eval_fidelity(const Checkpoint &ckpt, const Distribution &target,
                     int z_samples, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 7));
    if (ckpt.cvae)
        return fidelity(cvae_distribution(*ckpt.cvae, z_samples, rng),
                        target);
    return fidelity(model_distribution(*ckpt.qevae, z_samples, rng), target);
}

json counts_json(const std::map<GateKind, int> &counts) {
    json j = json::object();
    for (auto [kind, cnt] : counts)
        j[gate_name(kind)] = cnt;
    return j;
}

int cmd_gen_data(const std::string &family, int qubits, std::uint64_t seed,
                 int shots, int layers, double kappa, double hbars,
                 int kicks, const std::string &out) {
    Distribution dist;
    if (family == "product")
        dist = gen_product(qubits, seed).second;
    else if (family == "haar")
        dist = gen_haar(qubits, seed).second;
    else if (family == "circuit")
        dist = gen_circuit_state(qubits, layers, seed).second;
    else {
        QkrConfig cfg;
        cfg.kappa = kappa;
        cfg.hbar_s = hbars;
        cfg.kicks = kicks;
        cfg.grid = 1 << qubits;
        dist = gen_qkr(cfg);
    }
    MeasurementDataset ds = make_dataset(dist, family, seed, shots);
    save_dataset(ds, out);
    std::printf("wrote %s: %d qubits, %zu samples (train %zu / val %zu)\n",
                out.c_str(), ds.n_qubits, ds.samples.size(),
                ds.train_idx.size(), ds.val_idx.size());
    std::printf("exact-dist entropy: %.6f bits\n", entropy_bits(dist));
    std::printf("uniform-baseline fidelity: %.6f\n", uniform_baseline(dist));
    return 0;
}

int cmd_train(const TrainFlags &flags, const std::string &data,
              const std::string &out, const std::string &history_path) {
    const MeasurementDataset ds = load_dataset(data);
    Checkpoint ckpt = train_one(flags, ds);
    save_checkpoint(ckpt, out);
    if (!history_path.empty())
        atomic_write_file(history_path, history_csv(ckpt.history));
    const auto &h = ckpt.history;
    std::printf("trained %s: stopped at epoch %d, best val loss %.6f "
                "(epoch %d)\n",
                ckpt.model_kind.c_str(), h.stopped_epoch, h.best_val_loss,
                h.best_epoch);
    if (!h.epochs.empty())
        std::printf("final tracked fidelity: %.6f\n",
                    h.epochs.back().fidelity);
    return 0;
}

int cmd_eval(const std::string &ckpt_path, const std::string &data,
             const std::string &out, int z_samples, std::uint64_t seed) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const MeasurementDataset ds = load_dataset(data);
    if (!ds.exact_dist)
        throw std::runtime_error(
            "dataset has no exact distribution; cannot evaluate fidelity");
    const bool latent0 = ckpt.qevae && ckpt.qevae->latent_dim == 0;
    if (z_samples < 1 && !latent0)
        throw CLI::ValidationError("--z-samples",
                                   "must be >= 1 for latent > 0 models");
    const double f =
        eval_fidelity(ckpt, *ds.exact_dist, latent0 ? 1 : z_samples, seed);
    json report;
    report["schema_version"] = 1;
    report["fidelities"] = {{"model", f},
                            {"uniform", uniform_baseline(*ds.exact_dist)}};
    report["model_kind"] = ckpt.model_kind;
    report["n_z_samples"] = latent0 ? 0 : z_samples;
    report["seeds"] = {{"eval", seed}, {"dataset", ds.seed},
                       {"train", ckpt.config.seed}};
    atomic_write_file(out, report.dump(2) + "\n");
    std::printf("model fidelity: %.6f (uniform baseline %.6f)\n", f,
                report["fidelities"]["uniform"].get<double>());
    return 0;
}

int cmd_sweep(const TrainFlags &base, const std::string &data,
              const std::string &out, const std::string &best_ckpt_out,
              const std::string &latents, const std::string &fmaps,
              const std::string &betas, int z_samples, int jobs) {
    const MeasurementDataset ds = load_dataset(data);
    if (!ds.exact_dist)
        throw std::runtime_error("sweep needs a dataset with exact_dist");

    struct Cell {
        TrainFlags flags;
        double fid = 0;
    };
    std::vector<Cell> cells;
    for (int latent : parse_list_i(latents))
        for (const std::string &fm : parse_list_s(fmaps))
            for (double beta : parse_list_d(betas)) {
                Cell c;
                c.flags = base;
                c.flags.model_kind = "qevae";
                c.flags.latent = latent;
                c.flags.feature_map = fm;
                c.flags.config.beta = beta;
                c.flags.config.seed =
                    mix_seed(base.config.seed, cells.size());
                cells.push_back(std::move(c));
            }
    if (cells.empty())
        throw CLI::ValidationError("--latents", "empty sweep grid");

    std::vector<Checkpoint> ckpts(cells.size());
    if (jobs > 0)
        omp_set_num_threads(jobs);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(cells.size());
         ++i) {
        Cell &c = cells[static_cast<std::size_t>(i)];
        Checkpoint ckpt = train_one(c.flags, ds);
        c.fid = eval_fidelity(ckpt, *ds.exact_dist, z_samples,
                              c.flags.config.seed);
        ckpts[static_cast<std::size_t>(i)] = std::move(ckpt);
    }

    std::size_t best = 0;
    json rows = json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell &c = cells[i];
        rows.push_back({{"latent", c.flags.latent},
                        {"feature_map", c.flags.feature_map},
                        {"beta", c.flags.config.beta},
                        {"seed", c.flags.config.seed},
                        {"fidelity", c.fid}});
        if (c.fid > cells[best].fid)
            best = i;
    }
    json summary;
    summary["schema_version"] = 1;
    summary["cells"] = rows;
    summary["best"] = rows[best];
    summary["uniform"] = uniform_baseline(*ds.exact_dist);
    atomic_write_file(out, summary.dump(2) + "\n");
    if (!best_ckpt_out.empty())
        save_checkpoint(ckpts[best], best_ckpt_out);
    std::printf("sweep: %zu cells, best fidelity %.6f (latent %d, %s, "
                "beta %.3f)\n",
                cells.size(), cells[best].fid, cells[best].flags.latent,
                cells[best].flags.feature_map.c_str(),
                cells[best].flags.config.beta);
    return 0;
}

int cmd_compile_report(const std::string &ckpt_path, const std::string &data,
                       const std::string &out, int layers, int z_samples,
                       std::uint64_t seed) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    if (!ckpt.qevae)
        throw std::runtime_error("compile-report needs a quantum decoder");
    const MeasurementDataset ds = load_dataset(data);
    if (!ds.exact_dist)
        throw std::runtime_error("dataset has no exact distribution");
    if (ds.family != "circuit")
        throw std::runtime_error(
            "compile-report expects a circuit-family dataset");
    const Circuit original =
        build_random_layered_circuit(ds.n_qubits, layers, ds.seed);

    Rng rng(mix_seed(seed, 7));
    const CompileReport rep = compile_report(original, *ds.exact_dist,
                                             *ckpt.qevae, z_samples, rng);
    json j;
    j["schema_version"] = 1;
    j["gate_counts_before"] = counts_json(rep.counts_original);
    j["gate_counts_after"] = counts_json(rep.counts_decoder);
    j["gate_counts_after_ansatz_only"] = counts_json(rep.counts_ansatz_only);
    j["fidelities"] = {{"model", rep.fidelity_avg},
                       {"model_z0", rep.fidelity_z0},
                       {"uniform", uniform_baseline(*ds.exact_dist)}};
    j["total_gate_reduction"] = rep.total_gate_reduction;
    j["cx_reduction"] = rep.cx_reduction;
    j["n_z_samples"] = rep.n_z_samples;
    j["seeds"] = {{"eval", seed}, {"dataset", ds.seed}};
    atomic_write_file(out, j.dump(2) + "\n");
    std::printf("compile report: fidelity %.6f, total gates %.2fx fewer, "
                "CX %.2fx fewer\n",
                rep.fidelity_avg, rep.total_gate_reduction,
                rep.cx_reduction);
    return 0;
}

int cmd_export_qasm(const std::string &ckpt_path, const std::string &out) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    if (!ckpt.qevae)
        throw std::runtime_error("export-qasm needs a quantum decoder");
    const QevaeModel &m = *ckpt.qevae;
    const std::vector<double> z0(static_cast<std::size_t>(m.latent_dim),
                                 0.0);
    const Circuit c = build_decoder_circuit(m.decoder, m.feature_input(z0),
                                            m.theta);
    atomic_write_file(out, to_qasm(c));
    std::printf("wrote %s (%d gates on %d qubits)\n", out.c_str(),
                total_gates(c), c.n_qubits);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"QeVAE: quantum-enhanced variational autoencoder toolkit"};
    app.require_subcommand(1);
    app.set_config("--config");
    app.allow_config_extras(false);

    // gen-data
    auto *gen = app.add_subcommand("gen-data",
                                   "generate a measurement dataset");
    std::string family, out_path = "dataset.json";
    int qubits = 4, shots = 1024, layers = 2, kicks = 1000;
    double kappa = 0.5, hbars = 1.0;
    std::uint64_t seed = 0;
    gen->add_option("--family", family, "product | haar | circuit | qkr")
        ->required()
        ->check(CLI::IsMember({"product", "haar", "circuit", "qkr"}));
    gen->add_option("--qubits", qubits)->check(CLI::Range(1, 16));
    gen->add_option("--seed", seed);
    gen->add_option("--shots", shots)->check(CLI::PositiveNumber);
    gen->add_option("--layers", layers, "circuit family depth")
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--kappa", kappa, "QKR kick strength");
    gen->add_option("--hbars", hbars, "QKR effective Planck constant");
    gen->add_option("--kicks", kicks)->check(CLI::NonNegativeNumber);
    gen->add_option("--out", out_path);

    // train
    auto *tr = app.add_subcommand("train", "train a model on a dataset");
    TrainFlags tflags;
    std::string tr_data, tr_out = "checkpoint.json", tr_hist;
    tr->add_option("--data", tr_data)->required();
    tr->add_option("--out", tr_out);
    tr->add_option("--history", tr_hist, "per-epoch CSV path");
    add_train_options(tr, tflags);

    // eval
    auto *ev = app.add_subcommand("eval", "fidelity report for a checkpoint");
    std::string ev_ckpt, ev_data, ev_out = "report.json";
    int ev_zsamples = 5000;
    std::uint64_t ev_seed = 0;
    ev->add_option("--checkpoint", ev_ckpt)->required();
    ev->add_option("--data", ev_data)->required();
    ev->add_option("--out", ev_out);
    ev->add_option("--z-samples", ev_zsamples);
    ev->add_option("--seed", ev_seed);

    // sweep
    auto *sw = app.add_subcommand("sweep", "hyperparameter grid sweep");
    TrainFlags sflags;
    std::string sw_data, sw_out = "sweep.json", sw_best;
    std::string sw_latents = "0,4", sw_fmaps = "z,zz", sw_betas = "1";
    int sw_zsamples = 5000, sw_jobs = 0;
    sw->add_option("--data", sw_data)->required();
    sw->add_option("--out", sw_out);
    sw->add_option("--best-out", sw_best, "checkpoint of the best cell");
    sw->add_option("--latents", sw_latents, "comma list");
    sw->add_option("--feature-maps", sw_fmaps, "comma list of z|zz");
    sw->add_option("--betas", sw_betas, "comma list");
    sw->add_option("--z-samples", sw_zsamples);
    sw->add_option("--jobs", sw_jobs, "parallel cells (0 = default)");
    add_train_options(sw, sflags);

    // compile-report
    auto *cr = app.add_subcommand("compile-report",
                                  "gate-count and fidelity report");
    std::string cr_ckpt, cr_data, cr_out = "compile_report.json";
    int cr_layers = 20, cr_zsamples = 5000;
    std::uint64_t cr_seed = 0;
    cr->add_option("--checkpoint", cr_ckpt)->required();
    cr->add_option("--data", cr_data)->required();
    cr->add_option("--out", cr_out);
    cr->add_option("--layers", cr_layers, "original circuit depth");
    cr->add_option("--z-samples", cr_zsamples);
    cr->add_option("--seed", cr_seed);

    // export-qasm
    auto *ex = app.add_subcommand("export-qasm",
                                  "export the decoder as OpenQASM 2.0");
    std::string ex_ckpt, ex_out = "decoder.qasm";
    ex->add_option("--checkpoint", ex_ckpt)->required();
    ex->add_option("--out", ex_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(family, qubits, seed, shots, layers, kappa,
                                hbars, kicks, out_path);
        if (tr->parsed())
            return cmd_train(tflags, tr_data, tr_out, tr_hist);
        if (ev->parsed())
            return cmd_eval(ev_ckpt, ev_data, ev_out, ev_zsamples, ev_seed);
        if (sw->parsed())
            return cmd_sweep(sflags, sw_data, sw_out, sw_best, sw_latents,
                             sw_fmaps, sw_betas, sw_zsamples, sw_jobs);
        if (cr->parsed())
            return cmd_compile_report(cr_ckpt, cr_data, cr_out, cr_layers,
                                      cr_zsamples, cr_seed);
        if (ex->parsed())
            return cmd_export_qasm(ex_ckpt, ex_out);
    } catch (const CLI::ValidationError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
