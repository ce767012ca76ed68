#include "qevae/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "qevae/pqc.hpp"

namespace qevae {

namespace {

/// Jacobi eigenvalue sweep on a real symmetric matrix (row-major n x n).
/// Returns the smallest eigenvalue.
double jacobi_min_eigenvalue(std::vector<double> a, std::size_t n) {
    auto at = [&](std::size_t r, std::size_t c) -> double & {
        return a[r * n + c];
    };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = r + 1; c < n; ++c)
                off += at(r, c) * at(r, c);
        if (off < 1e-24)
            break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) < 1e-18)
                    continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t =
                    (theta >= 0 ? 1.0 : -1.0) /
                    (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    double mn = at(0, 0);
    for (std::size_t r = 1; r < n; ++r)
        mn = std::min(mn, at(r, r));
    return mn;
}

} // namespace

double fidelity(const Distribution &p, const Distribution &q) {
    if (p.dim() != q.dim())
        throw std::invalid_argument("fidelity: distribution length mismatch");
    double bc = 0;
    for (std::size_t i = 0; i < p.dim(); ++i)
        bc += std::sqrt(p.probs[i] * q.probs[i]);
    return bc * bc;
}

double uniform_baseline(const Distribution &target) {
    return fidelity(target, Distribution::uniform(target.n_qubits));
}

double DensityMatrix::hermiticity_error() const {
    const std::size_t d = dim();
    double err = 0;
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
            err = std::max(err,
                           std::abs(rho[r * d + c] -
                                    std::conj(rho[c * d + r])));
    return err;
}

double DensityMatrix::trace_real() const {
    const std::size_t d = dim();
    double tr = 0;
    for (std::size_t r = 0; r < d; ++r)
        tr += rho[r * d + r].real();
    return tr;
}

double DensityMatrix::purity() const {
    // Tr(rho^2) = sum |rho_rc|^2 for Hermitian rho
    double acc = 0;
    for (const cdouble &v : rho)
        acc += std::norm(v);
    return acc;
}

double DensityMatrix::min_eigenvalue() const {
    // Real symmetric embedding [[Re, -Im], [Im, Re]] shares the spectrum
    // (each eigenvalue doubled).
    const std::size_t d = dim();
    const std::size_t n = 2 * d;
    std::vector<double> a(n * n, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const cdouble v = rho[r * d + c];
            a[r * n + c] = v.real();
            a[r * n + (c + d)] = -v.imag();
            a[(r + d) * n + c] = v.imag();
            a[(r + d) * n + (c + d)] = v.real();
        }
    }
    return jacobi_min_eigenvalue(std::move(a), n);
}

std::vector<double> DensityMatrix::diagonal_real() const {
    const std::size_t d = dim();
    std::vector<double> diag(d);
    for (std::size_t r = 0; r < d; ++r)
        diag[r] = rho[r * d + r].real();
    return diag;
}

DensityMatrix evolve(const DensityMatrix &rho, const Circuit &circuit) {
    const std::size_t d = rho.dim();
    // Columns of rho are states; apply V columnwise to get V rho, then apply
    // V to the columns of (V rho)^dag and conjugate-transpose back.
    auto apply_columns = [&](const std::vector<cdouble> &m) {
        std::vector<cdouble> out(d * d);
        for (std::size_t col = 0; col < d; ++col) {
            StateVector s;
            s.n_qubits = rho.n_qubits;
            s.amps.resize(d);
            for (std::size_t row = 0; row < d; ++row)
                s.amps[row] = m[row * d + col];
            s = run(circuit, std::move(s));
            for (std::size_t row = 0; row < d; ++row)
                out[row * d + col] = s.amps[row];
        }
        return out;
    };
    auto dagger = [&](const std::vector<cdouble> &m) {
        std::vector<cdouble> out(d * d);
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c)
                out[r * d + c] = std::conj(m[c * d + r]);
        return out;
    };
    DensityMatrix out;
    out.n_qubits = rho.n_qubits;
    out.rho = dagger(apply_columns(dagger(apply_columns(rho.rho))));
    return out;
}

DensityMatrix feature_map_mixture(const QevaeModel &model,
                                  const std::vector<std::vector<double>> &zs) {
    if (zs.empty())
        throw std::invalid_argument("need at least one latent sample");
    const std::size_t d = std::size_t{1} << model.n_qubits;
    DensityMatrix rho;
    rho.n_qubits = model.n_qubits;
    rho.rho.assign(d * d, cdouble{0, 0});
    const double w = 1.0 / static_cast<double>(zs.size());
    for (const std::vector<double> &z : zs) {
        const std::vector<double> a = model.feature_input(z);
        const StateVector psi =
            run(build_feature_map(model.decoder.feature_map, a));
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c)
                rho.rho[r * d + c] +=
                    w * psi.amps[r] * std::conj(psi.amps[c]);
    }
    return rho;
}

Distribution
mixture_distribution(const QevaeModel &model,
                      const std::vector<std::vector<double>> &zs) {
    const DensityMatrix rho = feature_map_mixture(model, zs);
    const Circuit v = build_two_local(model.decoder.ansatz, model.theta);
    const DensityMatrix evolved = evolve(rho, v);
    Distribution d;
    d.n_qubits = model.n_qubits;
    d.probs = evolved.diagonal_real();
    return d;
}

Distribution
average_decoder_distribution(const QevaeModel &model,
                             const std::vector<std::vector<double>> &zs) {
    Distribution acc;
    acc.n_qubits = model.n_qubits;
    acc.probs.assign(std::size_t{1} << model.n_qubits, 0.0);
    if (model.latent_dim == 0) {
        return decoder_distribution(model.decoder,
                                    model.feature_input({}), model.theta);
    }
    if (zs.empty())
        throw std::invalid_argument("need at least one latent sample");

    const std::size_t m = zs.size();
    std::vector<Distribution> per(m);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
        const auto &z = zs[static_cast<std::size_t>(i)];
        per[static_cast<std::size_t>(i)] = decoder_distribution(
            model.decoder, model.feature_input(z), model.theta);
    }
    const double w = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t x = 0; x < acc.probs.size(); ++x)
            acc.probs[x] += w * per[i].probs[x];
    return acc;
}

Distribution model_distribution(const QevaeModel &model, int n_z_samples,
                                Rng &rng) {
    if (model.latent_dim == 0)
        return average_decoder_distribution(model, {});
    if (n_z_samples < 1)
        throw std::invalid_argument("n_z_samples must be >= 1 for latent > 0");
    std::vector<std::vector<double>> zs(
        static_cast<std::size_t>(n_z_samples));
    for (auto &z : zs) {
        z.resize(static_cast<std::size_t>(model.latent_dim));
        for (double &v : z)
            v = rng.normal();
    }
    return average_decoder_distribution(model, zs);
}

Distribution cvae_distribution(const CvaeModel &model, int n_z_samples,
                               Rng &rng) {
    if (n_z_samples < 1)
        throw std::invalid_argument("n_z_samples must be >= 1");
    const std::size_t dim = std::size_t{1} << model.n_qubits;
    Distribution acc;
    acc.n_qubits = model.n_qubits;
    acc.probs.assign(dim, 0.0);
    Mlp::Cache cache;
    std::vector<double> z(static_cast<std::size_t>(model.latent_dim));
    const double w = 1.0 / static_cast<double>(n_z_samples);
    for (int s = 0; s < n_z_samples; ++s) {
        for (double &v : z)
            v = rng.normal();
        const std::vector<double> bits = model.decoder.forward(z, cache);
        for (std::size_t x = 0; x < dim; ++x) {
            double p = 1.0;
            for (int q = 0; q < model.n_qubits; ++q) {
                const double pq = bits[static_cast<std::size_t>(q)];
                p *= (x & (std::size_t{1} << q)) ? pq : (1.0 - pq);
            }
            acc.probs[x] += w * p;
        }
    }
    return acc;
}

CompileReport compile_report(const Circuit &original,
                             const Distribution &target,
                             const QevaeModel &model, int n_z_samples,
                             Rng &rng) {
    CompileReport rep;
    rep.n_z_samples = n_z_samples;
    rep.counts_original = gate_counts(original);

    const std::vector<double> z0(
        static_cast<std::size_t>(model.latent_dim), 0.0);
    const std::vector<double> a0 = model.feature_input(z0);
    const Circuit decoder =
        build_decoder_circuit(model.decoder, a0, model.theta);
    rep.counts_decoder = gate_counts(decoder);
    rep.counts_ansatz_only =
        gate_counts(build_two_local(model.decoder.ansatz, model.theta));

    rep.fidelity_avg =
        fidelity(model_distribution(model, n_z_samples, rng), target);
    rep.fidelity_z0 = fidelity(
        decoder_distribution(model.decoder, a0, model.theta), target);

    const int before = total_gates(original);
    const int after = total_gates(decoder);
    rep.total_gate_reduction =
        after > 0 ? static_cast<double>(before) / after : 0.0;
    const auto cx_of = [](const std::map<GateKind, int> &m) {
        auto it = m.find(GateKind::CX);
        return it == m.end() ? 0 : it->second;
    };
    const int cx_before = cx_of(rep.counts_original);
    const int cx_after = cx_of(rep.counts_decoder);
    rep.cx_reduction = cx_after > 0
                           ? static_cast<double>(cx_before) / cx_after
                           : static_cast<double>(cx_before);
    return rep;
}

} // namespace qevae
