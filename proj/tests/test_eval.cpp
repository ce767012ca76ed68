#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qevae/datasets.hpp"
#include "qevae/eval.hpp"
#include "qevae/models.hpp"
#include "qevae/pqc.hpp"
#include "qevae/rng.hpp"

using namespace qevae;

namespace {

QevaeModel random_model(int n, int latent, std::uint64_t seed) {
    DecoderSpec spec;
    spec.feature_map = FeatureMapSpec::zz_map(n);
    spec.ansatz.n_qubits = n;
    QevaeModel m = QevaeModel::init(spec, latent, seed);
    Rng rng(mix_seed(seed, 100));
    for (double &t : m.theta)
        t = rng.uniform(0, 2 * 3.14159265358979323846);
    return m;
}

std::vector<std::vector<double>> normal_zs(std::size_t m, int latent,
                                           std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> zs(m);
    for (auto &z : zs) {
        z.resize(static_cast<std::size_t>(latent));
        for (double &v : z)
            v = rng.normal();
    }
    return zs;
}

} // namespace

TEST_CASE("fidelity basic values") {
    Distribution p, q;
    p.n_qubits = q.n_qubits = 1;
    p.probs = {1.0, 0.0};
    q.probs = {0.5, 0.5};
    CHECK(fidelity(p, p) == doctest::Approx(1.0));
    CHECK(fidelity(p, q) == doctest::Approx(0.5));
    Distribution r;
    r.n_qubits = 1;
    r.probs = {0.0, 1.0};
    CHECK(fidelity(p, r) == doctest::Approx(0.0));

    Distribution bad;
    bad.n_qubits = 2;
    bad.probs = {0.25, 0.25, 0.25, 0.25};
    CHECK_THROWS_AS((void)fidelity(p, bad), std::invalid_argument);
}

TEST_CASE("fidelity symmetry and bounds on random distributions") {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        Distribution p, q;
        p.n_qubits = q.n_qubits = 3;
        p.probs.resize(8);
        q.probs.resize(8);
        double sp = 0, sq = 0;
        for (int i = 0; i < 8; ++i) {
            p.probs[static_cast<std::size_t>(i)] = rng.uniform();
            q.probs[static_cast<std::size_t>(i)] = rng.uniform();
            sp += p.probs[static_cast<std::size_t>(i)];
            sq += q.probs[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < 8; ++i) {
            p.probs[static_cast<std::size_t>(i)] /= sp;
            q.probs[static_cast<std::size_t>(i)] /= sq;
        }
        const double f = fidelity(p, q);
        CHECK(f == doctest::Approx(fidelity(q, p)));
        CHECK(f >= 0.0);
        CHECK(f <= 1.0 + 1e-12);
        CHECK(fidelity(p, p) == doctest::Approx(1.0));
    }
}

TEST_CASE("uniform baseline values") {
    Distribution u = Distribution::uniform(3);
    CHECK(uniform_baseline(u) == doctest::Approx(1.0));
    Distribution d;
    d.n_qubits = 3;
    d.probs.assign(8, 0.0);
    d.probs[5] = 1.0;
    CHECK(uniform_baseline(d) == doctest::Approx(1.0 / 8));
}

TEST_CASE("feature map mixture is a valid density matrix") {
    QevaeModel m = random_model(2, 2, 3);
    auto zs = normal_zs(10, 2, 4);
    DensityMatrix rho = feature_map_mixture(m, zs);
    CHECK(rho.hermiticity_error() < 1e-10);
    CHECK(std::abs(rho.trace_real() - 1.0) < 1e-10);
    CHECK(rho.min_eigenvalue() > -1e-10);
    CHECK(rho.purity() <= 1.0 + 1e-10);

    // single z: rank-1 projector
    DensityMatrix pure = feature_map_mixture(
        m, std::vector<std::vector<double>>{zs[0]});
    CHECK(pure.purity() == doctest::Approx(1.0));
}

TEST_CASE("density-matrix mixture matches the per-sample average") {
    for (int n = 2; n <= 4; ++n) {
        for (std::size_t M : {std::size_t{1}, std::size_t{10},
                              std::size_t{100}}) {
            QevaeModel m = random_model(n, n, 10 * n + M);
            auto zs = normal_zs(M, n, 1000 + M);
            const Distribution lhs = mixture_distribution(m, zs);
            const Distribution rhs = average_decoder_distribution(m, zs);
            REQUIRE(lhs.dim() == rhs.dim());
            for (std::size_t x = 0; x < lhs.dim(); ++x)
                CHECK(std::abs(lhs.probs[x] - rhs.probs[x]) <= 1e-12);
        }
    }
}

TEST_CASE("mixture converse: spectral ensemble reproduces diag(V rho V+)") {
    // Build a 2-qubit mixed state from an explicit orthonormal ensemble, so
    // its spectral decomposition is known by construction.
    Rng rng(42);
    const std::size_t d = 4;
    std::vector<std::vector<cdouble>> basis;
    for (std::size_t k = 0; k < d; ++k) {
        std::vector<cdouble> v(d);
        for (auto &a : v)
            a = cdouble{rng.normal(), rng.normal()};
        for (const auto &u : basis) {
            cdouble ip{0, 0};
            for (std::size_t i = 0; i < d; ++i)
                ip += std::conj(u[i]) * v[i];
            for (std::size_t i = 0; i < d; ++i)
                v[i] -= ip * u[i];
        }
        double nrm = 0;
        for (const auto &a : v)
            nrm += std::norm(a);
        nrm = std::sqrt(nrm);
        for (auto &a : v)
            a /= nrm;
        basis.push_back(std::move(v));
    }
    std::vector<double> lambda(d);
    double ls = 0;
    for (auto &l : lambda) {
        l = rng.uniform() + 0.05;
        ls += l;
    }
    for (auto &l : lambda)
        l /= ls;

    DensityMatrix rho;
    rho.n_qubits = 2;
    rho.rho.assign(d * d, cdouble{0, 0});
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c)
                rho.rho[r * d + c] +=
                    lambda[k] * basis[k][r] * std::conj(basis[k][c]);
    CHECK(rho.hermiticity_error() < 1e-10);
    CHECK(std::abs(rho.trace_real() - 1.0) < 1e-10);

    AnsatzSpec aspec;
    aspec.n_qubits = 2;
    std::vector<double> theta(static_cast<std::size_t>(aspec.n_params()));
    for (double &t : theta)
        t = rng.uniform(0, 2 * 3.14159265358979323846);
    const Circuit v = build_two_local(aspec, theta);

    const std::vector<double> exact = evolve(rho, v).diagonal_real();

    // per-eigenstate conditionals p_k(x) = |<x|V psi_k>|^2
    std::vector<std::vector<double>> cond(d);
    for (std::size_t k = 0; k < d; ++k) {
        StateVector s;
        s.n_qubits = 2;
        s.amps = basis[k];
        cond[k] = probabilities(run(v, std::move(s))).probs;
    }

    // Monte Carlo over z ~ lambda
    const int M = 100000;
    std::vector<double> mc(d, 0.0), mc2(d, 0.0);
    for (int i = 0; i < M; ++i) {
        const double u = rng.uniform();
        std::size_t k = 0;
        double acc = lambda[0];
        while (k + 1 < d && u > acc)
            acc += lambda[++k];
        for (std::size_t x = 0; x < d; ++x) {
            mc[x] += cond[k][x];
            mc2[x] += cond[k][x] * cond[k][x];
        }
    }
    for (std::size_t x = 0; x < d; ++x) {
        const double mean = mc[x] / M;
        const double var =
            std::max(mc2[x] / M - mean * mean, 0.0) / M;
        const double tol = 3 * std::sqrt(var) + 1e-9;
        CHECK(std::abs(mean - exact[x]) <= tol);
    }
}

TEST_CASE("model_distribution determinism and latent-0 shortcut") {
    QevaeModel m = random_model(3, 2, 5);
    Rng r1(7), r2(7);
    const Distribution a = model_distribution(m, 64, r1);
    const Distribution b = model_distribution(m, 64, r2);
    CHECK(a.probs == b.probs);
    CHECK(std::abs(a.sum() - 1.0) < 1e-9);

    QevaeModel q = random_model(3, 0, 6);
    Rng r3(8), r4(9);
    const Distribution c = model_distribution(q, 10, r3);
    const Distribution e = model_distribution(q, 500, r4);
    CHECK(c.probs == e.probs); // latent 0: independent of n_z_samples
}

TEST_CASE("cvae_distribution is a normalized product-Bernoulli mixture") {
    CvaeModel m = CvaeModel::init(3, 2, {5}, 9);
    Rng rng(10);
    const Distribution d = cvae_distribution(m, 100, rng);
    CHECK(std::abs(d.sum() - 1.0) < 1e-9);
    for (double p : d.probs)
        CHECK(p >= 0.0);
}

TEST_CASE("evolve preserves density-matrix invariants") {
    QevaeModel m = random_model(2, 2, 11);
    DensityMatrix rho = feature_map_mixture(m, normal_zs(5, 2, 12));
    const Circuit v = build_two_local(m.decoder.ansatz, m.theta);
    DensityMatrix out = evolve(rho, v);
    CHECK(out.hermiticity_error() < 1e-10);
    CHECK(std::abs(out.trace_real() - 1.0) < 1e-10);
    CHECK(out.min_eigenvalue() > -1e-10);
    CHECK(out.purity() == doctest::Approx(rho.purity()));
}

TEST_CASE("compile report counts and reductions") {
    const Circuit original = build_random_layered_circuit(4, 20, 13);
    auto [state, target] = gen_circuit_state(4, 20, 13);
    QevaeModel m = random_model(4, 2, 14);
    Rng rng(15);
    CompileReport rep = compile_report(original, target, m, 32, rng);

    CHECK(rep.counts_original.at(GateKind::RX) == 80);
    CHECK(rep.counts_original.at(GateKind::RY) == 80);
    CHECK(rep.counts_original.at(GateKind::CX) == 60);
    CHECK(rep.counts_ansatz_only.at(GateKind::RX) == 8);
    CHECK(rep.counts_ansatz_only.at(GateKind::RY) == 8);
    CHECK(rep.counts_ansatz_only.at(GateKind::CX) == 6);
    // decoder = ZZ feature map (4 H, 7 PHASE, 6 CX) + ansatz (22 gates)
    CHECK(rep.counts_decoder.at(GateKind::H) == 4);
    CHECK(rep.counts_decoder.at(GateKind::Phase) == 7);
    CHECK(rep.counts_decoder.at(GateKind::CX) == 12);
    CHECK(rep.total_gate_reduction == doctest::Approx(220.0 / 39.0));
    CHECK(rep.cx_reduction == doctest::Approx(60.0 / 12.0));
    CHECK(rep.fidelity_avg >= 0.0);
    CHECK(rep.fidelity_avg <= 1.0);
    CHECK(rep.n_z_samples == 32);
}
