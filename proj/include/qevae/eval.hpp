#pragma once

#include <map>
#include <string>
#include <vector>

#include "qevae/models.hpp"
#include "qevae/rng.hpp"
#include "qevae/state.hpp"

namespace qevae {

/// Classical fidelity (squared Bhattacharyya coefficient).
double fidelity(const Distribution &p, const Distribution &q);

/// Fidelity of `target` against the uniform distribution.
double uniform_baseline(const Distribution &target);

struct DensityMatrix {
    int n_qubits = 0;
    std::vector<cdouble> rho; // dim x dim, row-major

    std::size_t dim() const { return std::size_t{1} << n_qubits; }
    double hermiticity_error() const;
    double trace_real() const;
    double purity() const;
    /// Smallest eigenvalue, via Jacobi on the real symmetric embedding.
    double min_eigenvalue() const;
    std::vector<double> diagonal_real() const;
};

DensityMatrix evolve(const DensityMatrix &rho, const Circuit &circuit);

/// rho_hat = (1/M) sum_m U_phi(z_m)|0><0|U_phi(z_m)^dag, the mixed state the
/// latent prior induces before the ansatz.
DensityMatrix feature_map_mixture(const QevaeModel &model,
                                  const std::vector<std::vector<double>> &zs);

/// diag(V rho_hat V^dag) for an explicit latent sample list.
Distribution
mixture_distribution(const QevaeModel &model,
                      const std::vector<std::vector<double>> &zs);

/// Mean decoder distribution over an explicit latent sample list.
Distribution
average_decoder_distribution(const QevaeModel &model,
                             const std::vector<std::vector<double>> &zs);

/// Model output distribution: mean over z ~ N(0, I) of the exact decoder
/// distribution; latent 0 returns the single decoder distribution.
Distribution model_distribution(const QevaeModel &model, int n_z_samples,
                                Rng &rng);

Distribution cvae_distribution(const CvaeModel &model, int n_z_samples,
                               Rng &rng);

struct CompileReport {
    std::map<GateKind, int> counts_original;
    std::map<GateKind, int> counts_decoder; // feature map + ansatz at z = 0
    std::map<GateKind, int> counts_ansatz_only;
    double fidelity_avg = 0; // model_distribution vs target
    double fidelity_z0 = 0;  // single decoder distribution at z = 0
    int n_z_samples = 0;
    double total_gate_reduction = 0;
    double cx_reduction = 0;
};

CompileReport compile_report(const Circuit &original,
                             const Distribution &target,
                             const QevaeModel &model, int n_z_samples,
                             Rng &rng);

} // namespace qevae
