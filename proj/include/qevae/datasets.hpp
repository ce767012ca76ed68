#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qevae/state.hpp"

namespace qevae {

struct MeasurementDataset {
    int n_qubits = 0;
    std::vector<std::string> samples;
    std::string family; // product | haar | circuit | qkr
    std::uint64_t seed = 0;
    std::optional<Distribution> exact_dist;
    std::vector<int> train_idx, val_idx;

    bool operator==(const MeasurementDataset &other) const;
};

struct QkrConfig {
    double kappa = 0.5;
    double hbar_s = 1.0;
    int kicks = 1000;
    int grid = 16; // momentum bins, power of two
};

std::pair<StateVector, Distribution> gen_product(int n_qubits,
                                                 std::uint64_t seed);
std::pair<StateVector, Distribution> gen_haar(int n_qubits,
                                              std::uint64_t seed);
std::pair<StateVector, Distribution>
gen_circuit_state(int n_qubits, int layers, std::uint64_t seed);

/// Split-operator quantum kicked rotor on a 2^n momentum grid; returns
/// |psi_p|^2 with momentum m in [-N/2, N/2) mapped to bin m + N/2.
Distribution gen_qkr(const QkrConfig &config);
/// Momentum second moment <m^2> after the evolution (localization probe).
double qkr_second_moment(const QkrConfig &config);

/// Unitary-normalized radix-2 FFT (1/sqrt(N) each direction).
void fft_radix2(std::vector<std::complex<double>> &a, bool inverse);

MeasurementDataset make_dataset(const Distribution &dist,
                                const std::string &family, std::uint64_t seed,
                                int shots = 1024);

void save_dataset(const MeasurementDataset &ds, const std::string &path);
MeasurementDataset load_dataset(const std::string &path);

/// Empirical distribution of a subset of samples (by index).
Distribution empirical_distribution(const MeasurementDataset &ds,
                                    const std::vector<int> &indices);

} // namespace qevae
