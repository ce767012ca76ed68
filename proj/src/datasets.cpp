#include "qevae/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "qevae/io.hpp"
#include "qevae/pqc.hpp"
#include "qevae/rng.hpp"

namespace qevae {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Distribution qkr_run(const QkrConfig &config,
                     std::vector<std::complex<double>> &psi_out) {
    using cd = std::complex<double>;
    const int N = config.grid;
    if (!is_power_of_two(N))
        throw std::invalid_argument("qkr grid must be a power of two");
    if (config.kicks < 0)
        throw std::invalid_argument("kicks must be >= 0");

    // Momentum representation in FFT ordering: index u holds
    // m = u for u < N/2, m = u - N for u >= N/2.
    std::vector<cd> psi(static_cast<std::size_t>(N), cd{0, 0});
    psi[0] = 1.0; // delta at m = 0

    std::vector<double> free_phase(static_cast<std::size_t>(N));
    std::vector<double> kick_phase(static_cast<std::size_t>(N));
    for (int u = 0; u < N; ++u) {
        const double m = (u < N / 2) ? u : u - N;
        free_phase[static_cast<std::size_t>(u)] =
            -0.5 * config.hbar_s * m * m;
        const double x = 2.0 * std::numbers::pi * u / N;
        kick_phase[static_cast<std::size_t>(u)] = -config.kappa * std::cos(x);
    }

    const cd i{0, 1};
    for (int kick = 0; kick < config.kicks; ++kick) {
        for (int u = 0; u < N; ++u)
            psi[static_cast<std::size_t>(u)] *=
                std::exp(i * free_phase[static_cast<std::size_t>(u)]);
        fft_radix2(psi, true); // momentum -> position
        for (int u = 0; u < N; ++u)
            psi[static_cast<std::size_t>(u)] *=
                std::exp(i * kick_phase[static_cast<std::size_t>(u)]);
        fft_radix2(psi, false); // position -> momentum
    }

    psi_out = psi;
    const int n_qubits = static_cast<int>(std::log2(N) + 0.5);
    Distribution d;
    d.n_qubits = n_qubits;
    d.probs.assign(static_cast<std::size_t>(N), 0.0);
    for (int u = 0; u < N; ++u) {
        const int m = (u < N / 2) ? u : u - N;
        d.probs[static_cast<std::size_t>(m + N / 2)] =
            std::norm(psi[static_cast<std::size_t>(u)]);
    }
    return d;
}

} // namespace

bool MeasurementDataset::operator==(const MeasurementDataset &o) const {
    const bool dist_eq =
        exact_dist.has_value() == o.exact_dist.has_value() &&
        (!exact_dist ||
         (exact_dist->n_qubits == o.exact_dist->n_qubits &&
          exact_dist->probs == o.exact_dist->probs));
    return n_qubits == o.n_qubits && samples == o.samples &&
           family == o.family && seed == o.seed && train_idx == o.train_idx &&
           val_idx == o.val_idx && dist_eq;
}

std::pair<StateVector, Distribution> gen_product(int n_qubits,
                                                 std::uint64_t seed) {
    const Circuit c = build_random_product_circuit(n_qubits, seed);
    StateVector psi = run(c);
    return {psi, probabilities(psi)};
}

std::pair<StateVector, Distribution> gen_haar(int n_qubits,
                                              std::uint64_t seed) {
    Rng rng(seed);
    StateVector psi;
    psi.n_qubits = n_qubits;
    psi.amps.resize(std::size_t{1} << n_qubits);
    double norm2 = 0;
    for (cdouble &a : psi.amps) {
        a = cdouble{rng.normal(), rng.normal()};
        norm2 += std::norm(a);
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (cdouble &a : psi.amps)
        a *= scale;
    return {psi, probabilities(psi)};
}

std::pair<StateVector, Distribution>
gen_circuit_state(int n_qubits, int layers, std::uint64_t seed) {
    if (layers == 0) {
        StateVector psi = StateVector::zero_state(n_qubits);
        return {psi, probabilities(psi)};
    }
    const Circuit c = build_random_layered_circuit(n_qubits, layers, seed);
    StateVector psi = run(c);
    return {psi, probabilities(psi)};
}

void fft_radix2(std::vector<std::complex<double>> &a, bool inverse) {
    using cd = std::complex<double>;
    const std::size_t n = a.size();
    if (!is_power_of_two(static_cast<int>(n)))
        throw std::invalid_argument("fft length must be a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang =
            (inverse ? 1.0 : -1.0) * 2.0 * std::numbers::pi / len;
        const cd wl{std::cos(ang), std::sin(ang)};
        for (std::size_t i = 0; i < n; i += len) {
            cd w{1, 0};
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cd u = a[i + k];
                const cd v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (cd &x : a)
        x *= scale;
}

Distribution gen_qkr(const QkrConfig &config) {
    std::vector<std::complex<double>> psi;
    return qkr_run(config, psi);
}

double qkr_second_moment(const QkrConfig &config) {
    const Distribution d = gen_qkr(config);
    const int N = config.grid;
    double acc = 0;
    for (int u = 0; u < N; ++u) {
        const double m = u - N / 2;
        acc += m * m * d.probs[static_cast<std::size_t>(u)];
    }
    return acc;
}

MeasurementDataset make_dataset(const Distribution &dist,
                                const std::string &family, std::uint64_t seed,
                                int shots) {
    MeasurementDataset ds;
    ds.n_qubits = dist.n_qubits;
    ds.family = family;
    ds.seed = seed;
    ds.exact_dist = dist;
    ds.samples = sample(dist, shots, seed);

    // 70/30 split over shuffled indices; 0.7 * shots rounded half-up.
    std::vector<int> idx(static_cast<std::size_t>(shots));
    for (int i = 0; i < shots; ++i)
        idx[static_cast<std::size_t>(i)] = i;
    Rng rng(mix_seed(seed, 0x517u));
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.index(i)]);
    const int n_train = static_cast<int>(std::floor(0.7 * shots + 0.5));
    ds.train_idx.assign(idx.begin(), idx.begin() + n_train);
    ds.val_idx.assign(idx.begin() + n_train, idx.end());
    return ds;
}

Distribution empirical_distribution(const MeasurementDataset &ds,
                                    const std::vector<int> &indices) {
    Distribution d;
    d.n_qubits = ds.n_qubits;
    d.probs.assign(std::size_t{1} << ds.n_qubits, 0.0);
    for (int i : indices)
        d.probs[bitstring_to_index(ds.samples[static_cast<std::size_t>(i)])] +=
            1.0;
    const double scale = 1.0 / static_cast<double>(indices.size());
    for (double &p : d.probs)
        p *= scale;
    return d;
}

void save_dataset(const MeasurementDataset &ds, const std::string &path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n_qubits"] = ds.n_qubits;
    j["family"] = ds.family;
    j["seed"] = ds.seed;
    j["samples"] = ds.samples;
    if (ds.exact_dist)
        j["exact_dist"] = ds.exact_dist->probs;
    else
        j["exact_dist"] = nullptr;
    j["train_idx"] = ds.train_idx;
    j["val_idx"] = ds.val_idx;
    atomic_write_file(path, j.dump(2) + "\n");
}

MeasurementDataset load_dataset(const std::string &path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    for (const char *key : {"schema_version", "n_qubits", "family", "seed",
                            "samples", "exact_dist", "train_idx", "val_idx"})
        if (!j.contains(key))
            throw std::runtime_error(std::string("dataset file missing '") +
                                     key + "'");
    if (j["schema_version"].get<int>() != 1)
        throw std::runtime_error("unsupported dataset schema_version");
    MeasurementDataset ds;
    ds.n_qubits = j["n_qubits"].get<int>();
    ds.family = j["family"].get<std::string>();
    ds.seed = j["seed"].get<std::uint64_t>();
    ds.samples = j["samples"].get<std::vector<std::string>>();
    if (!j["exact_dist"].is_null()) {
        Distribution d;
        d.n_qubits = ds.n_qubits;
        d.probs = j["exact_dist"].get<std::vector<double>>();
        ds.exact_dist = d;
    }
    ds.train_idx = j["train_idx"].get<std::vector<int>>();
    ds.val_idx = j["val_idx"].get<std::vector<int>>();
    for (const std::string &s : ds.samples)
        if (static_cast<int>(s.size()) != ds.n_qubits)
            throw std::runtime_error("dataset sample length mismatch");
    return ds;
}

} // namespace qevae
