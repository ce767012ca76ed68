// Times the serial and OpenMP gate kernels on identical workloads and checks
// that they produce the same state.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "qevae/pqc.hpp"
#include "qevae/rng.hpp"
#include "qevae/state.hpp"

using namespace qevae;

namespace {

double run_workload(const Circuit &circuit, bool parallel, StateVector &out) {
    StateVector s = StateVector::zero_state(circuit.n_qubits);
    const auto t0 = std::chrono::steady_clock::now();
    for (const GateOp &op : circuit.ops)
        apply_gate_kernel(s, op, parallel);
    const auto t1 = std::chrono::steady_clock::now();
    out = std::move(s);
    return std::chrono::duration<double>(t1 - t0).count();
}

double max_amp_diff(const StateVector &a, const StateVector &b) {
    double mx = 0;
    for (std::size_t i = 0; i < a.amps.size(); ++i)
        mx = std::max(mx, std::abs(a.amps[i] - b.amps[i]));
    return mx;
}

} // namespace

int main(int argc, char **argv) {
    int n = 20;
    int layers = 8;
    int repeats = 3;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        const int v = std::atoi(argv[i + 1]);
        if (flag == "--qubits")
            n = v;
        else if (flag == "--layers")
            layers = v;
        else if (flag == "--repeats")
            repeats = v;
    }

    const Circuit circuit = build_random_layered_circuit(n, layers, 42);
    std::printf("workload: %d qubits, %d layers, %d gates, best of %d\n", n,
                layers, total_gates(circuit), repeats);

    StateVector serial_state, parallel_state;
    double t_serial = 1e300, t_parallel = 1e300;
    for (int r = 0; r < repeats; ++r) {
        t_serial = std::min(t_serial,
                            run_workload(circuit, false, serial_state));
        t_parallel = std::min(t_parallel,
                              run_workload(circuit, true, parallel_state));
    }
    const double diff = max_amp_diff(serial_state, parallel_state);
    std::printf("serial:   %.4f s\n", t_serial);
    std::printf("parallel: %.4f s  (%.2fx speedup)\n", t_parallel,
                t_serial / t_parallel);
    std::printf("max amplitude difference: %.3g\n", diff);
    return diff < 1e-12 ? 0 : 1;
}
