// Exercises the command-line binary end to end. The binary path comes from
// the QEVAE_CLI environment variable (set by the build).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qevae/datasets.hpp"
#include "qevae/io.hpp"
#include "qevae/pqc.hpp"

using namespace qevae;
namespace fs = std::filesystem;

namespace {

std::string cli() {
    const char *p = std::getenv("QEVAE_CLI");
    REQUIRE(p != nullptr);
    return p;
}

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "qevae_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cli(const std::string &args) {
    const std::string cmd = cli() + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string p(const std::string &name) {
    return (work_dir() / name).string();
}

} // namespace

TEST_CASE("gen-data writes a valid dataset") {
    const int rc = run_cli("gen-data --family product --qubits 2 --seed 4 "
                           "--out " +
                           p("prod.json"));
    CHECK(rc == 0);
    MeasurementDataset ds = load_dataset(p("prod.json"));
    CHECK(ds.n_qubits == 2);
    CHECK(ds.samples.size() == 1024);
    CHECK(ds.family == "product");
    CHECK(ds.exact_dist.has_value());
}

TEST_CASE("gen-data usage errors exit 2") {
    CHECK(run_cli("gen-data --qubits 2") == 2); // missing --family
    CHECK(run_cli("gen-data --family nope --qubits 2") == 2);
    CHECK(run_cli("bogus-subcommand") == 2);
}

TEST_CASE("train rejects out-of-range hyperparameters") {
    CHECK(run_cli("train --data " + p("prod.json") +
                  " --lr-decoder 0.5 --out " + p("x.json")) == 2);
    CHECK(run_cli("train --data " + p("prod.json") +
                  " --batch 8 --out " + p("x.json")) == 2);
    CHECK(run_cli("train --data " + p("prod.json") +
                  " --model qcbm --latent 3 --out " + p("x.json")) == 2);
}

TEST_CASE("train missing dataset exits 1") {
    CHECK(run_cli("train --data " + p("missing.json") + " --out " +
                  p("x.json")) == 1);
}

TEST_CASE("train produces checkpoint and byte-identical reruns") {
    const std::string args = "train --data " + p("prod.json") +
                             " --model qevae --latent 2 --max-epochs 4 "
                             "--seed 7 --out " +
                             p("ck.json") + " --history " + p("h1.csv");
    CHECK(run_cli(args) == 0);
    const std::string h1 = read_file(p("h1.csv"));
    CHECK(h1.rfind("epoch,train_loss,val_loss,beta,fidelity\n", 0) == 0);

    const std::string args2 = "train --data " + p("prod.json") +
                              " --model qevae --latent 2 --max-epochs 4 "
                              "--seed 7 --out " +
                              p("ck2.json") + " --history " + p("h2.csv");
    CHECK(run_cli(args2) == 0);
    CHECK(read_file(p("h2.csv")) == h1);
    CHECK(read_file(p("ck2.json")) == read_file(p("ck.json")));
}

TEST_CASE("eval writes a schema-conforming report") {
    CHECK(run_cli("eval --checkpoint " + p("ck.json") + " --data " +
                  p("prod.json") + " --z-samples 64 --out " +
                  p("report.json")) == 0);
    nlohmann::json j =
        nlohmann::json::parse(read_file(p("report.json")));
    CHECK(j.at("schema_version").get<int>() == 1);
    const double f = j.at("fidelities").at("model").get<double>();
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK(j.at("fidelities").contains("uniform"));
    CHECK(j.contains("seeds"));

    // byte-identical rerun
    CHECK(run_cli("eval --checkpoint " + p("ck.json") + " --data " +
                  p("prod.json") + " --z-samples 64 --out " +
                  p("report2.json")) == 0);
    CHECK(read_file(p("report2.json")) == read_file(p("report.json")));

    // --z-samples 0 with a latent > 0 model is a usage error
    CHECK(run_cli("eval --checkpoint " + p("ck.json") + " --data " +
                  p("prod.json") + " --z-samples 0 --out " +
                  p("r0.json")) == 2);
}

TEST_CASE("export-qasm emits parseable OpenQASM") {
    CHECK(run_cli("export-qasm --checkpoint " + p("ck.json") + " --out " +
                  p("dec.qasm")) == 0);
    const std::string text = read_file(p("dec.qasm"));
    CHECK(text.find("OPENQASM 2.0;") != std::string::npos);
    Circuit c = parse_qasm(text);
    CHECK(c.n_qubits == 2);
    CHECK(!c.ops.empty());
}

TEST_CASE("sweep covers the grid and reports the best cell") {
    CHECK(run_cli("sweep --data " + p("prod.json") +
                  " --latents 0,2 --feature-maps zz --betas 1 "
                  "--max-epochs 3 --z-samples 32 --seed 5 --out " +
                  p("sweep.json") + " --best-out " + p("best.json")) == 0);
    nlohmann::json j = nlohmann::json::parse(read_file(p("sweep.json")));
    CHECK(j.at("cells").size() == 2);
    const double best = j.at("best").at("fidelity").get<double>();
    for (const auto &cell : j.at("cells"))
        CHECK(best >= cell.at("fidelity").get<double>());
    CHECK(fs::exists(p("best.json")));
}
