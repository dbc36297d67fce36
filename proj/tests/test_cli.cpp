#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    std::string cmd = std::string(SINGTRACE_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::array<char, 4096> buf;
    while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string data(const std::string& rel) { return std::string(SINGTRACE_DATA_DIR) + "/" + rel; }

fs::path scratch() {
    auto d = fs::temp_directory_path() / "singtrace_cli_test";
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("dixmier command") {
    auto r = cli("dixmier --model " + data("models/harmonic.json") + " --tol 5e-3");
    CHECK(r.code == 0);
    CHECK(r.out.find("consensus 1.000") != std::string::npos);
    auto o = cli("dixmier --model " + data("models/oscillatory.json"));
    CHECK(o.code == 3);
    CHECK(o.out.find("band [") != std::string::npos);
    auto csv = scratch() / "dix.csv";
    CHECK(cli("dixmier --model " + data("models/trace_class.json") + " --tol 1e-6 --csv " + csv.string()).code == 0);
    auto text = slurp(csv);
    CHECK(text.rfind("schema_version,seed,anchor,route,converged,value,liminf,limsup,band_width,grid_spec\r\n", 0) == 0);
    CHECK(cli("dixmier --model " + data("models/sqrt_p2.json") + " --p 2 --tol 1e-3").code == 0);
    // p = 1 is outside the ideal for this model: the routes cannot all run
    CHECK(cli("dixmier --model " + data("models/sqrt_p2.json")).code == 1);
}

TEST_CASE("invalid input exits 2") {
    auto bad = scratch() / "corrupt.json";
    std::ofstream(bad) << "{\"schema_version\": 1, \"kind\": \"diagonal_seq";
    CHECK(cli("dixmier --model " + bad.string()).code == 2);
    CHECK(cli("dixmier --model /nonexistent.json").code == 2);
    CHECK(cli("dixmier").code == 2);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("dixmier --model " + data("models/harmonic.json") + " --routes abel").code == 2);
    CHECK(cli("dixmier --model " + data("models/harmonic.json") + " --tol -1").code == 2);
    CHECK(cli("toeplitz --symbol " + data("symbols/exp_1.json") + " --N 100").code == 2);
    CHECK(cli("--help").code == 0);
}

TEST_CASE("spectral flow command") {
    auto r = cli("sf --lattice --n 2 --K 2000 --methods all");
    CHECK(r.code == 0);
    CHECK(r.out.find("crossings: -2") != std::string::npos);
    CHECK(r.out.find("partition: -2") != std::string::npos);
    CHECK(r.out.find("methods agree") != std::string::npos);
    CHECK(cli("sf --scenario " + data("scenarios/lattice_n2.json") + " --methods crossings,zeta").code == 0);
    CHECK(cli("sf --scenario " + data("scenarios/scalar_crossing.json")).code == 0);
    CHECK(cli("sf --scenario " + data("scenarios/degenerate.json") + " --methods crossings").code == 3);
}

TEST_CASE("karamata, matrixlab and toeplitz commands") {
    CHECK(cli("karamata --beta " + data("measures/unit_jumps.json") + " --tol 1e-5").code == 0);
    CHECK(cli("karamata --beta " + data("measures/periodic.json")).code == 0);
    CHECK(cli("matrixlab --trials 50 --seed 3").code == 0);
    CHECK(cli("matrixlab --trials 20 --model " + data("models/harmonic_sin_weight.json")).code == 0);
    for (const char* s : {"exp_m2", "exp_0", "exp_3", "shifted_z", "rotation3"}) {
        auto r = cli("toeplitz --symbol " + data("symbols/") + s + ".json --N 64");
        CHECK_MESSAGE(r.code == 0, s, "\n", r.out);
    }
}

TEST_CASE("identical seeds give byte-identical csv") {
    auto a = scratch() / "a.csv", b = scratch() / "b.csv", c = scratch() / "c.csv";
    CHECK(cli("matrixlab --trials 40 --seed 9 --csv " + a.string()).code == 0);
    CHECK(cli("matrixlab --trials 40 --seed 9 --csv " + b.string()).code == 0);
    CHECK(cli("matrixlab --trials 40 --seed 10 --csv " + c.string()).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK_FALSE(slurp(a).empty());
    CHECK(slurp(a) != slurp(c));
    auto report = scratch() / "report.txt";
    CHECK(cli("karamata --beta " + data("measures/periodic.json") + " --out " + report.string()).code == 0);
    CHECK(slurp(report).find("generated ") != std::string::npos);
}

TEST_CASE("suite with a corrupted model file exits 2") {
    auto d = scratch() / "data";
    fs::remove_all(d);
    fs::copy(SINGTRACE_DATA_DIR, d, fs::copy_options::recursive);
    std::ofstream(d / "models" / "harmonic.json") << "{ not json";
    auto r = cli("suite --only 1 --data " + d.string());
    CHECK(r.code == 2);
    CHECK(cli("suite --only 12").code == 2);
    CHECK(cli("suite --only 5,9").code == 0);
}
