// Acceptance criteria: one PASS/FAIL line each. Exit status is the number of
// failed criteria (capped at 1).

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

#include "singtrace/io.hpp"
#include "singtrace/suite.hpp"

using namespace singtrace;
namespace fs = std::filesystem;

namespace {

std::string failing(const CriterionResult& r) {
    std::ostringstream os;
    if (!r.error.empty()) os << " error: " << r.error;
    for (const auto& c : r.checks) {
        if (c.pass) continue;
        os << " [" << c.name << " = " << format_number(c.value) << ", expected " << format_number(c.expected);
        if (c.tolerance > 0) os << " +- " << format_number(c.tolerance);
        os << "]";
    }
    return os.str();
}

struct CliRun {
    int code = -1;
    double seconds = 0.0;
};

CliRun suite_cli(const fs::path& csv) {
    std::string cmd = "SINGTRACE_THREADS=1 " + std::string(SINGTRACE_CLI_PATH) + " suite --seed 1 --csv " +
                      csv.string() + " > /dev/null 2>&1";
    auto t0 = std::chrono::steady_clock::now();
    int status = std::system(cmd.c_str());
    CliRun r;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    SuiteOptions opt;
    int failed = 0;
    for (int id = 1; id < kCriteria; ++id) {
        auto r = run_criterion(id, opt);
        bool ok = r.pass();
        failed += !ok;
        std::printf("%s  %2d  %-32s %7.2f s%s\n", ok ? "PASS" : "FAIL", id, r.title.c_str(), r.seconds,
                    ok ? "" : failing(r).c_str());
        std::fflush(stdout);
    }

    // infrastructure: the CLI suite, single-threaded, twice with the same seed
    auto dir = fs::temp_directory_path() / "singtrace_acceptance";
    fs::create_directories(dir);
    auto a = suite_cli(dir / "run1.csv");
    auto b = suite_cli(dir / "run2.csv");
    std::string ca = slurp(dir / "run1.csv"), cb = slurp(dir / "run2.csv");
    bool identical = !ca.empty() && ca == cb;
    bool ok = a.code == 0 && a.seconds <= 120.0 && identical;
    failed += !ok;
    std::printf("%s  %2d  %-32s %7.2f s [suite exit %d, csv %s]\n", ok ? "PASS" : "FAIL", kCriteria,
                "suite exit code and determinism", a.seconds, a.code, identical ? "byte-identical" : "differs");
    std::printf("%d of %d criteria failed\n", failed, kCriteria);
    return failed ? 1 : 0;
}
