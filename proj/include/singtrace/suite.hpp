#pragma once

// The acceptance criteria as library calls. Each criterion returns its
// individual checks; timing checks go to the text report only so that the
// CSV stays byte-identical for a fixed seed.

#include <cstdint>
#include <string>
#include <vector>

#include "singtrace/io.hpp"

namespace singtrace {

struct CheckLine {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool timing = false;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    std::string anchor;
    std::vector<CheckLine> checks;
    std::string error;  // set when the criterion threw
    int error_code = 0;  // CLI exit code of that error
    double seconds = 0.0;

    bool pass() const;
};

struct SuiteOptions {
    std::uint64_t seed = 1;
    double tol_scale = 1.0;  // multiplies every tolerance
    std::string data_dir = SINGTRACE_DATA_DIR;
    std::vector<int> only;  // empty = all criteria
};

struct SuiteReport {
    std::vector<CriterionResult> criteria;
    double seconds = 0.0;

    bool pass() const;
    CsvTable table(std::uint64_t seed) const;
    std::string text() const;
};

constexpr int kCriteria = 11;

CriterionResult run_criterion(int id, const SuiteOptions& opt);
SuiteReport run_suite(const SuiteOptions& opt);

// exit code for an exception thrown by the library: 2 invalid input, 3 inconclusive, 1 otherwise
int exit_code_for(const std::exception& e);

}  // namespace singtrace
