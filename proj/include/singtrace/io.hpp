#pragma once

// JSON inputs and CSV outputs. Every input document carries schema_version;
// every CSV row carries schema_version, seed and anchor.

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "singtrace/dixmier.hpp"
#include "singtrace/spectral_flow.hpp"
#include "singtrace/spectral_models.hpp"
#include "singtrace/tauberian.hpp"
#include "singtrace/toeplitz.hpp"

namespace singtrace {

constexpr int kSchemaVersion = 1;

// parse failures, unknown kinds and schema mismatches throw InvalidInput
nlohmann::json read_json(const std::string& path);

SpectralModel model_from_json(const nlohmann::json& j);
SpectralModel load_model(const std::string& path);

StieltjesMeasure measure_from_json(const nlohmann::json& j);
StieltjesMeasure load_measure(const std::string& path);

Symbol symbol_from_json(const nlohmann::json& j);
Symbol load_symbol(const std::string& path);

struct SfScenario {
    OperatorPath path = OperatorPath::lattice(1, 0);
    SfOptions options;
};
SfScenario scenario_from_json(const nlohmann::json& j);
SfScenario load_scenario(const std::string& path);

// "%.12g"; nan and inf spelled out
std::string format_number(double x);

class CsvTable {
public:
    CsvTable(std::vector<std::string> columns, std::uint64_t seed);

    // cells follow the extra columns given at construction
    void add_row(const std::string& anchor, std::vector<std::string> cells);
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> columns_;
    std::uint64_t seed_;
    std::vector<std::vector<std::string>> rows_;
};

// RFC 4180: quote when the field holds a comma, quote, CR or LF
std::string csv_escape(const std::string& field);

CsvTable trace_report_table(const TraceReport& r, std::uint64_t seed, const std::string& anchor);
CsvTable karamata_table(const KaramataReport& r, std::uint64_t seed, const std::string& anchor);
CsvTable sf_report_table(const SfReport& r, std::uint64_t seed, const std::string& anchor);

}  // namespace singtrace
