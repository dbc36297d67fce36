#include "singtrace/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "singtrace/errors.hpp"

namespace singtrace {

using nlohmann::json;

namespace {

void check_schema(const json& j, const char* what) {
    if (!j.is_object()) throw InvalidInput(std::string(what) + " document must be a JSON object");
    if (!j.contains("schema_version")) throw InvalidInput(std::string(what) + " document has no schema_version");
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
        throw InvalidInput(std::string(what) + " schema_version must be " + std::to_string(kSchemaVersion));
}

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw InvalidInput(std::string("missing field \"") + key + "\"");
    try {
        return j[key].get<T>();
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("field \"") + key + "\": " + e.what());
    }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

TailLaw tail_from(const json& j) {
    const json& t = j.at("tail_law");
    if (!t.is_object()) throw InvalidInput("tail_law must be an object {c, q, t0}");
    return {field<double>(t, "c"), field<double>(t, "q"), field_or<double>(t, "t0", 0.0)};
}

std::optional<Expression> weight_from(const json& j) {
    if (!j.contains("weight_expression")) return std::nullopt;
    return Expression::parse(field<std::string>(j, "weight_expression"));
}

// row-major flat array of n^2 entries, or an array of rows
Eigen::MatrixXd matrix_from(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].empty())
        throw InvalidInput(std::string("field \"") + key + "\" must be a non-empty array");
    const json& a = j[key];
    if (a[0].is_array()) {
        auto n = static_cast<Eigen::Index>(a.size());
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!a[i].is_array() || static_cast<Eigen::Index>(a[i].size()) != n)
                throw InvalidInput(std::string("field \"") + key + "\" must be square");
            for (Eigen::Index k = 0; k < n; ++k) m(i, k) = a[i][k].get<double>();
        }
        return m;
    }
    auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(a.size()))));
    if (n * n != static_cast<Eigen::Index>(a.size()))
        throw InvalidInput(std::string("field \"") + key + "\" has non-square length");
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n * n; ++i) m(i / n, i % n) = a[i].get<double>();
    return m;
}

}  // namespace

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

SpectralModel model_from_json(const json& j) {
    check_schema(j, "model");
    try {
        auto kind = field<std::string>(j, "kind");
        auto w = weight_from(j);
        if (kind == "matrix") return SpectralModel::matrix(matrix_from(j, "matrix"), w);
        if (kind == "finite_diagonal") return SpectralModel::finite_diagonal(field<std::vector<double>>(j, "entries"), w);
        auto e = Expression::parse(field<std::string>(j, "expression"));
        if (!j.contains("tail_law")) throw InvalidInput("infinite models need a tail_law");
        auto tail = tail_from(j);
        if (kind == "closed_form_mu") return SpectralModel::closed_form(e, tail, w);
        if (kind == "integrated_form") return SpectralModel::integrated(e, tail, w);
        if (kind == "diagonal_sequence") return SpectralModel::diagonal(e, tail, w);
        throw InvalidInput("unknown model kind \"" + kind + "\"");
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("model: ") + e.what());
    }
}

SpectralModel load_model(const std::string& path) { return model_from_json(read_json(path)); }

StieltjesMeasure measure_from_json(const json& j) {
    check_schema(j, "measure");
    try {
        auto kind = field<std::string>(j, "kind");
        if (kind == "jump_list") {
            std::vector<std::pair<double, double>> jumps;
            for (const auto& p : j.at("jumps")) {
                if (!p.is_array() || p.size() != 2) throw InvalidInput("jumps must be [t, c] pairs");
                jumps.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
            return StieltjesMeasure::jumps(std::move(jumps));
        }
        if (kind == "periodic") return StieltjesMeasure::periodic(field<std::vector<double>>(j, "increments"));
        if (kind == "jump_sequence")
            return StieltjesMeasure::jump_sequence(Expression::parse(field<std::string>(j, "t_expression")),
                                                   Expression::parse(field<std::string>(j, "c_expression")),
                                                   tail_from(j));
        if (kind == "closed_form")
            return StieltjesMeasure::closed_form(Expression::parse(field<std::string>(j, "expression")), tail_from(j));
        throw InvalidInput("unknown measure kind \"" + kind + "\"");
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("measure: ") + e.what());
    }
}

StieltjesMeasure load_measure(const std::string& path) { return measure_from_json(read_json(path)); }

Symbol symbol_from_json(const json& j) {
    check_schema(j, "symbol");
    try {
        std::optional<Symbol> u;
        if (j.contains("fourier_coeffs")) {
            std::map<int, cplx> c;
            for (const auto& t : j["fourier_coeffs"]) {
                if (!t.is_array() || t.size() != 3) throw InvalidInput("fourier_coeffs entries are [k, re, im]");
                c[t[0].get<int>()] += cplx(t[1].get<double>(), t[2].get<double>());
            }
            u = Symbol::fourier(c);
        } else if (j.contains("expression")) {
            const json& e = j["expression"];
            if (!e.is_object()) throw InvalidInput("expression must be an object {re, im}");
            u = Symbol::expression(Expression::parse(field<std::string>(e, "re")),
                                   Expression::parse(field_or<std::string>(e, "im", "0")));
        } else {
            throw InvalidInput("symbol needs fourier_coeffs or expression");
        }
        return field_or<bool>(j, "unitarize", false) ? u->unitarized() : *u;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("symbol: ") + e.what());
    }
}

Symbol load_symbol(const std::string& path) { return symbol_from_json(read_json(path)); }

SfScenario scenario_from_json(const json& j) {
    check_schema(j, "scenario");
    try {
        auto kind = field<std::string>(j, "kind");
        SfScenario s;
        if (kind == "lattice") {
            s.path = OperatorPath::lattice(field_or<int>(j, "K", 2000), field<int>(j, "n"));
        } else if (kind == "matrix") {
            auto D0 = matrix_from(j, "D0");
            s.path = j.contains("u") ? OperatorPath::from_unitary(D0, matrix_from(j, "u"))
                                     : OperatorPath::matrix(D0, matrix_from(j, "A"));
        } else {
            throw InvalidInput("scenario kind must be lattice or matrix");
        }
        s.options.p = field_or<double>(j, "p", s.options.p);
        s.options.partition = field_or<int>(j, "partition", s.options.partition);
        s.options.samples = field_or<int>(j, "samples", s.options.samples);
        return s;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("scenario: ") + e.what());
    }
}

SfScenario load_scenario(const std::string& path) { return scenario_from_json(read_json(path)); }

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

CsvTable::CsvTable(std::vector<std::string> columns, std::uint64_t seed) : columns_(std::move(columns)), seed_(seed) {}

void CsvTable::add_row(const std::string& anchor, std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw InvalidInput("csv row width does not match the header");
    std::vector<std::string> row{std::to_string(kSchemaVersion), std::to_string(seed_), anchor};
    for (auto& c : cells) row.push_back(std::move(c));
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::ostringstream os;
    auto line = [&os](const std::vector<std::string>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << csv_escape(v[i]);
        os << "\r\n";
    };
    std::vector<std::string> head{"schema_version", "seed", "anchor"};
    head.insert(head.end(), columns_.begin(), columns_.end());
    line(head);
    for (const auto& r : rows_) line(r);
    return os.str();
}

void CsvTable::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path);
    out << str();
}

CsvTable trace_report_table(const TraceReport& r, std::uint64_t seed, const std::string& anchor) {
    CsvTable t({"route", "converged", "value", "liminf", "limsup", "band_width", "grid_spec"}, seed);
    for (const auto& rr : r.routes) {
        const auto& b = rr.band;
        bool ran = rr.error.empty();
        t.add_row(anchor, {to_string(rr.route), b.converged ? "1" : "0", b.value ? format_number(*b.value) : "",
                           ran ? format_number(b.liminf_est) : "", ran ? format_number(b.limsup_est) : "",
                           ran ? format_number(b.band_width) : "", ran ? rr.grid_spec : "error: " + rr.error});
    }
    return t;
}

CsvTable karamata_table(const KaramataReport& r, std::uint64_t seed, const std::string& anchor) {
    CsvTable t({"quantity", "converged", "value", "liminf", "limsup", "band_width", "grid_spec"}, seed);
    auto row = [&](const char* name, const LimitBand& b) {
        t.add_row(anchor, {name, b.converged ? "1" : "0", b.value ? format_number(*b.value) : "",
                           format_number(b.liminf_est), format_number(b.limsup_est), format_number(b.band_width),
                           b.windows});
    };
    row("abel_mean", r.band_h);
    row("cesaro_mean", r.band_beta);
    return t;
}

CsvTable sf_report_table(const SfReport& r, std::uint64_t seed, const std::string& anchor) {
    CsvTable t({"method", "value", "detail"}, seed);
    t.add_row(anchor, {"crossings", std::to_string(r.sf_crossings), ""});
    t.add_row(anchor, {"partition", std::to_string(r.sf_partition), ""});
    t.add_row(anchor, {"integral", format_number(r.sf_integral.value),
                       "p=" + format_number(r.p) + " nodes=" + std::to_string(r.sf_integral.nodes) +
                           (r.integral_applies ? "" : " not-unitary")});
    if (r.sf_zeta) {
        const auto& b = r.sf_zeta->band;
        t.add_row(anchor, {"zeta", b.value ? format_number(*b.value) : "",
                           "band=[" + format_number(b.liminf_est) + ";" + format_number(b.limsup_est) + "]"});
    }
    t.add_row(anchor, {"ctilde", format_number(r.ctilde), "p=" + format_number(r.p)});
    return t;
}

}  // namespace singtrace
