#include "sfs/io.hpp"

#include <json.hpp>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

namespace sfs {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + target.string() + ": " + ec.message());
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t file_row, std::size_t file_col) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ParseError("cannot parse cell (row " + std::to_string(file_row) + ", column " +
                         std::to_string(file_col) + "): '" + cell + "'");
    if (value < 0.0)
        throw ParseError("negative value in cell (row " + std::to_string(file_row) + ", column " +
                         std::to_string(file_col) + "): '" + cell + "'");
    return value;
}

}  // namespace

CountMatrix read_matrix_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_tabs(line);
    if (header.size() < 2) throw ParseError(path + ": header must contain at least one column label");

    CountMatrix m;
    m.col_labels.assign(header.begin() + 1, header.end());
    const std::size_t g = m.col_labels.size();

    std::vector<std::vector<double>> rows;
    std::size_t file_row = 1;
    while (std::getline(in, line)) {
        ++file_row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_tabs(line);
        if (cells.size() != g + 1)
            throw ParseError(path + ": row " + std::to_string(file_row) + " has " +
                             std::to_string(cells.size()) + " cells, expected " + std::to_string(g + 1));
        m.row_labels.push_back(cells[0]);
        std::vector<double> row(g);
        for (std::size_t c = 0; c < g; ++c) row[c] = parse_cell(cells[c + 1], file_row, c + 2);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");

    m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(g));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < g; ++c) m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    validate(m);
    return m;
}

void write_matrix_tsv(const std::string& path, const CountMatrix& m) {
    validate(m);
    std::ostringstream out;
    out << "id";
    for (const auto& label : m.col_labels) out << '\t' << label;
    out << '\n';
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
        out << m.row_labels[k];
        for (Eigen::Index g = 0; g < m.cols(); ++g) out << '\t' << format_double(m.values(k, g));
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

namespace {

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw ParseError("envelope report: expected a matrix");
    const Eigen::Index r_count = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c_count = static_cast<Eigen::Index>(rows[0].size());
    Mat m(r_count, c_count);
    for (Eigen::Index r = 0; r < r_count; ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != c_count)
            throw ParseError("envelope report: ragged matrix");
        for (Eigen::Index c = 0; c < c_count; ++c) m(r, c) = rows[r][c].get<double>();
    }
    return m;
}

}  // namespace

void write_envelope_report(const std::string& path, const EnvelopeReport& report) {
    json doc;
    doc["format"] = "sfskit-envelope/1";
    doc["config"] = {
        {"rank", report.reference_P.cols()},
        {"beta", report.config.beta},
        {"epsilon", report.config.epsilon},
        {"check_every", report.config.check_every},
        {"seed", report.config.seed},
        {"max_iterations", report.config.max_iterations},
        {"track_E_size", report.config.track_E_size},
        {"thin", report.config.thin},
    };
    doc["iterations"] = report.iterations;
    doc["converged"] = report.converged;
    doc["input_was_normalized"] = report.input_was_normalized;
    doc["warnings"] = report.warnings;
    doc["row_labels"] = report.row_labels;
    doc["col_labels"] = report.col_labels;
    doc["avg_size_P"] = report.envelope.avg_size_P;
    doc["avg_size_E"] = report.envelope.avg_size_E;
    doc["reference"] = {{"P", matrix_to_json(report.reference_P)}, {"E", matrix_to_json(report.reference_E)}};
    doc["envelope"] = {{"P_min", matrix_to_json(report.envelope.P_min)},
                       {"P_max", matrix_to_json(report.envelope.P_max)},
                       {"E_min", matrix_to_json(report.envelope.E_min)},
                       {"E_max", matrix_to_json(report.envelope.E_max)}};
    json history = json::array();
    for (const auto& cp : report.size_history)
        history.push_back({{"iteration", cp.iteration}, {"avg_size_P", cp.avg_size_P}, {"avg_size_E", cp.avg_size_E}});
    doc["size_history"] = std::move(history);
    write_file_atomic(path, doc.dump(2) + "\n");
}

EnvelopeReport read_envelope_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        EnvelopeReport report;
        report.config.beta = doc.at("config").at("beta").get<double>();
        report.config.epsilon = doc.at("config").at("epsilon").get<double>();
        report.config.check_every = doc.at("config").at("check_every").get<std::int64_t>();
        report.config.seed = doc.at("config").at("seed").get<std::uint64_t>();
        report.config.max_iterations = doc.at("config").at("max_iterations").get<std::int64_t>();
        report.config.track_E_size = doc.at("config").at("track_E_size").get<bool>();
        report.config.thin = doc.at("config").at("thin").get<std::int64_t>();
        report.iterations = doc.at("iterations").get<std::int64_t>();
        report.converged = doc.at("converged").get<bool>();
        report.input_was_normalized = doc.at("input_was_normalized").get<bool>();
        report.warnings = doc.at("warnings").get<std::vector<std::string>>();
        report.row_labels = doc.at("row_labels").get<std::vector<std::string>>();
        report.col_labels = doc.at("col_labels").get<std::vector<std::string>>();
        report.reference_P = matrix_from_json(doc.at("reference").at("P"));
        report.reference_E = matrix_from_json(doc.at("reference").at("E"));
        report.envelope.P_min = matrix_from_json(doc.at("envelope").at("P_min"));
        report.envelope.P_max = matrix_from_json(doc.at("envelope").at("P_max"));
        report.envelope.E_min = matrix_from_json(doc.at("envelope").at("E_min"));
        report.envelope.E_max = matrix_from_json(doc.at("envelope").at("E_max"));
        report.envelope.avg_size_P = doc.at("avg_size_P").get<double>();
        report.envelope.avg_size_E = doc.at("avg_size_E").get<double>();
        for (const auto& cp : doc.at("size_history")) {
            report.size_history.push_back({cp.at("iteration").get<std::int64_t>(),
                                           cp.at("avg_size_P").get<double>(),
                                           cp.at("avg_size_E").get<double>()});
        }
        return report;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_table_tsv(const std::string& path, const TsvTable& table) {
    std::ostringstream out;
    for (const auto& line : table.config_lines) out << "# " << line << '\n';
    for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "\t" : "") << table.header[c];
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw ShapeError("write_table_tsv: ragged row");
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "\t" : "") << row[c];
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

TsvTable read_table_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    TsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t start = 1;
            while (start < line.size() && line[start] == ' ') ++start;
            table.config_lines.push_back(line.substr(start));
            continue;
        }
        if (!have_header) {
            table.header = split_tabs(line);
            have_header = true;
            continue;
        }
        auto cells = split_tabs(line);
        if (cells.size() != table.header.size())
            throw ParseError(path + ": row with " + std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(table.header.size()));
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) throw ParseError(path + ": missing header row");
    return table;
}

}  // namespace sfs
