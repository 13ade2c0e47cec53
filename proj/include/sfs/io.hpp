#pragma once

#include <string>
#include <vector>

#include "sfs/matrix.hpp"
#include "sfs/sampler.hpp"

namespace sfs {

// Tab-separated matrix file: first row "id<TAB>col labels...", then one
// row per line as "label<TAB>values...". Values must be nonnegative
// numbers; parse errors name the offending cell (1-based row/column of the
// file).
CountMatrix read_matrix_tsv(const std::string& path);

// Writes with 17 significant digits so doubles round-trip bit-exactly.
// All writers below go through a temp file + rename in the target
// directory.
void write_matrix_tsv(const std::string& path, const CountMatrix& m);

// Envelope report: a JSON document carrying the full sampler
// configuration, the reference factorization, the envelope and the
// convergence record. Parses back losslessly.
struct EnvelopeReport {
    SamplerConfig config;
    std::vector<std::string> row_labels;  // K mutation types
    std::vector<std::string> col_labels;  // G genomes
    Mat reference_P, reference_E;
    SfsEnvelope envelope;
    std::vector<SizeCheckpoint> size_history;
    std::vector<std::string> warnings;
    std::int64_t iterations = 0;
    bool converged = false;
    bool input_was_normalized = false;
};

void write_envelope_report(const std::string& path, const EnvelopeReport& report);
EnvelopeReport read_envelope_report(const std::string& path);

// Generic TSV table: '#'-prefixed configuration lines, a header row, then
// data rows. Numeric cells use 17 significant digits.
struct TsvTable {
    std::vector<std::string> config_lines;  // without the leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_table_tsv(const std::string& path, const TsvTable& table);
TsvTable read_table_tsv(const std::string& path);

// 17-significant-digit rendering used by all writers.
std::string format_double(double v);

// Writes `content` atomically (temp file in the same directory + rename).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace sfs
