#pragma once

#include <string>
#include <vector>

#include "fembem/experiments.hpp"

namespace fembem {

enum class OutputFormat { Csv, Json, Svg };
std::string to_string(OutputFormat f);
OutputFormat output_format_from_string(const std::string& s);

/// Version tag written in the first line of every results CSV.
inline constexpr int kCsvVersion = 1;

/// Fixed column order of the results CSV (wall times excluded).
const std::vector<std::string>& csv_columns();

/// "# fembem results v<version>" comment, column line, one row per record; numbers at 17 digits.
std::string records_to_csv(const std::vector<RunRecord>& records);
/// Inverse of records_to_csv; throws std::runtime_error on a version or column mismatch.
std::vector<RunRecord> records_from_csv(const std::string& text);
/// Wall times (volume, BEM, solve, measurement) keyed by experiment, k, level and p.
std::string timings_to_csv(const std::vector<RunRecord>& records);
std::string records_to_json(const std::vector<RunRecord>& records, const std::vector<Verdict>& verdicts = {});
/// Log-log plot of error and best approximation against h per (experiment, formulation, k), with a
/// reference triangle of slope p.
std::string records_to_svg(const std::vector<RunRecord>& records);

/// Writes the records in the given format; throws std::invalid_argument for an empty list and
/// std::runtime_error on I/O failure.
void emit_results(const std::vector<RunRecord>& records, OutputFormat format, const std::string& path,
                  const std::vector<Verdict>& verdicts = {});

}  // namespace fembem
