#pragma once

#include "vbr/app/report.hpp"
#include "vbr/pipeline.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vbr::app {

enum class ToleranceMode { absolute, relative, equals, at_most, report };

struct ManifestRow {
    std::string section;
    std::string quantity;  ///< key into the section's computed values
    std::string label;
    ToleranceMode mode = ToleranceMode::absolute;
    json expected;
    double tolerance = 0.0;
};

struct Manifest {
    std::vector<ManifestRow> rows;
};

/// Throws ParseError on malformed documents.
Manifest parse_manifest(const std::string& text);
/// The copy of data/reproduce_manifest.json compiled into the binary.
const std::string& embedded_manifest();
/// Reads `path` when given, the embedded copy otherwise.
Manifest load_manifest(const std::optional<std::string>& path);

struct ReproduceOptions {
    int threads = 1;                   ///< sections run concurrently; 0 picks the hardware count
    int figure_points = 100;           ///< points per figure curve
    int grid_points_per_decade = 60;
};

struct SectionResult {
    std::string id;
    json computed;  ///< flat quantity -> number, string or bool
    json details;   ///< scans, sequences, verdicts, diagnostics
    std::map<std::string, CurveSet> figures;
};

/// sec31 .. sec35.
const std::vector<std::string>& section_ids();
/// Throws DomainError for unknown ids.
SectionResult run_section(std::string_view id, const ReproduceOptions& options);

struct RowOutcome {
    ManifestRow row;
    json computed;  ///< null when the section did not produce the quantity
    bool pass = false;
};

RowOutcome compare_row(const ManifestRow& row, const json& computed);

struct ReproduceResult {
    std::vector<SectionResult> sections;
    std::vector<RowOutcome> rows;
    json summary;
    bool all_pass = false;
};

/// example_id is a section id or "all".
ReproduceResult reproduce(std::string_view example_id, const Manifest& manifest,
                          const ReproduceOptions& options);

/// Fixed-width pass/fail table, one line per row.
std::string format_table(const std::vector<RowOutcome>& rows);

}  // namespace vbr::app
