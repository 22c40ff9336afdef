#pragma once

#include "vbr/bounds.hpp"
#include "vbr/oracles.hpp"
#include "vbr/pipeline.hpp"
#include "vbr/resum.hpp"
#include "vbr/scan.hpp"
#include "vbr/series.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace vbr::app {

using nlohmann::json;

json to_json(const ExtremumRecord& r);
json to_json(const std::vector<ExtremumRecord>& records);
json to_json(const ExtremumSequence& seq);
json to_json(const FixedPointCandidate& fp);
json to_json(const BoundVerdict& v);
json to_json(const DiagnosticsReport& d);
json to_json(const ResumEvaluation& e);
json to_json(const ScanConfig& c);
json to_json(const PVSplit& s);
json series_json(const CoefficientSeries& s);

json provenance(const json& config);

/// Writes to a sibling temporary file and renames it over the target, creating
/// parent directories as needed.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Stable text rendering: two-space indentation and a trailing newline.
std::string dump(const json& j);

}  // namespace vbr::app
