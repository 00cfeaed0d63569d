#pragma once

#include "fracfront/asymptotic_kernels.hpp"
#include "fracfront/config.hpp"
#include "fracfront/continuation.hpp"
#include "fracfront/oracles.hpp"
#include "fracfront/tail_analysis.hpp"

#include <filesystem>
#include <string>

#include <json.hpp>

namespace fracfront {

using Json = nlohmann::ordered_json;

/// Version of the layout of the JSON files written by the CLI.
inline constexpr int json_schema_version = 1;
inline constexpr const char* library_version = "1.0.0";

Json to_json(const ContinuationStage& stage);
Json to_json(const DiagnosticsRecord& record);
Json to_json(const TailFit& fit);
Json to_json(const DerivativeLowerBound& bound);
Json to_json(const DominationReport& report);
Json to_json(const TailBoundsReport& report);
Json to_json(const ExpansionReport& report);
Json to_json(const ClassicalFront& front);
Json to_json(const IvpRun& run);
Json to_json(const LimitValues& values);

/// Library, compiler and dependency versions.
Json build_info();

void write_json(const std::filesystem::path& path, const Json& value);

/// Writes text through a temporary and a rename so partial files never remain.
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace fracfront
