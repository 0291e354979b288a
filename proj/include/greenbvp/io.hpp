#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "greenbvp/funnel.hpp"
#include "greenbvp/hammerstein.hpp"
#include "greenbvp/spectral.hpp"

namespace greenbvp {

using Json = nlohmann::json;

/// Deterministic JSON text: keys sorted, two-space indent, floats with 17
/// significant digits, non-finite floats as null, trailing newline.
std::string dump_json(const Json& value);

/// Formats a double with 17 significant digits (the CSV and JSON number format).
std::string format_double(double v);

Json to_json(const ConditionResult& c);
Json to_json(const ConditionReport& report);
Json to_json(const KernelNorms& norms);
Json to_json(const PowerResult& r);
Json to_json(const HillRadius& r);
Json to_json(const SchemeReport& report);

/// Summary of a Picard run; increment ratios are reported next to q when known.
Json solution_summary(const Solution& sol);

/// Columns t, x_1..x_N, dx_1..dx_N, w_1..w_N; one row per node.
void write_solution_csv(const Solution& sol, std::ostream& out);

/// Writes text to path through a temporary file in the same directory and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

/// member_XXX.csv per member plus manifest.json with seed, diameter_c1,
/// max_residual, bound_R, converged_count and the member seeds.
Json export_bundle(const FunnelBundle& bundle, const std::filesystem::path& dir);

}  // namespace greenbvp
