#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "declqr/learner.hpp"
#include "declqr/netsys.hpp"

namespace declqr {

using Json = nlohmann::json;

/// Subsystem indices in files are 1-based; everything in memory is 0-based.
/// A system file holds: p, edges [[from, to, delay], ...], state_dims,
/// input_dims, A and B (row-major nested arrays), sigma_w, and optionally Q and
/// R (nested arrays or the string "identity").
Json system_to_json(const NetworkedSystem& system, const CostSpec& cost);
NetworkedSystem system_from_json(const Json& j);
CostSpec cost_from_json(const Json& j, const BlockLayout& layout);

Json matrix_to_json(const MatrixXd& M);
MatrixXd matrix_from_json(const Json& j, int rows, int cols, const char* what);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// "%.17g", the round-trip format used for every numeric CSV/JSON field.
std::string format_double(double v);

/// RFC 4180 field quoting: wraps in quotes when the field contains a comma,
/// quote or line break; inner quotes are doubled.
std::string csv_field(const std::string& s);

/// Columnar trace: header t,phase,fallback,cost,x1..xn,u1..um followed by one
/// row per step, plus a final row holding x_{T+D_max} with empty u and cost.
/// The estimate and learner config go to a JSON sidecar.
void write_trace_csv(std::ostream& os, const RunTrace& trace);
Json trace_sidecar(const RunTrace& trace);
RunTrace read_trace(std::istream& csv, const Json& sidecar);

/// Plain-text dump of the DFC parameters, one block per paragraph.
std::string format_params(const DfcParams& M, const InfoGraph& ig);

}  // namespace declqr
