#ifndef ANTRACE_REPORTS_HPP
#define ANTRACE_REPORTS_HPP

#include <string>

#include <json.hpp>

#include "antrace/criteria.hpp"
#include "antrace/dof.hpp"
#include "antrace/simulate.hpp"
#include "antrace/solver.hpp"

namespace antrace {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// JSON views of the result types (snake_case keys). Timing fields are kept
/// out of these payloads so that identical seed + config reruns are
/// byte-identical; wall-clock numbers go to the CSV tables instead.
Json to_json(const FitResult& fit);
Json to_json(const DofEstimate& est);
Json to_json(const SelectionReport& report);
Json to_json(const StudyTable& table);

/// Wraps a payload with the effective configuration and artifact version
/// and writes it with a trailing newline.
void write_report(const Json& payload, const Json& effective_config,
                  const std::string& path);

}  // namespace antrace

#endif
