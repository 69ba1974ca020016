#ifndef KEFF_TOOLS_REPORT_HPP
#define KEFF_TOOLS_REPORT_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "keff/bounds.hpp"
#include "keff/oracle.hpp"
#include "keff/problem.hpp"
#include "keff/solver.hpp"
#include "keff/variational.hpp"

namespace keff::tools {

using nlohmann::json;

/// Renders a double as a JSON number when finite and as the strings "inf",
/// "-inf" or "nan" otherwise, so reports round trip losslessly.
json extended_real(double v);

/// FNV-1a 64-bit hash of the canonicalized (parsed and re-serialized with
/// sorted keys) config text, as a 16-digit hex string.
std::string problem_digest(const std::string& config_text);

/// The `meta` section: tool identity, command, digest, seed, and every
/// numeric convention the results depend on.  Timing is patched in last.
json meta_section(const std::string& command, const std::string& digest,
                  std::uint64_t seed);

json existence_section(const ExistenceCheck& check);
json solution_section(const CriticalitySolution& sol);
json bounds_section(const BoundsReport& report, int violations);
json sandwich_section(const SandwichSummary& summary);
json eigenfunction_section(const EigenfunctionTrace& trace);
json oracle_section(const OracleResult& oracle, double solver_k, double angle);
json irreducibility_section(const IrreducibilityReport& report);

/// Serializes with 2-space indentation and writes through a temp file and
/// rename, so readers never observe a partial report.
void write_report(const json& report, const std::string& path);

/// Writes phi as CSV rows (x, node, value), cell-major.
void write_csv(const ProblemModel& model, const Field& phi, const std::string& path);

}  // namespace keff::tools

#endif
