#ifndef BNLS_IO_HPP
#define BNLS_IO_HPP

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "bnls/dynamics.hpp"
#include "bnls/grid.hpp"
#include "bnls/solvers.hpp"
#include "bnls/thresholds.hpp"

namespace bnls {

inline constexpr int kFieldSchemaVersion = 1;

/// CSV with one row per node: coordinate(s), re, im; the header line carries
/// the schema version and the grid metadata (flavor, dim, n, extent)
void save_field(const Field& u, const std::filesystem::path& path);

/// load a field; refuses on schema or grid-metadata mismatch
Field load_field(const std::filesystem::path& path,
                 std::shared_ptr<const Grid> grid);

void save_trajectory(const TrajectoryRecord& rec,
                     const std::filesystem::path& path);

nlohmann::json to_json(const ProblemParams& prm);
nlohmann::json to_json(const FiberingDiagnostics& d);
nlohmann::json to_json(const ConstantsReport& rep);
nlohmann::json to_json(const SolverConfig& cfg);
nlohmann::json to_json(const SolveReport& rep);
nlohmann::json to_json(const IntegratorConfig& icfg);
nlohmann::json to_json(const TrajectoryRecord& rec);
nlohmann::json grid_metadata(const Grid& g);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace bnls

#endif
