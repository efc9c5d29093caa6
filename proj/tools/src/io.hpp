#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "jnr/cloud.hpp"
#include "jnr/hull.hpp"
#include "jnr/models.hpp"

namespace jnrcli {

using ordered_json = nlohmann::ordered_json;

// Doubles entering reports are rounded to 12 significant digits first, so
// report bytes depend only on the command line and the seed.
double report_round(double v);
ordered_json vec_json(const jnr::Vec3& v);

// Full-precision rendering used by point-cloud files; parses back to the
// identical double, which is what makes file round trips exact.
std::string format17(double v);

// Canonical text of the three matrices (row-major "re im" pairs at full
// precision); the instance hash is FNV-1a 64 over this text.
std::string canonical_triple_text(const jnr::ObservableTriple& tr);
std::string instance_hash(const jnr::ObservableTriple& tr);
std::string bytes_hash(const std::string& bytes);

// Instance file: a JSON object with members h1, h2, h3. Each matrix is
// either dense, {"re": [[..]x4], "im": [[..]x4] (optional)}, or a map of
// Pauli-word coefficients {"XX": 1.0, "ZI": 0.5, ...} with two-letter keys
// over I,X,Y,Z. An optional "name" labels output files. Parse problems
// throw ParseError with file/line or field context; hermiticity failures
// surface as NotHermitianError naming the offending matrix.
jnr::InstanceSpec load_instance_file(const std::filesystem::path& path);

void write_cloud_csv(const std::filesystem::path& path,
                     const jnr::PointCloud3& cloud);
jnr::PointCloud3 read_cloud_csv(const std::filesystem::path& path);

void write_hull_obj(const std::filesystem::path& path,
                    const jnr::ConvexPolytope3& hull);

void write_json_file(const std::filesystem::path& path,
                     const ordered_json& j);

std::string read_text_file(const std::filesystem::path& path);

} // namespace jnrcli
