#pragma once

#include <map>
#include <string>
#include <vector>

#include "sfo/case.hpp"
#include "sfo/evaluation.hpp"
#include "sfo/geometry.hpp"
#include "sfo/synthcase.hpp"

namespace sfo {

// ---- low-level file helpers -------------------------------------------------

// Whole-file read. Throws IoError when the file cannot be opened.
std::string read_text_file(const std::string& path);

// Writes to <path>.tmp then renames, so readers never see a partial file.
// Creates parent directories. Throws IoError.
void write_text_atomic(const std::string& path, const std::string& content);

// FNV-1a 64-bit checksum as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

// ---- text formats -----------------------------------------------------------

// ASCII OBJ with v/f records, full double precision.
std::string mesh_to_obj(const TriMesh& mesh);
TriMesh mesh_from_obj(const std::string& text);

// Plain PGM (P2) with maxval 1.
std::string mask_to_pgm(const BinaryMask& mask);
BinaryMask mask_from_pgm(const std::string& text);

// One "u v" line per curve point.
std::string curve_to_text(const PixelCurve& curve);
PixelCurve curve_from_text(const std::string& text);

// ---- case bundles -----------------------------------------------------------

inline constexpr int kFormatVersion = 1;

// Directory layout: manifest.json plus skull.obj, face_mask.pgm,
// facial_curve.txt referenced by relative path and checksum. Loading
// verifies the format version and every checksum; all semantic fields
// round-trip exactly. Throws ManifestError on any mismatch.
void save_bundle(const CaseBundle& bundle, const std::string& dir);
CaseBundle load_bundle(const std::string& dir);

// The scoring-side skull alone (for aligning a photo with a different
// skull): skull.json next to skull.obj, the same layout save_bundle uses
// inside a bundle directory. Region caches are not persisted.
void save_skull(const SkullInput& skull, const std::string& dir);
SkullInput load_skull(const std::string& dir);

// ---- configuration ----------------------------------------------------------

// Versioned method configuration: optimizer mode, DE settings, fitness
// toggles. Unknown format versions are rejected.
std::string method_config_to_json(const MethodConfig& method);
MethodConfig method_config_from_json(const std::string& text);

// Population soft-tissue depth table {"landmark": [min_mm, max_mm], ...}.
std::map<std::string, DepthRange> depth_table_from_json(const std::string& text);
std::string depth_table_to_json(const std::map<std::string, DepthRange>& table);

// Data directory holding population_depths.json: $SFO_DATA_DIR when set,
// otherwise the compiled-in default.
std::string default_data_dir();
std::map<std::string, DepthRange> load_population_depths();

// ---- reports ----------------------------------------------------------------

// Overlay render: face mask in gray, skull silhouette boundary under the
// given camera in white, observed facial landmarks as blue circles,
// projected 3D estimates as green dots. Plain PPM (P3).
std::string overlay_to_ppm(const BinaryMask& face, const TriMesh& skull_mesh,
                           const Pinhole& camera, const std::vector<Vec2>& observed,
                           const std::vector<Vec2>& projected);

// Tab-delimited tables with a header row.
std::string summary_to_table(const std::vector<SuiteSummaryRow>& rows);
std::string alignments_to_table(const std::vector<AlignmentRecord>& rows);
std::string cases_to_table(const std::vector<CaseRecord>& rows);
std::vector<CaseRecord> cases_from_table(const std::string& text);

std::string pose_to_string(PoseKind pose);
PoseKind pose_from_string(const std::string& s);

}  // namespace sfo
