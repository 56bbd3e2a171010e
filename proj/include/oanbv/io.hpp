#pragma once

#include "oanbv/experiments.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace oanbv {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed "%.10g" rendering used by every CSV; "nan" for NaN.
std::string format_double(double v);

// --- Geometry files ---------------------------------------------------------

/// ASCII PLY with x y z, then nx ny nz and label when present.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& path);

/// OBJ plus a sidecar (`<path>.labels`) holding one part label per vertex line.
void write_obj(const std::filesystem::path& path, const LabeledMesh& mesh);
/// Faces and part labels only; keypoints are not stored in OBJ.
LabeledMesh read_obj(const std::filesystem::path& path);

/// Binary PGM (P5), 255 where the mask is set.
void write_pgm(const std::filesystem::path& path, const std::vector<std::uint8_t>& mask, int width, int height);

// --- Scenes -----------------------------------------------------------------

nlohmann::json scene_to_json(const Scene& scene);
/// Inverse of scene_to_json; the target mesh is regenerated from its spec.
Scene scene_from_json(const nlohmann::json& j);

// --- CSV tables -------------------------------------------------------------

/// One row per (trial, iteration).
std::string trials_csv(const std::vector<TrialRecord>& records);
std::string aggregate_csv(const AggregateTable& table);
std::string peaks_csv(const AggregateTable& table);
/// Plot-ready SNR grid: one row per w_a, one column per w_o; empty where w_v < 0.
std::string sweep_grid_csv(const std::vector<SweepCell>& cells, double step);
/// Long form of every cell.
std::string sweep_cells_csv(const std::vector<SweepCell>& cells);
/// One row per candidate: id, counts, score terms and baseline gains.
std::string candidate_scores_csv(const CandidateTable& table);
std::string alignment_ablation_csv(const std::vector<AlignmentAblationRow>& rows);
std::string viewpoint_ablation_csv(const std::vector<ViewpointAblationRow>& rows);

/// Writes through a temporary file in the same directory and renames it.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace oanbv
