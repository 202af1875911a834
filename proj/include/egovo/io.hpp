// File formats: grayscale frames (PGM, PNG), calibration, key=value
// configuration, TUM trajectories and the CSV logs written by a run.

#ifndef EGOVO_IO_HPP
#define EGOVO_IO_HPP

#include <map>
#include <string>
#include <vector>

#include "egovo/camera.hpp"
#include "egovo/depthmap.hpp"
#include "egovo/image.hpp"
#include "egovo/pipeline.hpp"
#include "egovo/trajectory.hpp"

namespace egovo {

/// Reads a binary or ASCII PGM, or a PNG in any colour type; colour is
/// converted to luma. Intensities are scaled into [0, 1]. Throws IoError.
GrayImage read_image(const std::string& path);
/// 8-bit binary PGM, intensities clamped to [0, 1] and rounded.
void write_pgm(const std::string& path, const GrayImage& img);
void write_png(const std::string& path, const GrayImage& img);

/// PGM and PNG files in `dir` ordered by the last number in the file name,
/// then by name. Throws IoError when the directory cannot be read.
std::vector<std::string> list_frames(const std::string& dir);

/// One line `fx fy cx cy width height`; `#` starts a comment. Throws IoError
/// for a missing file and ConfigError for malformed or invalid contents.
Intrinsics read_calibration(const std::string& path);
void write_calibration(const std::string& path, const Intrinsics& k);

/// Pinhole stand-in for a GoPro-like wide lens: 94 degrees horizontal field
/// of view, square pixels, principal point at the image centre.
Intrinsics gopro_preset(int width, int height);

/// key=value lines, `#` comments, surrounding blanks ignored. Later keys
/// override earlier ones.
std::map<std::string, std::string> read_key_values(const std::string& path);
/// Throws ConfigError for unknown keys and unparsable values.
void apply_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);
/// Keys accepted by apply_config_value.
std::vector<std::string> config_keys();

/// `timestamp tx ty tz qx qy qz qw`, one line per frame, the frame index as
/// timestamp, qw >= 0. Segment ids live in the stats CSV.
void write_trajectory(const std::string& path, const Trajectory& traj);
void write_poses(const std::string& path, const std::vector<Pose>& poses);
/// All entries land in segment 0 unless the file carries `# segment N`
/// comment lines, which start segment N.
Trajectory read_trajectory(const std::string& path);
/// Sets each entry's segment from the frame and segment columns of a stats
/// CSV written by a run. Throws ConfigError for frames missing from it.
void assign_segments(Trajectory& traj, const std::string& stats_path);

/// One row per closure attempt, no header:
/// frame_index,kf_id,kl,view_angle_deg,converged,rot_discrepancy_deg.
void write_closures_csv(const std::string& path, const std::vector<ClosureRecord>& closures);
void write_stats_csv(const std::string& path, const std::vector<FrameRecord>& records);

/// frame,tx,ty,tz,rx,ry,rz with the rotation as a rotation vector in degrees.
void write_plotdata_csv(const std::string& path, const Trajectory& traj);

/// Debug dump of a depth map: `base.pgm` shows rho scaled by the largest
/// valid value (0 where empty) and `base.bin` holds (rho, sigma2, weight)
/// per pixel as little-endian float32, row-major, without a header.
void write_depth_dump(const std::string& base, const InverseDepthMap& map);
/// Reads `base.bin` back; the size must be given since the file has none.
InverseDepthMap read_depth_dump(const std::string& base, int width, int height);

}  // namespace egovo

#endif  // EGOVO_IO_HPP
