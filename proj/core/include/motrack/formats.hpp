#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "motrack/types.hpp"

namespace motrack {

enum class BoxFormat { kKitti, kMot };

BoxFormat parse_box_format(const std::string& name);  // "kitti" | "mot"
std::string box_format_name(BoxFormat fmt);

/// Everything needed to map file rows to normalized center-form boxes and
/// back: the pixel geometry of the sequence plus, for KITTI rows, the object
/// classes to keep. `label` names the source in error messages.
struct ParseContext {
  BoxFormat format = BoxFormat::kKitti;
  int width = 1920;
  int height = 1080;
  std::set<std::string> kitti_types = {"Car"};
  std::string kitti_write_type = "Car";
  std::string label = "<stream>";
};

/// Parses one annotation stream into a flat detection list (KITTI: whitespace
/// columns with corner boxes; MOT: comma-separated with 1-indexed frames and
/// top-left + size boxes). Rows whose class is filtered out are skipped;
/// malformed rows raise DataError naming the line.
std::vector<Detection> parse_boxes(std::istream& in, const ParseContext& ctx);

/// Writes detections in the context's format. Output is deterministic: rows
/// appear in input order and all real numbers use fixed 6-decimal notation,
/// so write -> parse -> write reproduces the bytes exactly.
void write_boxes(std::ostream& out, const std::vector<Detection>& dets, const ParseContext& ctx);

std::vector<std::vector<Detection>> group_by_frame(const std::vector<Detection>& dets,
                                                   int frame_count);
/// Groups labeled boxes into tracks by id (rows must have id >= 0).
std::vector<Track> group_to_tracks(const std::vector<Detection>& dets, const std::string& label);
std::vector<Detection> flatten_tracks(const std::vector<Track>& tracks);

/// A sequence directory holds seq.txt (name/frames/width/height), an optional
/// gt.txt with labeled tracks and an optional det.txt with per-frame boxes.
Sequence load_sequence(const std::string& dir, BoxFormat fmt,
                       const std::set<std::string>& kitti_types = {"Car"});
void write_sequence(const std::string& dir, const Sequence& seq, BoxFormat fmt);

/// Loads every subdirectory of `dir` that contains a seq.txt, sorted by name.
std::vector<Sequence> load_dataset(const std::string& dir, BoxFormat fmt,
                                   const std::set<std::string>& kitti_types = {"Car"});

void write_tracks_file(const std::string& path, const std::vector<Track>& tracks,
                       const Sequence& seq, BoxFormat fmt);
std::vector<Track> load_tracks_file(const std::string& path, const Sequence& seq, BoxFormat fmt,
                                    const std::set<std::string>& kitti_types = {"Car"});

}  // namespace motrack
