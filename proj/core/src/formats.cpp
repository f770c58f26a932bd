#include "motrack/formats.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "motrack/errors.hpp"

namespace fs = std::filesystem;

namespace motrack {
namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

[[noreturn]] void row_fail(const std::string& label, int line, const std::string& msg) {
  throw DataError(label + ":" + std::to_string(line) + ": " + msg);
}

double parse_num(const std::string& tok, const std::string& label, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    row_fail(label, line, "bad number '" + tok + "'");
  }
}

int parse_int(const std::string& tok, const std::string& label, int line) {
  const double v = parse_num(tok, label, line);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) row_fail(label, line, "expected integer, got '" + tok + "'");
  return i;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

void parse_kitti_row(const std::string& line, int lineno, const ParseContext& ctx,
                     std::vector<Detection>& out) {
  const std::vector<std::string> tok = split_ws(line);
  if (tok.empty()) return;
  if (tok.size() < 17) row_fail(ctx.label, lineno, "expected at least 17 columns");
  const std::string& type = tok[2];
  if (ctx.kitti_types.find(type) == ctx.kitti_types.end()) return;

  Detection d;
  d.frame = parse_int(tok[0], ctx.label, lineno);
  if (d.frame < 0) row_fail(ctx.label, lineno, "negative frame index");
  d.id = parse_int(tok[1], ctx.label, lineno);
  const double left = parse_num(tok[6], ctx.label, lineno);
  const double top = parse_num(tok[7], ctx.label, lineno);
  const double right = parse_num(tok[8], ctx.label, lineno);
  const double bottom = parse_num(tok[9], ctx.label, lineno);
  if (right <= left || bottom <= top) row_fail(ctx.label, lineno, "box has non-positive extent");
  d.x = 0.5 * (left + right) / ctx.width;
  d.y = 0.5 * (top + bottom) / ctx.height;
  d.w = (right - left) / ctx.width;
  d.h = (bottom - top) / ctx.height;
  d.confidence = tok.size() >= 18 ? parse_num(tok[17], ctx.label, lineno) : 1.0;
  out.push_back(d);
}

void parse_mot_row(const std::string& line, int lineno, const ParseContext& ctx,
                   std::vector<Detection>& out) {
  if (trim(line).empty()) return;
  const std::vector<std::string> tok = split_commas(line);
  if (tok.size() < 7) row_fail(ctx.label, lineno, "expected at least 7 comma-separated fields");

  Detection d;
  const int frame1 = parse_int(tok[0], ctx.label, lineno);
  if (frame1 < 1) row_fail(ctx.label, lineno, "frame indices are 1-based");
  d.frame = frame1 - 1;
  d.id = parse_int(tok[1], ctx.label, lineno);
  const double left = parse_num(tok[2], ctx.label, lineno);
  const double top = parse_num(tok[3], ctx.label, lineno);
  const double bw = parse_num(tok[4], ctx.label, lineno);
  const double bh = parse_num(tok[5], ctx.label, lineno);
  if (bw <= 0 || bh <= 0) row_fail(ctx.label, lineno, "box has non-positive extent");
  d.x = (left + 0.5 * bw) / ctx.width;
  d.y = (top + 0.5 * bh) / ctx.height;
  d.w = bw / ctx.width;
  d.h = bh / ctx.height;
  d.confidence = parse_num(tok[6], ctx.label, lineno);
  out.push_back(d);
}

}  // namespace

BoxFormat parse_box_format(const std::string& name) {
  if (name == "kitti") return BoxFormat::kKitti;
  if (name == "mot") return BoxFormat::kMot;
  throw ConfigError("unknown box format '" + name + "' (expected kitti or mot)");
}

std::string box_format_name(BoxFormat fmt) {
  return fmt == BoxFormat::kKitti ? "kitti" : "mot";
}

std::vector<Detection> parse_boxes(std::istream& in, const ParseContext& ctx) {
  if (ctx.width <= 0 || ctx.height <= 0) throw ConfigError("parse_boxes: bad image size");
  std::vector<Detection> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (ctx.format == BoxFormat::kKitti) {
      parse_kitti_row(line, lineno, ctx, out);
    } else {
      parse_mot_row(line, lineno, ctx, out);
    }
  }
  return out;
}

void write_boxes(std::ostream& out, const std::vector<Detection>& dets, const ParseContext& ctx) {
  if (ctx.width <= 0 || ctx.height <= 0) throw ConfigError("write_boxes: bad image size");
  for (const Detection& d : dets) {
    if (ctx.format == BoxFormat::kKitti) {
      const double left = (d.x - 0.5 * d.w) * ctx.width;
      const double right = (d.x + 0.5 * d.w) * ctx.width;
      const double top = (d.y - 0.5 * d.h) * ctx.height;
      const double bottom = (d.y + 0.5 * d.h) * ctx.height;
      out << d.frame << ' ' << d.id << ' ' << ctx.kitti_write_type << " 0 0 -10 " << fixed6(left)
          << ' ' << fixed6(top) << ' ' << fixed6(right) << ' ' << fixed6(bottom)
          << " -1 -1 -1 -1000 -1000 -1000 -10 " << fixed6(d.confidence) << '\n';
    } else {
      const double left = (d.x - 0.5 * d.w) * ctx.width;
      const double top = (d.y - 0.5 * d.h) * ctx.height;
      out << (d.frame + 1) << ',' << d.id << ',' << fixed6(left) << ',' << fixed6(top) << ','
          << fixed6(d.w * ctx.width) << ',' << fixed6(d.h * ctx.height) << ','
          << fixed6(d.confidence) << ",-1,-1,-1\n";
    }
  }
}

std::vector<std::vector<Detection>> group_by_frame(const std::vector<Detection>& dets,
                                                   int frame_count) {
  std::vector<std::vector<Detection>> out(static_cast<std::size_t>(std::max(0, frame_count)));
  for (const Detection& d : dets) {
    if (d.frame < 0 || d.frame >= frame_count)
      throw DataError("detection frame " + std::to_string(d.frame) +
                      " outside sequence of length " + std::to_string(frame_count));
    out[static_cast<std::size_t>(d.frame)].push_back(d);
  }
  return out;
}

std::vector<Track> group_to_tracks(const std::vector<Detection>& dets, const std::string& label) {
  std::map<int, Track> by_id;
  for (const Detection& d : dets) {
    if (d.id < 0) throw DataError(label + ": labeled tracks require non-negative ids");
    Track& t = by_id[d.id];
    t.id = d.id;
    t.boxes.push_back(d);
  }
  std::vector<Track> out;
  out.reserve(by_id.size());
  for (auto& [id, t] : by_id) {
    std::sort(t.boxes.begin(), t.boxes.end(),
              [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
    for (std::size_t i = 1; i < t.boxes.size(); ++i) {
      if (t.boxes[i].frame == t.boxes[i - 1].frame)
        throw DataError(label + ": track " + std::to_string(id) + " has two boxes in frame " +
                        std::to_string(t.boxes[i].frame));
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Detection> flatten_tracks(const std::vector<Track>& tracks) {
  std::vector<Detection> out;
  for (const Track& t : tracks) {
    for (Detection d : t.boxes) {
      d.id = t.id;
      out.push_back(d);
    }
  }
  std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.id < b.id;
  });
  return out;
}

namespace {

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) row_fail(path, lineno, "expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key.empty()) row_fail(path, lineno, "empty key");
    if (!out.emplace(key, val).second) row_fail(path, lineno, "duplicate key '" + key + "'");
  }
  return out;
}

std::string take_kv(std::map<std::string, std::string>& kv, const std::string& key,
                    const std::string& path) {
  auto it = kv.find(key);
  if (it == kv.end()) throw DataError(path + ": missing key '" + key + "'");
  std::string v = it->second;
  kv.erase(it);
  return v;
}

}  // namespace

Sequence load_sequence(const std::string& dir, BoxFormat fmt,
                       const std::set<std::string>& kitti_types) {
  const std::string meta_path = (fs::path(dir) / "seq.txt").string();
  std::map<std::string, std::string> kv = parse_kv_file(meta_path);

  Sequence seq;
  seq.name = take_kv(kv, "name", meta_path);
  seq.frame_count = parse_int(take_kv(kv, "frames", meta_path), meta_path, 0);
  seq.width = parse_int(take_kv(kv, "width", meta_path), meta_path, 0);
  seq.height = parse_int(take_kv(kv, "height", meta_path), meta_path, 0);
  if (!kv.empty()) throw DataError(meta_path + ": unknown key '" + kv.begin()->first + "'");
  if (seq.frame_count <= 0) throw DataError(meta_path + ": frames must be positive");
  if (seq.width <= 0 || seq.height <= 0) throw DataError(meta_path + ": bad image size");

  ParseContext ctx;
  ctx.format = fmt;
  ctx.width = seq.width;
  ctx.height = seq.height;
  ctx.kitti_types = kitti_types;

  const std::string det_path = (fs::path(dir) / "det.txt").string();
  if (fs::exists(det_path)) {
    std::ifstream in(det_path);
    if (!in) throw DataError("cannot open: " + det_path);
    ctx.label = det_path;
    seq.detections = group_by_frame(parse_boxes(in, ctx), seq.frame_count);
  } else {
    seq.detections.assign(static_cast<std::size_t>(seq.frame_count), {});
  }

  const std::string gt_path = (fs::path(dir) / "gt.txt").string();
  if (fs::exists(gt_path)) {
    std::ifstream in(gt_path);
    if (!in) throw DataError("cannot open: " + gt_path);
    ctx.label = gt_path;
    seq.gt = group_to_tracks(parse_boxes(in, ctx), gt_path);
  }
  return seq;
}

void write_sequence(const std::string& dir, const Sequence& seq, BoxFormat fmt) {
  fs::create_directories(dir);
  {
    std::ofstream out((fs::path(dir) / "seq.txt").string(), std::ios::trunc);
    if (!out) throw DataError("cannot write: " + dir + "/seq.txt");
    out << "name=" << seq.name << "\nframes=" << seq.frame_count << "\nwidth=" << seq.width
        << "\nheight=" << seq.height << '\n';
  }
  ParseContext ctx;
  ctx.format = fmt;
  ctx.width = seq.width;
  ctx.height = seq.height;
  if (!seq.gt.empty()) {
    std::ofstream out((fs::path(dir) / "gt.txt").string(), std::ios::trunc);
    if (!out) throw DataError("cannot write: " + dir + "/gt.txt");
    write_boxes(out, flatten_tracks(seq.gt), ctx);
  }
  bool any_det = false;
  for (const auto& f : seq.detections) any_det = any_det || !f.empty();
  if (any_det) {
    std::ofstream out((fs::path(dir) / "det.txt").string(), std::ios::trunc);
    if (!out) throw DataError("cannot write: " + dir + "/det.txt");
    std::vector<Detection> flat;
    for (const auto& f : seq.detections) flat.insert(flat.end(), f.begin(), f.end());
    write_boxes(out, flat, ctx);
  }
}

std::vector<Sequence> load_dataset(const std::string& dir, BoxFormat fmt,
                                   const std::set<std::string>& kitti_types) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<std::string> subdirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "seq.txt"))
      subdirs.push_back(entry.path().string());
  }
  std::sort(subdirs.begin(), subdirs.end());
  if (subdirs.empty()) throw DataError("no sequences found under: " + dir);
  std::vector<Sequence> out;
  out.reserve(subdirs.size());
  for (const std::string& sd : subdirs) out.push_back(load_sequence(sd, fmt, kitti_types));
  return out;
}

void write_tracks_file(const std::string& path, const std::vector<Track>& tracks,
                       const Sequence& seq, BoxFormat fmt) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write: " + path);
  ParseContext ctx;
  ctx.format = fmt;
  ctx.width = seq.width;
  ctx.height = seq.height;
  write_boxes(out, flatten_tracks(tracks), ctx);
}

std::vector<Track> load_tracks_file(const std::string& path, const Sequence& seq, BoxFormat fmt,
                                    const std::set<std::string>& kitti_types) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  ParseContext ctx;
  ctx.format = fmt;
  ctx.width = seq.width;
  ctx.height = seq.height;
  ctx.kitti_types = kitti_types;
  ctx.label = path;
  return group_to_tracks(parse_boxes(in, ctx), path);
}

}  // namespace motrack
