#include "motrack/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "motrack/errors.hpp"

namespace motrack {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

int parse_config_int(const std::string& value, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    if (v < -2147483648LL || v > 2147483647LL) throw std::out_of_range("range");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected an integer, got '" + value + "'");
  }
}

double parse_config_double(const std::string& value, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected a number, got '" + value + "'");
  }
}

bool parse_config_bool(const std::string& value, const std::string& what) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(what + ": expected true/false, got '" + value + "'");
}

void ConfigRegistry::add_int(const std::string& key, int* slot, const std::string& description) {
  Entry e;
  e.key = key;
  e.type = "int";
  e.default_value = std::to_string(*slot);
  e.description = description;
  e.set = [key, slot](const std::string& v) { *slot = parse_config_int(v, key); };
  e.get = [slot]() { return std::to_string(*slot); };
  index_[key] = entries_.size();
  entries_.push_back(std::move(e));
}

void ConfigRegistry::add_double(const std::string& key, double* slot,
                                const std::string& description) {
  Entry e;
  e.key = key;
  e.type = "float";
  e.default_value = format_double(*slot);
  e.description = description;
  e.set = [key, slot](const std::string& v) { *slot = parse_config_double(v, key); };
  e.get = [slot]() { return format_double(*slot); };
  index_[key] = entries_.size();
  entries_.push_back(std::move(e));
}

void ConfigRegistry::add_bool(const std::string& key, bool* slot, const std::string& description) {
  Entry e;
  e.key = key;
  e.type = "bool";
  e.default_value = *slot ? "true" : "false";
  e.description = description;
  e.set = [key, slot](const std::string& v) { *slot = parse_config_bool(v, key); };
  e.get = [slot]() { return *slot ? std::string("true") : std::string("false"); };
  index_[key] = entries_.size();
  entries_.push_back(std::move(e));
}

void ConfigRegistry::add_mode(const std::string& key, TrackerMode* slot,
                              const std::string& description) {
  Entry e;
  e.key = key;
  e.type = "enum";
  e.default_value = tracker_mode_name(*slot);
  e.description = description;
  e.set = [slot](const std::string& v) { *slot = parse_tracker_mode(v); };
  e.get = [slot]() { return tracker_mode_name(*slot); };
  index_[key] = entries_.size();
  entries_.push_back(std::move(e));
}

ConfigRegistry::ConfigRegistry(RunConfig* c) {
  add_int("synth.sequences", &c->synth_sequences, "sequences to generate");
  add_int("synth.frames", &c->synth.frames, "frames per sequence");
  add_int("synth.objects", &c->synth.objects, "target concurrent objects");
  add_int("synth.width", &c->synth.width, "image width in pixels");
  add_int("synth.height", &c->synth.height, "image height in pixels");
  add_double("synth.speed_min", &c->synth.speed_min, "min speed, image units per frame");
  add_double("synth.speed_max", &c->synth.speed_max, "max speed, image units per frame");
  add_double("synth.accel_noise", &c->synth.accel_noise, "per-frame speed perturbation");
  add_double("synth.turn_noise", &c->synth.turn_noise, "per-frame heading perturbation, radians");
  add_double("synth.size_min", &c->synth.size_min, "min box extent");
  add_double("synth.size_max", &c->synth.size_max, "max box extent");
  add_double("synth.size_drift", &c->synth.size_drift, "per-frame relative size drift");
  add_double("synth.spawn_prob", &c->synth.spawn_prob, "per-frame spawn chance per free slot");
  add_double("synth.occlusion_iou", &c->synth.occlusion_iou,
             "overlap above which the farther box is hidden");
  add_double("synth.fn_rate", &c->synth.fn_rate, "missed-detection rate");
  add_double("synth.fp_rate", &c->synth.fp_rate, "clutter rate per true detection");
  add_double("synth.jitter_sigma", &c->synth.jitter_sigma, "detection noise sigma");

  add_int("box.blocks", &c->box_model.blocks, "graph conv blocks in the box network");
  add_int("box.channels", &c->box_model.channels, "box embedding width");
  add_int("box.att_hidden", &c->box_model.att_hidden, "hidden units in box attention");

  add_int("tracklet.recon_blocks", &c->tracklet_model.recon_blocks,
          "reconstruction blocks in the tracklet network");
  add_int("tracklet.tgc_layers", &c->tracklet_model.tgc_layers, "gated conv layers per module");
  add_int("tracklet.tgc_hidden", &c->tracklet_model.tgc_hidden, "gated conv channels");
  add_int("tracklet.kernel", &c->tracklet_model.kernel, "temporal kernel width (odd)");
  add_int("tracklet.att_hidden", &c->tracklet_model.att_hidden,
          "hidden units in tracklet attention");
  add_int("tracklet.embed_hidden", &c->tracklet_model.embed_hidden, "embedding head hidden size");
  add_int("tracklet.embed_dim", &c->tracklet_model.embed_dim, "tracklet embedding size");
  add_int("tracklet.window", &c->tracklet_model.window, "tracklet window length, frames");

  add_double("loss.margin", &c->loss.margin, "triplet margin on squared distance");
  add_double("loss.lambda_box", &c->loss.lambda_box, "attention loss weight, box network");
  add_double("loss.lambda_att", &c->loss.lambda_att, "attention loss weight, tracklet network");
  add_double("loss.lambda_rec", &c->loss.lambda_rec, "reconstruction loss weight");

  add_double("train.lr", &c->train.lr, "base learning rate");
  add_int("train.max_steps", &c->train.max_steps, "optimizer steps");
  add_int("train.batch", &c->train.batch, "windows per optimizer step");
  add_int("train.box_window", &c->train.box_window, "box training window length, frames");
  add_int("train.log_every", &c->train.log_every, "loss log interval, 0 disables");
  add_int("train.checkpoint_every", &c->train.checkpoint_every,
          "snapshot interval, 0 = final only");
  add_bool("train.f64", &c->train.use_f64, "train in double precision");
  add_int("train.overfit_windows", &c->train.overfit_windows,
          "cycle a fixed set of N windows instead of sampling, 0 disables");

  add_double("augment.flip_prob", &c->augment.flip_prob, "horizontal flip chance per window");
  add_double("augment.jitter_center", &c->augment.jitter_center, "center jitter half-range");
  add_double("augment.jitter_size", &c->augment.jitter_size, "relative size jitter half-range");
  add_double("augment.fn_rate", &c->augment.fn_rate, "training box dropout rate");
  add_double("augment.fp_rate", &c->augment.fp_rate, "training clutter rate per true box");
  add_double("augment.fp_size_min", &c->augment.fp_size_min, "injected box min extent");
  add_double("augment.fp_size_max", &c->augment.fp_size_max, "injected box max extent");
  add_int("augment.max_cuts", &c->augment.max_cuts, "max temporal cuts per track");
  add_int("augment.max_gap", &c->augment.max_gap, "max frames removed per cut");

  add_mode("tracker.mode", &c->tracker.mode, "full, box (stage 1 only) or iou baseline");
  add_int("tracker.box_window", &c->tracker.box_window, "box association window, frames");
  add_double("tracker.box_threshold", &c->tracker.box_threshold,
             "max squared embedding distance, box stage");
  add_double("tracker.tracklet_threshold", &c->tracker.tracklet_threshold,
             "max squared embedding distance, tracklet stage");
  add_double("tracker.min_confidence", &c->tracker.min_confidence, "detection confidence floor");
  add_bool("tracker.attention_gate", &c->tracker.attention_gate,
           "also require predicted attention >= 0.5");
  add_double("tracker.iou_threshold", &c->tracker.iou_threshold, "overlap baseline gate");

  add_double("eval.iou", &c->eval_iou, "overlap threshold for scoring");
}

void ConfigRegistry::set(const std::string& key, const std::string& value) {
  auto it = index_.find(key);
  if (it == index_.end()) throw ConfigError("unknown config key '" + key + "'");
  entries_[it->second].set(value);
}

void ConfigRegistry::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    try {
      set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void ConfigRegistry::apply_overrides(const std::vector<std::string>& assignments) {
  for (const std::string& a : assignments) {
    const std::size_t eq = a.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + a + "' is not of the form key=value");
    set(trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
  }
}

std::string ConfigRegistry::help() const {
  std::size_t key_w = 0, type_w = 0, def_w = 0;
  for (const Entry& e : entries_) {
    key_w = std::max(key_w, e.key.size());
    type_w = std::max(type_w, e.type.size());
    def_w = std::max(def_w, e.default_value.size());
  }
  std::ostringstream out;
  for (const Entry& e : entries_) {
    out << "  " << e.key << std::string(key_w - e.key.size() + 2, ' ') << e.type
        << std::string(type_w - e.type.size() + 2, ' ') << "[" << e.default_value << "]"
        << std::string(def_w - e.default_value.size() + 2, ' ') << e.description << "\n";
  }
  return out.str();
}

std::vector<std::string> ConfigRegistry::keys() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const Entry& e : entries_) out.push_back(e.key);
  return out;
}

std::string ConfigRegistry::dump() const {
  std::vector<std::string> lines;
  lines.reserve(entries_.size());
  for (const Entry& e : entries_) lines.push_back(e.key + "=" + e.get());
  std::sort(lines.begin(), lines.end());
  std::ostringstream out;
  for (const std::string& l : lines) out << l << "\n";
  return out.str();
}

}  // namespace motrack
