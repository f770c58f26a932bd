#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "motrack/augment.hpp"
#include "motrack/box_embed.hpp"
#include "motrack/losses.hpp"
#include "motrack/synthetic.hpp"
#include "motrack/tracker.hpp"
#include "motrack/tracklet_embed.hpp"
#include "motrack/trainer.hpp"

namespace motrack {

/// Every tunable of the pipeline in one place. Field defaults are the single
/// source of truth; the registry below exposes them as flat dotted keys.
struct RunConfig {
  SyntheticConfig synth;
  int synth_sequences = 4;
  BoxEmbedConfig box_model;
  TrackletEmbedConfig tracklet_model;
  LossConfig loss;
  TrainConfig train;
  AugmentConfig augment;
  TrackerConfig tracker;
  double eval_iou = 0.5;
};

/// Maps flat `section.key` names onto RunConfig fields. Values are parsed
/// strictly (full-token numbers, true/false/1/0 booleans); unknown keys and
/// malformed values raise ConfigError. Defaults are captured from the bound
/// struct at construction, so `help()` always reflects reality.
class ConfigRegistry {
 public:
  explicit ConfigRegistry(RunConfig* target);

  void set(const std::string& key, const std::string& value);
  /// Reads a key=value file ('#' comments, blank lines allowed).
  void load_file(const std::string& path);
  /// Applies "key=value" strings, e.g. from command-line overrides.
  void apply_overrides(const std::vector<std::string>& assignments);
  std::string help() const;
  std::vector<std::string> keys() const;
  /// The bound config, echoed as sorted "key=value" lines (current values).
  std::string dump() const;

 private:
  struct Entry {
    std::string key;
    std::string type;
    std::string default_value;
    std::string description;
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
  };
  void add_int(const std::string& key, int* slot, const std::string& description);
  void add_double(const std::string& key, double* slot, const std::string& description);
  void add_bool(const std::string& key, bool* slot, const std::string& description);
  void add_mode(const std::string& key, TrackerMode* slot, const std::string& description);

  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

int parse_config_int(const std::string& value, const std::string& what);
double parse_config_double(const std::string& value, const std::string& what);
bool parse_config_bool(const std::string& value, const std::string& what);

}  // namespace motrack
