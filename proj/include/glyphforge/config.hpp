#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "glyphforge/student_teacher.hpp"

namespace glyphforge {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Ordered key/value pairs. Keys carry their section prefix ("gamma.start").
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat TOML-style text: `key = value` lines, `[section]` headers that
/// prefix following keys, `#` comments. Values may be double-quoted.
KeyValues parse_key_values(const std::string& text);
KeyValues read_config_file(const std::filesystem::path& path);

struct GlobalConfig {
  std::string log_level = "info";
  std::string out_dir;
  TrainConfig train;  // carries seed, workers and every module parameter block
};

/// Applies pairs in order; later pairs win. Unknown keys and unparsable
/// values throw ConfigError naming the key.
void apply_config(GlobalConfig& config, const KeyValues& pairs);

/// Every key apply_config understands, with the current value.
KeyValues to_key_values(const GlobalConfig& config);

}  // namespace glyphforge
