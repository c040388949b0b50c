#include "glyphforge/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace glyphforge {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment outside of quotes.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("config key '" + key + "': cannot parse '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Field {
  std::function<void(GlobalConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const GlobalConfig&)> get;
};

template <typename T>
Field number_field(T TrainConfig::*member) {
  return {[member](GlobalConfig& c, const std::string& k, const std::string& v) { c.train.*member = parse_number<T>(k, v); },
          [member](const GlobalConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return fmt(c.train.*member);
            else
              return std::to_string(c.train.*member);
          }};
}

template <typename S, typename T>
Field nested_number(S TrainConfig::*block, T S::*member) {
  return {[block, member](GlobalConfig& c, const std::string& k, const std::string& v) {
            (c.train.*block).*member = parse_number<T>(k, v);
          },
          [block, member](const GlobalConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return fmt((c.train.*block).*member);
            else
              return std::to_string((c.train.*block).*member);
          }};
}

Field bool_field(bool TrainConfig::*member) {
  return {[member](GlobalConfig& c, const std::string& k, const std::string& v) { c.train.*member = parse_bool(k, v); },
          [member](const GlobalConfig& c) { return std::string(c.train.*member ? "true" : "false"); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["seed"] = number_field(&TrainConfig::seed);
    t["workers"] = number_field(&TrainConfig::workers);
    t["log_level"] = {[](GlobalConfig& c, const std::string&, const std::string& v) { c.log_level = v; },
                      [](const GlobalConfig& c) { return c.log_level; }};
    t["out_dir"] = {[](GlobalConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
                    [](const GlobalConfig& c) { return c.out_dir; }};

    t["train.total_steps"] = number_field(&TrainConfig::total_steps);
    t["train.batch_size"] = number_field(&TrainConfig::batch_size);
    t["train.ema_alpha"] = number_field(&TrainConfig::ema_alpha);
    t["train.base_lr_coeff"] = number_field(&TrainConfig::base_lr_coeff);
    t["train.warmup_fraction"] = number_field(&TrainConfig::warmup_fraction);
    t["train.lr_floor"] = number_field(&TrainConfig::lr_floor);
    t["train.binarize_threshold"] = number_field(&TrainConfig::binarize_threshold);
    t["train.weight_decay"] = number_field(&TrainConfig::weight_decay);
    t["train.adam_beta1"] = number_field(&TrainConfig::adam_beta1);
    t["train.adam_beta2"] = number_field(&TrainConfig::adam_beta2);
    t["train.adam_eps"] = number_field(&TrainConfig::adam_eps);
    t["train.sgd_momentum"] = number_field(&TrainConfig::sgd_momentum);
    t["train.prefetch"] = number_field(&TrainConfig::prefetch);
    t["train.use_tim"] = bool_field(&TrainConfig::use_tim);
    t["train.synthetic_loss"] = bool_field(&TrainConfig::synthetic_loss);
    t["train.prior_init"] = bool_field(&TrainConfig::prior_init);
    t["train.recompute_glyph_masks"] = bool_field(&TrainConfig::recompute_glyph_masks);
    t["train.optimizer"] = {
        [](GlobalConfig& c, const std::string&, const std::string& v) { c.train.optimizer = parse_optimizer(v); },
        [](const GlobalConfig& c) { return std::string(to_string(c.train.optimizer)); }};
    t["train.mode"] = {[](GlobalConfig& c, const std::string&, const std::string& v) { c.train.mode = parse_train_mode(v); },
                       [](const GlobalConfig& c) { return std::string(to_string(c.train.mode)); }};
    t["train.granularity"] = {
        [](GlobalConfig& c, const std::string&, const std::string& v) { c.train.granularity = parse_granularity(v); },
        [](const GlobalConfig& c) { return std::string(to_string(c.train.granularity)); }};

    t["gamma.start"] = number_field(&TrainConfig::gamma_start);
    t["gamma.end"] = number_field(&TrainConfig::gamma_end);
    t["entropy.form"] = {
        [](GlobalConfig& c, const std::string&, const std::string& v) { c.train.entropy_form = parse_entropy_form(v); },
        [](const GlobalConfig& c) { return std::string(to_string(c.train.entropy_form)); }};

    t["glyph.kmeans_max_iters"] = nested_number(&TrainConfig::glyph, &GlyphParams::kmeans_max_iters);
    t["glyph.kmeans_tol"] = nested_number(&TrainConfig::glyph, &GlyphParams::kmeans_tol);
    t["glyph.min_intensity_range"] = nested_number(&TrainConfig::glyph, &GlyphParams::min_intensity_range);
    t["glyph.border_vote_margin"] = nested_number(&TrainConfig::glyph, &GlyphParams::border_vote_margin);

    t["tim.num_candidates"] = nested_number(&TrainConfig::tim, &TimParams::num_candidates);
    t["tim.side_fraction_min"] = nested_number(&TrainConfig::tim, &TimParams::side_fraction_min);
    t["tim.side_fraction_max"] = nested_number(&TrainConfig::tim, &TimParams::side_fraction_max);

    t["aug.flip_prob"] = nested_number(&TrainConfig::aug, &AugmentationSpec::flip_prob);
    t["aug.scale_min"] = nested_number(&TrainConfig::aug, &AugmentationSpec::scale_min);
    t["aug.scale_max"] = nested_number(&TrainConfig::aug, &AugmentationSpec::scale_max);
    t["aug.brightness"] = nested_number(&TrainConfig::aug, &AugmentationSpec::brightness);
    t["aug.contrast"] = nested_number(&TrainConfig::aug, &AugmentationSpec::contrast);
    t["aug.blur_sigma_max"] = nested_number(&TrainConfig::aug, &AugmentationSpec::blur_sigma_max);
    t["aug.grayscale_prob"] = nested_number(&TrainConfig::aug, &AugmentationSpec::grayscale_prob);
    return t;
  }();
  return table;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out.emplace_back(section.empty() ? key : section + "." + key, value);
  }
  return out;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

void apply_config(GlobalConfig& config, const KeyValues& pairs) {
  const auto& table = fields();
  for (const auto& [key, value] : pairs) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->second.set(config, key, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

KeyValues to_key_values(const GlobalConfig& config) {
  KeyValues out;
  for (const auto& [key, field] : fields()) out.emplace_back(key, field.get(config));
  return out;
}

}  // namespace glyphforge
