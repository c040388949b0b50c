#include "glyphforge/annotation_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace glyphforge {

namespace fs = std::filesystem;
using nlohmann::json;

Granularity parse_granularity(const std::string& name) {
  if (name == "char" || name == "CHAR") return Granularity::Char;
  if (name == "word" || name == "WORD") return Granularity::Word;
  throw Error("unknown granularity '" + name + "' (expected char|word)");
}

const char* to_string(Granularity g) { return g == Granularity::Char ? "char" : "word"; }

namespace {

std::optional<QuadBox> parse_box(const json& j) {
  if (!j.is_array() || j.size() != 4) return std::nullopt;
  Point pts[4];
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& p = j[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) return std::nullopt;
    pts[i] = {p[0].get<double>(), p[1].get<double>()};
  }
  QuadBox box{pts[0], pts[1], pts[2], pts[3]};
  if (!box.is_finite() || !box.is_simple()) return std::nullopt;
  return box;
}

std::vector<QuadBox> parse_box_list(const json& record, const char* key, std::size_t line,
                                    std::size_t& dropped) {
  std::vector<QuadBox> out;
  if (!record.contains(key)) return out;
  const auto& list = record.at(key);
  if (!list.is_array()) throw ParseError(line, std::string("'") + key + "' must be an array");
  for (const auto& item : list) {
    if (auto box = parse_box(item))
      out.push_back(*box);
    else
      ++dropped;
  }
  return out;
}

json box_to_json(const QuadBox& b) {
  return json::array({json::array({b.lt.x, b.lt.y}), json::array({b.lb.x, b.lb.y}),
                      json::array({b.rt.x, b.rt.y}), json::array({b.rb.x, b.rb.y})});
}

}  // namespace

ParsedAnnotations parse_annotations_text(const std::string& text) {
  ParsedAnnotations result;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(line_no, "record must be a JSON object");
    if (!record.contains("image_path") || !record["image_path"].is_string())
      throw ParseError(line_no, "record is missing 'image_path'");

    AnnotationSet set;
    set.image_path = record["image_path"].get<std::string>();
    set.char_boxes = parse_box_list(record, "char_boxes", line_no, result.dropped_boxes);
    set.word_boxes = parse_box_list(record, "word_boxes", line_no, result.dropped_boxes);
    if (record.contains("transcriptions")) {
      const auto& t = record["transcriptions"];
      if (!t.is_array()) throw ParseError(line_no, "'transcriptions' must be an array");
      std::vector<std::string> words;
      for (const auto& w : t) {
        if (!w.is_string()) throw ParseError(line_no, "transcriptions must be strings");
        words.push_back(w.get<std::string>());
      }
      set.transcriptions = std::move(words);
    }
    if (set.char_boxes.empty() && set.word_boxes.empty()) {
      ++result.dropped_records;
      continue;
    }
    result.records.push_back(std::move(set));
  }
  return result;
}

ParsedAnnotations parse_annotations(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open annotation file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_annotations_text(ss.str());
}

std::string format_annotations(std::span<const AnnotationSet> records) {
  std::string out;
  for (const auto& r : records) {
    json j;
    j["image_path"] = r.image_path;
    j["char_boxes"] = json::array();
    for (const auto& b : r.char_boxes) j["char_boxes"].push_back(box_to_json(b));
    j["word_boxes"] = json::array();
    for (const auto& b : r.word_boxes) j["word_boxes"].push_back(box_to_json(b));
    if (r.transcriptions) j["transcriptions"] = *r.transcriptions;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_annotations(const fs::path& path, std::span<const AnnotationSet> records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write annotation file '" + path.string() + "'");
  out << format_annotations(records);
}

const std::vector<QuadBox>& select_boxes(const AnnotationSet& a, Granularity g) {
  const auto& boxes = g == Granularity::Char ? a.char_boxes : a.word_boxes;
  if (boxes.empty()) throw AbsentGranularity(g);
  return boxes;
}

BinaryMask label_map(std::span<const QuadBox> boxes, int width, int height) {
  BinaryMask mask = BinaryMask::Zero(height, width);
  for (const auto& box : boxes) fill_quad(box, mask);
  return mask;
}

fs::path resolve_image_path(const fs::path& annotation_file, const std::string& image_path) {
  fs::path p(image_path);
  if (p.is_absolute()) return p;
  return annotation_file.parent_path() / p;
}

}  // namespace glyphforge
