#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glyphforge/core_types.hpp"

namespace glyphforge {

enum class Granularity { Char, Word };

Granularity parse_granularity(const std::string& name);
const char* to_string(Granularity g);

/// Boxes of one synthetic image. Vertex order in files is lt, lb, rt, rb.
struct AnnotationSet {
  std::string image_path;
  std::vector<QuadBox> char_boxes;
  std::vector<QuadBox> word_boxes;
  std::optional<std::vector<std::string>> transcriptions;

  bool operator==(const AnnotationSet&) const = default;
};

struct ParsedAnnotations {
  std::vector<AnnotationSet> records;
  /// Boxes removed during validation (wrong vertex count, non-finite, self-intersecting).
  std::size_t dropped_boxes = 0;
  /// Records removed because no valid box remained.
  std::size_t dropped_records = 0;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class AbsentGranularity : public Error {
 public:
  explicit AbsentGranularity(Granularity g)
      : Error(std::string("absent granularity: annotation set has no ") + to_string(g) + " boxes"),
        granularity_(g) {}
  Granularity granularity() const { return granularity_; }

 private:
  Granularity granularity_;
};

ParsedAnnotations parse_annotations(const std::filesystem::path& path);
ParsedAnnotations parse_annotations_text(const std::string& text);

void write_annotations(const std::filesystem::path& path, std::span<const AnnotationSet> records);
std::string format_annotations(std::span<const AnnotationSet> records);

const std::vector<QuadBox>& select_boxes(const AnnotationSet& a, Granularity g);

/// Union of rasterize_quad over all boxes.
BinaryMask label_map(std::span<const QuadBox> boxes, int width, int height);

/// Resolves a record's image path relative to the annotation file location.
std::filesystem::path resolve_image_path(const std::filesystem::path& annotation_file,
                                         const std::string& image_path);

}  // namespace glyphforge
