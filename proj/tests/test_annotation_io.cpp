#include <doctest.h>

#include "glyphforge/annotation_io.hpp"
#include "oracles.hpp"

using namespace glyphforge;

namespace {

AnnotationSet seven_two() {
  AnnotationSet a;
  a.image_path = "img/0001.png";
  for (int i = 0; i < 7; ++i) a.char_boxes.push_back(QuadBox::from_rect(i * 4.0, 1, i * 4.0 + 3, 6));
  a.word_boxes = {QuadBox::from_rect(0, 1, 11, 6), QuadBox::from_rect(12, 1, 27, 6)};
  a.transcriptions = std::vector<std::string>{"abc", "defg"};
  return a;
}

}  // namespace

TEST_CASE("empty input parses to no records") {
  const auto parsed = parse_annotations_text("");
  CHECK(parsed.records.empty());
  CHECK(parsed.dropped_boxes == 0);
  CHECK(parse_annotations_text("\n  \n").records.empty());
}

TEST_CASE("write then parse keeps box counts and values") {
  const std::vector<AnnotationSet> in{seven_two()};
  const auto parsed = parse_annotations_text(format_annotations(in));
  REQUIRE(parsed.records.size() == 1);
  CHECK(parsed.records[0].char_boxes.size() == 7);
  CHECK(parsed.records[0].word_boxes.size() == 2);
  CHECK(parsed.records[0] == in[0]);
}

TEST_CASE("round trip is identity on random valid records") {
  Rng rng(21);
  std::vector<AnnotationSet> in;
  for (int r = 0; r < 20; ++r) {
    AnnotationSet a;
    a.image_path = "scene_" + std::to_string(r) + ".jpg";
    const int nc = static_cast<int>(rng.uniform_int(0, 6));
    for (int i = 0; i < nc; ++i) a.char_boxes.push_back(oracle::random_convex_quad(rng, 50, 40));
    for (int i = 0; i < 2; ++i) {
      QuadBox q = oracle::random_convex_quad(rng, 50, 40);
      q.lt.x += rng.uniform() * 1e-3;  // non-dyadic coordinates must survive too
      a.word_boxes.push_back(q);
    }
    if (r % 2) a.transcriptions = std::vector<std::string>{"x", "\"quoted\""};
    in.push_back(a);
  }
  const auto once = parse_annotations_text(format_annotations(in));
  CHECK(once.records == in);
  CHECK(parse_annotations_text(format_annotations(once.records)).records == in);
}

TEST_CASE("invalid boxes are dropped and counted") {
  const std::string three = R"({"image_path":"a.png","char_boxes":[[[0,0],[0,1],[1,0]]]})";
  auto parsed = parse_annotations_text(three + "\n");
  CHECK(parsed.records.empty());
  CHECK(parsed.dropped_boxes == 1);
  CHECK(parsed.dropped_records == 1);

  const std::string mixed =
      R"({"image_path":"b.png","char_boxes":[[[0,0],[0,4],[4,0],[4,4]],[[0,0],[0,4],[4,4],[4,0]]],"word_boxes":[]})";
  parsed = parse_annotations_text(mixed);
  REQUIRE(parsed.records.size() == 1);
  CHECK(parsed.records[0].char_boxes.size() == 1);  // the second box is self-intersecting
  CHECK(parsed.dropped_boxes == 1);
  CHECK(parsed.dropped_records == 0);
}

TEST_CASE("malformed lines report their line number") {
  const std::string ok = R"({"image_path":"a.png","word_boxes":[[[0,0],[0,4],[4,0],[4,4]]]})";
  try {
    parse_annotations_text(ok + "\n" + ok + "\n{not json\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse_annotations_text(ok + "\n" + R"({"char_boxes":[]})" + "\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("image_path") != std::string::npos);
  }
}

TEST_CASE("granularity selection") {
  const AnnotationSet a = seven_two();
  CHECK(select_boxes(a, Granularity::Char).size() == 7);
  CHECK(select_boxes(a, Granularity::Word).size() == 2);
  AnnotationSet words_only = a;
  words_only.char_boxes.clear();
  CHECK_THROWS_AS(select_boxes(words_only, Granularity::Char), AbsentGranularity);
  CHECK(parse_granularity("word") == Granularity::Word);
  CHECK_THROWS_AS(parse_granularity("line"), Error);
}

TEST_CASE("label_map examples") {
  CHECK(popcount(label_map({}, 8, 8)) == 0);

  const QuadBox a = QuadBox::from_rect(0, 0, 2, 2);
  const QuadBox b = QuadBox::from_rect(4, 4, 6, 7);
  const std::vector<QuadBox> disjoint{a, b};
  CHECK(popcount(label_map(disjoint, 8, 8)) ==
        popcount(rasterize_quad(a, 8, 8)) + popcount(rasterize_quad(b, 8, 8)));

  const std::vector<QuadBox> twice{a, a};
  CHECK((label_map(twice, 8, 8) == rasterize_quad(a, 8, 8)).all());
}

TEST_CASE("label_map equals the per-pixel union oracle") {
  Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    const int w = static_cast<int>(rng.uniform_int(8, 64));
    const int h = static_cast<int>(rng.uniform_int(8, 64));
    std::vector<QuadBox> boxes;
    const int n = static_cast<int>(rng.uniform_int(0, 6));
    for (int k = 0; k < n; ++k)
      boxes.push_back(k % 2 ? oracle::random_rect(rng, w, h) : oracle::random_convex_quad(rng, w, h));
    CHECK((label_map(boxes, w, h) == oracle::raster_union(boxes, w, h)).all());
  }
}

TEST_CASE("image paths resolve next to the annotation file") {
  CHECK(resolve_image_path("/data/set/ann.jsonl", "img/a.png") == std::filesystem::path("/data/set/img/a.png"));
  CHECK(resolve_image_path("/data/set/ann.jsonl", "/abs/a.png") == std::filesystem::path("/abs/a.png"));
}
