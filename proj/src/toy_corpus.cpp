#include "glyphforge/toy_corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "glyphforge/annotation_io.hpp"
#include "glyphforge/augment.hpp"

namespace glyphforge {

namespace {

using Canvas = std::array<Raster<double>, 3>;

struct Color {
  double c[3];
  double luma() const { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }
};

Color tinted(double luma, Rng& rng, double tint) {
  Color col{};
  for (double& v : col.c) v = std::clamp(luma + rng.uniform(-tint, tint), 0.0, 255.0);
  return col;
}

// Text luma at `contrast` away from the local background, flipped when it
// would leave [0, 255].
double text_luma(double bg, double contrast, Rng& rng) {
  bool darker = bg > 128 ? rng.bernoulli(0.85) : rng.bernoulli(0.15);
  if (darker && bg - contrast < 0) darker = false;
  if (!darker && bg + contrast > 255) darker = true;
  return std::clamp(darker ? bg - contrast : bg + contrast, 0.0, 255.0);
}

double segment_distance(double px, double py, const Point& a, const Point& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a.x + t * dx - px, ey = a.y + t * dy - py;
  return std::sqrt(ex * ex + ey * ey);
}

void paint_rect(Canvas& canvas, int x0, int y0, int x1, int y1, const Color& col) {
  const int h = static_cast<int>(canvas[0].rows()), w = static_cast<int>(canvas[0].cols());
  x0 = std::clamp(x0, 0, w), x1 = std::clamp(x1, 0, w), y0 = std::clamp(y0, 0, h), y1 = std::clamp(y1, 0, h);
  if (x1 <= x0 || y1 <= y0) return;
  for (int c = 0; c < 3; ++c) canvas[c].block(y0, x0, y1 - y0, x1 - x0).setConstant(col.c[c]);
}

struct Style {
  bool soft = false;           // anti-aliased glyph edges
  double line_height_lo = 0.13;
  double line_height_hi = 0.2;
  int max_lines = 4;
  int min_lines = 2;
  double banner_prob = 0.5;
  double contrast_lo = 80;
  double contrast_hi = 160;
};

// Renders one character into the canvas; returns the glyph coverage in the cell.
void render_char(Canvas& canvas, BinaryMask& glyph_truth, int x0, int y0, int cw, int ch, const Color& ink,
                 const Style& style, Rng& rng) {
  const int h = static_cast<int>(canvas[0].rows()), w = static_cast<int>(canvas[0].cols());
  const double stroke = std::max(1.6, ch * 0.16);
  const double inset = stroke * 0.5 + 1.0;
  const double ax0 = x0 + inset, ax1 = x0 + cw - 1 - inset;
  const double ay0 = y0 + inset, ay1 = y0 + ch - 1 - inset;
  std::array<Point, 9> anchors;
  for (int i = 0; i < 9; ++i)
    anchors[static_cast<std::size_t>(i)] = {ax0 + (ax1 - ax0) * (i % 3) * 0.5, ay0 + (ay1 - ay0) * (i / 3) * 0.5};
  const int strokes = static_cast<int>(rng.uniform_int(2, 4));
  std::vector<std::pair<Point, Point>> segs;
  for (int s = 0; s < strokes; ++s) {
    const auto a = static_cast<std::size_t>(rng.uniform_int(0, 8));
    auto b = static_cast<std::size_t>(rng.uniform_int(0, 7));
    if (b >= a) ++b;
    segs.emplace_back(anchors[a], anchors[b]);
  }
  for (int y = std::max(0, y0); y < std::min(h, y0 + ch); ++y)
    for (int x = std::max(0, x0); x < std::min(w, x0 + cw); ++x) {
      double d = 1e9;
      for (const auto& [a, b] : segs) d = std::min(d, segment_distance(x, y, a, b));
      double cover;
      if (style.soft)
        cover = std::clamp(stroke * 0.5 + 0.5 - d, 0.0, 1.0);
      else
        cover = d <= stroke * 0.5 ? 1.0 : 0.0;
      if (cover <= 0) continue;
      for (int c = 0; c < 3; ++c) canvas[c](y, x) = cover * ink.c[c] + (1 - cover) * canvas[c](y, x);
      if (cover >= 0.5) glyph_truth(y, x) = 1;
    }
}

double local_luma(const Canvas& canvas, int x0, int y0, int x1, int y1) {
  const int h = static_cast<int>(canvas[0].rows()), w = static_cast<int>(canvas[0].cols());
  x0 = std::clamp(x0, 0, w - 1), x1 = std::clamp(x1, x0 + 1, w), y0 = std::clamp(y0, 0, h - 1),
  y1 = std::clamp(y1, y0 + 1, h);
  double m[3];
  for (int c = 0; c < 3; ++c) m[c] = canvas[c].block(y0, x0, y1 - y0, x1 - x0).mean();
  return 0.299 * m[0] + 0.587 * m[1] + 0.114 * m[2];
}

void render_text(Canvas& canvas, ToyScene& scene, const Style& style, Rng& rng) {
  const int h = static_cast<int>(canvas[0].rows()), w = static_cast<int>(canvas[0].cols());
  const int lines = static_cast<int>(rng.uniform_int(style.min_lines, style.max_lines));
  int y = static_cast<int>(rng.uniform_int(1, std::max(1, h / 10)));
  for (int line = 0; line < lines; ++line) {
    const int ch = std::max(7, static_cast<int>(std::lround(h * rng.uniform(style.line_height_lo, style.line_height_hi))));
    if (y + ch > h - 1) break;
    const int cw = std::max(5, static_cast<int>(std::lround(ch * rng.uniform(0.55, 0.8))));
    int x = static_cast<int>(rng.uniform_int(1, std::max(1, w / 8)));

    // Lay out words first so the banner can span them.
    std::vector<std::vector<int>> words;
    int cursor = x;
    while (true) {
      const int len = static_cast<int>(rng.uniform_int(2, 5));
      if (cursor + cw * 2 + 1 > w - 1) break;
      std::vector<int> xs;
      for (int i = 0; i < len && cursor + cw <= w - 1; ++i) {
        xs.push_back(cursor);
        cursor += cw + 1;
      }
      if (xs.size() < 2) break;
      words.push_back(std::move(xs));
      cursor += std::max(2, static_cast<int>(std::lround(ch * 0.4)));
      if (rng.bernoulli(0.25)) break;
    }
    if (words.empty()) break;
    const int line_x1 = words.back().back() + cw;

    if (rng.bernoulli(style.banner_prob)) {
      const double bg = local_luma(canvas, x - 2, y - 2, line_x1 + 2, y + ch + 2);
      double banner = rng.uniform(20, 235);
      if (std::abs(banner - bg) < 40) banner = bg > 128 ? bg - 70 : bg + 70;
      paint_rect(canvas, x - 3, y - 2, line_x1 + 3, y + ch + 2, tinted(banner, rng, 20));
    }
    const double bg = local_luma(canvas, x, y, line_x1, y + ch);
    const Color ink = tinted(text_luma(bg, rng.uniform(style.contrast_lo, style.contrast_hi), rng), rng, 10);

    static constexpr char kLetters[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    for (const auto& xs : words) {
      std::string word;
      for (int cx : xs) {
        render_char(canvas, scene.glyph_truth, cx, y, cw, ch, ink, style, rng);
        scene.char_boxes.push_back(QuadBox::from_rect(cx - 0.5, y - 0.5, cx + cw - 0.5, y + ch - 0.5));
        word.push_back(kLetters[rng.uniform_int(0, 25)]);
      }
      scene.word_boxes.push_back(QuadBox::from_rect(xs.front() - 0.5, y - 0.5, xs.back() + cw - 0.5, y + ch - 0.5));
      scene.transcriptions.push_back(word);
    }
    y += ch + static_cast<int>(rng.uniform_int(2, 5));
  }
}

Image to_image(const Canvas& canvas) {
  const int h = static_cast<int>(canvas[0].rows()), w = static_cast<int>(canvas[0].cols());
  Image img(w, h, 3);
  for (int c = 0; c < 3; ++c)
    img.plane(c) = (canvas[c] + 0.5).floor().max(0.0).min(255.0).cast<std::uint8_t>();
  return img;
}

ToyScene synthetic_scene(int w, int h, Rng& rng) {
  ToyScene scene;
  scene.glyph_truth = BinaryMask::Zero(h, w);
  Canvas canvas;
  const Color base = tinted(rng.uniform(30, 230), rng, 30);
  const double gx = rng.uniform(-4, 4) / w, gy = rng.uniform(-4, 4) / h;
  for (int c = 0; c < 3; ++c) {
    canvas[c].resize(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) canvas[c](y, x) = base.c[c] + gx * x + gy * y;
  }
  Style style;
  style.min_lines = 3;
  style.max_lines = 5;
  render_text(canvas, scene, style, rng);
  scene.image = to_image(canvas);
  return scene;
}

ToyScene real_scene(int w, int h, Rng& rng) {
  ToyScene scene;
  scene.glyph_truth = BinaryMask::Zero(h, w);
  Canvas canvas;
  const Color base = tinted(rng.uniform(40, 215), rng, 25);
  struct Wave {
    double amp, fx, fy, phase;
  };
  std::array<Wave, 3> waves{};
  for (auto& wv : waves) {
    const double angle = rng.uniform(0, 6.283185307179586);
    const double freq = rng.uniform(0.05, 0.25);
    wv = {rng.uniform(6, 16), freq * std::cos(angle), freq * std::sin(angle), rng.uniform(0, 6.283185307179586)};
  }
  for (int c = 0; c < 3; ++c) {
    canvas[c].resize(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double v = base.c[c];
        for (const auto& wv : waves) v += wv.amp * std::sin(wv.fx * x + wv.fy * y + wv.phase);
        canvas[c](y, x) = v;
      }
  }
  // Clutter: soft-edged ellipses and bars.
  const int clutter = static_cast<int>(rng.uniform_int(1, 3));
  for (int k = 0; k < clutter; ++k) {
    const Color col = tinted(rng.uniform(20, 235), rng, 30);
    const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
    const double rx = rng.uniform(0.08, 0.3) * w, ry = rng.uniform(0.08, 0.3) * h;
    const bool bar = rng.bernoulli(0.5);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        const double d = bar ? std::max(std::abs(dx), std::abs(dy)) : std::sqrt(dx * dx + dy * dy);
        const double a = std::clamp((1.0 - d) * std::min(rx, ry), 0.0, 1.0);
        if (a <= 0) continue;
        for (int c = 0; c < 3; ++c) canvas[c](y, x) = a * col.c[c] + (1 - a) * canvas[c](y, x);
      }
  }
  Style style;
  style.soft = true;
  style.min_lines = 1;
  style.max_lines = 3;
  style.banner_prob = 0.3;
  style.contrast_lo = 60;
  style.contrast_hi = 140;
  render_text(canvas, scene, style, rng);

  Image img = gaussian_blur(to_image(canvas), rng.uniform(0.4, 0.9));
  const double sigma = rng.uniform(14, 24);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double shared = rng.normal(0, sigma);
      for (int c = 0; c < 3; ++c) {
        const double v = img.plane(c)(y, x) + shared + rng.normal(0, sigma * 0.25);
        img.plane(c)(y, x) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  scene.image = std::move(img);
  return scene;
}

}  // namespace

ToyScene make_toy_scene(Domain domain, int width, int height, Rng& rng) {
  if (width < 16 || height < 16) throw Error("make_toy_scene: images must be at least 16x16");
  ToyScene scene = domain == Domain::Synthetic ? synthetic_scene(width, height, rng) : real_scene(width, height, rng);
  scene.text_truth = label_map(scene.char_boxes, width, height);
  return scene;
}

std::vector<ToyScene> make_toy_corpus(Domain domain, std::size_t count, int width, int height, std::uint64_t seed) {
  std::vector<ToyScene> out;
  out.reserve(count);
  const std::uint64_t domain_key = domain == Domain::Synthetic ? 0x5157u : 0x4EA1u;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = Rng::split(seed ^ domain_key, i);
    out.push_back(make_toy_scene(domain, width, height, rng));
  }
  return out;
}

}  // namespace glyphforge
