#include <doctest.h>

#include "glyphforge/domain_eval.hpp"
#include "glyphforge/toy_corpus.hpp"
#include "glyphforge/worker_pool.hpp"
#include "oracles.hpp"

using namespace glyphforge;

namespace {

struct Corpora {
  std::vector<LabeledImage> synthetic;
  std::vector<Image> synthetic_images;
  std::vector<Image> real;
};

Corpora corpora(std::size_t n, std::uint64_t seed) {
  Corpora c;
  for (auto& s : make_toy_corpus(Domain::Synthetic, n, 64, 64, seed)) {
    c.synthetic.push_back({s.image, s.char_boxes});
    c.synthetic_images.push_back(s.image);
  }
  for (auto& s : make_toy_corpus(Domain::Real, n, 64, 64, seed + 1)) c.real.push_back(s.image);
  return c;
}

}  // namespace

TEST_CASE("domain features are normalized histograms") {
  Rng rng(81);
  const Eigen::VectorXd f = domain_features(oracle::random_image(rng, 40, 30, 3));
  REQUIRE(f.size() == kDomainFeatureCount);
  CHECK(f.head(kIntensityBins).sum() == doctest::Approx(1.0));
  CHECK(f.segment(kIntensityBins, kGradientBins).sum() == doctest::Approx(1.0));
  CHECK(f.minCoeff() >= 0.0);
  CHECK(f.tail(kEdgeGrid * kEdgeGrid).maxCoeff() <= 1.0);

  const Eigen::VectorXd flat = domain_features(Image(16, 16, 3, 255));
  CHECK(flat(kIntensityBins - 1) == 1.0);
  CHECK(flat(kIntensityBins) == 1.0);
  CHECK(flat.tail(kEdgeGrid * kEdgeGrid).isZero());
}

TEST_CASE("identical domains are rejected") {
  const Corpora c = corpora(30, 82);
  Rng rng(1);
  CHECK_THROWS_AS(train_domain_classifier(c.real, c.real, rng), ClassifierNotSeparable);
}

TEST_CASE("toy domains separate and training is reproducible") {
  const Corpora c = corpora(60, 83);
  Rng a(5), b(5);
  const DomainClassifier ca = train_domain_classifier(c.synthetic_images, c.real, a);
  WorkerPool pool(3);
  const DomainClassifier cb = train_domain_classifier(c.synthetic_images, c.real, b, {}, &pool);
  CHECK(ca.holdout_accuracy >= 0.9);
  CHECK(ca.weights == cb.weights);
  CHECK(ca.bias == cb.bias);
}

TEST_CASE("reference mixers bound the estimate") {
  const Corpora c = corpora(60, 84);
  Rng rng(6);
  const DomainClassifier clf = train_domain_classifier(c.synthetic_images, c.real, rng);
  const DcaOptions opt{200, false};
  const DcaReport real = dca(clf, make_mixer("real"), c.synthetic, c.real, 1, opt);
  const DcaReport synth = dca(clf, make_mixer("synthetic"), c.synthetic, c.real, 1, opt);
  CHECK(real.dca >= 0.95);
  CHECK(synth.dca <= 0.05);
  CHECK(real.pairs_evaluated == 200);
  for (const auto& name : {"glyphmix", "mixup", "cutmix", "classmix"}) {
    const DcaReport r = dca(clf, make_mixer(name), c.synthetic, c.real, 1, opt);
    CHECK(r.dca >= 0.0);
    CHECK(r.dca <= real.dca);
  }
}

TEST_CASE("dca ignores the worker count and counts failing pairs") {
  const Corpora c = corpora(40, 85);
  Rng rng(7);
  const DomainClassifier clf = train_domain_classifier(c.synthetic_images, c.real, rng);
  WorkerPool pool(4);
  const DcaOptions opt{300, true};
  const DcaReport a = dca(clf, make_mixer("glyphmix"), c.synthetic, c.real, 9, opt);
  const DcaReport b = dca(clf, make_mixer("glyphmix"), c.synthetic, c.real, 9, opt, &pool);
  CHECK(a.dca == b.dca);

  int calls = 0;
  const Mixer flaky{"flaky", [&calls](const LabeledImage&, const Image& real, const Image&, Rng& r) {
                      ++calls;
                      if (r.bernoulli(0.3)) throw Error("mixer failed");
                      return real;
                    }};
  const DcaReport f = dca(clf, flaky, c.synthetic, c.real, 9, DcaOptions{100, false});
  CHECK(f.pairs_evaluated + f.pairs_skipped == 100);
  CHECK(f.pairs_skipped > 0);
  CHECK(calls == 100);
}

TEST_CASE("disjoint Monte-Carlo estimates agree") {
  const Corpora c = corpora(60, 86);
  Rng rng(8);
  const DomainClassifier clf = train_domain_classifier(c.synthetic_images, c.real, rng);
  const DcaReport a = dca(clf, make_mixer("cutmix"), c.synthetic, c.real, 100);
  const DcaReport b = dca(clf, make_mixer("cutmix"), c.synthetic, c.real, 200);
  CHECK(std::abs(a.dca - b.dca) < 0.03);
  const DcaReport ex = dca_exhaustive(clf, make_mixer("real"), std::span(c.synthetic).first(5), c.real, 1);
  CHECK(ex.pairs_evaluated == 5 * c.real.size());
  CHECK_THROWS_AS(make_mixer("stylize"), Error);
}
