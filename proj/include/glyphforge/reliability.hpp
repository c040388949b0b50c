#pragma once

#include <cstddef>
#include <string>

#include "glyphforge/core_types.hpp"

namespace glyphforge {

/// one_sided: h = -y ln y. binary: h = -y ln y - (1 - y) ln(1 - y).
enum class EntropyForm { OneSided, Binary };

EntropyForm parse_entropy_form(const std::string& name);
const char* to_string(EntropyForm form);

using EntropyMap = Raster<double>;

/// Linear anneal of gamma (percent) from `start` at step 0 to `end` at step
/// total_steps - 1, matching np.linspace(start, end, total_steps).
struct GammaSchedule {
  double start = 80.0;
  double end = 20.0;
  std::size_t total_steps = 1;

  void validate() const;
};

double gamma_at(const GammaSchedule& schedule, std::size_t step);

/// Per-pixel entropy of clamped logits (natural log).
EntropyMap entropy_map(const LogitMap& logits, EntropyForm form = EntropyForm::OneSided);

/// The (100 - gamma)-th nearest-rank percentile of h. Pixels with h <= the
/// result are the reliable ones; they make up ceil((100 - gamma) / 100 * N)
/// pixels plus any ties.
double threshold_for_gamma(const EntropyMap& h, double gamma);

/// E_u = 1 where entropy <= threshold_for_gamma(entropy, gamma).
BinaryMask reliability_mask(const LogitMap& logits, double gamma, EntropyForm form = EntropyForm::OneSided);

}  // namespace glyphforge
