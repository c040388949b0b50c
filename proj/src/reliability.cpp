#include "glyphforge/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace glyphforge {

EntropyForm parse_entropy_form(const std::string& name) {
  if (name == "one_sided") return EntropyForm::OneSided;
  if (name == "binary") return EntropyForm::Binary;
  throw Error("unknown entropy form '" + name + "' (expected one_sided|binary)");
}

const char* to_string(EntropyForm form) { return form == EntropyForm::OneSided ? "one_sided" : "binary"; }

void GammaSchedule::validate() const {
  if (start < 0 || start > 100 || end < 0 || end > 100) throw Error("GammaSchedule: values must be in [0, 100]");
  if (total_steps < 1) throw Error("GammaSchedule: total_steps must be >= 1");
}

double gamma_at(const GammaSchedule& s, std::size_t step) {
  s.validate();
  if (step >= s.total_steps)
    throw Error("gamma_at: step " + std::to_string(step) + " out of range [0, " + std::to_string(s.total_steps) +
                ")");
  if (s.total_steps == 1) return s.start;
  if (step == s.total_steps - 1) return s.end;
  return s.start + (s.end - s.start) * static_cast<double>(step) / static_cast<double>(s.total_steps - 1);
}

EntropyMap entropy_map(const LogitMap& logits, EntropyForm form) {
  const LogitMap y = clamp_logits(logits);
  // Scalar log per element: packet and scalar paths of Eigen's log can round differently.
  auto f = [form](double v) {
    double e = -v * std::log(v);
    if (form == EntropyForm::Binary) e -= (1.0 - v) * std::log(1.0 - v);
    return e;
  };
  return y.unaryExpr(f);
}

double threshold_for_gamma(const EntropyMap& h, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 100.0)) throw Error("threshold_for_gamma: gamma must be in [0, 100]");
  if (h.size() == 0) throw Error("threshold_for_gamma: empty entropy map");
  const auto n = static_cast<std::size_t>(h.size());
  const double percentile = 100.0 - gamma;
  // Nearest rank: ceil(P / 100 * N), at least 1. The small slack keeps
  // exact products such as 50 * 4 / 100 from rounding up.
  auto rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(n) / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::vector<double> values(h.data(), h.data() + h.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

BinaryMask reliability_mask(const LogitMap& logits, double gamma, EntropyForm form) {
  const EntropyMap h = entropy_map(logits, form);
  const double zeta = threshold_for_gamma(h, gamma);
  return (h <= zeta).cast<std::uint8_t>();
}

}  // namespace glyphforge
