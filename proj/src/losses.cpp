#include "ppl/losses.hpp"

namespace ppl {

const char* to_string(LossFamily family) {
  switch (family) {
    case LossFamily::CrossEntropy:
      return "ce";
    case LossFamily::Focal:
      return "focal";
    case LossFamily::Ldam:
      return "ldam";
    case LossFamily::Cri:
      return "cri";
  }
  return "ce";
}

LossFamily loss_family_from_string(const std::string& name) {
  if (name == "ce") return LossFamily::CrossEntropy;
  if (name == "focal") return LossFamily::Focal;
  if (name == "ldam") return LossFamily::Ldam;
  if (name == "cri") return LossFamily::Cri;
  throw std::invalid_argument("unknown loss family '" + name +
                              "' (expected ce|focal|ldam|cri)");
}

const char* to_string(SigmaVariant v) {
  switch (v) {
    case SigmaVariant::Zero:
      return "zero";
    case SigmaVariant::Constant:
      return "constant";
    case SigmaVariant::Linear:
      return "linear";
    case SigmaVariant::None:
      return "none";
  }
  return "linear";
}

SigmaVariant sigma_variant_from_string(const std::string& name) {
  if (name == "zero") return SigmaVariant::Zero;
  if (name == "constant") return SigmaVariant::Constant;
  if (name == "linear") return SigmaVariant::Linear;
  if (name == "none") return SigmaVariant::None;
  throw std::invalid_argument("unknown sigma variant '" + name +
                              "' (expected zero|constant|linear|none)");
}

void validate(const LossConfig& cfg) {
  if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma)) {
    throw std::invalid_argument("loss gamma must be finite and >= 0");
  }
  if (!(cfg.margin_scale >= 0.0) || !std::isfinite(cfg.margin_scale)) {
    throw std::invalid_argument("loss margin scale must be finite and >= 0");
  }
  if (!(cfg.threshold >= 0.0 && cfg.threshold < 1.0)) {
    throw std::invalid_argument("loss threshold must lie in [0,1)");
  }
}

}  // namespace ppl
