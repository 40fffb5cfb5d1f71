#include "ukit/unlearn/taxonomy.h"

namespace ukit::unlearn {

std::string to_string(Measure m) {
  const auto bits = static_cast<std::uint8_t>(m);
  if (bits == 0) return "-";
  std::string out;
  auto append = [&](Measure flag, const char* name) {
    if (bits & static_cast<std::uint8_t>(flag)) {
      if (!out.empty()) out += "+";
      out += name;
    }
  };
  append(Measure::kLoss, "Loss");
  append(Measure::kRep, "Rep");
  append(Measure::kLogit, "Logit");
  return out;
}

std::string to_string(Corruption c) {
  switch (c) {
    case Corruption::kNone:
      return "-";
    case Corruption::kGrad:
      return "Grad";
    case Corruption::kData:
      return "Data";
    case Corruption::kModel:
      return "Model";
  }
  return "-";
}

std::string to_string(Retention r) { return r == Retention::kOriginal ? "f" : "-"; }

std::string describe(const TeacherSpec& spec) {
  return "D_f: " + to_string(spec.forget_measure) + "/" + to_string(spec.corruption) +
         "; D_r: " + to_string(spec.retain_measure) + "/" + to_string(spec.retention) + "; " +
         (spec.density == Density::kDense ? "Dense" : "Sparse") + ", " +
         (spec.placement == Placement::kInternal ? "Internal" : "External");
}

}  // namespace ukit::unlearn
