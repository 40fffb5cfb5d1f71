#ifndef UKIT_EVAL_REPORT_H_
#define UKIT_EVAL_REPORT_H_

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ukit/data/dataset.h"
#include "ukit/nn/model.h"

namespace ukit::eval {

// Metric bundle for one run. Undefined metrics stay empty and serialize as
// null.
struct EvalReport {
  double acc_test = 0.0;
  std::optional<double> acc_f;
  double acc_r = 0.0;
  double seconds = 0.0;
  double flos = 0.0;
  std::optional<double> mia_success;
  std::optional<double> transfer_acc;
  std::string config_hash;
  std::uint64_t seed = 0;

  bool operator==(const EvalReport&) const = default;
};

struct ReportInputs {
  double seconds = 0.0;
  double flos = 0.0;
  // Shifted copy of the test features for the transfer metric, if any.
  std::optional<nn::Tensor> shifted_test_x;
  std::string config_hash;
  std::uint64_t seed = 0;
};

// Accuracies, membership attack success and transfer accuracy of `model`.
// mia_success is null when D_f is empty or D_test has fewer than 10 rows.
EvalReport make_report(const nn::Model& model, const data::DatasetSplit& split,
                       const ReportInputs& inputs);

// Keys in fixed order: acc_test, acc_f, acc_r, seconds, flos, mia_success,
// transfer_acc, config_hash, seed.
nlohmann::ordered_json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::ordered_json& j);
std::string serialize_report(const EvalReport& report);

}  // namespace ukit::eval

#endif  // UKIT_EVAL_REPORT_H_
