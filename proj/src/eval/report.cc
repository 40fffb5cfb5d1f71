#include "ukit/eval/report.h"

#include "ukit/errors.h"
#include "ukit/eval/metrics.h"
#include "ukit/eval/mia.h"

namespace ukit::eval {

namespace {

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> read_optional(const nlohmann::ordered_json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

EvalReport make_report(const nn::Model& model, const data::DatasetSplit& split,
                       const ReportInputs& inputs) {
  const Accuracies acc = evaluate(model, split);
  EvalReport r;
  r.acc_test = acc.acc_test;
  r.acc_f = acc.acc_f;
  r.acc_r = acc.acc_r;
  r.seconds = inputs.seconds;
  r.flos = inputs.flos;
  if (!split.del_indices.empty() && split.test_y.size() >= 10) {
    r.mia_success = mia_success(model, split);
  }
  if (inputs.shifted_test_x) {
    r.transfer_acc = accuracy(model, *inputs.shifted_test_x, split.test_y);
  }
  r.config_hash = inputs.config_hash;
  r.seed = inputs.seed;
  return r;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["acc_test"] = report.acc_test;
  j["acc_f"] = optional_number(report.acc_f);
  j["acc_r"] = report.acc_r;
  j["seconds"] = report.seconds;
  j["flos"] = report.flos;
  j["mia_success"] = optional_number(report.mia_success);
  j["transfer_acc"] = optional_number(report.transfer_acc);
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  return j;
}

EvalReport report_from_json(const nlohmann::ordered_json& j) {
  try {
    EvalReport r;
    r.acc_test = j.at("acc_test").get<double>();
    r.acc_f = read_optional(j, "acc_f");
    r.acc_r = j.at("acc_r").get<double>();
    r.seconds = j.at("seconds").get<double>();
    r.flos = j.at("flos").get<double>();
    r.mia_success = read_optional(j, "mia_success");
    r.transfer_acc = read_optional(j, "transfer_acc");
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

std::string serialize_report(const EvalReport& report) { return to_json(report).dump(2) + "\n"; }

}  // namespace ukit::eval
