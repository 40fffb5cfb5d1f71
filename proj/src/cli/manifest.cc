#include "ukit/cli/manifest.h"

#include <ctime>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "ukit/errors.h"
#include "ukit/io.h"

namespace ukit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kPending: return "pending";
    case RunStatus::kDone: return "done";
    case RunStatus::kFailed: return "failed";
  }
  return "pending";
}

RunStatus run_status_from_string(const std::string& s) {
  if (s == "pending") return RunStatus::kPending;
  if (s == "done") return RunStatus::kDone;
  if (s == "failed") return RunStatus::kFailed;
  throw ConfigError("unknown run status '" + s + "'");
}

namespace {

json entry_to_json(const ManifestEntry& e) {
  json j;
  j["status"] = to_string(e.status);
  j["path"] = e.path;
  j["started"] = e.started;
  j["finished"] = e.finished;
  if (!e.error.empty()) j["error"] = e.error;
  j["info"] = e.info;
  return j;
}

ManifestEntry entry_from_json(const json& j) {
  ManifestEntry e;
  e.status = run_status_from_string(j.at("status").get<std::string>());
  e.path = j.at("path").get<std::string>();
  e.started = j.value("started", "");
  e.finished = j.value("finished", "");
  e.error = j.value("error", "");
  e.info = j.value("info", json::object());
  return e;
}

}  // namespace

Manifest::Manifest(fs::path root) : root_(std::move(root)) {
  data_ = json{{"models", json::object()}, {"runs", json::object()}};
  if (fs::exists(file())) {
    try {
      json loaded = json::parse(read_file(file()));
      if (loaded.contains("models")) data_["models"] = loaded["models"];
      if (loaded.contains("runs")) data_["runs"] = loaded["runs"];
    } catch (const json::exception& e) {
      throw ConfigError("corrupt manifest " + file().string() + ": " + e.what());
    }
  }
}

void Manifest::put(const char* section, const std::string& hash, const ManifestEntry& entry) {
  std::lock_guard lock(mutex_);
  data_[section][hash] = entry_to_json(entry);
  write_file_atomic(file(), data_.dump(2) + "\n");
}

std::optional<ManifestEntry> Manifest::get(const char* section, const std::string& hash) const {
  std::lock_guard lock(mutex_);
  const json& s = data_.at(section);
  auto it = s.find(hash);
  if (it == s.end()) return std::nullopt;
  return entry_from_json(*it);
}

std::vector<std::pair<std::string, ManifestEntry>> Manifest::list(const char* section) const {
  std::lock_guard lock(mutex_);
  std::vector<std::pair<std::string, ManifestEntry>> out;
  for (const auto& [k, v] : data_.at(section).items()) out.emplace_back(k, entry_from_json(v));
  return out;
}

std::optional<ManifestEntry> Manifest::run(const std::string& hash) const {
  return get("runs", hash);
}
std::optional<ManifestEntry> Manifest::model(const std::string& hash) const {
  return get("models", hash);
}
void Manifest::put_run(const std::string& hash, const ManifestEntry& entry) {
  put("runs", hash, entry);
}
void Manifest::put_model(const std::string& hash, const ManifestEntry& entry) {
  put("models", hash, entry);
}
std::vector<std::pair<std::string, ManifestEntry>> Manifest::runs() const { return list("runs"); }
std::vector<std::pair<std::string, ManifestEntry>> Manifest::models() const {
  return list("models");
}

std::string utc_timestamp() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

}  // namespace ukit::cli
