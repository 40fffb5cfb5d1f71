#ifndef UKIT_CLI_MANIFEST_H_
#define UKIT_CLI_MANIFEST_H_

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ukit::cli {

enum class RunStatus { kPending, kDone, kFailed };
std::string to_string(RunStatus s);
RunStatus run_status_from_string(const std::string& s);

struct ManifestEntry {
  RunStatus status = RunStatus::kPending;
  std::string path;  // relative to the artifact root
  std::string started;
  std::string finished;
  std::string error;
  nlohmann::json info = nlohmann::json::object();
};

// Index of every artifact under the root, stored at `root/manifest.json` and
// keyed by config hash. Keys are kept sorted, so the file does not depend on
// the order runs finish in. All writes go through one mutex and replace the
// file atomically.
class Manifest {
 public:
  explicit Manifest(std::filesystem::path root);

  std::optional<ManifestEntry> run(const std::string& hash) const;
  std::optional<ManifestEntry> model(const std::string& hash) const;
  void put_run(const std::string& hash, const ManifestEntry& entry);
  void put_model(const std::string& hash, const ManifestEntry& entry);

  std::vector<std::pair<std::string, ManifestEntry>> runs() const;
  std::vector<std::pair<std::string, ManifestEntry>> models() const;

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path file() const { return root_ / "manifest.json"; }

 private:
  void put(const char* section, const std::string& hash, const ManifestEntry& entry);
  std::optional<ManifestEntry> get(const char* section, const std::string& hash) const;
  std::vector<std::pair<std::string, ManifestEntry>> list(const char* section) const;

  std::filesystem::path root_;
  mutable std::mutex mutex_;
  nlohmann::json data_;
};

// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace ukit::cli

#endif  // UKIT_CLI_MANIFEST_H_
