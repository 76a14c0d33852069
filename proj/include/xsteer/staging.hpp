#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace xsteer {

// Collects a command's output files in a sibling ".staging" directory and
// renames them into the final directory on commit, so an aborted run never
// leaves a partial artifact set behind.
class OutputStager {
 public:
  explicit OutputStager(std::filesystem::path final_dir);
  ~OutputStager();
  OutputStager(const OutputStager&) = delete;
  OutputStager& operator=(const OutputStager&) = delete;

  // Returns the temp path to write `relative` to; parent dirs are created.
  std::filesystem::path stage(const std::string& relative);

  // Writes a manifest covering everything staged so far and stages it too.
  // Records the command, the resolved configuration (a serialized JSON
  // object), input files (basename + byte count + content hash) and the
  // same for every output — no absolute paths, no timestamps — so a rerun
  // over identical inputs produces a byte-identical manifest.
  void write_manifest(const std::string& command,
                      const std::vector<std::string>& input_paths,
                      const std::string& config_json,
                      const std::string& manifest_name);

  // Moves all staged files into final_dir (replacing what's there) and
  // removes the staging directory.
  void commit();

  const std::filesystem::path& final_dir() const { return final_dir_; }

 private:
  std::filesystem::path final_dir_;
  std::filesystem::path staging_dir_;
  std::vector<std::string> staged_;
  bool committed_ = false;
};

}  // namespace xsteer
