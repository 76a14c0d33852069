#include "xsteer/staging.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xsteer/common.hpp"

namespace xsteer {

namespace fs = std::filesystem;
using nlohmann::json;

OutputStager::OutputStager(fs::path final_dir) : final_dir_(std::move(final_dir)) {
  if (final_dir_.empty()) throw ValidationError("output directory is empty");
  staging_dir_ = final_dir_;
  staging_dir_ += ".staging";
  std::error_code ec;
  fs::remove_all(staging_dir_, ec);  // stale leftovers from a crashed run
  fs::create_directories(staging_dir_);
}

OutputStager::~OutputStager() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(staging_dir_, ec);
  }
}

fs::path OutputStager::stage(const std::string& relative) {
  if (relative.empty() || relative.front() == '/')
    throw ValidationError("staged name must be relative: \"" + relative + "\"");
  fs::path p = staging_dir_ / relative;
  fs::create_directories(p.parent_path());
  if (std::find(staged_.begin(), staged_.end(), relative) == staged_.end())
    staged_.push_back(relative);
  return p;
}

namespace {

json file_entry(const fs::path& path, const std::string& display_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  return json{{"file", display_name},
              {"bytes", bytes.size()},
              {"fnv1a64", fnv1a64_hex(bytes)}};
}

}  // namespace

void OutputStager::write_manifest(const std::string& command,
                                  const std::vector<std::string>& input_paths,
                                  const std::string& config_json,
                                  const std::string& manifest_name) {
  json inputs = json::array();
  for (const std::string& p : input_paths)
    inputs.push_back(file_entry(p, fs::path(p).filename().string()));

  std::vector<std::string> names = staged_;
  std::sort(names.begin(), names.end());
  json outputs = json::array();
  for (const std::string& name : names) {
    const fs::path p = staging_dir_ / name;
    if (!fs::exists(p))
      throw ValidationError("staged file was never written: " + name);
    outputs.push_back(file_entry(p, name));
  }

  json config = json::object();
  if (!config_json.empty()) {
    try {
      config = json::parse(config_json);
    } catch (const std::exception& e) {
      throw ValidationError(std::string("manifest config is not valid JSON: ") +
                            e.what());
    }
  }

  json doc{{"tool", "xsteer"},
           {"version", "0.1.0"},
           {"command", command},
           {"config", config},
           {"inputs", inputs},
           {"outputs", outputs}};

  std::ofstream out(stage(manifest_name), std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << "\n";
  if (!out) throw ValidationError("short write to " + manifest_name);
}

void OutputStager::commit() {
  fs::create_directories(final_dir_);
  for (const std::string& rel : staged_) {
    const fs::path src = staging_dir_ / rel;
    if (!fs::exists(src))
      throw ValidationError("staged file was never written: " + rel);
    const fs::path dst = final_dir_ / rel;
    fs::create_directories(dst.parent_path());
    fs::rename(src, dst);
  }
  std::error_code ec;
  fs::remove_all(staging_dir_, ec);
  committed_ = true;
}

}  // namespace xsteer
