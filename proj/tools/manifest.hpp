#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "uqeval/report.hpp"

namespace uqeval::cli {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Record of one invocation. Everything except the timestamp is a pure
// function of the command line and input bytes. The digest covers version,
// subcommand, flags, seeds and input hashes; outputs follow from those and
// may still be added after the digest has been embedded in a result.
class RunManifest {
 public:
  RunManifest(std::string subcommand, std::string file_name);

  void flag(const std::string& name, report::Json value);
  void seed(const std::string& name, std::uint64_t value);
  void input(const std::filesystem::path& path);
  void output(const std::string& relative_path);

  const std::string& file_name() const noexcept { return file_name_; }
  std::string digest() const;
  // {"file": ..., "digest": ...} for embedding in result files.
  report::Json reference() const;

  // Writes <dir>/<file_name> with a timestamp.
  void write(const std::filesystem::path& dir) const;

 private:
  report::Json identity() const;
  std::string subcommand_;
  std::string file_name_;
  report::Json flags_ = report::Json::object();
  report::Json seeds_ = report::Json::object();
  report::Json inputs_ = report::Json::array();
  report::Json outputs_ = report::Json::array();
};

}  // namespace uqeval::cli
