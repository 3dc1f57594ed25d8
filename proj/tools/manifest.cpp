#include "manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>
#include <memory>

#include "uqeval/error.hpp"
#include "uqeval/text.hpp"

namespace uqeval::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error("SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

RunManifest::RunManifest(std::string subcommand, std::string file_name)
    : subcommand_(std::move(subcommand)), file_name_(std::move(file_name)) {}

void RunManifest::flag(const std::string& name, report::Json value) {
  flags_[name] = std::move(value);
}

void RunManifest::seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

void RunManifest::input(const std::filesystem::path& path) {
  report::Json j;
  j["path"] = path.string();
  j["sha256"] = sha256_file(path);
  inputs_.push_back(std::move(j));
}

void RunManifest::output(const std::string& relative_path) { outputs_.push_back(relative_path); }

report::Json RunManifest::identity() const {
  report::Json j;
  j["tool"] = "uqeval";
  j["version"] = kToolVersion;
  j["subcommand"] = subcommand_;
  j["flags"] = flags_;
  j["seeds"] = seeds_;
  j["inputs"] = inputs_;
  return j;
}

std::string RunManifest::digest() const { return sha256_hex(identity().dump()); }

report::Json RunManifest::reference() const {
  report::Json j;
  j["file"] = file_name_;
  j["digest"] = digest();
  return j;
}

void RunManifest::write(const std::filesystem::path& dir) const {
  auto j = identity();
  j["outputs"] = outputs_;
  j["digest"] = digest();
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  j["timestamp"] = stamp;
  text::write_file((dir / file_name_).string(), j.dump(2) + "\n");
}

}  // namespace uqeval::cli
