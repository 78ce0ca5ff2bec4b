#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace truelearn {

/// Base URL of the public PEEKC files; PEEKC_URL overrides it.
inline constexpr const char* kDefaultPeekcUrl = "https://raw.githubusercontent.com/sahanbull/PEEKC-Dataset/main/peekc/v1";

std::string default_dataset_url();

struct FetchOptions {
  std::string base_url;
  std::filesystem::path dest_dir;
  bool offline = false;
  bool force = false;
  std::vector<std::string> files{"train.csv", "test.csv"};
};

struct FetchResult {
  std::vector<std::string> downloaded;
  std::vector<std::string> verified;
  /// file -> sha256 hex, as stored in checksums.json
  std::map<std::string, std::string> checksums;
};

/// Downloads the dataset files unless intact copies are already present.
/// Checksums live in <dest>/checksums.json; a local file that no longer
/// matches its recorded checksum raises ChecksumMismatch.
FetchResult fetch_dataset(const FetchOptions& options);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace truelearn
