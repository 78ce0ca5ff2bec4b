#include "truelearn/fetch.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>

#include <curl/curl.h>
#include <openssl/evp.h>

#include <json.hpp>

#include "truelearn/error.hpp"

namespace truelearn {

namespace {

constexpr const char* kChecksumFile = "checksums.json";

size_t write_to_stream(char* data, size_t size, size_t count, void* user) {
  auto* out = static_cast<std::ofstream*>(user);
  out->write(data, static_cast<std::streamsize>(size * count));
  return out->good() ? size * count : 0;
}

void download(const std::string& url, const std::filesystem::path& dest) {
  static const bool curl_ready = curl_global_init(CURL_GLOBAL_DEFAULT) == CURLE_OK;
  if (!curl_ready) throw Error(ErrorKind::NetworkError, "libcurl initialisation failed");

  const auto partial = std::filesystem::path(dest.string() + ".part");
  {
    std::ofstream out(partial, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + partial.string());
    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
    if (!curl) throw Error(ErrorKind::NetworkError, "curl_easy_init failed");
    curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 30L);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &write_to_stream);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &out);
    const auto rc = curl_easy_perform(curl.get());
    if (rc != CURLE_OK) {
      out.close();
      std::filesystem::remove(partial);
      throw Error(ErrorKind::NetworkError, url + ": " + curl_easy_strerror(rc));
    }
  }
  std::filesystem::rename(partial, dest);
}

std::map<std::string, std::string> read_record(const std::filesystem::path& path) {
  std::map<std::string, std::string> record;
  if (!std::filesystem::exists(path)) return record;
  std::ifstream in(path);
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& [file, sum] : j.items()) record[file] = sum.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IoError, "unreadable " + path.string() + ": " + e.what());
  }
  return record;
}

}  // namespace

std::string default_dataset_url() {
  if (const char* env = std::getenv("PEEKC_URL"); env != nullptr && *env != '\0') return env;
  return kDefaultPeekcUrl;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    char b[3];
    std::snprintf(b, sizeof b, "%02x", digest[i]);
    hex += b;
  }
  return hex;
}

FetchResult fetch_dataset(const FetchOptions& options) {
  std::filesystem::create_directories(options.dest_dir);
  const auto record_path = options.dest_dir / kChecksumFile;
  auto record = read_record(record_path);
  const auto base = options.base_url.empty() ? default_dataset_url() : options.base_url;

  FetchResult result;
  for (const auto& file : options.files) {
    const auto path = options.dest_dir / file;
    if (std::filesystem::exists(path) && !options.force) {
      const auto sum = sha256_file(path);
      if (auto it = record.find(file); it != record.end() && it->second != sum) {
        throw Error(ErrorKind::ChecksumMismatch,
                    file + " does not match its recorded checksum; delete it or re-run with --force to re-fetch");
      }
      record[file] = sum;
      result.verified.push_back(file);
      continue;
    }
    if (options.offline) throw Error(ErrorKind::IoError, file + " is missing and --offline was given");
    download(base + "/" + file, path);
    record[file] = sha256_file(path);
    result.downloaded.push_back(file);
  }

  nlohmann::json j(record);
  std::ofstream out(record_path);
  out << j.dump(2) << '\n';
  result.checksums = std::move(record);
  return result;
}

}  // namespace truelearn
