#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "truelearn/error.hpp"
#include "truelearn/fetch.hpp"

using namespace truelearn;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidArgument;
}

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("truelearn_fetch_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("sha256 of known inputs") {
  const auto dir = fresh_dir("sha");
  std::ofstream(dir / "abc") << "abc";
  std::ofstream(dir / "empty");
  CHECK(sha256_file(dir / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_file(dir / "empty") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("downloads from a file url, then verifies the local copy") {
  const auto src = fresh_dir("src");
  const auto dest = fresh_dir("dest");
  std::ofstream(src / "train.csv") << "1,1,1,0,2,5,0.5,-1,0,-1,0,-1,0,-1,0,1\n";
  std::ofstream(src / "test.csv") << "1,1,1,0,3,5,0.5,-1,0,-1,0,-1,0,-1,0,0\n";
  FetchOptions opt;
  opt.base_url = "file://" + src.string();
  opt.dest_dir = dest;
  const auto first = fetch_dataset(opt);
  CHECK(first.downloaded.size() == 2);
  CHECK(first.checksums.at("train.csv") == sha256_file(src / "train.csv"));
  CHECK(fs::exists(dest / "checksums.json"));

  opt.offline = true;
  const auto second = fetch_dataset(opt);
  CHECK(second.downloaded.empty());
  CHECK(second.verified.size() == 2);

  std::ofstream(dest / "train.csv", std::ios::app) << "tampered\n";
  CHECK(kind_of([&] { fetch_dataset(opt); }) == ErrorKind::ChecksumMismatch);
  opt.offline = false;
  opt.force = true;
  CHECK(fetch_dataset(opt).downloaded.size() == 2);
}

TEST_CASE("missing files") {
  FetchOptions opt;
  opt.dest_dir = fresh_dir("offline");
  opt.offline = true;
  CHECK(kind_of([&] { fetch_dataset(opt); }) == ErrorKind::IoError);
  opt.offline = false;
  opt.base_url = "file://" + fresh_dir("nothing").string();
  CHECK(kind_of([&] { fetch_dataset(opt); }) == ErrorKind::NetworkError);
}

TEST_CASE("the url environment variable overrides the default") {
  ::setenv("PEEKC_URL", "file:///tmp/elsewhere", 1);
  CHECK(default_dataset_url() == "file:///tmp/elsewhere");
  ::setenv("PEEKC_URL", "", 1);
  CHECK(default_dataset_url() == kDefaultPeekcUrl);
  ::unsetenv("PEEKC_URL");
  CHECK(default_dataset_url() == kDefaultPeekcUrl);
}
