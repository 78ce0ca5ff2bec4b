#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "truelearn/data_model.hpp"
#include "truelearn/error.hpp"

using namespace truelearn;

namespace {

const char* kRow = "12,1,3,1500,7,100,0.9,101,0.5,-1,0,-1,0,-1,0,1";

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidArgument;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("truelearn_dm_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("a published-layout row parses into one event") {
  const auto ev = parse_event_row(kRow, 1);
  CHECK(ev.fragment == FragmentId{12, 1, 3});
  CHECK(ev.timestamp == 1500);
  CHECK(ev.user_id == 7);
  REQUIRE(ev.kcs.size() == 2);
  CHECK(ev.kcs[0] == KcSlot{100, 0.9});
  CHECK(ev.kcs[1] == KcSlot{101, 0.5});
  CHECK(ev.label == 1);
}

TEST_CASE("sentinel slots are dropped wherever they sit") {
  const auto ev = parse_event_row("1,1,1,0,2,-1,0,5,0.3,-1,0,6,0.2,-1,0,0", 1);
  REQUIRE(ev.kcs.size() == 2);
  CHECK(ev.kcs[0].kc_id == 5);
  CHECK(ev.kcs[1].kc_id == 6);
}

TEST_CASE("malformed rows raise typed errors carrying the row number") {
  CHECK(kind_of([] { parse_event_row("1,2,3", 4); }) == ErrorKind::MalformedRow);
  CHECK(kind_of([] { parse_event_row("1,1,1,0,2,5,1.2,-1,0,-1,0,-1,0,-1,0,1", 1); }) == ErrorKind::CoverageOutOfRange);
  CHECK(kind_of([] { parse_event_row("1,1,1,0,2,5,-0.1,-1,0,-1,0,-1,0,-1,0,1", 1); }) ==
        ErrorKind::CoverageOutOfRange);
  CHECK(kind_of([] { parse_event_row("1,1,1,0,2,5,0.5,-1,0,-1,0,-1,0,-1,0,2", 1); }) == ErrorKind::LabelNotBinary);
  CHECK(kind_of([] { parse_event_row("1,1,1,0,2,-1,0,-1,0,-1,0,-1,0,-1,0,1", 1); }) == ErrorKind::MalformedRow);
  CHECK(kind_of([] { parse_event_row("1,1,1,0,2,5,0.5,5,0.4,-1,0,-1,0,-1,0,1", 1); }) == ErrorKind::MalformedRow);
  CHECK(kind_of([] { parse_event_row("x,1,1,0,2,5,0.5,-1,0,-1,0,-1,0,-1,0,1", 1); }) == ErrorKind::MalformedRow);

  std::istringstream in(std::string(kRow) + "\n" + kRow + "\n1,1,1,0,2,5,0.5,-1,0,-1,0,-1,0,-1,0,3\n");
  try {
    parse_events(in);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LabelNotBinary);
    REQUIRE(e.row().has_value());
    CHECK(*e.row() == 3);
  }
}

TEST_CASE("coverage bounds 0 and 1 are accepted") {
  const auto ev = parse_event_row("1,1,1,0,2,5,0,6,1,-1,0,-1,0,-1,0,0", 1);
  CHECK(ev.kcs[0].coverage == 0.0);
  CHECK(ev.kcs[1].coverage == 1.0);
}

TEST_CASE("header and blank lines are skipped") {
  std::istringstream in(std::string("slug,vid_id,part,time,user,c1,s1,c2,s2,c3,s3,c4,s4,c5,s5,label\n\n") + kRow +
                        "\n");
  const auto events = parse_events(in);
  CHECK(events.size() == 1);
}

TEST_CASE("write then parse round-trips random events") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> nkc(1, 5), id(0, 50), lab(0, 1);
  std::uniform_real_distribution<double> cov(0.0, 1.0);
  std::vector<EngagementEvent> events;
  for (int i = 0; i < 300; ++i) {
    EngagementEvent ev;
    ev.fragment = {id(rng), 1 + id(rng) % 3, 1 + id(rng) % 4};
    ev.timestamp = i * 37;
    ev.user_id = id(rng);
    std::set<KcId> used;
    for (int k = nkc(rng); k > 0; --k) {
      KcId kc = id(rng);
      if (used.insert(kc).second) ev.kcs.push_back({kc, cov(rng)});
    }
    ev.label = lab(rng);
    events.push_back(ev);
  }
  std::stringstream buf;
  write_events(buf, events);
  CHECK(parse_events(buf) == events);
}

TEST_CASE("sessions are grouped per learner and stably time-ordered") {
  std::vector<EngagementEvent> events;
  auto make = [](UserId u, Timestamp t, KcId kc) {
    EngagementEvent ev;
    ev.user_id = u;
    ev.timestamp = t;
    ev.kcs = {{kc, 0.5}};
    return ev;
  };
  events.push_back(make(2, 50, 1));
  events.push_back(make(1, 30, 2));
  events.push_back(make(2, 10, 3));
  events.push_back(make(2, 50, 4));  // tie with the first: input order kept
  const auto ds = group_sessions(events);
  REQUIRE(ds.sessions.size() == 2);
  const auto& s2 = ds.sessions.at(2).events;
  CHECK(s2[0].kcs[0].kc_id == 3);
  CHECK(s2[1].kcs[0].kc_id == 1);
  CHECK(s2[2].kcs[0].kc_id == 4);
  CHECK(ds.kc_vocabulary == std::set<KcId>{1, 2, 3, 4});
  CHECK(ds.event_count() == 4);
  CHECK(flatten(ds).size() == 4);
}

TEST_CASE("positive rate and the empty dataset") {
  CHECK(kind_of([] { positive_rate(Dataset{}); }) == ErrorKind::EmptyDataset);
  std::istringstream in(std::string(kRow) + "\n12,1,3,1600,7,100,0.9,-1,0,-1,0,-1,0,-1,0,0\n");
  CHECK(positive_rate(group_sessions(parse_events(in))) == doctest::Approx(0.5));
}

TEST_CASE("split pair loading rejects shared learners") {
  const auto dir = temp_dir("split");
  {
    std::ofstream(dir / "train.csv") << kRow << '\n';
    std::ofstream(dir / "test.csv") << "1,1,1,0,8,5,0.5,-1,0,-1,0,-1,0,-1,0,0\n";
    std::ofstream(dir / "kc_titles.csv") << "100,Linear algebra\n101,\"Graphs, trees\"\n";
  }
  const auto pair = load_split_pair(dir);
  CHECK(pair.train.sessions.contains(7));
  CHECK(pair.test.sessions.contains(8));
  CHECK(pair.train.kc_titles.at(100) == "Linear algebra");
  CHECK(pair.train.kc_titles.at(101) == "Graphs, trees");

  std::ofstream(dir / "test.csv") << kRow << '\n';
  CHECK(kind_of([&] { load_split_pair(dir); }) == ErrorKind::OverlappingUsers);
  CHECK(kind_of([&] { load_split(dir / "missing", "train"); }) == ErrorKind::IoError);
}

TEST_CASE("grouped sessions have non-decreasing timestamps") {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> user(0, 9), time(0, 1000);
  std::vector<EngagementEvent> events(500);
  for (auto& ev : events) {
    ev.user_id = user(rng);
    ev.timestamp = time(rng);
    ev.kcs = {{1, 0.5}};
  }
  for (const auto& [_, s] : group_sessions(events).sessions)
    for (std::size_t i = 1; i < s.events.size(); ++i) CHECK(s.events[i - 1].timestamp <= s.events[i].timestamp);
}
