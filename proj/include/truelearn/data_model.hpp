#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace truelearn {

using KcId = std::int64_t;
using UserId = std::int64_t;
using Timestamp = std::int64_t;

/// (lecture, video, part) triple identifying one video fragment.
struct FragmentId {
  std::int64_t lecture_id = 0;
  std::int64_t video_id = 1;
  std::int64_t part_id = 1;

  auto operator<=>(const FragmentId&) const = default;
};

/// One annotated knowledge component of a fragment; coverage is the cosine
/// topic-coverage score in [0, 1].
struct KcSlot {
  KcId kc_id = 0;
  double coverage = 0.0;

  bool operator==(const KcSlot&) const = default;
};

inline constexpr std::size_t kMaxKcSlots = 5;
inline constexpr KcId kSentinelKc = -1;

/// One learner x fragment watch record.
struct EngagementEvent {
  FragmentId fragment;
  Timestamp timestamp = 0;
  UserId user_id = 0;
  std::vector<KcSlot> kcs;
  int label = 0;

  bool operator==(const EngagementEvent&) const = default;
};

struct Session {
  UserId user_id = 0;
  std::vector<EngagementEvent> events;
};

struct Dataset {
  std::map<UserId, Session> sessions;
  std::set<KcId> kc_vocabulary;
  std::map<KcId, std::string> kc_titles;

  std::size_t event_count() const;
  bool empty() const { return sessions.empty(); }
};

/// Column positions of the PEEKC layout. The default is the published order:
/// lecture, video, part, timestamp, user, 5 x (kc_id, coverage), label.
struct ColumnLayout {
  int lecture = 0;
  int video = 1;
  int part = 2;
  int timestamp = 3;
  int user = 4;
  int first_kc = 5;
  int label = 15;
  int column_count = 16;

  static ColumnLayout peekc() { return {}; }
};

/// Parses a PEEKC-format CSV stream. Rows are validated one by one and the
/// first failure is raised as an Error carrying its 1-based row number. A
/// leading header row (non-numeric first field) is skipped.
std::vector<EngagementEvent> parse_events(std::istream& source,
                                          const ColumnLayout& layout = ColumnLayout::peekc());

std::vector<EngagementEvent> parse_events_file(const std::filesystem::path& path,
                                               const ColumnLayout& layout = ColumnLayout::peekc());

/// Parses a single CSV row. `row_number` is only used for error reporting.
EngagementEvent parse_event_row(std::string_view line, std::int64_t row_number,
                                const ColumnLayout& layout = ColumnLayout::peekc());

/// Writes events in the 16-column layout, padding absent KC slots with the
/// (-1, 0) sentinel.
void write_events(std::ostream& out, const std::vector<EngagementEvent>& events);
void write_events_file(const std::filesystem::path& path,
                       const std::vector<EngagementEvent>& events);

/// Partitions events by learner; each session is stably sorted by timestamp.
Dataset group_sessions(std::vector<EngagementEvent> events);

double positive_rate(const Dataset& ds);

/// Two-column CSV kc_id,title.
std::map<KcId, std::string> load_kc_titles(const std::filesystem::path& path);

struct SplitPair {
  Dataset train;
  Dataset test;
};

/// Loads train.csv and test.csv (and kc_titles.csv when present) from a
/// directory. Raises OverlappingUsers when the two splits share a learner.
SplitPair load_split_pair(const std::filesystem::path& dir);

Dataset load_split(const std::filesystem::path& dir, const std::string& split);

/// Flattens a dataset back into time-ordered per-session events, sessions in
/// ascending user order.
std::vector<EngagementEvent> flatten(const Dataset& ds);

}  // namespace truelearn
