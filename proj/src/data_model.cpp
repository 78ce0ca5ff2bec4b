#include "truelearn/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "truelearn/error.hpp"

namespace truelearn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::optional<std::int64_t> to_int(std::string_view s) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec == std::errc() && ptr == end) return v;
  // Integer columns written as "12.0" by some exporters.
  double d = 0;
  auto [dptr, dec] = std::from_chars(s.data(), end, d);
  if (dec == std::errc() && dptr == end && d == static_cast<double>(static_cast<std::int64_t>(d)))
    return static_cast<std::int64_t>(d);
  return std::nullopt;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec == std::errc() && ptr == end) return v;
  return std::nullopt;
}

std::int64_t require_int(std::string_view field, const char* name, std::int64_t row) {
  auto v = to_int(field);
  if (!v) throw Error(ErrorKind::MalformedRow, std::string("non-integer ") + name + " '" + std::string(field) + "'", row);
  return *v;
}

bool looks_like_header(std::string_view line) {
  auto fields = split_fields(line);
  return !fields.empty() && !to_double(fields.front()).has_value();
}

}  // namespace

std::size_t Dataset::event_count() const {
  std::size_t n = 0;
  for (const auto& [_, s] : sessions) n += s.events.size();
  return n;
}

EngagementEvent parse_event_row(std::string_view line, std::int64_t row,
                                const ColumnLayout& layout) {
  const auto fields = split_fields(line);
  if (static_cast<int>(fields.size()) != layout.column_count) {
    throw Error(ErrorKind::MalformedRow,
                "expected " + std::to_string(layout.column_count) + " columns, got " +
                    std::to_string(fields.size()),
                row);
  }

  EngagementEvent ev;
  ev.fragment.lecture_id = require_int(fields[layout.lecture], "lecture id", row);
  ev.fragment.video_id = require_int(fields[layout.video], "video id", row);
  ev.fragment.part_id = require_int(fields[layout.part], "part id", row);
  ev.timestamp = require_int(fields[layout.timestamp], "timestamp", row);
  ev.user_id = require_int(fields[layout.user], "user id", row);
  if (ev.fragment.lecture_id < 0 || ev.fragment.video_id < 1 || ev.fragment.part_id < 1)
    throw Error(ErrorKind::MalformedRow, "fragment id out of range", row);
  if (ev.timestamp < 0 || ev.user_id < 0)
    throw Error(ErrorKind::MalformedRow, "negative timestamp or user id", row);

  for (std::size_t slot = 0; slot < kMaxKcSlots; ++slot) {
    const auto kc_field = fields[layout.first_kc + 2 * slot];
    const auto cov_field = fields[layout.first_kc + 2 * slot + 1];
    const auto kc = require_int(kc_field, "kc id", row);
    const auto cov = to_double(cov_field);
    if (!cov) throw Error(ErrorKind::MalformedRow, "non-numeric coverage '" + std::string(cov_field) + "'", row);
    if (kc == kSentinelKc) continue;
    if (kc < 0) throw Error(ErrorKind::MalformedRow, "negative kc id", row);
    if (!(*cov >= 0.0 && *cov <= 1.0))
      throw Error(ErrorKind::CoverageOutOfRange, "coverage " + std::string(cov_field) + " outside [0,1]", row);
    for (const auto& existing : ev.kcs) {
      if (existing.kc_id == kc) throw Error(ErrorKind::MalformedRow, "duplicate kc id " + std::to_string(kc), row);
    }
    ev.kcs.push_back({kc, *cov});
  }
  if (ev.kcs.empty()) throw Error(ErrorKind::MalformedRow, "event has no knowledge components", row);

  const auto label = to_double(fields[layout.label]);
  if (!label) throw Error(ErrorKind::MalformedRow, "non-numeric label", row);
  if (*label != 0.0 && *label != 1.0)
    throw Error(ErrorKind::LabelNotBinary, "label " + std::string(fields[layout.label]), row);
  ev.label = static_cast<int>(*label);
  return ev;
}

std::vector<EngagementEvent> parse_events(std::istream& source, const ColumnLayout& layout) {
  std::vector<EngagementEvent> events;
  std::string line;
  std::int64_t row = 0;
  while (std::getline(source, line)) {
    ++row;
    if (trim(line).empty()) continue;
    if (row == 1 && looks_like_header(line)) continue;
    events.push_back(parse_event_row(line, row, layout));
  }
  return events;
}

std::vector<EngagementEvent> parse_events_file(const std::filesystem::path& path,
                                               const ColumnLayout& layout) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return parse_events(in, layout);
}

void write_events(std::ostream& out, const std::vector<EngagementEvent>& events) {
  std::ostringstream row;
  row.precision(17);
  for (const auto& ev : events) {
    row.str({});
    row << ev.fragment.lecture_id << ',' << ev.fragment.video_id << ',' << ev.fragment.part_id << ','
        << ev.timestamp << ',' << ev.user_id;
    for (std::size_t slot = 0; slot < kMaxKcSlots; ++slot) {
      if (slot < ev.kcs.size())
        row << ',' << ev.kcs[slot].kc_id << ',' << ev.kcs[slot].coverage;
      else
        row << ',' << kSentinelKc << ",0";
    }
    row << ',' << ev.label << '\n';
    out << row.str();
  }
}

void write_events_file(const std::filesystem::path& path, const std::vector<EngagementEvent>& events) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  write_events(out, events);
}

Dataset group_sessions(std::vector<EngagementEvent> events) {
  Dataset ds;
  for (auto& ev : events) {
    for (const auto& kc : ev.kcs) ds.kc_vocabulary.insert(kc.kc_id);
    auto& session = ds.sessions[ev.user_id];
    session.user_id = ev.user_id;
    session.events.push_back(std::move(ev));
  }
  for (auto& [_, session] : ds.sessions) {
    std::stable_sort(session.events.begin(), session.events.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  }
  return ds;
}

double positive_rate(const Dataset& ds) {
  std::size_t total = 0;
  std::size_t positives = 0;
  for (const auto& [_, s] : ds.sessions) {
    for (const auto& ev : s.events) {
      ++total;
      positives += ev.label == 1;
    }
  }
  if (total == 0) throw Error(ErrorKind::EmptyDataset, "no events");
  return static_cast<double>(positives) / static_cast<double>(total);
}

std::map<KcId, std::string> load_kc_titles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::map<KcId, std::string> titles;
  std::string line;
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::MalformedRow, "expected kc_id,title", row);
    const auto id = to_int(trim(std::string_view(line).substr(0, comma)));
    if (!id) {
      if (row == 1) continue;  // header
      throw Error(ErrorKind::MalformedRow, "non-integer kc id", row);
    }
    auto title = trim(std::string_view(line).substr(comma + 1));
    if (title.size() >= 2 && title.front() == '"' && title.back() == '"') title = title.substr(1, title.size() - 2);
    titles[*id] = std::string(title);
  }
  return titles;
}

Dataset load_split(const std::filesystem::path& dir, const std::string& split) {
  auto ds = group_sessions(parse_events_file(dir / (split + ".csv")));
  if (std::filesystem::exists(dir / "kc_titles.csv")) ds.kc_titles = load_kc_titles(dir / "kc_titles.csv");
  return ds;
}

SplitPair load_split_pair(const std::filesystem::path& dir) {
  SplitPair pair{load_split(dir, "train"), load_split(dir, "test")};
  for (const auto& [user, _] : pair.test.sessions) {
    if (pair.train.sessions.contains(user))
      throw Error(ErrorKind::OverlappingUsers, "user " + std::to_string(user) + " appears in train and test");
  }
  return pair;
}

std::vector<EngagementEvent> flatten(const Dataset& ds) {
  std::vector<EngagementEvent> out;
  out.reserve(ds.event_count());
  for (const auto& [_, s] : ds.sessions) out.insert(out.end(), s.events.begin(), s.events.end());
  return out;
}

}  // namespace truelearn
