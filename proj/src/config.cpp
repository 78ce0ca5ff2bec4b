#include "truelearn/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "truelearn/error.hpp"

namespace truelearn {

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 9> kKindNames{{
    {ModelKind::Interest, "interest"},
    {ModelKind::Novelty, "novelty"},
    {ModelKind::Ink, "ink"},
    {ModelKind::Kt, "kt"},
    {ModelKind::Cosine, "cosine"},
    {ModelKind::JaccardConcept, "jaccard-c"},
    {ModelKind::JaccardUser, "jaccard-u"},
    {ModelKind::TfBinary, "tf-binary"},
    {ModelKind::TfCosine, "tf-cosine"},
}};

constexpr std::array<std::string_view, 7> kTrueSkillKeys{"beta",          "tau",        "draw_probability",
                                                         "init_variance", "init_mean",  "content_scale",
                                                         "use_draw_margin"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorKind::ConfigError, message); }

double parse_number(std::string_view key, std::string_view value) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v))
    config_error("key '" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true") return true;
  if (value == "false") return false;
  config_error("key '" + std::string(key) + "' expects true/false, got '" + std::string(value) + "'");
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

bool is_pairwise(ModelKind k) {
  return k == ModelKind::Cosine || k == ModelKind::JaccardConcept || k == ModelKind::JaccardUser;
}

void set_trueskill(TrueSkillParams& p, std::string_view field, std::string_view key, std::string_view value) {
  if (field == "beta") p.beta = parse_number(key, value);
  else if (field == "tau") p.tau = parse_number(key, value);
  else if (field == "draw_probability") p.draw_probability = parse_number(key, value);
  else if (field == "init_variance") p.init_variance = parse_number(key, value);
  else if (field == "init_mean") p.init_mean = parse_number(key, value);
  else if (field == "content_scale") p.content_scale = parse_number(key, value);
  else if (field == "use_draw_margin") p.use_draw_margin = parse_bool(key, value);
  else config_error("unknown key '" + std::string(key) + "'");
}

void append_trueskill(std::vector<std::string>& keys, std::string_view prefix) {
  for (auto k : kTrueSkillKeys) keys.push_back(std::string(prefix) + "." + std::string(k));
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::string model_kind_list() {
  std::string out;
  for (const auto& [_, name] : kKindNames) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

double default_threshold(ModelKind kind) {
  switch (kind) {
    case ModelKind::Cosine: return 0.5;
    case ModelKind::JaccardConcept: return 0.2;
    case ModelKind::JaccardUser: return 0.1;
    case ModelKind::TfBinary: return 1.0;
    case ModelKind::TfCosine: return 0.5;
    default: return 0.5;
  }
}

double ModelConfig::threshold_or_default() const { return threshold.value_or(default_threshold(kind)); }

void ModelConfig::set(std::string_view key, std::string_view value) {
  if (key == "model") {
    auto k = parse_model_kind(value);
    if (!k) config_error("unknown model '" + std::string(value) + "'; valid models: " + model_kind_list());
    kind = *k;
    return;
  }
  if (key == "threshold") {
    threshold = parse_number(key, value);
    return;
  }
  if (key == "first_event_label") {
    const double v = parse_number(key, value);
    if (v != 0.0 && v != 1.0) config_error("first_event_label must be 0 or 1");
    first_event_label = static_cast<int>(v);
    return;
  }

  const auto dot = key.find('.');
  if (dot == std::string_view::npos) {
    for (auto k : kTrueSkillKeys) {
      if (k == key) {
        if (kind == ModelKind::Interest) return set_trueskill(interest, key, key, value);
        if (kind == ModelKind::Novelty) return set_trueskill(novelty, key, key, value);
        config_error("key '" + std::string(key) + "' needs a model prefix (interest. or novelty.) for model " +
                     std::string(to_string(kind)));
      }
    }
    config_error("unknown key '" + std::string(key) + "'");
  }

  const auto section = key.substr(0, dot);
  const auto field = key.substr(dot + 1);
  if (section == "interest") return set_trueskill(interest, field, key, value);
  if (section == "novelty") return set_trueskill(novelty, field, key, value);
  if (section == "ink") {
    if (field == "greedy") ink.greedy = parse_bool(key, value);
    else if (field == "tau") ink.tau = parse_number(key, value);
    else if (field == "w_interest") ink.w_interest = parse_number(key, value);
    else if (field == "w_novelty") ink.w_novelty = parse_number(key, value);
    else config_error("unknown key '" + std::string(key) + "'");
    return;
  }
  if (section == "kt") {
    if (field == "p_learn") kt.p_learn = parse_number(key, value);
    else if (field == "p_slip") kt.p_slip = parse_number(key, value);
    else if (field == "p_guess") kt.p_guess = parse_number(key, value);
    else if (field == "init_mastery") kt.init_mastery = parse_number(key, value);
    else config_error("unknown key '" + std::string(key) + "'");
    return;
  }
  config_error("unknown key '" + std::string(key) + "'");
}

void ModelConfig::set_number(std::string_view key, double value) {
  if (key.ends_with("greedy") || key.ends_with("use_draw_margin")) {
    set(key, value != 0.0 ? "true" : "false");
    return;
  }
  set(key, format_number(value));
}

std::vector<std::string> ModelConfig::keys() const {
  std::vector<std::string> out{"model"};
  switch (kind) {
    case ModelKind::Interest: append_trueskill(out, "interest"); break;
    case ModelKind::Novelty: append_trueskill(out, "novelty"); break;
    case ModelKind::Ink:
      append_trueskill(out, "interest");
      append_trueskill(out, "novelty");
      for (auto k : {"ink.greedy", "ink.tau", "ink.w_interest", "ink.w_novelty"}) out.emplace_back(k);
      break;
    case ModelKind::Kt:
      for (auto k : {"kt.p_learn", "kt.p_slip", "kt.p_guess", "kt.init_mastery"}) out.emplace_back(k);
      break;
    default:
      out.emplace_back("threshold");
      if (is_pairwise(kind)) out.emplace_back("first_event_label");
      break;
  }
  return out;
}

void ModelConfig::validate() const {
  switch (kind) {
    case ModelKind::Interest: interest.validate(); break;
    case ModelKind::Novelty: novelty.validate(); break;
    case ModelKind::Ink:
      interest.validate();
      novelty.validate();
      ink.validate();
      break;
    case ModelKind::Kt: kt.validate(); break;
    default:
      if (!std::isfinite(threshold_or_default())) config_error("threshold must be finite");
      break;
  }
}

ModelConfig parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string_view view(line);
    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < view.size(); ++i) {
      if (view[i] == '"') quoted = !quoted;
      if (view[i] == '#' && !quoted) {
        view = view.substr(0, i);
        break;
      }
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::ConfigError, "expected key = value", row);
    const auto key = std::string(trim(view.substr(0, eq)));
    auto value = trim(view.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty() || value.empty()) throw Error(ErrorKind::ConfigError, "empty key or value", row);
    if (!seen.insert(key).second) throw Error(ErrorKind::ConfigError, "repeated key '" + key + "'", row);
    entries.emplace_back(key, std::string(value));
  }

  ModelConfig config;
  // `model` decides how unprefixed keys resolve, so it goes first.
  for (const auto& [k, v] : entries) {
    if (k == "model") config.set(k, v);
  }
  for (const auto& [k, v] : entries) {
    if (k != "model") config.set(k, v);
  }
  config.validate();
  return config;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  return parse_config(in);
}

std::string to_config_text(const ModelConfig& config) {
  std::ostringstream out;
  auto emit_trueskill = [&out](std::string_view prefix, const TrueSkillParams& p) {
    out << prefix << ".beta = " << format_number(p.beta) << '\n';
    out << prefix << ".tau = " << format_number(p.tau) << '\n';
    out << prefix << ".draw_probability = " << format_number(p.draw_probability) << '\n';
    out << prefix << ".init_variance = " << format_number(p.init_variance) << '\n';
    out << prefix << ".init_mean = " << format_number(p.init_mean) << '\n';
    out << prefix << ".content_scale = " << format_number(p.content_scale) << '\n';
    out << prefix << ".use_draw_margin = " << (p.use_draw_margin ? "true" : "false") << '\n';
  };
  out << "model = \"" << to_string(config.kind) << "\"\n";
  switch (config.kind) {
    case ModelKind::Interest: emit_trueskill("interest", config.interest); break;
    case ModelKind::Novelty: emit_trueskill("novelty", config.novelty); break;
    case ModelKind::Ink:
      emit_trueskill("interest", config.interest);
      emit_trueskill("novelty", config.novelty);
      out << "ink.greedy = " << (config.ink.greedy ? "true" : "false") << '\n';
      out << "ink.tau = " << format_number(config.ink.tau) << '\n';
      out << "ink.w_interest = " << format_number(config.ink.w_interest) << '\n';
      out << "ink.w_novelty = " << format_number(config.ink.w_novelty) << '\n';
      break;
    case ModelKind::Kt:
      out << "kt.p_learn = " << format_number(config.kt.p_learn) << '\n';
      out << "kt.p_slip = " << format_number(config.kt.p_slip) << '\n';
      out << "kt.p_guess = " << format_number(config.kt.p_guess) << '\n';
      out << "kt.init_mastery = " << format_number(config.kt.init_mastery) << '\n';
      break;
    default:
      out << "threshold = " << format_number(config.threshold_or_default()) << '\n';
      if (is_pairwise(config.kind) && config.first_event_label)
        out << "first_event_label = " << *config.first_event_label << '\n';
      break;
  }
  return out.str();
}

std::unique_ptr<EngagementModel> make_model(const ModelConfig& config, const ModelContext& context) {
  config.validate();
  const double threshold = config.threshold_or_default();
  const int first_label = config.first_event_label.value_or(1);
  switch (config.kind) {
    case ModelKind::Interest: return std::make_unique<InterestModel>(config.interest);
    case ModelKind::Novelty: return std::make_unique<NoveltyModel>(config.novelty);
    case ModelKind::Ink: return std::make_unique<InkModel>(config.interest, config.novelty, config.ink);
    case ModelKind::Kt: return std::make_unique<KtModel>(config.kt);
    case ModelKind::Cosine: return std::make_unique<CosineModel>(threshold, first_label);
    case ModelKind::JaccardConcept: return std::make_unique<JaccardConceptModel>(threshold, first_label);
    case ModelKind::JaccardUser:
      return std::make_unique<JaccardUserModel>(context.user_table, threshold, first_label);
    case ModelKind::TfBinary: return std::make_unique<TfModel>(TfMode::Binary, threshold);
    case ModelKind::TfCosine: return std::make_unique<TfModel>(TfMode::Cosine, threshold);
  }
  throw Error(ErrorKind::ConfigError, "unhandled model kind");
}

}  // namespace truelearn
