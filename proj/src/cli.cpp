#include "truelearn/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "truelearn/annotate.hpp"
#include "truelearn/config.hpp"
#include "truelearn/error.hpp"
#include "truelearn/evaluate.hpp"
#include "truelearn/fetch.hpp"
#include "truelearn/report.hpp"
#include "truelearn/simulate.hpp"

namespace truelearn {

namespace {

namespace fs = std::filesystem;

struct Style {
  bool color = false;
  std::string paint(std::string_view text, const char* code) const {
    if (!color) return std::string(text);
    return std::string("\033[") + code + "m" + std::string(text) + "\033[0m";
  }
  std::string warn(std::string_view t) const { return paint(t, "33"); }
  std::string error(std::string_view t) const { return paint(t, "31"); }
  std::string ok(std::string_view t) const { return paint(t, "32"); }
};

/// "-" writes to `out`.
void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path);
  f << content;
  if (!f) throw Error(ErrorKind::IoError, "write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorKind::ConfigError, "expected key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

double parse_grid_value(const std::string& key, const std::string& text) {
  if (text == "true") return 1.0;
  if (text == "false") return 0.0;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorKind::ConfigError, "grid value '" + text + "' for '" + key + "' is not a number");
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::string metrics_line(std::string_view label, const Metrics& m) {
  std::ostringstream ss;
  ss << std::left << std::setw(7) << label << "accuracy " << fmt(m.accuracy) << "  precision " << fmt(m.precision)
     << "  recall " << fmt(m.recall) << "  f1 " << fmt(m.f1) << '\n';
  return ss.str();
}

CLI::Validator model_validator() {
  return CLI::Validator(
      [](std::string& name) -> std::string {
        if (parse_model_kind(name)) return {};
        return "unknown model '" + name + "'; valid models: " + model_kind_list();
      },
      "MODEL", "model");
}

// ---------------------------------------------------------------------------
// Model setup shared by evaluate and sweep
// ---------------------------------------------------------------------------

struct ModelArgs {
  std::string model = "novelty";
  std::string config;
  std::vector<std::string> sets;
};

void add_model_options(CLI::App* cmd, ModelArgs& a) {
  cmd->add_option("--model", a.model, "Model: " + model_kind_list() + "; overrides the model key of --config")
      ->check(model_validator());
  cmd->add_option("--config", a.config, "Flat key = value config file (none: built-in defaults)")->default_str("none");
  cmd->add_option("--set", a.sets, "Override one config key, key=value (repeatable)")->default_str("none");
}

ModelConfig resolve_config(const CLI::App* cmd, const ModelArgs& a) {
  ModelConfig cfg = a.config.empty() ? ModelConfig{} : load_config(a.config);
  if (a.config.empty() || cmd->count("--model") > 0) cfg.set("model", a.model);
  for (const auto& s : a.sets) {
    const auto [k, v] = split_assignment(s);
    cfg.set(k, v);
  }
  cfg.validate();
  return cfg;
}

bool uses_first_event_label(const ModelConfig& cfg) {
  const auto keys = cfg.keys();
  return std::find(keys.begin(), keys.end(), "first_event_label") != keys.end();
}

/// Fills train-derived pieces: the user-overlap table and the majority label.
ModelContext prepare_model(ModelConfig& cfg, const Dataset& train) {
  ModelContext ctx;
  if (cfg.kind == ModelKind::JaccardUser) ctx.user_table = std::make_shared<const UserJaccardTable>(train);
  if (uses_first_event_label(cfg) && !cfg.first_event_label && !train.empty())
    cfg.first_event_label = positive_rate(train) >= 0.5 ? 1 : 0;
  return ctx;
}

std::optional<Objective> parse_objective(std::string_view name) {
  if (name == "micro-f1") return Objective::MicroF1;
  if (name == "macro-f1") return Objective::MacroF1;
  if (name == "micro-accuracy") return Objective::MicroAccuracy;
  if (name == "macro-accuracy") return Objective::MacroAccuracy;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct FetchArgs {
  std::string dest = "data/peekc";
  std::string url;
  bool offline = false;
  bool force = false;
};

void run_fetch(const FetchArgs& a, std::ostream& out, const Style& style) {
  FetchOptions opts;
  opts.base_url = a.url.empty() ? default_dataset_url() : a.url;
  opts.dest_dir = a.dest;
  opts.offline = a.offline;
  opts.force = a.force;
  const auto result = fetch_dataset(opts);
  for (const auto& f : result.downloaded) out << "downloaded " << f << '\n';
  for (const auto& f : result.verified) out << "verified   " << f << '\n';
  out << style.ok("dataset ready") << " in " << a.dest << '\n';
}

struct ValidateArgs {
  std::string data_dir = "data/peekc";
  std::size_t min_events = 2;
};

void run_validate(const ValidateArgs& a, std::ostream& out, const Style& style) {
  const auto pair = load_split_pair(a.data_dir);
  std::size_t short_sessions = 0;
  std::set<KcId> kcs;
  for (const auto* ds : {&pair.train, &pair.test}) {
    kcs.insert(ds->kc_vocabulary.begin(), ds->kc_vocabulary.end());
    for (const auto& [_, s] : ds->sessions) short_sessions += s.events.size() < a.min_events ? 1 : 0;
  }
  const auto train_events = pair.train.event_count();
  const auto test_events = pair.test.event_count();
  out << "train  " << pair.train.sessions.size() << " learners, " << train_events << " events, positive rate "
      << fmt(pair.train.empty() ? 0.0 : positive_rate(pair.train)) << '\n';
  out << "test   " << pair.test.sessions.size() << " learners, " << test_events << " events, positive rate "
      << fmt(pair.test.empty() ? 0.0 : positive_rate(pair.test)) << '\n';
  out << "total  " << pair.train.sessions.size() + pair.test.sessions.size() << " learners, "
      << train_events + test_events << " events, " << kcs.size() << " knowledge components\n";
  if (short_sessions > 0)
    out << style.warn("warning: ") << short_sessions << " sessions have fewer than " << a.min_events << " events\n";
  out << style.ok("valid") << '\n';
}

struct AnnotateArgs {
  std::string annotations;
  std::size_t top_n = 5;
  std::string out = "-";
  double pagerank_weight = 0.8;
  double cosine_weight = 0.2;
  bool raw_pagerank = false;
  std::string inlinks;
  std::int64_t total_concepts = 0;
  double damping = 0.85;
};

void run_annotate(const AnnotateArgs& a, std::ostream& out, std::ostream& err, const Style& style) {
  std::ifstream in(a.annotations);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + a.annotations);
  auto fragments = read_annotations(in);

  if (!a.inlinks.empty()) {
    std::ifstream gin(a.inlinks);
    if (!gin) throw Error(ErrorKind::IoError, "cannot open " + a.inlinks);
    const auto graph = ConceptLinkGraph::from_csv(gin, a.total_concepts);
    PageRankOptions pr;
    pr.damping = a.damping;
    for (auto& frag : fragments) {
      std::vector<ConceptId> candidates;
      for (const auto& ann : frag.annotations) candidates.push_back(ann.kc_id);
      const auto ranks = pagerank(build_semantic_graph(graph, candidates), pr);
      if (!ranks.converged)
        err << style.warn("warning: ") << "pagerank did not converge for fragment " << frag.fragment_id << '\n';
      for (auto& ann : frag.annotations) ann.pagerank = ranks.scores.at(ann.kc_id);
    }
  }

  RankWeights weights{a.pagerank_weight, a.cosine_weight, !a.raw_pagerank};
  std::ostringstream csv;
  csv << "fragment_id,rank,kc_id,pagerank,pagerank_normalized,cosine,combined\n" << std::setprecision(17);
  for (const auto& frag : fragments) {
    const auto ranked = rank_concepts(frag.annotations, a.top_n, weights);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const auto& c = ranked[i];
      csv << frag.fragment_id << ',' << i + 1 << ',' << c.kc_id << ',' << c.pagerank << ',' << c.pagerank_normalized
          << ',' << c.cosine << ',' << c.combined << '\n';
    }
  }
  write_output(a.out, csv.str(), out);
  if (a.out != "-") out << "ranked " << fragments.size() << " fragments into " << a.out << '\n';
}

struct SimulateArgs {
  std::string out_dir = "data/synthetic";
  SyntheticConfig config;
};

void run_simulate(const SimulateArgs& a, std::ostream& out) {
  a.config.validate();
  const auto data = generate(a.config);
  write_synthetic(a.out_dir, a.config, data);
  out << "wrote " << data.train.sessions.size() << " train and " << data.test.sessions.size()
      << " test learners (" << data.train.event_count() + data.test.event_count() << " events) to " << a.out_dir
      << '\n';
}

struct EvaluateArgs {
  ModelArgs model;
  std::string data_dir = "data/peekc";
  std::string split = "test";
  std::string report;
  std::string states;
  bool skip_first = false;
  unsigned jobs = 0;
};

void run_evaluate(const CLI::App* cmd, const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  auto cfg = resolve_config(cmd, a.model);
  const auto pair = load_split_pair(a.data_dir);
  const auto ctx = prepare_model(cfg, pair.train);
  const auto model = make_model(cfg, ctx);
  const Dataset& target = a.split == "train" ? pair.train : pair.test;

  EvalOptions opts;
  opts.skip_first = a.skip_first;
  opts.jobs = a.jobs;
  opts.keep_states = !a.states.empty();
  const auto run = evaluate_dataset(*model, target, opts);

  // Keep stdout parseable when a JSON document is written there.
  std::ostream& log = a.report == "-" || a.states == "-" ? err : out;
  log << "model " << to_string(cfg.kind) << " on " << a.split << ": " << run.report.n_learners << " learners, "
      << run.report.n_events << " scored events\n";
  log << metrics_line("micro", run.report.micro) << metrics_line("macro", run.report.macro);
  if (!a.report.empty()) {
    auto j = report_to_json(run.report);
    j["model"] = std::string(to_string(cfg.kind));
    j["split"] = a.split;
    write_output(a.report, j.dump(2) + "\n", out);
    if (a.report != "-") log << "report written to " << a.report << '\n';
  }
  if (!a.states.empty()) {
    auto arr = nlohmann::json::array();
    for (const auto& s : run.states) arr.push_back(state_to_json(s));
    write_output(a.states, arr.dump(2) + "\n", out);
    if (a.states != "-") log << run.states.size() << " learner states written to " << a.states << '\n';
  }
}

struct SweepArgs {
  ModelArgs model;
  std::string data_dir = "data/peekc";
  std::vector<std::string> grid;
  std::string objective = "micro-f1";
  std::string out = "-";
  std::string table;
  bool skip_first = false;
  unsigned jobs = 0;
};

void run_sweep(const CLI::App* cmd, const SweepArgs& a, std::ostream& out) {
  auto cfg = resolve_config(cmd, a.model);
  const auto train = load_split(a.data_dir, "train");
  const auto ctx = prepare_model(cfg, train);

  Grid grid;
  for (const auto& g : a.grid) {
    const auto [key, values] = split_assignment(g);
    auto& slot = grid[key];
    if (!slot.empty()) throw Error(ErrorKind::ConfigError, "grid key '" + key + "' given twice");
    std::stringstream ss(values);
    for (std::string v; std::getline(ss, v, ',');) slot.push_back(parse_grid_value(key, v));
    if (slot.empty()) throw Error(ErrorKind::EmptyGrid, "no values for '" + key + "'");
  }
  if (a.grid.empty()) grid = default_grid(cfg.kind);

  EvalOptions opts;
  opts.skip_first = a.skip_first;
  opts.jobs = a.jobs;
  const auto result = grid_sweep(cfg, grid, train, ctx, *parse_objective(a.objective), opts);

  if (!a.table.empty()) {
    std::ostringstream csv;
    for (const auto& [key, _] : grid) csv << key << ',';
    csv << "objective,micro_accuracy,micro_f1,macro_accuracy,macro_f1\n" << std::setprecision(17);
    for (const auto& row : result.table) {
      for (const auto& [_, v] : row.point) csv << v << ',';
      csv << row.objective << ',' << row.micro.accuracy << ',' << row.micro.f1 << ',' << row.macro.accuracy << ','
          << row.macro.f1 << '\n';
    }
    write_output(a.table, csv.str(), out);
  }

  std::ostringstream best;
  best << "# best " << a.objective << " on train: " << std::setprecision(17) << result.best_objective << '\n'
       << to_config_text(result.best_config);
  write_output(a.out, best.str(), out);
  if (a.out != "-") {
    out << result.table.size() << " grid points, best " << a.objective << ' ' << fmt(result.best_objective) << " at";
    for (const auto& [k, v] : result.best_point) out << ' ' << k << '=' << v;
    out << "\nbest config written to " << a.out << '\n';
  }
}

struct VisualizeArgs {
  std::string state;
  std::int64_t user = -1;
  std::string kind = "bar";
  std::size_t top_k = 15;
  std::string out = "-";
  std::string history;
  std::string title = "Learner state";
  int width = 800;
  int height = 480;
  std::string titles;
};

std::vector<HistoryPoint> load_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::vector<HistoryPoint> points;
  std::string line;
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() < 2 || fields.size() > 3) throw Error(ErrorKind::MalformedRow, "expected t,mean[,variance]", row);
    try {
      HistoryPoint p{std::stod(fields[0]), std::stod(fields[1]), std::nullopt};
      if (fields.size() == 3 && fields[2].find_first_not_of(" \t\r") != std::string::npos)
        p.variance = std::stod(fields[2]);
      points.push_back(p);
    } catch (const std::logic_error&) {
      if (row == 1) continue;  // header
      throw Error(ErrorKind::MalformedRow, "non-numeric history field", row);
    }
  }
  return points;
}

LearnerState pick_state(const std::string& path, std::int64_t user) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IoError, path + ": " + e.what());
  }
  if (!j.is_array()) {
    auto s = state_from_json(j);
    if (user >= 0 && s.user_id != user)
      throw Error(ErrorKind::EmptyState, "state file holds user " + std::to_string(s.user_id));
    return s;
  }
  if (j.empty()) throw Error(ErrorKind::EmptyState, path + " holds no learner states");
  if (user < 0) return state_from_json(j.front());
  for (const auto& item : j) {
    if (item.value("user_id", std::int64_t{-1}) == user) return state_from_json(item);
  }
  throw Error(ErrorKind::EmptyState, "no state for user " + std::to_string(user) + " in " + path);
}

void run_visualize(const VisualizeArgs& a, std::ostream& out) {
  PlotSpec spec;
  spec.kind = *parse_plot_kind(a.kind);
  spec.top_k = a.top_k;
  spec.width = a.width;
  spec.height = a.height;
  spec.title = a.title;

  std::string svg;
  if (spec.kind == PlotKind::Line) {
    if (a.history.empty()) throw Error(ErrorKind::InvalidArgument, "--kind line needs --history");
    svg = render_line(load_history(a.history), spec);
  } else {
    if (a.state.empty()) throw Error(ErrorKind::InvalidArgument, "--kind " + a.kind + " needs --state");
    const KcTitles titles = a.titles.empty() ? KcTitles{} : load_kc_titles(a.titles);
    svg = render_state(pick_state(a.state, a.user), spec, titles);
  }
  write_output(a.out, svg, out);
  if (a.out != "-") out << a.kind << " plot written to " << a.out << '\n';
}

bool is_usage_error(ErrorKind kind) { return kind == ErrorKind::ConfigError || kind == ErrorKind::InvalidArgument; }

}  // namespace

CliEnv detect_env() {
  const char* no_color = std::getenv("NO_COLOR");
  return {isatty(STDOUT_FILENO) == 1 && (no_color == nullptr || *no_color == '\0')};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliEnv& env) {
  const Style style{env.color};

  CLI::App app{"Engagement modelling for fragmented educational video", "truelearn"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough(false);

  FetchArgs fetch_args;
  auto* fetch = app.add_subcommand("fetch", "Download the PEEKC train/test files and record checksums");
  fetch->add_option("--dest", fetch_args.dest, "Destination directory");
  fetch->add_option("--url", fetch_args.url,
                    std::string("Base URL (none: $PEEKC_URL, else ") + kDefaultPeekcUrl + ")")->default_str("none");
  fetch->add_flag("--offline", fetch_args.offline, "Only verify local files, never download [default: off]");
  fetch->add_flag("--force", fetch_args.force, "Re-download even when local files are present [default: off]");

  ValidateArgs validate_args;
  auto* validate = app.add_subcommand("validate", "Check a dataset directory and print its statistics");
  validate->add_option("--data-dir", validate_args.data_dir, "Directory holding train.csv and test.csv");
  validate->add_option("--min-events", validate_args.min_events, "Warn about sessions shorter than this");

  AnnotateArgs annotate_args;
  auto* annotate = app.add_subcommand("annotate", "Rank the candidate concepts of each fragment");
  annotate->add_option("--annotations", annotate_args.annotations, "CSV fragment_id,kc_id,pagerank,cosine")
      ->required();
  annotate->add_option("--top-n", annotate_args.top_n, "Concepts kept per fragment")->check(CLI::PositiveNumber);
  annotate->add_option("--out", annotate_args.out, "Output CSV (- for stdout)");
  annotate->add_option("--pagerank-weight", annotate_args.pagerank_weight, "Weight of the PageRank score");
  annotate->add_option("--cosine-weight", annotate_args.cosine_weight, "Weight of the TF-IDF cosine");
  annotate->add_flag("--raw-pagerank", annotate_args.raw_pagerank, "Combine raw PageRank instead of min-max scaled [default: off]");
  annotate->add_option("--inlinks", annotate_args.inlinks,
                       "CSV concept_id,inlink_id; recompute PageRank from it (none: use the pagerank column)")
      ->default_str("none");
  annotate->add_option("--total-concepts", annotate_args.total_concepts,
                       "Number of topics in the whole encyclopedia, needed with --inlinks");
  annotate->add_option("--damping", annotate_args.damping, "PageRank damping factor");

  SimulateArgs sim_args;
  auto& sc = sim_args.config;
  auto* simulate = app.add_subcommand("simulate", "Write a seeded synthetic dataset in PEEKC layout");
  simulate->add_option("--out-dir", sim_args.out_dir, "Output directory");
  simulate->add_option("--learners", sc.n_learners, "Number of learners");
  simulate->add_option("--kcs", sc.n_kcs, "Number of knowledge components");
  simulate->add_option("--fragments", sc.n_fragments, "Number of fragments");
  simulate->add_option("--events", sc.events_per_learner, "Events per learner");
  simulate->add_option("--kcs-per-fragment", sc.kcs_per_fragment, "Knowledge components per fragment");
  simulate->add_option("--beta", sc.true_beta, "Performance noise of the generating model");
  simulate->add_option("--draw-probability", sc.true_draw_probability, "Draw probability of the generating model");
  simulate->add_option("--skill-mean", sc.skill_mean, "Mean of the true skills");
  simulate->add_option("--skill-variance", sc.skill_variance, "Variance of the true skills");
  simulate->add_option("--coverage-min", sc.coverage_min, "Lowest fragment coverage");
  simulate->add_option("--coverage-max", sc.coverage_max, "Highest fragment coverage");
  simulate->add_option("--test-fraction", sc.test_fraction, "Share of learners in the test split");
  simulate->add_option("--seed", sc.seed, "Random seed");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Sequential hold-out evaluation of one model");
  add_model_options(evaluate, eval_args.model);
  evaluate->add_option("--data-dir", eval_args.data_dir, "Directory holding train.csv and test.csv");
  evaluate->add_option("--split", eval_args.split, "Split to score")->check(CLI::IsMember({"train", "test"}));
  evaluate->add_option("--report", eval_args.report, "Write the JSON report here (- for stdout)")->default_str("none");
  evaluate->add_option("--states", eval_args.states, "Write final learner states as JSON")->default_str("none");
  evaluate->add_flag("--skip-first", eval_args.skip_first, "Fit but do not score each learner's first event [default: off]");
  evaluate->add_option("--jobs", eval_args.jobs, "Worker threads (0: logical cores)");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Grid search hyperparameters on the train split");
  add_model_options(sweep, sweep_args.model);
  sweep->add_option("--data-dir", sweep_args.data_dir, "Directory holding train.csv");
  sweep->add_option("--grid", sweep_args.grid, "key=v1,v2,... (repeatable; none: built-in grid for the model)")
      ->default_str("none");
  sweep->add_option("--objective", sweep_args.objective, "Selection metric")
      ->check(CLI::IsMember({"micro-f1", "macro-f1", "micro-accuracy", "macro-accuracy"}));
  sweep->add_option("--out", sweep_args.out, "Best config file (- for stdout)");
  sweep->add_option("--table", sweep_args.table, "Write every grid point as CSV")->default_str("none");
  sweep->add_flag("--skip-first", sweep_args.skip_first, "Fit but do not score each learner's first event [default: off]");
  sweep->add_option("--jobs", sweep_args.jobs, "Worker threads (0: logical cores)");

  VisualizeArgs vis_args;
  auto* visualize = app.add_subcommand("visualize", "Render a learner state as SVG");
  visualize->add_option("--state", vis_args.state, "State JSON: one state or an array from evaluate --states")->default_str("none");
  visualize->add_option("--user", vis_args.user, "Learner to plot from an array (-1: first)");
  visualize->add_option("--kind", vis_args.kind, "Plot kind")->check(CLI::IsMember({"bar", "dot", "bubble", "line"}));
  visualize->add_option("--top-k", vis_args.top_k, "Skills shown")->check(CLI::PositiveNumber);
  visualize->add_option("--out", vis_args.out, "Output SVG (- for stdout)");
  visualize->add_option("--history", vis_args.history, "CSV t,mean[,variance] for --kind line")->default_str("none");
  visualize->add_option("--title", vis_args.title, "Plot title");
  visualize->add_option("--width", vis_args.width, "Width in pixels")->check(CLI::PositiveNumber);
  visualize->add_option("--height", vis_args.height, "Height in pixels")->check(CLI::PositiveNumber);
  visualize->add_option("--titles", vis_args.titles, "CSV kc_id,title for axis labels (none: ids)")->default_str("none");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << style.error("error: ") << e.what() << '\n';
    err << "run 'truelearn --help' for usage\n";
    return 1;
  }

  try {
    if (fetch->parsed()) run_fetch(fetch_args, out, style);
    else if (validate->parsed()) run_validate(validate_args, out, style);
    else if (annotate->parsed()) run_annotate(annotate_args, out, err, style);
    else if (simulate->parsed()) run_simulate(sim_args, out);
    else if (evaluate->parsed()) run_evaluate(evaluate, eval_args, out, err);
    else if (sweep->parsed()) run_sweep(sweep, sweep_args, out);
    else if (visualize->parsed()) run_visualize(vis_args, out);
  } catch (const Error& e) {
    err << style.error("error: ") << e.what() << '\n';
    return is_usage_error(e.kind()) ? 1 : 2;
  } catch (const std::exception& e) {
    err << style.error("error: ") << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace truelearn
