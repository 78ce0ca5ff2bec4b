#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "truelearn/annotate.hpp"
#include "truelearn/config.hpp"
#include "truelearn/error.hpp"
#include "truelearn/evaluate.hpp"
#include "truelearn/learners.hpp"
#include "truelearn/report.hpp"
#include "truelearn/simulate.hpp"

namespace py = pybind11;
using namespace truelearn;

namespace {

// JSON crosses the boundary as text; the Python side decodes it.
std::string dump(const nlohmann::json& j) { return j.dump(); }

EngagementEvent make_event(const std::vector<std::pair<KcId, double>>& kcs, int label) {
  EngagementEvent ev;
  for (auto [kc, cov] : kcs) ev.kcs.push_back({kc, cov});
  ev.label = label;
  return ev;
}

ModelConfig config_from(const std::string& model, const std::map<std::string, std::string>& settings) {
  ModelConfig cfg;
  cfg.set("model", model);
  for (const auto& [k, v] : settings) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

class PyModel {
 public:
  PyModel(const std::string& model, const std::map<std::string, std::string>& settings)
      : config_(config_from(model, settings)), model_(make_model(config_)) {}

  double predict_proba(const std::vector<std::pair<KcId, double>>& kcs) const {
    return model_->predict_proba(make_event(kcs, 0));
  }
  int predict(const std::vector<std::pair<KcId, double>>& kcs) const { return model_->predict(make_event(kcs, 0)); }
  void fit(const std::vector<std::pair<KcId, double>>& kcs, int label) {
    if (label != 0 && label != 1) throw Error(ErrorKind::LabelNotBinary, "label must be 0 or 1");
    model_->fit(make_event(kcs, label));
  }
  std::string state_json() const {
    const auto* s = model_->learner_state();
    return s ? dump(state_to_json(*s)) : "null";
  }
  std::string name() const { return std::string(model_->name()); }
  std::string config_text() const { return to_config_text(config_); }

 private:
  ModelConfig config_;
  std::unique_ptr<EngagementModel> model_;
};

std::string evaluate_dir(const std::string& data_dir, const std::string& model,
                         const std::map<std::string, std::string>& settings, const std::string& split, unsigned jobs) {
  auto cfg = config_from(model, settings);
  const auto pair = load_split_pair(data_dir);
  ModelContext ctx;
  if (cfg.kind == ModelKind::JaccardUser) ctx.user_table = std::make_shared<const UserJaccardTable>(pair.train);
  const auto keys = cfg.keys();
  if (std::find(keys.begin(), keys.end(), "first_event_label") != keys.end() && !cfg.first_event_label)
    cfg.first_event_label = positive_rate(pair.train) >= 0.5 ? 1 : 0;
  if (split != "train" && split != "test") throw Error(ErrorKind::InvalidArgument, "split must be train or test");
  EvalOptions opts;
  opts.jobs = jobs;
  py::gil_scoped_release release;
  const auto run = evaluate_dataset(*make_model(cfg, ctx), split == "train" ? pair.train : pair.test, opts);
  return dump(report_to_json(run.report));
}

void simulate_to(const std::string& out_dir, std::int64_t learners, std::int64_t events, std::uint64_t seed) {
  SyntheticConfig sc;
  sc.n_learners = learners;
  sc.events_per_learner = events;
  sc.seed = seed;
  write_synthetic(out_dir, sc, generate(sc));
}

std::string render(const std::string& state_json, const std::string& kind, std::size_t top_k) {
  PlotSpec spec;
  const auto k = parse_plot_kind(kind);
  if (!k) throw Error(ErrorKind::InvalidArgument, "unknown plot kind '" + kind + "'");
  spec.kind = *k;
  spec.top_k = top_k;
  return render_state(state_from_json(nlohmann::json::parse(state_json)), spec);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Engagement models for fragmented educational video";
  py::register_exception<Error>(m, "TruelearnError", PyExc_ValueError);

  m.def("model_names", [] {
    std::vector<std::string> out;
    for (auto k : {ModelKind::Interest, ModelKind::Novelty, ModelKind::Ink, ModelKind::Kt, ModelKind::Cosine,
                   ModelKind::JaccardConcept, ModelKind::JaccardUser, ModelKind::TfBinary, ModelKind::TfCosine})
      out.emplace_back(to_string(k));
    return out;
  });

  m.def(
      "truncated_gaussian_update",
      [](double mean, double variance, double perf_variance, const std::string& outcome, double margin) {
        Outcome o;
        if (outcome == "win") o = Outcome::Win;
        else if (outcome == "loss") o = Outcome::Loss;
        else if (outcome == "draw") o = Outcome::Draw;
        else throw Error(ErrorKind::InvalidArgument, "outcome must be win, loss or draw");
        const auto p = truncated_gaussian_update(mean, variance, perf_variance, o, margin);
        return std::make_pair(p.mean, p.variance);
      },
      py::arg("mean"), py::arg("variance"), py::arg("perf_variance"), py::arg("outcome"), py::arg("margin") = 0.0,
      "Posterior (mean, variance) of one skill after a win, loss or draw.");
  m.def("draw_margin", &draw_margin, py::arg("draw_probability"), py::arg("beta"), py::arg("n_performances"));
  m.def(
      "label_engagement",
      [](double watch, double duration) { return label_engagement({watch, duration}).label; }, py::arg("watch_seconds"),
      py::arg("duration_seconds"));
  m.def(
      "pagerank",
      [](const std::vector<ConceptId>& nodes, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
         double damping) {
        WeightedGraph g;
        g.nodes = nodes;
        g.adjacency.resize(nodes.size());
        for (auto [a, b, w] : edges) {
          if (a >= nodes.size() || b >= nodes.size()) throw Error(ErrorKind::InvalidArgument, "edge index out of range");
          g.add_edge(a, b, w);
        }
        PageRankOptions opts;
        opts.damping = damping;
        return pagerank(g, opts).scores;
      },
      py::arg("nodes"), py::arg("edges"), py::arg("damping") = 0.85,
      "Scores of an undirected weighted graph; edges are (i, j, weight) index triples.");

  py::class_<PyModel>(m, "Model")
      .def(py::init<const std::string&, const std::map<std::string, std::string>&>(), py::arg("model") = "novelty",
           py::arg("settings") = std::map<std::string, std::string>{})
      .def_property_readonly("name", &PyModel::name)
      .def("config_text", &PyModel::config_text)
      .def("predict_proba", &PyModel::predict_proba, py::arg("kcs"))
      .def("predict", &PyModel::predict, py::arg("kcs"))
      .def("fit", &PyModel::fit, py::arg("kcs"), py::arg("label"))
      .def("state_json", &PyModel::state_json);

  m.def("evaluate_json", &evaluate_dir, py::arg("data_dir"), py::arg("model") = "novelty",
        py::arg("settings") = std::map<std::string, std::string>{}, py::arg("split") = "test", py::arg("jobs") = 0);
  m.def("simulate", &simulate_to, py::arg("out_dir"), py::arg("learners") = 1000, py::arg("events") = 50,
        py::arg("seed") = 42);
  m.def("render_state_svg", &render, py::arg("state_json"), py::arg("kind") = "bar", py::arg("top_k") = 15);
}
