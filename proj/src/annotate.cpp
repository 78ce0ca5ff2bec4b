#include "truelearn/annotate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

#include "truelearn/error.hpp"

namespace truelearn {

ConceptLinkGraph::ConceptLinkGraph(std::map<ConceptId, std::set<ConceptId>> inlinks, std::int64_t total_count)
    : inlinks_(std::move(inlinks)), total_count_(total_count) {
  for (const auto& [c, links] : inlinks_) {
    concepts_.insert(c);
    concepts_.insert(links.begin(), links.end());
  }
  if (total_count_ <= 1 || total_count_ < static_cast<std::int64_t>(concepts_.size()))
    throw Error(ErrorKind::DegenerateGraph, "total concept count must exceed 1 and cover every concept");
}

ConceptLinkGraph ConceptLinkGraph::from_csv(std::istream& in, std::int64_t total_count) {
  std::map<ConceptId, std::set<ConceptId>> inlinks;
  std::string line;
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    ConceptId concept_id = 0;
    ConceptId inlink = 0;
    if (!(fields >> concept_id >> inlink)) {
      if (row == 1) continue;  // header
      throw Error(ErrorKind::MalformedRow, "expected concept_id,inlink_id", row);
    }
    inlinks[concept_id].insert(inlink);
  }
  return ConceptLinkGraph(std::move(inlinks), total_count);
}

const std::set<ConceptId>& ConceptLinkGraph::inlinks(ConceptId c) const {
  static const std::set<ConceptId> kEmpty;
  if (!concepts_.contains(c)) throw Error(ErrorKind::UnknownConcept, "concept " + std::to_string(c));
  auto it = inlinks_.find(c);
  return it == inlinks_.end() ? kEmpty : it->second;
}

double semantic_relatedness(const ConceptLinkGraph& g, ConceptId a, ConceptId b) {
  const auto& la = g.inlinks(a);
  const auto& lb = g.inlinks(b);
  if (la.empty() || lb.empty())
    throw Error(ErrorKind::DegenerateGraph, "concept without inlinks");

  std::size_t common = 0;
  for (auto ia = la.begin(), ib = lb.begin(); ia != la.end() && ib != lb.end();) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }

  const auto big = static_cast<double>(std::max(la.size(), lb.size()));
  const auto small = static_cast<double>(std::min(la.size(), lb.size()));
  const double denom = std::log(static_cast<double>(g.total_count())) - std::log(small);
  if (!(denom > 0.0)) throw Error(ErrorKind::DegenerateGraph, "|W| must exceed the smaller inlink count");
  if (common == 0) return std::numeric_limits<double>::infinity();
  return (std::log(big) - std::log(static_cast<double>(common))) / denom;
}

void WeightedGraph::add_edge(std::size_t i, std::size_t j, double weight) {
  if (adjacency.size() < nodes.size()) adjacency.resize(nodes.size());
  adjacency[i].emplace_back(j, weight);
  adjacency[j].emplace_back(i, weight);
}

WeightedGraph build_semantic_graph(const ConceptLinkGraph& g, const std::vector<ConceptId>& candidates) {
  WeightedGraph graph;
  graph.nodes = candidates;
  std::sort(graph.nodes.begin(), graph.nodes.end());
  graph.nodes.erase(std::unique(graph.nodes.begin(), graph.nodes.end()), graph.nodes.end());
  graph.adjacency.resize(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < graph.nodes.size(); ++j) {
      const double sr = semantic_relatedness(g, graph.nodes[i], graph.nodes[j]);
      if (std::isfinite(sr)) graph.add_edge(i, j, std::exp(-sr));
    }
  }
  return graph;
}

PageRankResult pagerank(const WeightedGraph& graph, const PageRankOptions& options) {
  if (!(options.damping > 0.0 && options.damping < 1.0) || !(options.tol > 0.0) || options.max_iter < 1)
    throw Error(ErrorKind::InvalidArgument, "pagerank options out of range");

  PageRankResult result;
  const std::size_t n = graph.size();
  if (n == 0) return result;

  std::vector<double> out_weight(n, 0.0);
  for (std::size_t i = 0; i < n && i < graph.adjacency.size(); ++i) {
    for (const auto& [_, w] : graph.adjacency[i]) out_weight[i] += w;
  }

  const double uniform = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, uniform);
  std::vector<double> next(n);
  result.converged = false;

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (out_weight[i] <= 0.0) dangling += rank[i];
    }
    const double base = (1.0 - options.damping) * uniform + options.damping * dangling * uniform;
    std::fill(next.begin(), next.end(), base);
    for (std::size_t i = 0; i < n && i < graph.adjacency.size(); ++i) {
      if (out_weight[i] <= 0.0) continue;
      const double share = options.damping * rank[i] / out_weight[i];
      for (const auto& [j, w] : graph.adjacency[i]) next[j] += share * w;
    }
    // Renormalise against drift.
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= total;
      delta += std::abs(next[i] - rank[i]);
    }
    rank.swap(next);
    result.iterations = iter;
    if (delta < options.tol) {
      result.converged = true;
      break;
    }
  }

  for (std::size_t i = 0; i < n; ++i) result.scores[graph.nodes[i]] = rank[i];
  return result;
}

double tfidf_cosine(const TermVector& doc_a, const TermVector& doc_b, const TermVector& idf) {
  auto weight = [&idf](const std::string& term, double tf) {
    auto it = idf.find(term);
    if (it == idf.end()) return 0.0;
    if (it->second < 0.0) throw Error(ErrorKind::InvalidArgument, "negative idf for '" + term + "'");
    return tf * it->second;
  };

  double norm_a = 0.0;
  double dot = 0.0;
  for (const auto& [term, tf] : doc_a) {
    const double wa = weight(term, tf);
    norm_a += wa * wa;
    if (auto it = doc_b.find(term); it != doc_b.end()) dot += wa * weight(term, it->second);
  }
  double norm_b = 0.0;
  for (const auto& [term, tf] : doc_b) {
    const double wb = weight(term, tf);
    norm_b += wb * wb;
  }
  if (norm_a <= 0.0 || norm_b <= 0.0) throw Error(ErrorKind::ZeroVector, "document has no weighted terms");
  return std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), 0.0, 1.0);
}

std::vector<FragmentAnnotations> read_annotations(std::istream& in) {
  std::vector<FragmentAnnotations> out;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::istringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) {
      const auto b = f.find_first_not_of(" \t\r");
      const auto e = f.find_last_not_of(" \t\r");
      fields.push_back(b == std::string::npos ? std::string() : f.substr(b, e - b + 1));
    }
    if (fields.size() != 4) throw Error(ErrorKind::MalformedRow, "expected fragment_id,kc_id,pagerank,cosine", row);
    RawAnnotation a;
    try {
      std::size_t used = 0;
      a.kc_id = std::stoll(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("kc");
      a.pagerank = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("pagerank");
      a.cosine = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("cosine");
    } catch (const std::logic_error&) {
      if (row == 1) continue;  // header
      throw Error(ErrorKind::MalformedRow, "non-numeric annotation field", row);
    }
    if (!(a.pagerank >= 0.0)) throw Error(ErrorKind::MalformedRow, "negative pagerank", row);
    if (!(a.cosine >= 0.0 && a.cosine <= 1.0)) throw Error(ErrorKind::CoverageOutOfRange, "cosine outside [0,1]", row);
    auto [it, inserted] = index.try_emplace(fields[0], out.size());
    if (inserted) out.push_back({fields[0], {}});
    out[it->second].annotations.push_back(a);
  }
  return out;
}

std::vector<ConceptAnnotation> rank_concepts(const std::vector<RawAnnotation>& annotations, std::size_t top_n,
                                             const RankWeights& weights) {
  if (annotations.empty()) throw Error(ErrorKind::EmptyAnnotations, "no annotations to rank");
  if (top_n < 1) throw Error(ErrorKind::InvalidArgument, "top_n must be >= 1");

  double lo = annotations.front().pagerank;
  double hi = lo;
  for (const auto& a : annotations) {
    lo = std::min(lo, a.pagerank);
    hi = std::max(hi, a.pagerank);
  }

  std::vector<ConceptAnnotation> ranked;
  ranked.reserve(annotations.size());
  for (const auto& a : annotations) {
    ConceptAnnotation c;
    c.kc_id = a.kc_id;
    c.pagerank = a.pagerank;
    c.cosine = a.cosine;
    if (!weights.normalize_pagerank) {
      c.pagerank_normalized = a.pagerank;
    } else {
      // A constant column carries no ranking information; map it to 1.
      c.pagerank_normalized = hi > lo ? (a.pagerank - lo) / (hi - lo) : 1.0;
    }
    c.combined = weights.pagerank * c.pagerank_normalized + weights.cosine * c.cosine;
    ranked.push_back(c);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.combined != y.combined) return x.combined > y.combined;
    return x.kc_id < y.kc_id;
  });
  if (ranked.size() > top_n) ranked.resize(top_n);
  return ranked;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

std::vector<std::string> fragment_transcript(std::string_view text, std::size_t target) {
  if (target < 1) throw Error(ErrorKind::InvalidArgument, "target_chars must be >= 1");
  std::vector<std::string> fragments;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text.size() - pos <= target) {
      fragments.emplace_back(text.substr(pos));
      break;
    }
    const std::size_t hi = pos + target;
    const std::size_t lo = pos + std::max<std::size_t>(1, target - target / 10);

    // A split after p characters: text[p-1] is whitespace, text[p] is not.
    auto is_gap = [&](std::size_t p) { return is_space(text[p - 1]) && !is_space(text[p]); };
    auto ends_sentence = [&](std::size_t p) {
      std::size_t q = p;
      while (q > pos && is_space(text[q - 1])) --q;
      return q > pos && is_terminator(text[q - 1]);
    };

    std::size_t cut = 0;
    for (std::size_t p = hi; p >= lo && cut == 0; --p) {
      if (is_gap(p) && ends_sentence(p)) cut = p;
    }
    for (std::size_t p = hi; p >= lo && cut == 0; --p) {
      if (is_gap(p)) cut = p;
    }
    if (cut == 0) cut = hi;
    fragments.emplace_back(text.substr(pos, cut - pos));
    pos = cut;
  }
  return fragments;
}

EngagementLabel label_engagement(const WatchRecord& w) {
  if (!(w.duration_seconds > 0.0)) throw Error(ErrorKind::NonPositiveDuration, "fragment duration must be positive");
  if (!(w.watch_seconds >= 0.0)) throw Error(ErrorKind::InvalidArgument, "watch time must be non-negative");
  const double normalized = std::min(1.0, w.watch_seconds / w.duration_seconds);
  return {normalized, normalized >= kEngagementThreshold ? 1 : 0};
}

std::vector<EngagementEvent> rebase_timestamps(std::vector<EngagementEvent> events) {
  if (events.empty()) throw Error(ErrorKind::EmptyInput, "no events to rebase");
  const auto t0 = std::min_element(events.begin(), events.end(), [](const auto& a, const auto& b) {
                    return a.timestamp < b.timestamp;
                  })->timestamp;
  for (auto& ev : events) ev.timestamp -= t0;
  return events;
}

}  // namespace truelearn
