#pragma once

// Dataset-construction math: concept ranking inside a fragment, transcript
// fragmentation, watch-time labels and timestamp re-basing.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "truelearn/data_model.hpp"

namespace truelearn {

using ConceptId = std::int64_t;

/// Inlink structure of a set of Wikipedia concepts. `total_count` is |W|, the
/// number of topics in the whole encyclopedia.
class ConceptLinkGraph {
 public:
  ConceptLinkGraph(std::map<ConceptId, std::set<ConceptId>> inlinks, std::int64_t total_count);

  /// Reads `concept_id, inlink_id` rows.
  static ConceptLinkGraph from_csv(std::istream& in, std::int64_t total_count);

  bool contains(ConceptId c) const { return concepts_.contains(c); }
  const std::set<ConceptId>& concepts() const { return concepts_; }
  const std::set<ConceptId>& inlinks(ConceptId c) const;
  std::int64_t total_count() const { return total_count_; }

 private:
  std::set<ConceptId> concepts_;
  std::map<ConceptId, std::set<ConceptId>> inlinks_;
  std::int64_t total_count_;
};

/// Inlink-overlap relatedness distance (0 = identical inlink sets). Returns
/// +infinity when the inlink sets are disjoint.
double semantic_relatedness(const ConceptLinkGraph& g, ConceptId a, ConceptId b);

/// Undirected weighted graph, adjacency kept sorted by neighbour id.
struct WeightedGraph {
  std::vector<ConceptId> nodes;
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency;

  std::size_t size() const { return nodes.size(); }
  void add_edge(std::size_t i, std::size_t j, double weight);
};

/// Builds the semantic graph over `candidates` with edge weight exp(-SR).
/// Pairs with disjoint inlink sets get no edge.
WeightedGraph build_semantic_graph(const ConceptLinkGraph& g, const std::vector<ConceptId>& candidates);

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-10;
  int max_iter = 200;
};

struct PageRankResult {
  std::map<ConceptId, double> scores;
  int iterations = 0;
  bool converged = true;
};

/// Weighted PageRank by power iteration; dangling mass is spread uniformly.
/// On hitting max_iter the last iterate is returned with converged = false.
PageRankResult pagerank(const WeightedGraph& graph, const PageRankOptions& options = {});

using TermVector = std::unordered_map<std::string, double>;

/// Cosine between the TF-IDF vectors of two term-frequency maps, clamped to
/// [0, 1]. Terms missing from `idf` weigh zero.
double tfidf_cosine(const TermVector& doc_a, const TermVector& doc_b, const TermVector& idf);

struct RawAnnotation {
  KcId kc_id = 0;
  double pagerank = 0.0;
  double cosine = 0.0;
};

struct ConceptAnnotation {
  KcId kc_id = 0;
  double pagerank = 0.0;
  double pagerank_normalized = 0.0;
  double cosine = 0.0;
  double combined = 0.0;
};

struct RankWeights {
  double pagerank = 0.8;
  double cosine = 0.2;
  /// Min-max normalise PageRank within the fragment before combining.
  bool normalize_pagerank = true;
};

/// Candidate concepts of one fragment, in file order.
struct FragmentAnnotations {
  std::string fragment_id;
  std::vector<RawAnnotation> annotations;
};

/// Reads `fragment_id, kc_id, pagerank, cosine` rows grouped by fragment in
/// first-seen order. A header row is skipped.
std::vector<FragmentAnnotations> read_annotations(std::istream& in);

std::vector<ConceptAnnotation> rank_concepts(const std::vector<RawAnnotation>& annotations,
                                             std::size_t top_n = 5, const RankWeights& weights = {});

/// Splits a transcript into fragments of at most `target_chars`, preferring
/// sentence ends and then whitespace within the last 10% of each window.
std::vector<std::string> fragment_transcript(std::string_view transcript, std::size_t target_chars = 5000);

struct WatchRecord {
  double watch_seconds = 0.0;
  double duration_seconds = 0.0;
};

struct EngagementLabel {
  double normalized = 0.0;
  int label = 0;
};

inline constexpr double kEngagementThreshold = 0.75;

EngagementLabel label_engagement(const WatchRecord& w);

/// Shifts timestamps so the earliest becomes 0.
std::vector<EngagementEvent> rebase_timestamps(std::vector<EngagementEvent> events);

}  // namespace truelearn
