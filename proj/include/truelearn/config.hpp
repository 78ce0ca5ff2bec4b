#pragma once

// Flat key = value model configuration.
//
// Grammar, one entry per line:
//   line    := ws* (entry | comment)? ws*
//   entry   := key ws* '=' ws* value ws* comment?
//   key     := [a-z_]+ ('.' [a-z_]+)?
//   value   := number | "true" | "false" | '"' chars '"' | bare-word
//   comment := '#' anything
// Unknown keys, repeated keys and ill-typed values are errors.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "truelearn/learners.hpp"

namespace truelearn {

enum class ModelKind { Interest, Novelty, Ink, Kt, Cosine, JaccardConcept, JaccardUser, TfBinary, TfCosine };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);
/// "interest, novelty, ink, ..." for usage messages.
std::string model_kind_list();

struct ModelConfig {
  ModelKind kind = ModelKind::Novelty;
  TrueSkillParams interest = TrueSkillParams::interest_defaults();
  TrueSkillParams novelty = TrueSkillParams::novelty_defaults();
  InkParams ink;
  KtParams kt;
  /// Decision threshold of the baselines; nullopt picks the per-model default.
  std::optional<double> threshold;
  /// Prediction of the pairwise baselines on a session's first event;
  /// nullopt means the training majority class (1 when unknown).
  std::optional<int> first_event_label;

  /// Assigns one key. Unprefixed TrueSkill keys (beta, tau, ...) address the
  /// selected model and are only valid for interest and novelty.
  void set(std::string_view key, std::string_view value);
  void set_number(std::string_view key, double value);
  /// Every key this config accepts for its model kind.
  std::vector<std::string> keys() const;
  double threshold_or_default() const;
  void validate() const;
};

double default_threshold(ModelKind kind);

ModelConfig parse_config(std::istream& in);
ModelConfig load_config(const std::filesystem::path& path);
/// Serialises every key relevant to the model kind; parse_config round-trips it.
std::string to_config_text(const ModelConfig& config);

/// Read-only data shared by all per-learner model instances.
struct ModelContext {
  std::shared_ptr<const UserJaccardTable> user_table;
};

std::unique_ptr<EngagementModel> make_model(const ModelConfig& config, const ModelContext& context = {});

}  // namespace truelearn
