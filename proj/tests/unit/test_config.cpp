#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "truelearn/config.hpp"
#include "truelearn/error.hpp"

using namespace truelearn;

namespace {

ModelConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("model names") {
  for (auto k : {ModelKind::Interest, ModelKind::Novelty, ModelKind::Ink, ModelKind::Kt, ModelKind::Cosine,
                 ModelKind::JaccardConcept, ModelKind::JaccardUser, ModelKind::TfBinary, ModelKind::TfCosine}) {
    CHECK(parse_model_kind(to_string(k)) == k);
    CHECK(model_kind_list().find(std::string(to_string(k))) != std::string::npos);
  }
  CHECK_FALSE(parse_model_kind("trueskill").has_value());
}

TEST_CASE("grammar: comments, whitespace, quoting and unprefixed keys") {
  const auto c = parse(
      "# header\n"
      "\n"
      "  model = \"interest\"   # trailing\n"
      "beta=0.3\n"
      "interest.use_draw_margin = true\n"
      "interest.init_variance = 2e-1\n");
  CHECK(c.kind == ModelKind::Interest);
  CHECK(c.interest.beta == 0.3);
  CHECK(c.interest.use_draw_margin);
  CHECK(c.interest.init_variance == 0.2);
}

TEST_CASE("model key may come after the keys it scopes") {
  const auto c = parse("beta = 0.7\nmodel = novelty\n");
  CHECK(c.kind == ModelKind::Novelty);
  CHECK(c.novelty.beta == 0.7);
}

TEST_CASE("invalid configurations are config errors") {
  CHECK(kind_of([] { parse("model = nope\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse("model = novelty\nwhat = 1\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse("model = novelty\nbeta = 1\nbeta = 2\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse("model = novelty\nbeta = abc\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse("model = kt\nbeta = 1\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse("model = cosine\nfirst_event_label = 2\n"); }) == ErrorKind::ConfigError);
  // Out-of-range values fail parameter validation.
  CHECK(kind_of([] { parse("model = novelty\nbeta = -1\n"); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { parse("model = novelty\nnovelty.draw_probability = 1.0\n"); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { parse("this line has no equals\n"); }) == ErrorKind::ConfigError);
}

TEST_CASE("config text round-trips for every model kind") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.45);
  for (auto k : {ModelKind::Interest, ModelKind::Novelty, ModelKind::Ink, ModelKind::Kt, ModelKind::Cosine,
                 ModelKind::JaccardConcept, ModelKind::JaccardUser, ModelKind::TfBinary, ModelKind::TfCosine}) {
    ModelConfig c;
    c.kind = k;
    c.interest.beta = u(rng);
    c.novelty.beta = u(rng);
    c.novelty.draw_probability = u(rng);
    c.ink.tau = u(rng);
    c.kt.p_learn = u(rng);
    c.threshold = u(rng);
    c.first_event_label = 0;
    const auto back = parse(to_config_text(c));
    CHECK(back.kind == k);
    CHECK(to_config_text(back) == to_config_text(c));
    for (const auto& key : c.keys()) CHECK(to_config_text(c).find(key + " =") != std::string::npos);
  }
}

TEST_CASE("set_number maps booleans") {
  ModelConfig c;
  c.kind = ModelKind::Ink;
  c.set_number("ink.greedy", 0.0);
  CHECK_FALSE(c.ink.greedy);
  c.set_number("novelty.use_draw_margin", 1.0);
  CHECK(c.novelty.use_draw_margin);
}

TEST_CASE("make_model builds the configured kind") {
  ModelConfig c;
  c.kind = ModelKind::TfBinary;
  c.threshold = 3.0;
  CHECK(make_model(c)->name() == "tf-binary");
  c.kind = ModelKind::JaccardUser;
  CHECK_THROWS_AS(make_model(c), Error);
  CHECK(default_threshold(ModelKind::Cosine) == 0.5);
}
