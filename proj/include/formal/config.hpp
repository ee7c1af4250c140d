#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "formal/nn/predictor.hpp"
#include "formal/nn/seq2seq.hpp"
#include "formal/scorers.hpp"
#include "formal/text.hpp"

namespace formal {

struct TrainConfig {
  // [model]
  nn::Seq2SeqConfig model;  // vocab_size is filled in from data
  std::size_t max_len = 60;
  int min_count = 1;

  // [predictor]
  nn::PredictorConfig predictor{0, 64, 128, 64};
  int predictor_epochs = 10;
  double predictor_lr = 0.001;

  // [scorer]
  ScorerWeights weights;
  double grade_cap = kDefaultGradeCap;
  int lm_order = 4;
  int embedding_dim = 0;  // 0: taken from the file

  // [sampler]
  std::size_t samples = 100;
  std::size_t max_attempts = 0;  // 0: 20 * samples

  // [train]
  std::uint64_t seed = 1;
  double zeta1 = 1.05;
  double zeta2 = 1.10;
  double zeta_step = 0.0;  // per-cycle threshold escalation, off by default
  double lambda = 0.1;
  double tau = 0.001;
  double lr = 0.001;
  double clip_norm = 1.0;  // 0 disables
  std::size_t batch_size = 1;
  int pretrain_epochs = 20;
  int pretrain_patience = 10;  // undone epochs in a row before stopping; 0 never stops
  int max_cycles = 20;
  int exploit_epochs = 20;
  int patience = 3;
  double valid_fraction = 0.1;
  int threads = 1;

  void validate() const;
  std::size_t effective_max_attempts() const { return max_attempts ? max_attempts : 20 * samples; }
};

struct PathConfig {
  std::string corpus;
  std::string heldout;
  std::string lexicon;
  std::string embeddings;
  std::string stopwords;
  std::string lm;         // ARPA file
  std::string lm_corpus;  // trains an LM when no ARPA file is given
  std::string output_dir;
};

struct RunConfig {
  TrainConfig train;
  PathConfig paths;

  /// Sets one "section.key" field from text. Throws ConfigError on unknown
  /// keys or unparsable values.
  void apply(const std::string& key, const std::string& value);
  /// Reads an INI file; later apply() calls override it.
  void load_file(const std::string& path);
  /// Every field, keyed "section.key".
  nlohmann::json to_json() const;
  /// Numeric ranges plus existence of every non-empty input path.
  void validate(bool check_paths = true) const;
};

}  // namespace formal
