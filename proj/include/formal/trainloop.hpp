#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "formal/config.hpp"
#include "formal/lexicon.hpp"
#include "formal/nn/adam.hpp"
#include "formal/nn/predictor.hpp"
#include "formal/nn/seq2seq.hpp"
#include "formal/scorers.hpp"
#include "formal/text.hpp"

namespace formal {

/// 1 = retain, 2 = mid formality, 3 = high formality.
enum class ControlLevel : int { Retain = 1, Mid = 2, High = 3 };

/// Class of the readability ratio c_r: below zeta1 is 1, above zeta2 is 3,
/// and [zeta1, zeta2] inclusive is 2.
int control_from_ratio(double ratio, double zeta1, double zeta2);
/// Ratio of readability scores; a zero input score gives 1 when the output is
/// also zero and 3 otherwise.
int determine_control(double rd_x, double rd_y, double zeta1, double zeta2);
int determine_control(const Sentence& x, const Sentence& y, double grade_cap, double zeta1, double zeta2);

/// Generator plus the vocabulary it was built on.
struct Generator {
  Vocabulary vocab;
  nn::Seq2Seq net;
  std::size_t max_len = 60;

  /// Greedy decoding. Empty when the output has no tokens or only <unk>.
  std::optional<Sentence> generate(const Sentence& x, int control) const;
};

/// Corpus vocabulary followed by synonyms of its words, so substitutions have
/// their own ids.
Vocabulary build_model_vocab(const std::vector<Sentence>& corpus, const SynonymLexicon& lex, int min_count = 1);

struct TrainingTriple {
  Sentence x;
  Sentence y;
  int c = 1;
  ScoreBreakdown scores;
  int cycle = 0;

  nlohmann::json to_json() const;
  static TrainingTriple from_json(const nlohmann::json& j);
};

void write_triples(const std::string& path, const std::vector<TrainingTriple>& triples);
std::vector<TrainingTriple> read_triples(const std::string& path);

struct ExploreStats {
  std::size_t seen = 0;
  std::size_t emitted = 0;
  std::size_t skipped = 0;     // no improvement, or a degenerate y_g
  std::size_t discarded = 0;   // best variant equals the input
  std::size_t degenerate = 0;  // subset of skipped
  std::array<std::size_t, 3> per_control{};

  bool reconciles() const { return seen == emitted + skipped + discarded; }
  nlohmann::json to_json() const;
};

struct ExploreConfig {
  std::size_t samples = 100;
  std::size_t max_attempts = 2000;
  double zeta1 = 1.05;
  double zeta2 = 1.10;
  std::uint64_t seed = 0;
  int threads = 1;
  int cycle = 1;
};

struct ExploreResult {
  std::vector<TrainingTriple> triples;  // in corpus order
  ExploreStats stats;
};

/// Samples around the model's own output for every sentence and keeps the
/// best variant when it beats that output. Never touches model parameters.
/// Sentence i draws from its own stream derived from (seed, i), so the result
/// does not depend on the thread count.
ExploreResult explore(const Generator& gen, const std::vector<Sentence>& corpus, const Scorer& scorer,
                      const SynonymLexicon& lex, const ExploreConfig& cfg);

struct OptimConfig {
  nn::AdamConfig adam;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  std::size_t batch_size = 1;  // gradients are averaged over a batch
};

struct PretrainReport {
  double initial_loss = 0.0;
  /// Corpus reconstruction loss of the kept weights after each epoch.
  std::vector<double> epoch_loss;
  std::vector<int> rejected_epochs;
  bool plateaued = false;
};

/// Mean teacher-forced reconstruction loss (control 1) over the corpus.
double reconstruction_loss(const Generator& gen, const std::vector<Sentence>& corpus);

/// Autoencoder training (target == input) with control 1 fed throughout,
/// visiting sentences in a seeded order. After each epoch the corpus loss is
/// recomputed; an epoch that raises it is undone (weights and optimizer
/// state), and `plateau_patience` undone epochs in a row end training early
/// (0 disables early stopping).
PretrainReport pretrain(Generator& gen, const std::vector<Sentence>& corpus, int epochs, const OptimConfig& opt,
                        const std::function<void(int, double)>& on_epoch = {}, int plateau_patience = 10);

struct PredictorReport {
  std::vector<double> epoch_loss;
  double train_accuracy = 0.0;
  std::array<std::size_t, 3> class_counts{};
};

nn::ControlPredictor train_control_predictor(const std::vector<TrainingTriple>& triples, const Vocabulary& vocab,
                                             const nn::PredictorConfig& cfg, int epochs, const OptimConfig& opt,
                                             PredictorReport* report = nullptr);

/// Fraction of triples whose argmax prediction equals the label.
double predictor_accuracy(const nn::ControlPredictor& pred, const Vocabulary& vocab,
                          const std::vector<TrainingTriple>& triples);

struct ExploitConfig {
  int epochs = 20;
  int patience = 3;
  double lambda = 0.1;
  double tau = 0.001;
  double valid_fraction = 0.1;
};

struct ExploitReport {
  std::vector<double> train_loss;
  std::vector<double> valid_loss;
  int best_epoch = 0;  // 1-based
  double best_valid = 0.0;
  bool stopped_early = false;
  std::size_t train_size = 0;
  std::size_t valid_size = 0;
};

/// Trains the generator on triples against the frozen predictor, keeping the
/// weights of the epoch with the lowest validation loss.
ExploitReport exploit(Generator& gen, const nn::ControlPredictor& predictor, const std::vector<TrainingTriple>& triples,
                      const ExploitConfig& cfg, const OptimConfig& opt);

/// Composite loss of one triple without updating anything.
double triple_loss(const Generator& gen, const nn::ControlPredictor& predictor, const TrainingTriple& t,
                   double lambda, double tau);

/// Control 1 returns x unchanged; 2 and 3 decode greedily.
std::optional<Sentence> transform(const Generator& gen, const Sentence& x, int control);

/// Scores that cannot be computed (no words in the output) count as zeros.
ScoreBreakdown score_or_zero(const Scorer& scorer, const Sentence& x, const std::optional<Sentence>& y);

struct HeldoutScore {
  double mean_g_c2 = 0.0;
  double mean_g_c3 = 0.0;
  double mean_g = 0.0;
};

HeldoutScore heldout_score(const Generator& gen, const std::vector<Sentence>& heldout, const Scorer& scorer);

struct TrainingInputs {
  std::vector<Sentence> corpus;
  std::vector<Sentence> heldout;
  SynonymLexicon lexicon;
  ScoringResources resources;
};

struct RunResult {
  nlohmann::json manifest;
  int best_cycle = 0;
  double best_mean = 0.0;
};

/// Pretrain, then up to max_cycles of explore / predictor / exploit. Writes
/// manifest.json, triples_cycle<N>.jsonl, dataset.jsonl, pretrain.ckpt,
/// cycle<N>.ckpt and best.ckpt into out_dir.
RunResult run_training(const TrainConfig& cfg, const TrainingInputs& in, const std::string& out_dir,
                       const nlohmann::json& config_echo = nlohmann::json::object());

}  // namespace formal
