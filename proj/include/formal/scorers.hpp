#pragma once

#include <memory>
#include <string>

#include "formal/embeddings.hpp"
#include "formal/ngram.hpp"
#include "formal/text.hpp"

namespace formal {

/// Normalized relatedness, fluency and readability of a candidate, and their
/// weighted sum.
struct ScoreBreakdown {
  double relatedness = 0;  // r_s
  double fluency = 0;      // r_f
  double readability = 0;  // r_d
  double composite = 0;    // G
};

struct ScorerWeights {
  double relatedness = 0.2;
  double fluency = 0.6;
  double readability = 0.2;

  /// Nonnegative and summing to 1 within 1e-9; throws ConfigError otherwise.
  void validate() const;
  double combine(double r_s, double r_f, double r_d) const {
    return relatedness * r_s + fluency * r_f + readability * r_d;
  }
};

inline constexpr double kDefaultGradeCap = 18.0;

/// Vowel-group heuristic: maximal runs of [aeiouy], minus one for a final
/// silent 'e' (kept for consonant + "le"), never below 1. Non-alphabetic
/// tokens count as one syllable.
int count_syllables(const Token& word);

/// Flesch-Kincaid grade of a single sentence. Punctuation-only tokens are not
/// words. Throws InputError when the sentence has no words.
double fk_grade(const Sentence& s);

/// clamp(fk_grade / grade_cap, 0, 1).
double readability_score(const Sentence& s, double grade_cap = kDefaultGradeCap);

/// Geometric-mean per-prediction probability, in (0, 1].
double fluency_score(const NgramModel& model, const Sentence& s);

/// clamp(cosine(avg_x, avg_y), 0, 1) over stopword-filtered tokens present in
/// the table; 0 when either side has nothing to average.
double relatedness_score(const Sentence& x, const Sentence& y, const EmbeddingTable& emb,
                         const StopwordList& stop);

/// The shared, read-only resources behind the composite score.
struct ScoringResources {
  std::shared_ptr<const NgramModel> lm;
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::shared_ptr<const StopwordList> stopwords;
};

ScoringResources load_resources(const std::string& lm_path, const std::string& emb_path,
                                const std::string& stopword_path, std::size_t emb_dim = 0);

ScoreBreakdown composite_score(const Sentence& x, const Sentence& y, const ScorerWeights& w,
                               const NgramModel& lm, const EmbeddingTable& emb, const StopwordList& stop,
                               double grade_cap = kDefaultGradeCap);

/// Bundles resources with weights so callers can score (x, y) pairs.
class Scorer {
 public:
  Scorer(ScoringResources res, ScorerWeights weights, double grade_cap = kDefaultGradeCap);

  ScoreBreakdown score(const Sentence& x, const Sentence& y) const;
  double readability(const Sentence& s) const;

  const ScorerWeights& weights() const { return weights_; }
  double grade_cap() const { return grade_cap_; }
  const ScoringResources& resources() const { return res_; }

 private:
  ScoringResources res_;
  ScorerWeights weights_;
  double grade_cap_;
};

}  // namespace formal
