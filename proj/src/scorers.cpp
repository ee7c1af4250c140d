#include "formal/scorers.hpp"

#include <algorithm>
#include <cmath>

#include "formal/error.hpp"

namespace formal {

void ScorerWeights::validate() const {
  if (relatedness < 0 || fluency < 0 || readability < 0)
    throw ConfigError("scorer weights must be nonnegative");
  if (std::abs(relatedness + fluency + readability - 1.0) > 1e-9)
    throw ConfigError("scorer weights must sum to 1");
}

namespace {

bool is_vowel(char c) {
  switch (c) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
    case 'y':
      return true;
    default:
      return false;
  }
}

}  // namespace

int count_syllables(const Token& word) {
  if (!word.is_alphabetic()) return 1;
  const std::string& w = word.normalized();
  int groups = 0;
  bool prev = false;
  for (char c : w) {
    bool v = is_vowel(c);
    if (v && !prev) ++groups;
    prev = v;
  }
  const std::size_t n = w.size();
  if (n >= 1 && w[n - 1] == 'e') {
    bool consonant_le = n >= 3 && w[n - 2] == 'l' && !is_vowel(w[n - 3]);
    if (!consonant_le) --groups;
  }
  return std::max(groups, 1);
}

double fk_grade(const Sentence& s) {
  int words = 0;
  int syllables = 0;
  for (const auto& t : s) {
    if (t.is_punctuation()) continue;
    ++words;
    syllables += count_syllables(t);
  }
  if (words == 0) throw InputError("fk_grade: sentence has no words");
  return 0.39 * words + 11.8 * syllables / words - 15.59;
}

double readability_score(const Sentence& s, double grade_cap) {
  if (!(grade_cap > 0)) throw InputError("readability: grade cap must be positive");
  return std::clamp(fk_grade(s) / grade_cap, 0.0, 1.0);
}

double fluency_score(const NgramModel& model, const Sentence& s) {
  std::size_t n = 0;
  double total = model.sentence_log10(s.normalized(), &n);
  if (n == 0) return 1.0;
  return std::pow(10.0, total / static_cast<double>(n));
}

namespace {

bool average_content(const Sentence& s, const EmbeddingTable& emb, const StopwordList& stop,
                     std::vector<double>& avg) {
  avg.assign(emb.dim(), 0.0);
  int count = 0;
  for (const auto& t : s) {
    if (stop.contains(t.normalized())) continue;
    const auto* v = emb.find(t.normalized());
    if (!v) continue;
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += (*v)[i];
    ++count;
  }
  if (count == 0) return false;
  for (auto& a : avg) a /= count;
  return true;
}

}  // namespace

double relatedness_score(const Sentence& x, const Sentence& y, const EmbeddingTable& emb,
                         const StopwordList& stop) {
  std::vector<double> ax, ay;
  if (!average_content(x, emb, stop, ax) || !average_content(y, emb, stop, ay)) return 0.0;
  double dot = 0, nx = 0, ny = 0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    dot += ax[i] * ay[i];
    nx += ax[i] * ax[i];
    ny += ay[i] * ay[i];
  }
  if (nx == 0 || ny == 0) return 0.0;
  return std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), 0.0, 1.0);
}

ScoringResources load_resources(const std::string& lm_path, const std::string& emb_path,
                                const std::string& stopword_path, std::size_t emb_dim) {
  ScoringResources res;
  res.lm = std::make_shared<NgramModel>(NgramModel::read_arpa(lm_path));
  res.embeddings = std::make_shared<EmbeddingTable>(EmbeddingTable::load(emb_path, emb_dim));
  res.stopwords = std::make_shared<StopwordList>(StopwordList::load(stopword_path));
  return res;
}

ScoreBreakdown composite_score(const Sentence& x, const Sentence& y, const ScorerWeights& w,
                               const NgramModel& lm, const EmbeddingTable& emb, const StopwordList& stop,
                               double grade_cap) {
  w.validate();
  ScoreBreakdown b;
  b.relatedness = relatedness_score(x, y, emb, stop);
  b.fluency = fluency_score(lm, y);
  b.readability = readability_score(y, grade_cap);
  b.composite = w.combine(b.relatedness, b.fluency, b.readability);
  return b;
}

Scorer::Scorer(ScoringResources res, ScorerWeights weights, double grade_cap)
    : res_(std::move(res)), weights_(weights), grade_cap_(grade_cap) {
  if (!res_.lm || !res_.embeddings || !res_.stopwords) throw InputError("scorer: missing resources");
  weights_.validate();
}

ScoreBreakdown Scorer::score(const Sentence& x, const Sentence& y) const {
  return composite_score(x, y, weights_, *res_.lm, *res_.embeddings, *res_.stopwords, grade_cap_);
}

double Scorer::readability(const Sentence& s) const { return readability_score(s, grade_cap_); }

}  // namespace formal
