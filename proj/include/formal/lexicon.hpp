#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "formal/scorers.hpp"
#include "formal/text.hpp"

namespace formal {

/// word -> sorted set of single-token synonyms. A word never lists itself.
class SynonymLexicon {
 public:
  /// Adds `synonym` under `head` (both normalized). Self-links are ignored.
  void add(const std::string& head, const std::string& synonym);

  /// nullptr when the word has no entry.
  const std::vector<std::string>* synonyms(const std::string& word) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, std::vector<std::string>>& entries() const { return entries_; }

  /// Lines "word<TAB>syn1|syn2|...". Duplicate headwords merge; multi-token
  /// synonyms and empty synonym lists are skipped with a warning. A line with
  /// no TAB is a ParseError.
  static SynonymLexicon load(const std::string& path, std::vector<std::string>* warnings = nullptr);
  static SynonymLexicon parse(std::istream& in, const std::string& name,
                              std::vector<std::string>* warnings = nullptr);
  void save(const std::string& path) const;
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

struct SynsetIngestStats {
  std::size_t synsets = 0;
  std::size_t lemmas = 0;
  std::size_t dropped_multiword = 0;
};

/// Builds a lexicon from a WordNet-style synset dump. Two line formats are
/// accepted: Prolog `s(synset_id,w_num,'lemma',pos,sense,tag).` rows (as in
/// wn_s.pl), grouped by synset id, or one synset per line with lemmas
/// separated by commas. Every single-token lemma lists the other single-token
/// lemmas of each synset it belongs to.
SynonymLexicon build_lexicon_from_synsets(std::istream& in, SynsetIngestStats* stats = nullptr);

struct SampleConfig {
  std::size_t samples = 100;        // K
  std::size_t max_attempts = 2000;  // draws before giving up
  std::uint64_t rng_seed = 0;

  static SampleConfig with_samples(std::size_t k, std::uint64_t seed = 0) { return {k, 20 * k, seed}; }
  void validate() const;
};

/// Up to K distinct lexical variants of `sentence`, all different from it.
/// Each draw independently replaces every token that has a lexicon entry by a
/// uniform choice over {the token} + its synonyms. Draws stop at K distinct
/// variants or after max_attempts. Output is in discovery order and fully
/// determined by cfg.rng_seed.
std::vector<Sentence> sample_variants(const Sentence& sentence, const SynonymLexicon& lex,
                                      const SampleConfig& cfg);

/// Size of the variant space (excluding the sentence itself), saturating.
std::uint64_t variant_space_size(const Sentence& sentence, const SynonymLexicon& lex);

struct Selection {
  Sentence best;
  bool improved = false;
  ScoreBreakdown best_score;
  ScoreBreakdown base_score;  // score of y_g
};

/// argmax of G(x, .) over {y_g} + samples. Ties keep y_g; ties among samples
/// go to the lexicographically smaller token sequence.
Selection select_best(const Sentence& x, const Sentence& y_g, const std::vector<Sentence>& samples,
                      const Scorer& scorer);

}  // namespace formal
