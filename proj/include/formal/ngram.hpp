#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "formal/text.hpp"

namespace formal {

/// Backoff n-gram model in ARPA layout: every stored n-gram carries a log10
/// probability and a log10 backoff weight used when it is a context.
///
/// Lookup for an unseen n-gram follows the usual recursion
///   log P(w | h) = bo(h) + log P(w | h[1:])
/// where a context that was never stored has backoff 0. Words that are not
/// unigrams map to <unk>; if the model has no <unk> they get kFloorLog10.
class NgramModel {
 public:
  static constexpr double kFloorLog10 = -99.0;
  static constexpr const char* kBos = "<s>";
  static constexpr const char* kEos = "</s>";
  static constexpr const char* kUnk = "<unk>";

  explicit NgramModel(int order);

  int order() const { return order_; }

  /// log10 P(word | context), context ordered oldest first.
  double log10_prob(std::span<const std::string> context, const std::string& word) const;

  /// Sum of log10 probabilities over the words (and </s> when the model has
  /// it), with the context primed by order-1 <s> symbols.
  double sentence_log10(const std::vector<std::string>& words, std::size_t* predictions = nullptr) const;

  bool has_eos() const;
  std::size_t num_entries(int k) const;
  /// Unigrams that can be predicted, i.e. everything except <s>.
  std::vector<std::string> predictable_words() const;
  /// Contexts (length k-1) that have at least one stored order-k n-gram.
  std::vector<std::vector<std::string>> observed_contexts(int k) const;

  void set_entry(const std::vector<std::string>& ngram, double log10_prob, double log10_backoff = 0.0);
  bool find_entry(const std::vector<std::string>& ngram, double* log10_prob, double* log10_backoff) const;

  void write_arpa(std::ostream& out) const;
  void write_arpa(const std::string& path) const;
  static NgramModel read_arpa(std::istream& in, const std::string& name = "<stream>");
  static NgramModel read_arpa(const std::string& path);

 private:
  struct Entry {
    double prob = kFloorLog10;
    double backoff = 0.0;
  };
  struct KeyHash {
    std::size_t operator()(const std::vector<int>& k) const noexcept;
  };
  using Table = std::unordered_map<std::vector<int>, Entry, KeyHash>;

  int intern(const std::string& w);
  int lookup_id(const std::string& w) const;  // -1 when unknown
  double log10_prob_ids(std::span<const int> context, int word, int max_order) const;

  friend NgramModel train_ngram(const std::vector<Sentence>&, int, double, std::size_t);

  int order_;
  std::unordered_map<std::string, int> word_ids_;
  std::vector<std::string> words_;
  std::vector<Table> tables_;  // tables_[k-1] holds k-grams
  int unk_id_ = -1;
};

/// Interpolated Kneser-Ney with a fixed discount over sentences padded with
/// (order-1) <s> symbols and one </s>. Lower orders use continuation counts
/// and the unigram level interpolates with a uniform distribution over the
/// predictable words (which include </s> and <unk>).
///
/// order == 1 is plain maximum likelihood over the tokens, without padding.
/// Higher orders need at least `min_sentences` sentences.
inline constexpr std::size_t kMinLmCorpus = 50;
NgramModel train_ngram(const std::vector<Sentence>& corpus, int order = 4, double discount = 0.75,
                       std::size_t min_sentences = kMinLmCorpus);

}  // namespace formal
