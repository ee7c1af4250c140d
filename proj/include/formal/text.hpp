#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace formal {

/// A word or punctuation symbol. `normalized` is the lowercase surface and is
/// what scoring, lexicon lookup and the vocabulary key on.
class Token {
 public:
  explicit Token(std::string surface);

  const std::string& surface() const { return surface_; }
  const std::string& normalized() const { return normalized_; }

  /// True when every character is ASCII punctuation.
  bool is_punctuation() const;
  /// True when every character is an ASCII letter.
  bool is_alphabetic() const;

  friend bool operator==(const Token& a, const Token& b) { return a.normalized_ == b.normalized_; }

 private:
  std::string surface_;
  std::string normalized_;
};

/// Non-empty ordered token sequence. Equality and ordering compare normalized
/// forms, so casing differences do not make two sentences distinct.
class Sentence {
 public:
  explicit Sentence(std::vector<Token> tokens);
  static Sentence from_words(const std::vector<std::string>& words);

  std::size_t size() const { return tokens_.size(); }
  const Token& operator[](std::size_t i) const { return tokens_[i]; }
  const std::vector<Token>& tokens() const { return tokens_; }
  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }

  std::vector<std::string> normalized() const;
  /// Space-joined surface forms.
  std::string str() const;
  /// Space-joined normalized forms.
  std::string key() const;

  friend bool operator==(const Sentence& a, const Sentence& b);
  friend bool operator<(const Sentence& a, const Sentence& b);
  friend bool operator!=(const Sentence& a, const Sentence& b) { return !(a == b); }

 private:
  std::vector<Token> tokens_;
};

inline constexpr std::size_t kDefaultMaxLen = 60;

/// Splits on whitespace and isolates every ASCII punctuation character as its
/// own token. Throws InputError on whitespace-only text or when the result is
/// longer than `max_len` tokens.
Sentence tokenize(std::string_view text, std::size_t max_len = kDefaultMaxLen);

/// Joins surface forms with single spaces; tokenize(detokenize(s)) == s.
std::string detokenize(const Sentence& s);

/// Reads one sentence per line, skipping blank lines. Lines that exceed
/// `max_len` tokens are dropped and counted in `rejected` when non-null.
std::vector<Sentence> read_corpus(const std::string& path, std::size_t max_len = kDefaultMaxLen,
                                  std::size_t* rejected = nullptr);
void write_corpus(const std::string& path, const std::vector<Sentence>& corpus);

/// token <-> id bijection. Ids 0-3 are reserved for PAD, BOS, EOS, UNK.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumSpecials = 4;

  Vocabulary();
  /// Specials followed by `words` in the given order. Duplicates and special
  /// spellings are rejected.
  explicit Vocabulary(const std::vector<std::string>& words);

  std::size_t size() const { return id_to_token_.size(); }
  int id(const std::string& normalized) const;  // kUnk when absent
  bool contains(const std::string& normalized) const;
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  /// New vocabulary with `extra` words appended (sorted, skipping known ones).
  Vocabulary extended(const std::vector<std::string>& extra) const;

  /// FNV-1a over the id-ordered token list.
  std::uint64_t hash() const;

  static bool is_special(int id) { return id >= 0 && id < kNumSpecials; }

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

/// Frequency >= min_count survive, ordered by (frequency desc, token asc).
Vocabulary build_vocab(const std::vector<Sentence>& corpus, int min_count = 1);

/// BOS, ids..., EOS.
std::vector<int> encode(const Sentence& s, const Vocabulary& vocab);
/// Ids of the tokens only, no BOS/EOS.
std::vector<int> encode_tokens(const Sentence& s, const Vocabulary& vocab);
/// Drops PAD/BOS/EOS, keeps UNK as "<unk>". Throws InputError on ids outside
/// the vocabulary or when nothing remains.
Sentence decode(const std::vector<int>& ids, const Vocabulary& vocab);

struct SplitRatios {
  double train = 0.80;
  double valid = 0.12;
  double test = 0.08;
};

struct CorpusSplit {
  std::vector<Sentence> train;
  std::vector<Sentence> valid;
  std::vector<Sentence> test;
  /// Model-selection slice carved out of the validation portion.
  std::vector<Sentence> heldout;
  std::uint64_t seed = 0;
};

/// Seeded shuffle followed by contiguous slicing. Slice sizes use the
/// largest-remainder rule so each is within one sentence of its exact share.
/// `heldout_fraction` of the validation slice is moved into `heldout`.
CorpusSplit split_corpus(const std::vector<Sentence>& corpus, std::uint64_t seed,
                         SplitRatios ratios = {}, double heldout_fraction = 0.0);

}  // namespace formal
