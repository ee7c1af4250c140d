#include "formal/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "formal/error.hpp"
#include "formal/rng.hpp"

namespace formal {

namespace {

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }
bool is_ascii_space(unsigned char c) { return c < 0x80 && std::isspace(c); }

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }
  return out;
}

constexpr std::array<const char*, Vocabulary::kNumSpecials> kSpecialSpellings = {"<pad>", "<s>", "</s>",
                                                                                  "<unk>"};

}  // namespace

Token::Token(std::string surface) : surface_(std::move(surface)), normalized_(lowercase(surface_)) {
  if (surface_.empty()) throw InputError("token: empty surface");
}

bool Token::is_punctuation() const {
  return std::all_of(surface_.begin(), surface_.end(),
                     [](char c) { return is_ascii_punct(static_cast<unsigned char>(c)); });
}

bool Token::is_alphabetic() const {
  return std::all_of(surface_.begin(), surface_.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::isalpha(u);
  });
}

Sentence::Sentence(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw InputError("sentence: no tokens");
}

Sentence Sentence::from_words(const std::vector<std::string>& words) {
  std::vector<Token> toks;
  toks.reserve(words.size());
  for (const auto& w : words) toks.emplace_back(w);
  return Sentence(std::move(toks));
}

std::vector<std::string> Sentence::normalized() const {
  std::vector<std::string> out;
  out.reserve(tokens_.size());
  for (const auto& t : tokens_) out.push_back(t.normalized());
  return out;
}

std::string Sentence::str() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out += ' ';
    out += tokens_[i].surface();
  }
  return out;
}

std::string Sentence::key() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out += ' ';
    out += tokens_[i].normalized();
  }
  return out;
}

bool operator==(const Sentence& a, const Sentence& b) { return a.tokens_ == b.tokens_; }

bool operator<(const Sentence& a, const Sentence& b) {
  return std::lexicographical_compare(
      a.tokens_.begin(), a.tokens_.end(), b.tokens_.begin(), b.tokens_.end(),
      [](const Token& x, const Token& y) { return x.normalized() < y.normalized(); });
}

Sentence tokenize(std::string_view text, std::size_t max_len) {
  std::vector<Token> toks;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      toks.emplace_back(std::move(cur));
      cur.clear();
    }
  };
  for (char ch : text) {
    auto u = static_cast<unsigned char>(ch);
    if (is_ascii_space(u)) {
      flush();
    } else if (is_ascii_punct(u)) {
      flush();
      toks.emplace_back(std::string(1, ch));
    } else {
      cur += ch;
    }
  }
  flush();
  if (toks.empty()) throw InputError("tokenize: empty input");
  if (toks.size() > max_len)
    throw InputError("tokenize: " + std::to_string(toks.size()) + " tokens exceeds max_len " +
                     std::to_string(max_len));
  return Sentence(std::move(toks));
}

std::string detokenize(const Sentence& s) { return s.str(); }

std::vector<Sentence> read_corpus(const std::string& path, std::size_t max_len, std::size_t* rejected) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus: " + path);
  std::vector<Sentence> out;
  std::size_t dropped = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (std::all_of(line.begin(), line.end(),
                    [](char c) { return is_ascii_space(static_cast<unsigned char>(c)); }))
      continue;
    try {
      out.push_back(tokenize(line, max_len));
    } catch (const InputError&) {
      ++dropped;
    }
  }
  if (rejected) *rejected = dropped;
  return out;
}

void write_corpus(const std::string& path, const std::vector<Sentence>& corpus) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write: " + path);
  for (const auto& s : corpus) out << s.str() << '\n';
}

// Vocabulary

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  id_to_token_.reserve(kNumSpecials + words.size());
  for (const char* s : kSpecialSpellings) {
    token_to_id_.emplace(s, static_cast<int>(id_to_token_.size()));
    id_to_token_.emplace_back(s);
  }
  for (const auto& w : words) {
    if (w.empty()) throw InputError("vocabulary: empty token");
    if (!token_to_id_.emplace(w, static_cast<int>(id_to_token_.size())).second)
      throw InputError("vocabulary: duplicate token '" + w + "'");
    id_to_token_.push_back(w);
  }
}

int Vocabulary::id(const std::string& normalized) const {
  auto it = token_to_id_.find(normalized);
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& normalized) const { return token_to_id_.count(normalized) > 0; }

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
    throw InputError("vocabulary: id " + std::to_string(id) + " out of range");
  return id_to_token_[static_cast<std::size_t>(id)];
}

Vocabulary Vocabulary::extended(const std::vector<std::string>& extra) const {
  std::vector<std::string> words(id_to_token_.begin() + kNumSpecials, id_to_token_.end());
  std::vector<std::string> add;
  for (const auto& w : extra)
    if (!contains(w)) add.push_back(w);
  std::sort(add.begin(), add.end());
  add.erase(std::unique(add.begin(), add.end()), add.end());
  words.insert(words.end(), add.begin(), add.end());
  return Vocabulary(words);
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : id_to_token_) {
    h = fnv1a(t, h);
    h = fnv1a("\n", h);
  }
  return h;
}

Vocabulary build_vocab(const std::vector<Sentence>& corpus, int min_count) {
  if (min_count < 1) throw InputError("build_vocab: min_count must be >= 1");
  std::map<std::string, long> freq;
  for (const auto& s : corpus)
    for (const auto& t : s) ++freq[t.normalized()];
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [w, n] : freq) {
    bool special = std::find(kSpecialSpellings.begin(), kSpecialSpellings.end(), w) != kSpecialSpellings.end();
    if (n >= min_count && !special) kept.emplace_back(w, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [w, n] : kept) words.push_back(w);
  return Vocabulary(words);
}

std::vector<int> encode_tokens(const Sentence& s, const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(s.size());
  for (const auto& t : s) ids.push_back(vocab.id(t.normalized()));
  return ids;
}

std::vector<int> encode(const Sentence& s, const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(s.size() + 2);
  ids.push_back(Vocabulary::kBos);
  for (int id : encode_tokens(s, vocab)) ids.push_back(id);
  ids.push_back(Vocabulary::kEos);
  return ids;
}

Sentence decode(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::vector<Token> toks;
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size())
      throw InputError("decode: id " + std::to_string(id) + " out of range for vocabulary of size " +
                       std::to_string(vocab.size()));
    if (id == Vocabulary::kPad || id == Vocabulary::kBos || id == Vocabulary::kEos) continue;
    toks.emplace_back(vocab.token(id));
  }
  if (toks.empty()) throw InputError("decode: no tokens left after stripping specials");
  return Sentence(std::move(toks));
}

CorpusSplit split_corpus(const std::vector<Sentence>& corpus, std::uint64_t seed, SplitRatios ratios,
                         double heldout_fraction) {
  const double sum = ratios.train + ratios.valid + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.valid < 0 || ratios.test < 0)
    throw InputError("split_corpus: ratios must be nonnegative and sum to 1");
  if (corpus.size() < 10) throw InputError("split_corpus: corpus too small (need >= 10 sentences)");
  if (heldout_fraction < 0 || heldout_fraction > 1) throw InputError("split_corpus: bad heldout fraction");

  const std::size_t n = corpus.size();
  const std::array<double, 3> exact = {ratios.train * n, ratios.valid * n, ratios.test * n};
  std::array<std::size_t, 3> sizes{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    sizes[i] = static_cast<std::size_t>(std::floor(exact[i]));
    assigned += sizes[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return exact[a] - std::floor(exact[a]) > exact[b] - std::floor(exact[b]);
  });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  shuffle(idx.begin(), idx.end(), rng);

  CorpusSplit split;
  split.seed = seed;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < sizes[0]; ++i) split.train.push_back(corpus[idx[pos++]]);
  const auto n_held = static_cast<std::size_t>(std::llround(heldout_fraction * sizes[1]));
  for (std::size_t i = 0; i < sizes[1]; ++i) {
    auto& dst = i < n_held ? split.heldout : split.valid;
    dst.push_back(corpus[idx[pos++]]);
  }
  for (std::size_t i = 0; i < sizes[2]; ++i) split.test.push_back(corpus[idx[pos++]]);
  return split;
}

}  // namespace formal
