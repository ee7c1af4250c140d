#include "formal/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include "formal/error.hpp"
#include "formal/rng.hpp"

namespace formal {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Normalized single token, or empty when `w` is not exactly one token.
std::string single_token(const std::string& w) {
  if (w.find('_') != std::string::npos) return "";
  try {
    Sentence s = tokenize(w);
    if (s.size() != 1) return "";
    return s[0].normalized();
  } catch (const InputError&) {
    return "";
  }
}

}  // namespace

void SynonymLexicon::add(const std::string& head, const std::string& synonym) {
  if (head.empty() || synonym.empty() || head == synonym) return;
  auto& syns = entries_[head];
  auto it = std::lower_bound(syns.begin(), syns.end(), synonym);
  if (it == syns.end() || *it != synonym) syns.insert(it, synonym);
}

const std::vector<std::string>* SynonymLexicon::synonyms(const std::string& word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

SynonymLexicon SynonymLexicon::load(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lexicon: " + path);
  return parse(in, path, warnings);
}

SynonymLexicon SynonymLexicon::parse(std::istream& in, const std::string& name,
                                     std::vector<std::string>* warnings) {
  SynonymLexicon lex;
  auto warn = [&](std::size_t line, const std::string& msg) {
    if (warnings) warnings->push_back(name + ":" + std::to_string(line) + ": " + msg);
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(name, lineno, "expected word<TAB>synonyms");
    std::string head = single_token(trim(line.substr(0, tab)));
    if (head.empty()) throw ParseError(name, lineno, "headword must be a single token");
    std::string rest = line.substr(tab + 1);
    std::size_t kept = 0;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, '|')) {
      item = trim(item);
      if (item.empty()) continue;
      std::string syn = single_token(item);
      if (syn.empty()) {
        warn(lineno, "dropped multi-word synonym '" + item + "'");
        continue;
      }
      if (syn == head) continue;
      lex.add(head, syn);
      ++kept;
    }
    if (kept == 0) warn(lineno, "no usable synonyms for '" + head + "', line skipped");
  }
  return lex;
}

void SynonymLexicon::write(std::ostream& out) const {
  for (const auto& [head, syns] : entries_) {
    out << head << '\t';
    for (std::size_t i = 0; i < syns.size(); ++i) {
      if (i) out << '|';
      out << syns[i];
    }
    out << '\n';
  }
}

void SynonymLexicon::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write: " + path);
  write(out);
}

SynonymLexicon build_lexicon_from_synsets(std::istream& in, SynsetIngestStats* stats) {
  SynsetIngestStats st;
  std::map<std::string, std::vector<std::string>> prolog_synsets;
  std::vector<std::vector<std::string>> line_synsets;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == '%') continue;
    if (line.rfind("s(", 0) == 0) {
      // s(100001740,1,'entity',n,1,11).
      auto c1 = line.find(',');
      auto q1 = line.find('\'');
      if (c1 == std::string::npos || q1 == std::string::npos) continue;
      std::string id = line.substr(2, c1 - 2);
      std::string lemma;
      std::size_t i = q1 + 1;
      for (; i < line.size(); ++i) {
        if (line[i] == '\'') {
          if (i + 1 < line.size() && line[i + 1] == '\'') {
            lemma += '\'';
            ++i;
          } else {
            break;
          }
        } else {
          lemma += line[i];
        }
      }
      prolog_synsets[id].push_back(lemma);
    } else {
      std::vector<std::string> lemmas;
      std::stringstream ss(line);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) lemmas.push_back(item);
      }
      line_synsets.push_back(std::move(lemmas));
    }
  }
  for (auto& [id, lemmas] : prolog_synsets) line_synsets.push_back(std::move(lemmas));

  SynonymLexicon lex;
  for (const auto& lemmas : line_synsets) {
    ++st.synsets;
    std::vector<std::string> words;
    for (const auto& l : lemmas) {
      ++st.lemmas;
      std::string w = single_token(l);
      if (w.empty()) {
        ++st.dropped_multiword;
        continue;
      }
      words.push_back(w);
    }
    for (const auto& a : words)
      for (const auto& b : words) lex.add(a, b);
  }
  if (stats) *stats = st;
  return lex;
}

void SampleConfig::validate() const {
  if (samples < 1) throw ConfigError("sampler: K must be >= 1");
  if (max_attempts < samples) throw ConfigError("sampler: max_attempts must be >= K");
}

std::uint64_t variant_space_size(const Sentence& sentence, const SynonymLexicon& lex) {
  std::uint64_t total = 1;
  const auto cap = std::numeric_limits<std::uint64_t>::max() / 64;
  for (const auto& t : sentence) {
    if (const auto* syns = lex.synonyms(t.normalized())) {
      total *= syns->size() + 1;
      if (total > cap) return cap;
    }
  }
  return total - 1;
}

std::vector<Sentence> sample_variants(const Sentence& sentence, const SynonymLexicon& lex,
                                      const SampleConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<std::size_t, const std::vector<std::string>*>> slots;
  for (std::size_t i = 0; i < sentence.size(); ++i)
    if (const auto* syns = lex.synonyms(sentence[i].normalized())) slots.emplace_back(i, syns);
  std::vector<Sentence> out;
  if (slots.empty()) return out;

  Rng rng(cfg.rng_seed);
  std::unordered_set<std::string> seen{sentence.key()};
  std::vector<Token> toks = sentence.tokens();
  for (std::size_t attempt = 0; attempt < cfg.max_attempts && out.size() < cfg.samples; ++attempt) {
    for (const auto& [pos, syns] : slots) {
      std::size_t pick = uniform_index(rng, syns->size() + 1);
      toks[pos] = pick == 0 ? sentence[pos] : Token((*syns)[pick - 1]);
    }
    Sentence candidate(toks);
    if (seen.insert(candidate.key()).second) out.push_back(std::move(candidate));
  }
  return out;
}

Selection select_best(const Sentence& x, const Sentence& y_g, const std::vector<Sentence>& samples,
                      const Scorer& scorer) {
  Selection sel{y_g, false, {}, {}};
  sel.base_score = scorer.score(x, y_g);
  sel.best_score = sel.base_score;
  bool best_is_base = true;
  for (const auto& s : samples) {
    ScoreBreakdown sc = scorer.score(x, s);
    bool better = sc.composite > sel.best_score.composite;
    bool tie_wins = sc.composite == sel.best_score.composite && !best_is_base && s < sel.best;
    if (better || tie_wins) {
      sel.best = s;
      sel.best_score = sc;
      best_is_base = false;
    }
  }
  sel.improved = !best_is_base && sel.best != y_g && sel.best_score.composite > sel.base_score.composite;
  return sel;
}

}  // namespace formal
