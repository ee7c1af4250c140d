#include "formal/ngram.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "formal/error.hpp"

namespace formal {

std::size_t NgramModel::KeyHash::operator()(const std::vector<int>& k) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (int v : k) {
    h ^= static_cast<std::size_t>(static_cast<unsigned>(v));
    h *= 0x100000001b3ULL;
  }
  return h;
}

NgramModel::NgramModel(int order) : order_(order) {
  if (order < 1) throw InputError("ngram: order must be >= 1");
  tables_.resize(static_cast<std::size_t>(order));
}

int NgramModel::intern(const std::string& w) {
  auto [it, inserted] = word_ids_.emplace(w, static_cast<int>(words_.size()));
  if (inserted) {
    words_.push_back(w);
    if (w == kUnk) unk_id_ = it->second;
  }
  return it->second;
}

int NgramModel::lookup_id(const std::string& w) const {
  auto it = word_ids_.find(w);
  return it == word_ids_.end() ? -1 : it->second;
}

void NgramModel::set_entry(const std::vector<std::string>& ngram, double log10_prob, double log10_backoff) {
  if (ngram.empty() || ngram.size() > static_cast<std::size_t>(order_))
    throw InputError("ngram: entry of length " + std::to_string(ngram.size()) + " in order-" +
                     std::to_string(order_) + " model");
  std::vector<int> key;
  key.reserve(ngram.size());
  for (const auto& w : ngram) key.push_back(intern(w));
  tables_[ngram.size() - 1][key] = Entry{log10_prob, log10_backoff};
}

bool NgramModel::find_entry(const std::vector<std::string>& ngram, double* log10_prob,
                            double* log10_backoff) const {
  if (ngram.empty() || ngram.size() > static_cast<std::size_t>(order_)) return false;
  std::vector<int> key;
  for (const auto& w : ngram) {
    int id = lookup_id(w);
    if (id < 0) return false;
    key.push_back(id);
  }
  const auto& t = tables_[ngram.size() - 1];
  auto it = t.find(key);
  if (it == t.end()) return false;
  if (log10_prob) *log10_prob = it->second.prob;
  if (log10_backoff) *log10_backoff = it->second.backoff;
  return true;
}

double NgramModel::log10_prob_ids(std::span<const int> context, int word, int max_order) const {
  if (word < 0) word = unk_id_;
  if (word < 0) return kFloorLog10;
  const int top = std::min<int>(max_order, static_cast<int>(context.size()) + 1);
  double acc = 0.0;
  std::vector<int> key;
  for (int k = top; k >= 1; --k) {
    key.assign(context.end() - (k - 1), context.end());
    key.push_back(word);
    const auto& t = tables_[static_cast<std::size_t>(k - 1)];
    if (auto it = t.find(key); it != t.end()) return acc + it->second.prob;
    if (k >= 2) {
      key.pop_back();
      const auto& ct = tables_[static_cast<std::size_t>(k - 2)];
      if (auto it = ct.find(key); it != ct.end()) acc += it->second.backoff;
    }
  }
  return acc + kFloorLog10;
}

double NgramModel::log10_prob(std::span<const std::string> context, const std::string& word) const {
  std::vector<int> ctx;
  ctx.reserve(context.size());
  for (const auto& w : context) {
    int id = lookup_id(w);
    ctx.push_back(id < 0 ? unk_id_ : id);
  }
  return log10_prob_ids(ctx, lookup_id(word), order_);
}

bool NgramModel::has_eos() const {
  double p = kFloorLog10;
  return find_entry({kEos}, &p, nullptr) && p > kFloorLog10;
}

double NgramModel::sentence_log10(const std::vector<std::string>& words, std::size_t* predictions) const {
  std::vector<int> ctx(static_cast<std::size_t>(order_ - 1), lookup_id(kBos));
  double total = 0.0;
  std::size_t n = 0;
  auto predict = [&](int id) {
    total += log10_prob_ids(std::span<const int>(ctx).subspan(ctx.size() - (order_ - 1)), id, order_);
    ++n;
    ctx.push_back(id < 0 ? unk_id_ : id);
  };
  for (const auto& w : words) predict(lookup_id(w));
  if (has_eos()) predict(lookup_id(kEos));
  if (predictions) *predictions = n;
  return total;
}

std::size_t NgramModel::num_entries(int k) const {
  if (k < 1 || k > order_) return 0;
  return tables_[static_cast<std::size_t>(k - 1)].size();
}

std::vector<std::string> NgramModel::predictable_words() const {
  std::vector<std::string> out;
  for (const auto& [key, e] : tables_[0])
    if (words_[static_cast<std::size_t>(key[0])] != kBos) out.push_back(words_[static_cast<std::size_t>(key[0])]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<std::string>> NgramModel::observed_contexts(int k) const {
  std::map<std::vector<std::string>, int> seen;
  if (k >= 1 && k <= order_) {
    for (const auto& [key, e] : tables_[static_cast<std::size_t>(k - 1)]) {
      std::vector<std::string> ctx;
      for (std::size_t i = 0; i + 1 < key.size(); ++i) ctx.push_back(words_[static_cast<std::size_t>(key[i])]);
      seen.emplace(std::move(ctx), 0);
    }
  }
  std::vector<std::vector<std::string>> out;
  for (auto& [ctx, _] : seen) out.push_back(ctx);
  return out;
}

// ARPA I/O

namespace {

std::string format_log(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string f;
  while (is >> f) out.push_back(f);
  return out;
}

bool parse_double(const std::string& s, double* out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, *out);
  return ec == std::errc() && p == e;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void NgramModel::write_arpa(std::ostream& out) const {
  out << "\\data\\\n";
  for (int k = 1; k <= order_; ++k) out << "ngram " << k << "=" << num_entries(k) << "\n";
  for (int k = 1; k <= order_; ++k) {
    out << "\n\\" << k << "-grams:\n";
    std::vector<std::pair<std::string, Entry>> rows;
    for (const auto& [key, e] : tables_[static_cast<std::size_t>(k - 1)]) {
      std::string words;
      for (std::size_t i = 0; i < key.size(); ++i) {
        if (i) words += ' ';
        words += words_[static_cast<std::size_t>(key[i])];
      }
      rows.emplace_back(std::move(words), e);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [words, e] : rows) {
      out << format_log(e.prob) << '\t' << words;
      if (e.backoff != 0.0) out << '\t' << format_log(e.backoff);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

void NgramModel::write_arpa(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write: " + path);
  write_arpa(out);
}

NgramModel NgramModel::read_arpa(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open ARPA file: " + path);
  return read_arpa(in, path);
}

NgramModel NgramModel::read_arpa(std::istream& in, const std::string& name) {
  std::string raw;
  std::size_t lineno = 0;
  auto next = [&](std::string& line) {
    while (std::getline(in, raw)) {
      ++lineno;
      line = trim(raw);
      if (!line.empty()) return true;
    }
    return false;
  };

  std::string line;
  bool found_data = false;
  while (next(line)) {
    if (line == "\\data\\") {
      found_data = true;
      break;
    }
  }
  if (!found_data) throw ParseError(name, lineno, "missing \\data\\ header");

  std::vector<std::size_t> declared;
  bool have_line = false;
  while (next(line)) {
    if (line.rfind("ngram ", 0) != 0) {
      have_line = true;
      break;
    }
    auto eq = line.find('=');
    int k = 0;
    long long count = -1;
    if (eq == std::string::npos) throw ParseError(name, lineno, "bad ngram count line");
    try {
      k = std::stoi(line.substr(6, eq - 6));
      count = std::stoll(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw ParseError(name, lineno, "bad ngram count line");
    }
    if (k != static_cast<int>(declared.size()) + 1 || count < 0)
      throw ParseError(name, lineno, "ngram counts must be listed in order starting at 1");
    declared.push_back(static_cast<std::size_t>(count));
  }
  if (declared.empty()) throw ParseError(name, lineno, "no ngram counts in \\data\\ section");

  NgramModel model(static_cast<int>(declared.size()));
  std::vector<std::size_t> seen(declared.size(), 0);
  int current = 0;
  bool ended = false;
  while (have_line || next(line)) {
    have_line = false;
    if (line == "\\end\\") {
      ended = true;
      break;
    }
    if (line.front() == '\\') {
      int k = 0;
      if (std::sscanf(line.c_str(), "\\%d-grams:", &k) != 1 || k < 1 || k > model.order_)
        throw ParseError(name, lineno, "unexpected section '" + line + "'");
      current = k;
      continue;
    }
    if (current == 0) throw ParseError(name, lineno, "n-gram entry outside a section");
    auto fields = split_ws(line);
    const auto k = static_cast<std::size_t>(current);
    if (fields.size() != k + 1 && fields.size() != k + 2)
      throw ParseError(name, lineno, "expected " + std::to_string(k) + " words plus probability");
    double prob = 0, backoff = 0;
    if (!parse_double(fields[0], &prob)) throw ParseError(name, lineno, "bad probability '" + fields[0] + "'");
    if (fields.size() == k + 2 && !parse_double(fields.back(), &backoff))
      throw ParseError(name, lineno, "bad backoff '" + fields.back() + "'");
    if (!std::isfinite(prob)) prob = kFloorLog10;
    std::vector<std::string> words(fields.begin() + 1, fields.begin() + 1 + static_cast<long>(k));
    model.set_entry(words, prob, backoff);
    ++seen[k - 1];
  }
  if (!ended) throw ParseError(name, lineno, "missing \\end\\ marker");
  for (std::size_t k = 0; k < declared.size(); ++k)
    if (model.num_entries(static_cast<int>(k + 1)) != declared[k] || seen[k] != declared[k])
      throw ParseError(name, lineno,
                       std::to_string(k + 1) + "-gram count " + std::to_string(seen[k]) +
                           " does not match header " + std::to_string(declared[k]));
  return model;
}

// Training

NgramModel train_ngram(const std::vector<Sentence>& corpus, int order, double discount, std::size_t min_sentences) {
  if (order < 1 || order > 5) throw InputError("train_ngram: order out of range [1,5]");
  if (corpus.empty()) throw InputError("train_ngram: corpus too small");
  if (order > 1 && corpus.size() < min_sentences)
    throw InputError("train_ngram: corpus too small (need >= " + std::to_string(min_sentences) +
                     " sentences for smoothing)");

  NgramModel model(order);
  using Key = std::vector<int>;
  using Counts = std::unordered_map<Key, double, NgramModel::KeyHash>;

  if (order == 1) {
    std::map<std::string, long> counts;
    long total = 0;
    for (const auto& s : corpus)
      for (const auto& t : s) {
        ++counts[t.normalized()];
        ++total;
      }
    for (const auto& [w, c] : counts)
      model.set_entry({w}, std::log10(static_cast<double>(c) / static_cast<double>(total)));
    return model;
  }

  const int bos = model.intern(NgramModel::kBos);
  const int eos = model.intern(NgramModel::kEos);
  model.intern(NgramModel::kUnk);
  {
    std::vector<std::string> sorted;
    for (const auto& s : corpus)
      for (const auto& t : s) sorted.push_back(t.normalized());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (const auto& w : sorted) model.intern(w);
  }

  // adjusted[k-1]: raw counts at the top order, continuation counts below.
  const auto n = static_cast<std::size_t>(order);
  std::vector<Counts> adjusted(n);
  for (const auto& s : corpus) {
    std::vector<int> padded(n - 1, bos);
    for (const auto& t : s) padded.push_back(model.word_ids_.at(t.normalized()));
    padded.push_back(eos);
    for (std::size_t i = n - 1; i < padded.size(); ++i)
      adjusted[n - 1][Key(padded.begin() + static_cast<long>(i - (n - 1)), padded.begin() + static_cast<long>(i + 1))] += 1;
  }
  for (std::size_t k = n - 1; k >= 1; --k)
    for (const auto& [g, c] : adjusted[k]) adjusted[k - 1][Key(g.begin() + 1, g.end())] += 1;

  // Predictable vocabulary: everything but <s>, including unseen <unk>.
  std::vector<int> vocab;
  for (int id = 0; id < static_cast<int>(model.words_.size()); ++id)
    if (id != bos) vocab.push_back(id);
  for (int id : vocab) adjusted[0].try_emplace(Key{id}, 0.0);

  // Context statistics per order: total adjusted count and distinct followers.
  struct CtxStat {
    double total = 0;
    double types = 0;
  };
  std::vector<std::unordered_map<Key, CtxStat, NgramModel::KeyHash>> stats(n);
  for (std::size_t k = 0; k < n; ++k)
    for (const auto& [g, c] : adjusted[k]) {
      auto& st = stats[k][Key(g.begin(), g.end() - 1)];
      st.total += c;
      if (c > 0) st.types += 1;
    }

  // Unigrams.
  {
    const auto& st = stats[0][Key{}];
    const double uniform = 1.0 / static_cast<double>(vocab.size());
    for (const auto& [g, c] : adjusted[0]) {
      double p = std::max(c - discount, 0.0) / st.total + discount * st.types / st.total * uniform;
      model.tables_[0][g] = NgramModel::Entry{std::log10(p), 0.0};
    }
    model.tables_[0][Key{bos}] = NgramModel::Entry{NgramModel::kFloorLog10, 0.0};
  }

  for (std::size_t k = 2; k <= n; ++k) {
    // Backoff weights of the order-(k-1) contexts; insert context-only rows
    // for contexts that are not themselves predictable n-grams (<s> runs).
    for (const auto& [h, st] : stats[k - 1]) {
      const double gamma = discount * st.types / st.total;
      auto& table = model.tables_[k - 2];
      auto it = table.find(h);
      if (it == table.end()) it = table.emplace(h, NgramModel::Entry{NgramModel::kFloorLog10, 0.0}).first;
      it->second.backoff = std::log10(gamma);
    }
    for (const auto& [g, c] : adjusted[k - 1]) {
      Key h(g.begin(), g.end() - 1);
      const auto& st = stats[k - 1].at(h);
      const double gamma = discount * st.types / st.total;
      const double lower = std::pow(
          10.0, model.log10_prob_ids(std::span<const int>(h).subspan(1), g.back(), static_cast<int>(k - 1)));
      const double p = std::max(c - discount, 0.0) / st.total + gamma * lower;
      model.tables_[k - 1][g] = NgramModel::Entry{std::log10(p), 0.0};
    }
  }
  return model;
}

}  // namespace formal
