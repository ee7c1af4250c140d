#include "formal/embeddings.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "formal/error.hpp"

namespace formal {

void EmbeddingTable::add(const std::string& word, std::vector<double> vec) {
  if (vec.size() != dim_)
    throw InputError("embedding '" + word + "': dimension " + std::to_string(vec.size()) + " != " +
                     std::to_string(dim_));
  for (double v : vec)
    if (!std::isfinite(v)) throw InputError("embedding '" + word + "': non-finite value");
  auto [it, inserted] = vectors_.insert_or_assign(word, std::move(vec));
  if (inserted) order_.push_back(word);
}

const std::vector<double>* EmbeddingTable::find(const std::string& word) const {
  auto it = vectors_.find(word);
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingTable EmbeddingTable::load(const std::string& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embeddings: " + path);
  EmbeddingTable table(dim);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream is(line);
    std::vector<std::string> fields;
    std::string f;
    while (is >> f) fields.push_back(f);
    if (fields.empty()) continue;
    if (first && fields.size() == 2) {
      std::size_t a = 0, b = 0;
      auto r1 = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), a);
      auto r2 = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), b);
      if (r1.ec == std::errc() && r2.ec == std::errc() && r2.ptr == fields[1].data() + fields[1].size()) {
        first = false;
        if (table.dim_ == 0) table.dim_ = b;
        if (b != table.dim_)
          throw ParseError(path, lineno, "header dimension " + std::to_string(b) + " != " + std::to_string(table.dim_));
        continue;
      }
    }
    first = false;
    if (table.dim_ == 0) table.dim_ = fields.size() - 1;
    if (fields.size() - 1 != table.dim_)
      throw ParseError(path, lineno,
                       "dimension mismatch: " + std::to_string(fields.size() - 1) + " values, expected " +
                           std::to_string(table.dim_));
    std::vector<double> vec(table.dim_);
    for (std::size_t i = 0; i < table.dim_; ++i) {
      const auto& s = fields[i + 1];
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), vec[i]);
      if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(vec[i]))
        throw ParseError(path, lineno, "bad value '" + s + "'");
    }
    table.add(fields[0], std::move(vec));
  }
  if (table.dim_ == 0) throw ParseError(path, lineno, "no embedding vectors");
  return table;
}

void EmbeddingTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write: " + path);
  char buf[32];
  for (const auto& w : order_) {
    out << w;
    for (double v : vectors_.at(w)) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      out << buf;
    }
    out << '\n';
  }
}

StopwordList StopwordList::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open stopwords: " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream is(line);
    std::string w;
    if (!(is >> w) || w[0] == '#') continue;
    for (auto& c : w)
      if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    words.insert(w);
  }
  return StopwordList(std::move(words));
}

}  // namespace formal
