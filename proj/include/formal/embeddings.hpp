#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace formal {

/// Word vectors keyed by normalized token. All vectors share one dimension.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

  /// Throws InputError on dimension mismatch or non-finite entries.
  void add(const std::string& word, std::vector<double> vec);
  const std::vector<double>* find(const std::string& word) const;

  /// Text format: "word v1 ... vd" per line, optional "count dim" header.
  /// `dim` == 0 infers the dimension from the first vector line.
  static EmbeddingTable load(const std::string& path, std::size_t dim = 0);
  void save(const std::string& path) const;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::vector<std::string> order_;
};

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  /// One token per line; blank lines and lines starting with '#' are ignored.
  static StopwordList load(const std::string& path);

  bool contains(const std::string& normalized) const { return words_.count(normalized) > 0; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

 private:
  std::unordered_set<std::string> words_;
};

}  // namespace formal
