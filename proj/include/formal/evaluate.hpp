#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "formal/scorers.hpp"
#include "formal/text.hpp"

namespace formal {

inline constexpr double kBleuEpsilon = 1e-9;

/// Corpus BLEU in percent: clipped n-gram precisions pooled over the corpus,
/// geometric mean over n = 1..max_n, brevity penalty exp(1 - r/c) when the
/// candidates are shorter. No unigram match gives 0; any other zero precision
/// is replaced by kBleuEpsilon.
double corpus_bleu(const std::vector<std::vector<std::string>>& candidates,
                   const std::vector<std::vector<std::string>>& references, int max_n = 4);
double corpus_bleu(const std::vector<Sentence>& candidates, const std::vector<Sentence>& references, int max_n = 4);

struct ControlReport {
  int control = 0;
  std::size_t count = 0;
  double mean_r_d = 0.0;
  double mean_r_s = 0.0;
  double mean_r_f = 0.0;
  double mean_g = 0.0;
  double agreement = 0.0;  // percent
  std::array<std::size_t, 3> measured{};
  std::optional<double> bleu;
};

struct EvalReport {
  std::size_t samples = 0;
  double input_mean_r_d = 0.0;
  std::vector<ControlReport> controls;

  nlohmann::json to_json() const;
};

/// Outputs for one intended control, aligned with the inputs. A missing
/// output (nothing decoded) scores zero and counts as a disagreement.
struct ControlOutputs {
  int control = 1;
  std::vector<std::optional<Sentence>> outputs;
};

/// Per-control means of the three scores and the agreement rate between the
/// intended control and the one measured on (input, output). BLEU is added
/// when references are given. Throws InputError on empty or misaligned data.
EvalReport evaluate_outputs(const std::vector<Sentence>& inputs, const std::vector<ControlOutputs>& outputs,
                            const Scorer& scorer, double zeta1, double zeta2,
                            const std::vector<Sentence>* references = nullptr);

}  // namespace formal
