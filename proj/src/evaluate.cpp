#include "formal/evaluate.hpp"

#include <cmath>
#include <map>

#include "formal/error.hpp"
#include "formal/trainloop.hpp"

namespace formal {

double corpus_bleu(const std::vector<std::vector<std::string>>& candidates,
                   const std::vector<std::vector<std::string>>& references, int max_n) {
  if (candidates.empty() || candidates.size() != references.size())
    throw InputError("corpus_bleu: candidates and references must be aligned and non-empty (" +
                     std::to_string(candidates.size()) + " vs " + std::to_string(references.size()) + ")");
  if (max_n < 1) throw InputError("corpus_bleu: max_n must be positive");
  std::vector<std::size_t> matches(static_cast<std::size_t>(max_n)), totals(static_cast<std::size_t>(max_n));
  std::size_t c_len = 0, r_len = 0;
  using Gram = std::vector<std::string>;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& c = candidates[k];
    const auto& r = references[k];
    c_len += c.size();
    r_len += r.size();
    for (int n = 1; n <= max_n; ++n) {
      const auto un = static_cast<std::size_t>(n);
      std::map<Gram, std::size_t> cg, rg;
      for (std::size_t i = 0; i + un <= c.size(); ++i) ++cg[Gram(c.begin() + static_cast<std::ptrdiff_t>(i), c.begin() + static_cast<std::ptrdiff_t>(i + un))];
      for (std::size_t i = 0; i + un <= r.size(); ++i) ++rg[Gram(r.begin() + static_cast<std::ptrdiff_t>(i), r.begin() + static_cast<std::ptrdiff_t>(i + un))];
      for (const auto& [g, v] : cg) {
        auto it = rg.find(g);
        if (it != rg.end()) matches[un - 1] += std::min(v, it->second);
      }
      if (c.size() >= un) totals[un - 1] += c.size() - un + 1;
    }
  }
  if (matches[0] == 0) return 0.0;
  double logp = 0.0;
  for (std::size_t n = 0; n < matches.size(); ++n)
    logp += std::log(matches[n] > 0 ? static_cast<double>(matches[n]) / static_cast<double>(totals[n]) : kBleuEpsilon);
  const double bp = c_len >= r_len ? 1.0 : std::exp(1.0 - static_cast<double>(r_len) / static_cast<double>(c_len));
  return 100.0 * bp * std::exp(logp / max_n);
}

double corpus_bleu(const std::vector<Sentence>& candidates, const std::vector<Sentence>& references, int max_n) {
  std::vector<std::vector<std::string>> c, r;
  for (const auto& s : candidates) c.push_back(s.normalized());
  for (const auto& s : references) r.push_back(s.normalized());
  return corpus_bleu(c, r, max_n);
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["samples"] = samples;
  j["input_mean_r_d"] = input_mean_r_d;
  j["controls"] = nlohmann::json::array();
  for (const auto& c : controls) {
    nlohmann::json e = {{"control", c.control},     {"count", c.count},       {"mean_r_d", c.mean_r_d},
                        {"mean_r_s", c.mean_r_s},   {"mean_r_f", c.mean_r_f}, {"mean_g", c.mean_g},
                        {"agreement_pct", c.agreement}, {"measured", c.measured}};
    if (c.bleu) e["bleu"] = *c.bleu;
    j["controls"].push_back(e);
  }
  return j;
}

EvalReport evaluate_outputs(const std::vector<Sentence>& inputs, const std::vector<ControlOutputs>& outputs,
                            const Scorer& scorer, double zeta1, double zeta2, const std::vector<Sentence>* references) {
  if (inputs.empty() || outputs.empty()) throw InputError("evaluate: misaligned data (empty input or output set)");
  if (references && references->size() != inputs.size())
    throw InputError("evaluate: misaligned data (" + std::to_string(references->size()) + " references for " +
                     std::to_string(inputs.size()) + " inputs)");
  EvalReport rep;
  rep.samples = inputs.size();
  std::vector<double> rd_x(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    try {
      rd_x[i] = scorer.readability(inputs[i]);
    } catch (const InputError&) {
      rd_x[i] = 0.0;
    }
    rep.input_mean_r_d += rd_x[i];
  }
  rep.input_mean_r_d /= static_cast<double>(inputs.size());

  for (const auto& co : outputs) {
    if (co.outputs.size() != inputs.size())
      throw InputError("evaluate: misaligned data (" + std::to_string(co.outputs.size()) + " outputs for " +
                       std::to_string(inputs.size()) + " inputs under control " + std::to_string(co.control) + ")");
    if (co.control < 1 || co.control > 3) throw InputError("evaluate: invalid control " + std::to_string(co.control));
    ControlReport cr;
    cr.control = co.control;
    cr.count = inputs.size();
    std::size_t agree = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const ScoreBreakdown s = score_or_zero(scorer, inputs[i], co.outputs[i]);
      cr.mean_r_d += s.readability;
      cr.mean_r_s += s.relatedness;
      cr.mean_r_f += s.fluency;
      cr.mean_g += s.composite;
      if (!co.outputs[i]) continue;
      double rd_y = 0.0;
      try {
        rd_y = scorer.readability(*co.outputs[i]);
      } catch (const InputError&) {
      }
      const int measured = determine_control(rd_x[i], rd_y, zeta1, zeta2);
      ++cr.measured[static_cast<std::size_t>(measured - 1)];
      agree += measured == co.control;
    }
    const auto n = static_cast<double>(inputs.size());
    cr.mean_r_d /= n;
    cr.mean_r_s /= n;
    cr.mean_r_f /= n;
    cr.mean_g /= n;
    cr.agreement = 100.0 * static_cast<double>(agree) / n;
    if (references) {
      std::vector<std::vector<std::string>> cand, ref;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        cand.push_back(co.outputs[i] ? co.outputs[i]->normalized() : std::vector<std::string>{});
        ref.push_back((*references)[i].normalized());
      }
      cr.bleu = corpus_bleu(cand, ref);
    }
    rep.controls.push_back(cr);
  }
  return rep;
}

}  // namespace formal
