#include "formal/nn/seq2seq.hpp"

#include <string>
#include <tuple>

#include "formal/error.hpp"
#include "formal/text.hpp"

namespace formal::nn {

void Seq2SeqConfig::validate() const {
  if (vocab_size <= Vocabulary::kNumSpecials) throw ConfigError("seq2seq: vocabulary too small");
  if (emb_dim <= 0 || enc_hidden <= 0 || dec_hidden <= 0 || attn_dim <= 0 || control_dim <= 0)
    throw ConfigError("seq2seq: dimensions must be positive");
  if (enc_layers < 1 || dec_layers < 1) throw ConfigError("seq2seq: need at least one layer");
}

int control_row(int control) {
  if (control < 1 || control > kNumControls)
    throw InputError("invalid control " + std::to_string(control) + " (expected 1, 2 or 3)");
  return control - 1;
}

Seq2Seq::Seq2Seq(const Seq2SeqConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  embedding_ = params_.add("embedding", cfg.vocab_size, cfg.emb_dim);
  control_embedding_ = params_.add("control_embedding", kNumControls, cfg.control_dim);
  for (int l = 0; l < cfg.enc_layers; ++l) {
    const int in = l == 0 ? cfg.emb_dim : 2 * cfg.enc_hidden;
    const std::string pre = "encoder." + std::to_string(l);
    GruCell f = GruCell::declare(params_, pre + ".fwd", in, cfg.enc_hidden);
    GruCell b = GruCell::declare(params_, pre + ".bwd", in, cfg.enc_hidden);
    enc_cells_.emplace_back(f, b);
  }
  for (int l = 0; l < cfg.dec_layers; ++l) {
    const int in = l == 0 ? cfg.emb_dim + cfg.control_dim : cfg.dec_hidden;
    dec_cells_.push_back(GruCell::declare(params_, "decoder." + std::to_string(l), in, cfg.dec_hidden));
    init_w_.push_back(params_.add("decoder." + std::to_string(l) + ".init_W", cfg.dec_hidden, 2 * cfg.enc_hidden));
    init_b_.push_back(params_.add("decoder." + std::to_string(l) + ".init_b", cfg.dec_hidden, 1, true));
  }
  attn_w1_ = params_.add("attention.W1", cfg.attn_dim, 2 * cfg.enc_hidden);
  attn_w2_ = params_.add("attention.W2", cfg.attn_dim, cfg.dec_hidden);
  attn_v_ = params_.add("attention.v", 1, cfg.attn_dim);
  out_w_ = params_.add("output.W", cfg.vocab_size, cfg.dec_hidden + 2 * cfg.enc_hidden);
  out_b_ = params_.add("output.b", cfg.vocab_size, 1, true);
  Rng rng(seed);
  params_.init_uniform(rng);
}

Var Seq2Seq::embed(Bound& p, int id) const {
  if (id < 0 || id >= cfg_.vocab_size) throw ShapeError("embed: id " + std::to_string(id) + " out of range");
  return row(p(embedding_), id);
}

Var Seq2Seq::embed_soft(Bound& p, Var dist) const {
  if (dist.rows() != cfg_.vocab_size || dist.cols() != 1) throw ShapeError("embed_soft: distribution size");
  return matmul_tn(p(embedding_), dist);
}

Seq2Seq::Encoding Seq2Seq::encode(Bound& p, std::span<const int> x) const {
  if (x.empty()) throw InputError("encode: empty input");
  std::vector<Var> inputs;
  inputs.reserve(x.size());
  for (int id : x) inputs.push_back(embed(p, id));
  std::vector<Var> fwd, bwd;
  for (const auto& [fc, bc] : enc_cells_) {
    std::tie(fwd, bwd) = bigru_layer(p, fc, bc, inputs);
    for (std::size_t t = 0; t < inputs.size(); ++t) inputs[t] = vcat({fwd[t], bwd[t]});
  }
  Encoding enc;
  enc.states = hcat(inputs);
  enc.keys = matmul(p(attn_w1_), enc.states);
  Var summary = vcat({fwd.back(), bwd.front()});
  for (std::size_t l = 0; l < dec_cells_.size(); ++l)
    enc.initial.push_back(tanh(affine(p(init_w_[l]), summary, p(init_b_[l]))));
  return enc;
}

Var Seq2Seq::attend(Bound& p, const Encoding& enc, Var s, Var* weights) const {
  Var query = matmul(p(attn_w2_), s);
  Var scores = matmul(p(attn_v_), tanh(add_colwise(enc.keys, query)));
  Var alpha = softmax(scores);
  if (weights) *weights = alpha;
  return matmul(enc.states, transpose(alpha));
}

Seq2Seq::Step Seq2Seq::decode_step(Bound& p, const Encoding& enc, Var prev_embedding, int control,
                                   const std::vector<Var>& states) const {
  const int c = control_row(control);
  if (states.size() != dec_cells_.size()) throw ShapeError("decode_step: wrong number of decoder states");
  Step out;
  Var input = vcat({prev_embedding, row(p(control_embedding_), c)});
  for (std::size_t l = 0; l < dec_cells_.size(); ++l) {
    input = gru_step(p, dec_cells_[l], input, states[l]);
    out.states.push_back(input);
  }
  Var s = out.states.back();
  out.context = attend(p, enc, s, &out.attention);
  out.logits = affine(p(out_w_), vcat({s, out.context}), p(out_b_));
  return out;
}

std::vector<Var> Seq2Seq::teacher_forced(Bound& p, const Encoding& enc, std::span<const int> target,
                                         int control) const {
  std::vector<Var> logits;
  logits.reserve(target.size() + 1);
  std::vector<Var> states = enc.initial;
  int prev = Vocabulary::kBos;
  for (std::size_t t = 0; t <= target.size(); ++t) {
    Step st = decode_step(p, enc, embed(p, prev), control, states);
    logits.push_back(st.logits);
    states = std::move(st.states);
    if (t < target.size()) prev = target[t];
  }
  return logits;
}

std::vector<int> Seq2Seq::generate(std::span<const int> x, int control, std::size_t max_len) const {
  control_row(control);
  Graph g;
  Bound p(g, params_);
  Encoding enc = encode(p, x);
  std::vector<Var> states = enc.initial;
  std::vector<int> out;
  int prev = Vocabulary::kBos;
  while (out.size() < max_len) {
    Step st = decode_step(p, enc, embed(p, prev), control, states);
    Eigen::Index best = 0;
    st.logits.value().col(0).maxCoeff(&best);
    if (best == Vocabulary::kEos) break;
    out.push_back(static_cast<int>(best));
    prev = static_cast<int>(best);
    states = std::move(st.states);
  }
  return out;
}

Matrix Seq2Seq::encoder_states(std::span<const int> x) const {
  Graph g;
  Bound p(g, params_);
  return encode(p, x).states.value().transpose();
}

}  // namespace formal::nn
