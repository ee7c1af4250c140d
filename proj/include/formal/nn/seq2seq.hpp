#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "formal/nn/autodiff.hpp"
#include "formal/nn/gru.hpp"

namespace formal::nn {

inline constexpr int kNumControls = 3;

struct Seq2SeqConfig {
  int vocab_size = 0;
  int emb_dim = 300;
  int enc_hidden = 250;  // per direction
  int enc_layers = 2;
  int dec_hidden = 500;
  int dec_layers = 2;
  int attn_dim = 250;
  int control_dim = 16;

  void validate() const;
  int context_dim() const { return 2 * enc_hidden; }
};

/// Control-conditioned encoder-attend-decoder.
///
/// The encoder is a stack of bidirectional GRUs over the shared embedding
/// matrix; H holds the concatenated top-layer states, one column per input
/// position. Each decoder step feeds [E y_prev ; C c] through the decoder GRU
/// stack, attends over H with the top state s, and emits
/// logits = W_o [s ; z] + b_o.
class Seq2Seq {
 public:
  Seq2Seq() = default;
  Seq2Seq(const Seq2SeqConfig& cfg, std::uint64_t seed);

  const Seq2SeqConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  struct Encoding {
    Var states;  // (2 enc_hidden) x N
    Var keys;    // attn_dim x N, W1 H
    std::vector<Var> initial;  // one per decoder layer
  };

  struct Step {
    Var logits;  // vocab x 1
    std::vector<Var> states;
    Var context;
    Var attention;  // 1 x N
  };

  /// Throws InputError on an empty input and ShapeError on bad ids.
  Encoding encode(Bound& p, std::span<const int> x) const;
  /// Additive attention: softmax_j(v' tanh(W1 H_j + W2 s)), context = H a.
  Var attend(Bound& p, const Encoding& enc, Var s, Var* weights = nullptr) const;
  /// One decoder step from the previous states. `control` is 1, 2 or 3.
  Step decode_step(Bound& p, const Encoding& enc, Var prev_embedding, int control,
                   const std::vector<Var>& states) const;

  Var embed(Bound& p, int id) const;
  /// Expected embedding E' dist for a distribution over the vocabulary.
  Var embed_soft(Bound& p, Var dist) const;

  /// Logits for each target token followed by EOS, conditioning every step on
  /// the gold previous token.
  std::vector<Var> teacher_forced(Bound& p, const Encoding& enc, std::span<const int> target, int control) const;

  /// Greedy decoding until EOS or max_len tokens. Returns token ids only.
  std::vector<int> generate(std::span<const int> x, int control, std::size_t max_len) const;

  /// Top-layer encoder states as an N x (2 enc_hidden) matrix.
  Matrix encoder_states(std::span<const int> x) const;

  /// Cell layout, exposed for symmetry checks.
  const std::vector<std::pair<GruCell, GruCell>>& encoder_cells() const { return enc_cells_; }

 private:
  Seq2SeqConfig cfg_;
  ParamStore params_;
  int embedding_ = -1;
  int control_embedding_ = -1;
  std::vector<std::pair<GruCell, GruCell>> enc_cells_;
  std::vector<GruCell> dec_cells_;
  std::vector<int> init_w_, init_b_;
  int attn_w1_ = -1, attn_w2_ = -1, attn_v_ = -1;
  int out_w_ = -1, out_b_ = -1;
};

/// Checks a control id and returns its zero-based row.
int control_row(int control);

}  // namespace formal::nn
