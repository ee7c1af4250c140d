#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "formal/nn/predictor.hpp"
#include "formal/nn/seq2seq.hpp"
#include "formal/text.hpp"

namespace formal {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything needed to resume or serve a model.
struct Checkpoint {
  Vocabulary vocab;
  nn::Seq2Seq model;
  std::optional<nn::ControlPredictor> predictor;
  nlohmann::json hyper = nlohmann::json::object();
};

/// Layout: "FMLCKPT\0", u32 version, u64 header length, JSON header, then
/// every parameter as little-endian float64 in declaration order (column
/// major), generator first.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

/// Throws CheckpointError on a bad magic, unknown version, truncated or
/// inconsistent header, or a payload that does not match the header.
Checkpoint load_checkpoint(const std::string& path);

/// Throws CheckpointError naming both hashes when the vocabularies differ.
void require_same_vocab(const Checkpoint& ckpt, const Vocabulary& vocab);

}  // namespace formal
