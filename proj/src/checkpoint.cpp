#include "formal/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "formal/error.hpp"

namespace formal {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'F', 'M', 'L', 'C', 'K', 'P', 'T', '\0'};

nlohmann::json param_list(const nn::ParamStore& store) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : store) out.push_back({{"name", p.name}, {"shape", {p.value.rows(), p.value.cols()}}});
  return out;
}

nlohmann::json seq2seq_dims(const nn::Seq2SeqConfig& c) {
  return {{"vocab_size", c.vocab_size}, {"emb_dim", c.emb_dim},       {"enc_hidden", c.enc_hidden},
          {"enc_layers", c.enc_layers}, {"dec_hidden", c.dec_hidden}, {"dec_layers", c.dec_layers},
          {"attn_dim", c.attn_dim},     {"control_dim", c.control_dim}};
}

nlohmann::json predictor_dims(const nn::PredictorConfig& c) {
  return {{"vocab_size", c.vocab_size}, {"emb_dim", c.emb_dim}, {"hidden", c.hidden}, {"fc_dim", c.fc_dim}};
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_store(std::ostream& out, const nn::ParamStore& store) {
  for (const auto& p : store)
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * static_cast<Eigen::Index>(sizeof(double))));
}

void read_store(std::istream& in, nn::ParamStore& store, const nlohmann::json& expected, const std::string& path) {
  if (!expected.is_array() || expected.size() != static_cast<std::size_t>(store.size()))
    throw CheckpointError(path + ": parameter list does not match the declared dimensions");
  for (int i = 0; i < store.size(); ++i) {
    nn::Parameter& p = store[i];
    const auto& e = expected[static_cast<std::size_t>(i)];
    if (e.at("name").get<std::string>() != p.name || e.at("shape")[0].get<Eigen::Index>() != p.value.rows() ||
        e.at("shape")[1].get<Eigen::Index>() != p.value.cols())
      throw CheckpointError(path + ": parameter " + std::to_string(i) + " (" + e.dump() +
                            ") does not match the model layout (" + p.name + ")");
    in.read(reinterpret_cast<char*>(p.value.data()),
            static_cast<std::streamsize>(p.value.size() * static_cast<Eigen::Index>(sizeof(double))));
    if (!in) throw CheckpointError(path + ": truncated parameter data at " + p.name);
  }
}

template <class T>
T get_dim(const nlohmann::json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw CheckpointError(path + ": header lacks " + std::string(key));
  return j.at(key).get<T>();
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["format_version"] = kCheckpointVersion;
  header["vocab"] = ckpt.vocab.tokens();
  header["vocab_hash"] = hex(ckpt.vocab.hash());
  header["model"] = {{"dims", seq2seq_dims(ckpt.model.config())}, {"params", param_list(ckpt.model.params())}};
  if (ckpt.predictor)
    header["predictor"] = {{"dims", predictor_dims(ckpt.predictor->config())},
                           {"params", param_list(ckpt.predictor->params())}};
  header["hyper"] = ckpt.hyper;
  const std::string text = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp);
    out.write(kMagic, sizeof kMagic);
    const std::uint32_t version = kCheckpointVersion;
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_store(out, ckpt.model.params());
    if (ckpt.predictor) write_store(out, ckpt.predictor->params());
    if (!out) throw CheckpointError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw CheckpointError("cannot move checkpoint into " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw CheckpointError(path + ": not a checkpoint (bad magic)");
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in) throw CheckpointError(path + ": corrupted header (truncated preamble)");
  if (version != kCheckpointVersion)
    throw CheckpointError(path + ": unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  if (len > (std::uint64_t{1} << 32)) throw CheckpointError(path + ": corrupted header (implausible length)");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw CheckpointError(path + ": corrupted header (truncated)");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": corrupted header (" + std::string(e.what()) + ")");
  }

  try {
    Checkpoint ckpt;
    ckpt.vocab = Vocabulary(std::vector<std::string>(header.at("vocab").begin() + Vocabulary::kNumSpecials,
                                                     header.at("vocab").end()));
    if (hex(ckpt.vocab.hash()) != header.at("vocab_hash").get<std::string>())
      throw CheckpointError(path + ": vocabulary does not match its recorded hash");

    const auto& md = header.at("model").at("dims");
    nn::Seq2SeqConfig mc;
    mc.vocab_size = get_dim<int>(md, "vocab_size", path);
    mc.emb_dim = get_dim<int>(md, "emb_dim", path);
    mc.enc_hidden = get_dim<int>(md, "enc_hidden", path);
    mc.enc_layers = get_dim<int>(md, "enc_layers", path);
    mc.dec_hidden = get_dim<int>(md, "dec_hidden", path);
    mc.dec_layers = get_dim<int>(md, "dec_layers", path);
    mc.attn_dim = get_dim<int>(md, "attn_dim", path);
    mc.control_dim = get_dim<int>(md, "control_dim", path);
    if (static_cast<std::size_t>(mc.vocab_size) != ckpt.vocab.size())
      throw CheckpointError(path + ": model vocabulary size " + std::to_string(mc.vocab_size) +
                            " disagrees with the stored vocabulary (" + std::to_string(ckpt.vocab.size()) + ")");
    ckpt.model = nn::Seq2Seq(mc, 0);
    read_store(in, ckpt.model.params(), header.at("model").at("params"), path);

    if (header.contains("predictor")) {
      const auto& pd = header.at("predictor").at("dims");
      nn::PredictorConfig pc;
      pc.vocab_size = get_dim<int>(pd, "vocab_size", path);
      pc.emb_dim = get_dim<int>(pd, "emb_dim", path);
      pc.hidden = get_dim<int>(pd, "hidden", path);
      pc.fc_dim = get_dim<int>(pd, "fc_dim", path);
      ckpt.predictor.emplace(pc, 0);
      read_store(in, ckpt.predictor->params(), header.at("predictor").at("params"), path);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError(path + ": trailing bytes after parameters");
    ckpt.hyper = header.value("hyper", nlohmann::json::object());
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": corrupted header (" + std::string(e.what()) + ")");
  } catch (const ConfigError& e) {
    throw CheckpointError(path + ": invalid dimensions (" + std::string(e.what()) + ")");
  } catch (const InputError& e) {
    throw CheckpointError(path + ": corrupted header (" + std::string(e.what()) + ")");
  }
}

void require_same_vocab(const Checkpoint& ckpt, const Vocabulary& vocab) {
  if (ckpt.vocab.hash() != vocab.hash())
    throw CheckpointError("vocabulary mismatch: checkpoint " + hex(ckpt.vocab.hash()) + " vs current " +
                          hex(vocab.hash()) + " (" + std::to_string(ckpt.vocab.size()) + " vs " +
                          std::to_string(vocab.size()) + " tokens)");
}

}  // namespace formal
