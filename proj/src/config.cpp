#include "formal/config.hpp"

#include <charconv>
#include <filesystem>
#include <functional>
#include <map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "formal/error.hpp"

namespace formal {

void TrainConfig::validate() const {
  model.validate();
  predictor.validate();
  weights.validate();
  if (!(1.0 < zeta1 && zeta1 < zeta2)) throw ConfigError("thresholds must satisfy 1 < zeta1 < zeta2");
  if (zeta_step < 0.0) throw ConfigError("train.zeta_step must be nonnegative");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("train.lambda must be in [0, 1]");
  if (!(tau > 0.0)) throw ConfigError("train.tau must be positive");
  if (!(lr > 0.0) || !(predictor_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (clip_norm < 0.0) throw ConfigError("train.clip_norm must be nonnegative");
  if (grade_cap <= 0.0) throw ConfigError("scorer.grade_cap must be positive");
  if (lm_order < 1 || lm_order > 5) throw ConfigError("scorer.lm_order must be in [1, 5]");
  if (samples == 0) throw ConfigError("sampler.samples must be positive");
  if (max_attempts != 0 && max_attempts < samples) throw ConfigError("sampler.max_attempts must be >= samples");
  if (pretrain_epochs < 0 || max_cycles < 1 || exploit_epochs < 1 || patience < 1 || predictor_epochs < 1)
    throw ConfigError("epoch counts must be positive (pretrain_epochs may be 0)");
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) throw ConfigError("train.valid_fraction must be in (0, 1)");
  if (threads < 1) throw ConfigError("train.threads must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (pretrain_patience < 0) throw ConfigError("train.pretrain_patience must be nonnegative");
  if (max_len < 1) throw ConfigError("model.max_len must be positive");
  if (min_count < 1) throw ConfigError("model.min_count must be >= 1");
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("invalid value for " + key + ": '" + text + "'");
  return v;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<nlohmann::json(const RunConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

template <class T, class Access>
Field number(Access access) {
  return {[access](RunConfig& c, const std::string& k, const std::string& v) { access(c) = parse_number<T>(k, v); },
          [access](const RunConfig& c) { return nlohmann::json(access(const_cast<RunConfig&>(c))); }};
}

template <class Access>
Field text(Access access) {
  return {[access](RunConfig& c, const std::string&, const std::string& v) { access(c) = v; },
          [access](const RunConfig& c) { return nlohmann::json(access(const_cast<RunConfig&>(c))); }};
}

#define FIELD_NUM(T, expr) number<T>([](RunConfig& c) -> auto& { return c.expr; })
#define FIELD_STR(expr) text([](RunConfig& c) -> auto& { return c.expr; })

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"model.emb_dim", FIELD_NUM(int, train.model.emb_dim)},
      {"model.enc_hidden", FIELD_NUM(int, train.model.enc_hidden)},
      {"model.enc_layers", FIELD_NUM(int, train.model.enc_layers)},
      {"model.dec_hidden", FIELD_NUM(int, train.model.dec_hidden)},
      {"model.dec_layers", FIELD_NUM(int, train.model.dec_layers)},
      {"model.attn_dim", FIELD_NUM(int, train.model.attn_dim)},
      {"model.control_dim", FIELD_NUM(int, train.model.control_dim)},
      {"model.max_len", FIELD_NUM(std::size_t, train.max_len)},
      {"model.min_count", FIELD_NUM(int, train.min_count)},
      {"predictor.emb_dim", FIELD_NUM(int, train.predictor.emb_dim)},
      {"predictor.hidden", FIELD_NUM(int, train.predictor.hidden)},
      {"predictor.fc_dim", FIELD_NUM(int, train.predictor.fc_dim)},
      {"predictor.epochs", FIELD_NUM(int, train.predictor_epochs)},
      {"predictor.lr", FIELD_NUM(double, train.predictor_lr)},
      {"scorer.beta_s", FIELD_NUM(double, train.weights.relatedness)},
      {"scorer.beta_f", FIELD_NUM(double, train.weights.fluency)},
      {"scorer.beta_d", FIELD_NUM(double, train.weights.readability)},
      {"scorer.grade_cap", FIELD_NUM(double, train.grade_cap)},
      {"scorer.lm_order", FIELD_NUM(int, train.lm_order)},
      {"scorer.embedding_dim", FIELD_NUM(int, train.embedding_dim)},
      {"sampler.samples", FIELD_NUM(std::size_t, train.samples)},
      {"sampler.max_attempts", FIELD_NUM(std::size_t, train.max_attempts)},
      {"train.seed", FIELD_NUM(std::uint64_t, train.seed)},
      {"train.zeta1", FIELD_NUM(double, train.zeta1)},
      {"train.zeta2", FIELD_NUM(double, train.zeta2)},
      {"train.zeta_step", FIELD_NUM(double, train.zeta_step)},
      {"train.lambda", FIELD_NUM(double, train.lambda)},
      {"train.tau", FIELD_NUM(double, train.tau)},
      {"train.lr", FIELD_NUM(double, train.lr)},
      {"train.clip_norm", FIELD_NUM(double, train.clip_norm)},
      {"train.batch_size", FIELD_NUM(std::size_t, train.batch_size)},
      {"train.pretrain_epochs", FIELD_NUM(int, train.pretrain_epochs)},
      {"train.pretrain_patience", FIELD_NUM(int, train.pretrain_patience)},
      {"train.max_cycles", FIELD_NUM(int, train.max_cycles)},
      {"train.exploit_epochs", FIELD_NUM(int, train.exploit_epochs)},
      {"train.patience", FIELD_NUM(int, train.patience)},
      {"train.valid_fraction", FIELD_NUM(double, train.valid_fraction)},
      {"train.threads", FIELD_NUM(int, train.threads)},
      {"paths.corpus", FIELD_STR(paths.corpus)},
      {"paths.heldout", FIELD_STR(paths.heldout)},
      {"paths.lexicon", FIELD_STR(paths.lexicon)},
      {"paths.embeddings", FIELD_STR(paths.embeddings)},
      {"paths.stopwords", FIELD_STR(paths.stopwords)},
      {"paths.lm", FIELD_STR(paths.lm)},
      {"paths.lm_corpus", FIELD_STR(paths.lm_corpus)},
      {"paths.output_dir", FIELD_STR(paths.output_dir)},
  };
  return table;
}

#undef FIELD_NUM
#undef FIELD_STR

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(*this, key, value);
}

void RunConfig::load_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.filename(), e.line(), e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(path + ": key '" + section + "' outside a section");
    for (const auto& [key, value] : body) apply(section + "." + key, value.get_value<std::string>());
  }
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [key, field] : fields()) out[key] = field.get(*this);
  return out;
}

void RunConfig::validate(bool check_paths) const {
  TrainConfig t = train;
  if (t.model.vocab_size == 0) t.model.vocab_size = Vocabulary::kNumSpecials + 1;
  if (t.predictor.vocab_size == 0) t.predictor.vocab_size = t.model.vocab_size;
  t.validate();
  if (!check_paths) return;
  for (const std::string* p : {&paths.corpus, &paths.heldout, &paths.lexicon, &paths.embeddings, &paths.stopwords,
                               &paths.lm, &paths.lm_corpus})
    if (!p->empty() && !std::filesystem::exists(*p)) throw ConfigError("file not found: " + *p);
}

}  // namespace formal
