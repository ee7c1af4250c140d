#include "formal/trainloop.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include <spdlog/spdlog.h>

#include "formal/checkpoint.hpp"
#include "formal/error.hpp"
#include "formal/nn/loss.hpp"

namespace formal {

int control_from_ratio(double ratio, double zeta1, double zeta2) {
  if (ratio < zeta1) return 1;
  if (ratio <= zeta2) return 2;
  return 3;
}

int determine_control(double rd_x, double rd_y, double zeta1, double zeta2) {
  if (rd_x == 0.0) return rd_y == 0.0 ? 1 : 3;
  return control_from_ratio(rd_y / rd_x, zeta1, zeta2);
}

int determine_control(const Sentence& x, const Sentence& y, double grade_cap, double zeta1, double zeta2) {
  return determine_control(readability_score(x, grade_cap), readability_score(y, grade_cap), zeta1, zeta2);
}

std::optional<Sentence> Generator::generate(const Sentence& x, int control) const {
  const std::vector<int> ids = net.generate(encode_tokens(x, vocab), control, max_len);
  std::vector<int> kept;
  bool any_known = false;
  for (int id : ids) {
    if (id == Vocabulary::kPad || id == Vocabulary::kBos || id == Vocabulary::kEos) continue;
    kept.push_back(id);
    any_known = any_known || id != Vocabulary::kUnk;
  }
  if (!any_known) return std::nullopt;
  return decode(kept, vocab);
}

Vocabulary build_model_vocab(const std::vector<Sentence>& corpus, const SynonymLexicon& lex, int min_count) {
  Vocabulary base = build_vocab(corpus, min_count);
  std::vector<std::string> extra;
  for (const std::string& w : base.tokens()) {
    if (const auto* syns = lex.synonyms(w))
      for (const std::string& s : *syns)
        if (!base.contains(s)) extra.push_back(s);
  }
  return base.extended(extra);
}

nlohmann::json TrainingTriple::to_json() const {
  return {{"x", x.str()},
          {"y", y.str()},
          {"c", c},
          {"g", scores.composite},
          {"r_s", scores.relatedness},
          {"r_f", scores.fluency},
          {"r_d", scores.readability},
          {"cycle", cycle}};
}

TrainingTriple TrainingTriple::from_json(const nlohmann::json& j) {
  TrainingTriple t{tokenize(j.at("x").get<std::string>(), std::numeric_limits<std::size_t>::max()),
                   tokenize(j.at("y").get<std::string>(), std::numeric_limits<std::size_t>::max()),
                   j.at("c").get<int>(),
                   {},
                   j.value("cycle", 0)};
  t.scores.composite = j.value("g", 0.0);
  t.scores.relatedness = j.value("r_s", 0.0);
  t.scores.fluency = j.value("r_f", 0.0);
  t.scores.readability = j.value("r_d", 0.0);
  if (t.c < 1 || t.c > 3) throw InputError("triple control out of range: " + std::to_string(t.c));
  return t;
}

void write_triples(const std::string& path, const std::vector<TrainingTriple>& triples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& t : triples) out << t.to_json().dump() << '\n';
}

std::vector<TrainingTriple> read_triples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<TrainingTriple> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(TrainingTriple::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, n, e.what());
    } catch (const InputError& e) {
      throw ParseError(path, n, e.what());
    }
  }
  return out;
}

nlohmann::json ExploreStats::to_json() const {
  return {{"seen", seen},           {"emitted", emitted},       {"skipped", skipped},
          {"discarded", discarded}, {"degenerate", degenerate}, {"per_control", per_control}};
}

namespace {

enum class Outcome { Emitted, Skipped, Degenerate, Discarded };

struct SentenceResult {
  Outcome outcome = Outcome::Skipped;
  std::optional<TrainingTriple> triple;
};

SentenceResult explore_one(const Generator& gen, const Sentence& x, const Scorer& scorer, const SynonymLexicon& lex,
                           const ExploreConfig& cfg, std::uint64_t seed) {
  SentenceResult r;
  const std::optional<Sentence> y_g = gen.generate(x, 1);
  if (!y_g) {
    r.outcome = Outcome::Degenerate;
    return r;
  }
  const auto samples = sample_variants(*y_g, lex, SampleConfig{cfg.samples, cfg.max_attempts, seed});
  std::optional<Selection> chosen;
  try {
    chosen = select_best(x, *y_g, samples, scorer);
  } catch (const InputError&) {
    r.outcome = Outcome::Degenerate;  // nothing scorable
    return r;
  }
  const Selection& sel = *chosen;
  if (!sel.improved) return r;
  if (sel.best == x) {
    r.outcome = Outcome::Discarded;
    return r;
  }
  r.outcome = Outcome::Emitted;
  r.triple = TrainingTriple{x, sel.best,
                            determine_control(x, sel.best, scorer.grade_cap(), cfg.zeta1, cfg.zeta2),
                            sel.best_score, cfg.cycle};
  return r;
}

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

/// Accumulates per-example gradients and steps once per batch.
class Batcher {
 public:
  Batcher(nn::ParamStore& store, const OptimConfig& opt) : store_(&store), adam_(opt.adam), opt_(&opt) {
    store_->zero_grad();
  }
  void added() {
    if (++pending_ >= std::max<std::size_t>(opt_->batch_size, 1)) flush();
  }
  void flush() {
    if (pending_ == 0) return;
    if (pending_ > 1)
      for (auto& p : *store_) p.grad /= static_cast<double>(pending_);
    if (opt_->clip_norm > 0) store_->clip_grad_norm(opt_->clip_norm);
    adam_.step(*store_);
    store_->zero_grad();
    pending_ = 0;
  }

 private:
  nn::ParamStore* store_;
  nn::Adam adam_;
  const OptimConfig* opt_;
  std::size_t pending_ = 0;
};

}  // namespace

ExploreResult explore(const Generator& gen, const std::vector<Sentence>& corpus, const Scorer& scorer,
                      const SynonymLexicon& lex, const ExploreConfig& cfg) {
  std::vector<SentenceResult> results(corpus.size());
  parallel_for(corpus.size(), cfg.threads, [&](std::size_t i) {
    results[i] = explore_one(gen, corpus[i], scorer, lex, cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
  });
  ExploreResult out;
  for (auto& r : results) {
    ++out.stats.seen;
    switch (r.outcome) {
      case Outcome::Emitted:
        ++out.stats.emitted;
        ++out.stats.per_control[static_cast<std::size_t>(r.triple->c - 1)];
        out.triples.push_back(std::move(*r.triple));
        break;
      case Outcome::Degenerate:
        ++out.stats.degenerate;
        ++out.stats.skipped;
        break;
      case Outcome::Skipped:
        ++out.stats.skipped;
        break;
      case Outcome::Discarded:
        ++out.stats.discarded;
        break;
    }
  }
  return out;
}

double reconstruction_loss(const Generator& gen, const std::vector<Sentence>& corpus) {
  if (corpus.empty()) throw InputError("reconstruction_loss: empty corpus");
  double total = 0.0;
  for (const auto& s : corpus) {
    nn::Graph g;
    nn::Bound p(g, gen.net.params());
    const auto x = encode_tokens(s, gen.vocab);
    std::vector<int> target = x;
    target.push_back(Vocabulary::kEos);
    total += nn::sequence_cross_entropy(gen.net.teacher_forced(p, gen.net.encode(p, x), x, 1), target).scalar();
  }
  return total / static_cast<double>(corpus.size());
}

PretrainReport pretrain(Generator& gen, const std::vector<Sentence>& corpus, int epochs, const OptimConfig& opt,
                        const std::function<void(int, double)>& on_epoch, int plateau_patience) {
  if (corpus.empty()) throw InputError("pretrain: empty corpus");
  PretrainReport report;
  if (epochs <= 0) return report;
  std::vector<std::vector<int>> ids;
  for (const auto& s : corpus) ids.push_back(encode_tokens(s, gen.vocab));
  nn::ParamStore& store = gen.net.params();
  Batcher batch(store, opt);
  Rng rng(derive_seed(opt.seed, "pretrain.order"));
  report.initial_loss = reconstruction_loss(gen, corpus);
  double kept = report.initial_loss;
  int rejected_run = 0;
  nn::ParamStore saved_params = store;
  Batcher saved_batch = batch;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    saved_params.copy_values_from(store);
    saved_batch = batch;
    for (std::size_t i : shuffled_indices(ids.size(), rng)) {
      nn::Graph g;
      nn::Bound p(g, store);
      const auto& x = ids[i];
      std::vector<int> target = x;
      target.push_back(Vocabulary::kEos);
      g.backward(nn::sequence_cross_entropy(gen.net.teacher_forced(p, gen.net.encode(p, x), x, 1), target));
      batch.added();
    }
    batch.flush();
    const double loss = reconstruction_loss(gen, corpus);
    if (loss > kept) {
      store.copy_values_from(saved_params);
      batch = saved_batch;
      report.rejected_epochs.push_back(epoch);
      ++rejected_run;
    } else {
      kept = loss;
      rejected_run = 0;
    }
    report.epoch_loss.push_back(kept);
    if (on_epoch) on_epoch(epoch, kept);
    if (plateau_patience > 0 && rejected_run >= plateau_patience) {
      report.plateaued = true;
      break;
    }
  }
  return report;
}

double predictor_accuracy(const nn::ControlPredictor& pred, const Vocabulary& vocab,
                          const std::vector<TrainingTriple>& triples) {
  if (triples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& t : triples) {
    const auto p = pred.predict(encode_tokens(t.x, vocab), encode_tokens(t.y, vocab));
    const auto best = std::max_element(p.begin(), p.end()) - p.begin();
    hits += best == t.c - 1;
  }
  return static_cast<double>(hits) / static_cast<double>(triples.size());
}

nn::ControlPredictor train_control_predictor(const std::vector<TrainingTriple>& triples, const Vocabulary& vocab,
                                             const nn::PredictorConfig& cfg, int epochs, const OptimConfig& opt,
                                             PredictorReport* report) {
  if (triples.empty()) throw InputError("train_control_predictor: no triples");
  nn::PredictorConfig pc = cfg;
  pc.vocab_size = static_cast<int>(vocab.size());
  nn::ControlPredictor pred(pc, derive_seed(opt.seed, "predictor.init"));
  PredictorReport rep;
  for (const auto& t : triples) ++rep.class_counts[static_cast<std::size_t>(t.c - 1)];
  if (std::count(rep.class_counts.begin(), rep.class_counts.end(), 0) == 2)
    spdlog::warn("control predictor: all {} triples carry the same label", triples.size());

  std::vector<std::pair<std::vector<int>, std::vector<int>>> ids;
  for (const auto& t : triples) ids.emplace_back(encode_tokens(t.x, vocab), encode_tokens(t.y, vocab));
  nn::ParamStore& store = pred.params();
  Batcher batch(store, opt);
  Rng rng(derive_seed(opt.seed, "predictor.order"));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double total = 0.0;
    for (std::size_t i : shuffled_indices(ids.size(), rng)) {
      nn::Graph g;
      nn::Bound p(g, store);
      nn::Var loss = nn::cross_entropy(pred.logits(p, ids[i].first, ids[i].second), triples[i].c - 1);
      total += loss.scalar();
      g.backward(loss);
      batch.added();
    }
    batch.flush();
    rep.epoch_loss.push_back(total / static_cast<double>(ids.size()));
  }
  rep.train_accuracy = predictor_accuracy(pred, vocab, triples);
  if (report) *report = std::move(rep);
  return pred;
}

double triple_loss(const Generator& gen, const nn::ControlPredictor& predictor, const TrainingTriple& t,
                   double lambda, double tau) {
  nn::Graph g;
  nn::Bound gp(g, gen.net.params());
  nn::Bound pp(g, predictor.params());
  return nn::exploitation_loss(gp, pp, gen.net, predictor, encode_tokens(t.x, gen.vocab),
                               encode_tokens(t.y, gen.vocab), t.c, lambda, tau)
      .loss.scalar();
}

ExploitReport exploit(Generator& gen, const nn::ControlPredictor& predictor, const std::vector<TrainingTriple>& triples,
                      const ExploitConfig& cfg, const OptimConfig& opt) {
  if (triples.empty()) throw InputError("exploit: no triples");
  Rng split_rng(derive_seed(opt.seed, "exploit.split"));
  std::vector<std::size_t> order = shuffled_indices(triples.size(), split_rng);
  std::size_t n_valid = 0;
  if (triples.size() >= 2)
    n_valid = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(cfg.valid_fraction * static_cast<double>(triples.size()))), 1,
        triples.size() - 1);
  std::vector<std::size_t> valid(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_valid));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_valid), order.end());
  if (valid.empty()) valid = train;

  struct Encoded {
    std::vector<int> x, y;
    int c;
  };
  std::vector<Encoded> enc;
  for (const auto& t : triples) enc.push_back({encode_tokens(t.x, gen.vocab), encode_tokens(t.y, gen.vocab), t.c});

  ExploitReport rep;
  rep.train_size = train.size();
  rep.valid_size = n_valid;
  nn::ParamStore& store = gen.net.params();
  nn::ParamStore best = store;
  rep.best_valid = std::numeric_limits<double>::infinity();
  Batcher batch(store, opt);
  Rng rng(derive_seed(opt.seed, "exploit.order"));
  int bad = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double total = 0.0;
    shuffle(train.begin(), train.end(), rng);
    for (std::size_t i : train) {
      nn::Graph g;
      nn::Bound gp(g, store);
      nn::Bound pp(g, predictor.params());
      nn::Var loss =
          nn::exploitation_loss(gp, pp, gen.net, predictor, enc[i].x, enc[i].y, enc[i].c, cfg.lambda, cfg.tau).loss;
      total += loss.scalar();
      g.backward(loss);
      batch.added();
    }
    batch.flush();
    rep.train_loss.push_back(total / static_cast<double>(train.size()));
    double v = 0.0;
    for (std::size_t i : valid) v += triple_loss(gen, predictor, triples[i], cfg.lambda, cfg.tau);
    v /= static_cast<double>(valid.size());
    rep.valid_loss.push_back(v);
    if (v < rep.best_valid) {
      rep.best_valid = v;
      rep.best_epoch = epoch;
      best.copy_values_from(store);
      bad = 0;
    } else if (++bad >= cfg.patience) {
      rep.stopped_early = epoch < cfg.epochs;
      break;
    }
  }
  store.copy_values_from(best);
  return rep;
}

std::optional<Sentence> transform(const Generator& gen, const Sentence& x, int control) {
  nn::control_row(control);
  if (control == 1) return x;
  return gen.generate(x, control);
}

ScoreBreakdown score_or_zero(const Scorer& scorer, const Sentence& x, const std::optional<Sentence>& y) {
  if (!y) return {};
  try {
    return scorer.score(x, *y);
  } catch (const InputError&) {
    return {};
  }
}

HeldoutScore heldout_score(const Generator& gen, const std::vector<Sentence>& heldout, const Scorer& scorer) {
  HeldoutScore h;
  if (heldout.empty()) return h;
  for (const auto& x : heldout) {
    h.mean_g_c2 += score_or_zero(scorer, x, transform(gen, x, 2)).composite;
    h.mean_g_c3 += score_or_zero(scorer, x, transform(gen, x, 3)).composite;
  }
  h.mean_g_c2 /= static_cast<double>(heldout.size());
  h.mean_g_c3 /= static_cast<double>(heldout.size());
  h.mean_g = 0.5 * (h.mean_g_c2 + h.mean_g_c3);
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

RunResult run_training(const TrainConfig& cfg_in, const TrainingInputs& in, const std::string& out_dir,
                       const nlohmann::json& config_echo) {
  if (in.corpus.empty()) throw InputError("run_training: empty corpus");
  TrainConfig cfg = cfg_in;
  const Vocabulary vocab = build_model_vocab(in.corpus, in.lexicon, cfg.min_count);
  cfg.model.vocab_size = static_cast<int>(vocab.size());
  cfg.predictor.vocab_size = cfg.model.vocab_size;
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const auto out = [&](const std::string& name) { return (std::filesystem::path(out_dir) / name).string(); };

  const std::vector<Sentence>& heldout = in.heldout.empty() ? in.corpus : in.heldout;
  if (in.heldout.empty()) spdlog::warn("no held-out set given; model selection uses the training corpus");

  const std::uint64_t seed_model = derive_seed(cfg.seed, "model");
  const std::uint64_t seed_pretrain = derive_seed(cfg.seed, "pretrain");
  const std::uint64_t seed_explore = derive_seed(cfg.seed, "explore");
  const std::uint64_t seed_predictor = derive_seed(cfg.seed, "predictor");
  const std::uint64_t seed_exploit = derive_seed(cfg.seed, "exploit");

  Generator gen{vocab, nn::Seq2Seq(cfg.model, seed_model), cfg.max_len};
  const Scorer scorer(in.resources, cfg.weights, cfg.grade_cap);
  const nn::AdamConfig adam{cfg.lr};

  nlohmann::json manifest;
  manifest["config"] = config_echo;
  manifest["seeds"] = {{"root", cfg.seed},           {"model", seed_model},         {"pretrain", seed_pretrain},
                       {"explore", seed_explore},    {"predictor", seed_predictor}, {"exploit", seed_exploit}};
  manifest["data"] = {{"corpus", in.corpus.size()},
                      {"heldout", heldout.size()},
                      {"vocab_size", vocab.size()},
                      {"vocab_hash", hex64(vocab.hash())},
                      {"lexicon_entries", in.lexicon.size()}};

  const auto hyper = [&](int cycle) {
    return nlohmann::json{{"cycle", cycle},         {"seed", cfg.seed},   {"max_len", cfg.max_len},
                          {"lambda", cfg.lambda},   {"tau", cfg.tau},     {"zeta1", cfg.zeta1},
                          {"zeta2", cfg.zeta2},     {"zeta_step", cfg.zeta_step}};
  };

  spdlog::info("pretraining for {} epochs on {} sentences (vocab {})", cfg.pretrain_epochs, in.corpus.size(),
               vocab.size());
  PretrainReport pre =
      pretrain(gen, in.corpus, cfg.pretrain_epochs, {adam, cfg.clip_norm, seed_pretrain, cfg.batch_size},
               [](int e, double l) { spdlog::debug("pretrain epoch {} loss {:.6f}", e, l); }, cfg.pretrain_patience);
  manifest["pretrain"] = {{"epochs", cfg.pretrain_epochs},          {"initial_loss", pre.initial_loss},
                          {"epoch_loss", pre.epoch_loss},           {"rejected_epochs", pre.rejected_epochs},
                          {"plateaued", pre.plateaued}};
  save_checkpoint(out("pretrain.ckpt"), {vocab, gen.net, std::nullopt, hyper(0)});

  std::map<std::string, TrainingTriple> dataset;
  manifest["cycles"] = nlohmann::json::array();
  RunResult result;
  result.best_mean = -std::numeric_limits<double>::infinity();

  for (int cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
    const double step = cfg.zeta_step * (cycle - 1);
    ExploreConfig ec{cfg.samples, cfg.effective_max_attempts(), cfg.zeta1 + step, cfg.zeta2 + step,
                     derive_seed(seed_explore, static_cast<std::uint64_t>(cycle)), cfg.threads, cycle};
    const std::uint64_t params_before = gen.net.params().hash();
    ExploreResult er = explore(gen, in.corpus, scorer, in.lexicon, ec);
    if (gen.net.params().hash() != params_before) throw TrainingError("exploration modified model parameters");
    write_triples(out("triples_cycle" + std::to_string(cycle) + ".jsonl"), er.triples);
    spdlog::info("cycle {}: explored {} sentences, {} triples ({} skipped, {} discarded)", cycle, er.stats.seen,
                 er.stats.emitted, er.stats.skipped, er.stats.discarded);

    nlohmann::json entry = {{"cycle", cycle}, {"zeta1", ec.zeta1}, {"zeta2", ec.zeta2},
                            {"explore", er.stats.to_json()}};
    if (er.triples.empty() && cycle == 1) {
      entry["aborted"] = "no triples";
      manifest["cycles"].push_back(entry);
      write_json(out("manifest.json"), manifest);
      throw TrainingError("exploration produced no triples in cycle 1 (seen " + std::to_string(er.stats.seen) +
                          ", skipped " + std::to_string(er.stats.skipped) + " of which degenerate " +
                          std::to_string(er.stats.degenerate) + ", discarded " +
                          std::to_string(er.stats.discarded) + "); check the lexicon coverage and scorer resources");
    }

    for (auto& t : er.triples) {
      const std::string key = t.x.key() + "\t" + t.y.key();
      auto it = dataset.find(key);
      if (it == dataset.end())
        dataset.emplace(key, std::move(t));
      else if (t.scores.composite > it->second.scores.composite)
        it->second = std::move(t);
    }
    std::vector<TrainingTriple> data;
    data.reserve(dataset.size());
    for (const auto& [k, t] : dataset) data.push_back(t);

    PredictorReport prep;
    const std::uint64_t pseed = derive_seed(seed_predictor, static_cast<std::uint64_t>(cycle));
    nn::ControlPredictor predictor = train_control_predictor(
        data, vocab, cfg.predictor, cfg.predictor_epochs, {nn::AdamConfig{cfg.predictor_lr}, cfg.clip_norm, pseed, cfg.batch_size},
        &prep);
    const std::uint64_t pred_hash = predictor.params().hash();

    ExploitReport xrep =
        exploit(gen, predictor, data, {cfg.exploit_epochs, cfg.patience, cfg.lambda, cfg.tau, cfg.valid_fraction},
                {adam, cfg.clip_norm, derive_seed(seed_exploit, static_cast<std::uint64_t>(cycle)), cfg.batch_size});
    if (predictor.params().hash() != pred_hash) throw TrainingError("exploitation modified predictor parameters");

    const HeldoutScore hs = heldout_score(gen, heldout, scorer);
    const std::string ckpt_name = "cycle" + std::to_string(cycle) + ".ckpt";
    const Checkpoint ckpt{vocab, gen.net, predictor, hyper(cycle)};
    save_checkpoint(out(ckpt_name), ckpt);
    if (hs.mean_g > result.best_mean) {
      result.best_mean = hs.mean_g;
      result.best_cycle = cycle;
      save_checkpoint(out("best.ckpt"), ckpt);
    }
    spdlog::info("cycle {}: {} triples total, predictor accuracy {:.3f}, held-out mean G {:.4f} (c2 {:.4f}, c3 {:.4f})",
                 cycle, data.size(), prep.train_accuracy, hs.mean_g, hs.mean_g_c2, hs.mean_g_c3);

    entry["dataset_size"] = data.size();
    entry["predictor"] = {{"epoch_loss", prep.epoch_loss},
                          {"train_accuracy", prep.train_accuracy},
                          {"class_counts", prep.class_counts},
                          {"params_hash", hex64(pred_hash)}};
    entry["exploit"] = {{"train_loss", xrep.train_loss}, {"valid_loss", xrep.valid_loss},
                        {"best_epoch", xrep.best_epoch}, {"best_valid", xrep.best_valid},
                        {"stopped_early", xrep.stopped_early}, {"train_size", xrep.train_size},
                        {"valid_size", xrep.valid_size}};
    entry["heldout"] = {{"mean_g_c2", hs.mean_g_c2}, {"mean_g_c3", hs.mean_g_c3}, {"mean_g", hs.mean_g}};
    entry["checkpoint"] = ckpt_name;
    entry["params_hash"] = hex64(gen.net.params().hash());
    manifest["cycles"].push_back(entry);
  }

  std::vector<TrainingTriple> data;
  for (const auto& [k, t] : dataset) data.push_back(t);
  write_triples(out("dataset.jsonl"), data);
  manifest["best"] = {{"cycle", result.best_cycle}, {"mean_g", result.best_mean}, {"checkpoint", "best.ckpt"}};
  write_json(out("manifest.json"), manifest);
  result.manifest = manifest;
  return result;
}

}  // namespace formal
