#include "formal/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "formal/checkpoint.hpp"
#include "formal/config.hpp"
#include "formal/embeddings.hpp"
#include "formal/error.hpp"
#include "formal/evaluate.hpp"
#include "formal/lexicon.hpp"
#include "formal/ngram.hpp"
#include "formal/nn/gradcheck.hpp"
#include "formal/scorers.hpp"
#include "formal/text.hpp"
#include "formal/trainloop.hpp"

namespace formal {
namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string corpus, heldout, lexicon, embeddings, stopwords, lm, lm_corpus;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "INI config file")->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "Override a config key: section.key=value");
  app->add_option("--corpus", c.corpus, "Training corpus, one sentence per line");
  app->add_option("--heldout", c.heldout, "Model-selection sentences");
  app->add_option("--lexicon", c.lexicon, "Synonym lexicon (word<TAB>syn|syn)");
  app->add_option("--embeddings", c.embeddings, "Word vectors (text format)");
  app->add_option("--stopwords", c.stopwords, "Stopword list");
  app->add_option("--lm", c.lm, "ARPA language model");
  app->add_option("--lm-corpus", c.lm_corpus, "Corpus to train the language model on when --lm is absent");
  app->add_option("--seed", c.seed, "Top-level random seed");
}

RunConfig make_config(const Common& c) {
  RunConfig rc;
  if (!c.config.empty()) rc.load_file(c.config);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + s + "'");
    rc.apply(s.substr(0, eq), s.substr(eq + 1));
  }
  const std::pair<const std::string*, std::string*> paths[] = {
      {&c.corpus, &rc.paths.corpus},         {&c.heldout, &rc.paths.heldout}, {&c.lexicon, &rc.paths.lexicon},
      {&c.embeddings, &rc.paths.embeddings}, {&c.stopwords, &rc.paths.stopwords}, {&c.lm, &rc.paths.lm},
      {&c.lm_corpus, &rc.paths.lm_corpus}};
  for (auto [from, to] : paths)
    if (!from->empty()) *to = *from;
  if (c.seed) rc.train.seed = *c.seed;
  rc.validate();
  return rc;
}

void require(const std::string& value, const char* key) {
  if (value.empty()) throw ConfigError(std::string("missing required setting ") + key);
}

ScoringResources load_scoring(const RunConfig& rc) {
  require(rc.paths.embeddings, "paths.embeddings");
  require(rc.paths.stopwords, "paths.stopwords");
  ScoringResources res;
  if (!rc.paths.lm.empty()) {
    res.lm = std::make_shared<NgramModel>(NgramModel::read_arpa(rc.paths.lm));
  } else if (!rc.paths.lm_corpus.empty()) {
    res.lm = std::make_shared<NgramModel>(train_ngram(read_corpus(rc.paths.lm_corpus), rc.train.lm_order));
  } else {
    throw ConfigError("missing required setting paths.lm (or paths.lm_corpus)");
  }
  res.embeddings = std::make_shared<EmbeddingTable>(
      EmbeddingTable::load(rc.paths.embeddings, static_cast<std::size_t>(rc.train.embedding_dim)));
  res.stopwords = std::make_shared<StopwordList>(StopwordList::load(rc.paths.stopwords));
  return res;
}

SynonymLexicon load_lexicon(const RunConfig& rc) {
  if (rc.paths.lexicon.empty()) return {};
  std::vector<std::string> warnings;
  SynonymLexicon lex = SynonymLexicon::load(rc.paths.lexicon, &warnings);
  for (const auto& w : warnings) spdlog::warn("{}", w);
  return lex;
}

std::vector<Sentence> load_corpus(const std::string& path, std::size_t max_len) {
  std::size_t rejected = 0;
  auto corpus = read_corpus(path, max_len, &rejected);
  if (rejected) spdlog::warn("{}: dropped {} lines longer than {} tokens", path, rejected, max_len);
  if (corpus.empty()) throw InputError(path + ": no sentences");
  return corpus;
}

Generator load_generator(const std::string& path, std::size_t max_len, Checkpoint* keep = nullptr) {
  Checkpoint ckpt = load_checkpoint(path);
  Generator gen{ckpt.vocab, ckpt.model, max_len};
  if (keep) *keep = std::move(ckpt);
  return gen;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

nlohmann::json config_echo(const RunConfig& rc) {
  nlohmann::json j = rc.to_json();
  j.erase("paths.output_dir");
  return j;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("formalize", sink);
  logger->set_pattern("[%l] %v");
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> p;
    ~Restore() { spdlog::set_default_logger(p); }
  } restore{previous};

  CLI::App app{"Readability-controlled sentence formalization", "formalize"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Split a corpus into train/valid/test/heldout files");
  std::string ingest_in, ingest_out;
  std::uint64_t ingest_seed = 1;
  double heldout_fraction = 0.5;
  std::size_t ingest_max_len = kDefaultMaxLen;
  ingest->add_option("--input", ingest_in, "Raw corpus")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out-dir", ingest_out, "Output directory")->required();
  ingest->add_option("--seed", ingest_seed, "Shuffle seed");
  ingest->add_option("--heldout-fraction", heldout_fraction, "Share of the validation slice kept for model selection")
      ->check(CLI::Range(0.0, 1.0));
  ingest->add_option("--max-len", ingest_max_len, "Drop sentences longer than this");

  // build-lexicon
  auto* build_lex = app.add_subcommand("build-lexicon", "Build a synonym lexicon from a synset dump");
  std::string synsets, lex_out;
  build_lex->add_option("--synsets", synsets, "wn_s.pl-style or one-synset-per-line file")
      ->required()
      ->check(CLI::ExistingFile);
  build_lex->add_option("--out", lex_out, "Lexicon output")->required();

  // train-lm
  auto* train_lm = app.add_subcommand("train-lm", "Train a Kneser-Ney n-gram model and write ARPA");
  std::string lm_corpus, lm_out;
  int lm_order = 4;
  train_lm->add_option("--corpus", lm_corpus, "Training sentences")->required()->check(CLI::ExistingFile);
  train_lm->add_option("--order", lm_order, "n-gram order")->check(CLI::Range(1, 5));
  train_lm->add_option("--out", lm_out, "ARPA output")->required();

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "Autoencoder pretraining only");
  Common pre_c;
  add_common(pre, pre_c);
  std::string pre_out;
  pre->add_option("--out", pre_out, "Checkpoint output")->required();

  // train
  auto* train = app.add_subcommand("train", "Pretrain, then explore/exploit cycles");
  Common train_c;
  add_common(train, train_c);
  std::string train_out;
  train->add_option("--out-dir", train_out, "Run directory (defaults to paths.output_dir)");

  // explore
  auto* expl = app.add_subcommand("explore", "Synthesize triples with a trained model");
  Common expl_c;
  add_common(expl, expl_c);
  std::string expl_ckpt, expl_out;
  int expl_cycle = 1;
  expl->add_option("--checkpoint", expl_ckpt, "Model checkpoint")->required()->check(CLI::ExistingFile);
  expl->add_option("--out", expl_out, "JSONL output")->required();
  expl->add_option("--cycle", expl_cycle, "Cycle number recorded in the triples")->check(CLI::PositiveNumber);

  // transform
  auto* trans = app.add_subcommand("transform", "Rewrite sentences under a control level");
  std::string trans_ckpt, trans_in;
  int trans_control = 0;
  std::size_t trans_max_len = kDefaultMaxLen;
  trans->add_option("--control", trans_control, "1 (retain), 2 or 3")->required()->check(CLI::Range(1, 3));
  trans->add_option("--checkpoint", trans_ckpt, "Model checkpoint (not needed for control 1)");
  trans->add_option("--input", trans_in, "Input file (default: stdin)")->check(CLI::ExistingFile);
  trans->add_option("--max-len", trans_max_len, "Maximum output length");

  // score
  auto* score = app.add_subcommand("score", "Print the score breakdown of an (x, y) pair");
  Common score_c;
  add_common(score, score_c);
  std::string score_x, score_y;
  score->add_option("--x", score_x, "Input sentence")->required();
  score->add_option("--y", score_y, "Output sentence")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Per-control score means, agreement and BLEU");
  Common eval_c;
  add_common(eval, eval_c);
  std::string eval_ckpt, eval_inputs, eval_refs, eval_report;
  std::vector<int> eval_controls{1, 2, 3};
  std::vector<std::string> eval_outputs;
  eval->add_option("--inputs", eval_inputs, "Input sentences")->required()->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", eval_ckpt, "Generate outputs with this model")->check(CLI::ExistingFile);
  eval->add_option("--output", eval_outputs, "Pre-computed outputs as CONTROL=FILE (instead of --checkpoint)");
  eval->add_option("--controls", eval_controls, "Controls to generate with --checkpoint")->delimiter(',');
  eval->add_option("--references", eval_refs, "Reference outputs for BLEU")->check(CLI::ExistingFile);
  eval->add_option("--report", eval_report, "Also write the JSON report here");

  // grad-check
  auto* gc = app.add_subcommand("grad-check", "Finite-difference check of the full composite loss");
  nn::ModelCheckConfig gcc;
  gc->add_option("--seed", gcc.seed, "Seed");
  gc->add_option("--tau", gcc.tau, "Temperature")->check(CLI::PositiveNumber);
  gc->add_option("--lambda", gcc.lambda, "Loss blend")->check(CLI::Range(0.0, 1.0));
  gc->add_option("--vocab", gcc.vocab, "Vocabulary size")->check(CLI::Range(5, 1000));
  gc->add_option("--hidden", gcc.hidden, "Hidden size")->check(CLI::Range(1, 256));
  gc->add_option("--control-dim", gcc.control_dim, "Control embedding size")->check(CLI::Range(1, 256));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }
  logger->set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*ingest) {
      std::size_t rejected = 0;
      const auto corpus = read_corpus(ingest_in, ingest_max_len, &rejected);
      const CorpusSplit split = split_corpus(corpus, ingest_seed, {}, heldout_fraction);
      std::filesystem::create_directories(ingest_out);
      const std::filesystem::path dir(ingest_out);
      write_corpus((dir / "train.txt").string(), split.train);
      write_corpus((dir / "valid.txt").string(), split.valid);
      write_corpus((dir / "test.txt").string(), split.test);
      write_corpus((dir / "heldout.txt").string(), split.heldout);
      out << nlohmann::json{{"sentences", corpus.size()}, {"rejected", rejected},
                            {"train", split.train.size()}, {"valid", split.valid.size()},
                            {"test", split.test.size()},   {"heldout", split.heldout.size()},
                            {"seed", ingest_seed}}
                 .dump()
          << "\n";
    } else if (*build_lex) {
      std::ifstream f(synsets);
      SynsetIngestStats stats;
      const SynonymLexicon lex = build_lexicon_from_synsets(f, &stats);
      lex.save(lex_out);
      out << nlohmann::json{{"synsets", stats.synsets},
                            {"lemmas", stats.lemmas},
                            {"dropped_multiword", stats.dropped_multiword},
                            {"entries", lex.size()}}
                 .dump()
          << "\n";
    } else if (*train_lm) {
      const NgramModel lm = train_ngram(load_corpus(lm_corpus, kDefaultMaxLen), lm_order);
      lm.write_arpa(lm_out);
      nlohmann::json counts = nlohmann::json::object();
      for (int k = 1; k <= lm.order(); ++k) counts[std::to_string(k)] = lm.num_entries(k);
      out << nlohmann::json{{"order", lm.order()}, {"ngrams", counts}}.dump() << "\n";
    } else if (*pre) {
      RunConfig rc = make_config(pre_c);
      require(rc.paths.corpus, "paths.corpus");
      const auto corpus = load_corpus(rc.paths.corpus, rc.train.max_len);
      const SynonymLexicon lex = load_lexicon(rc);
      TrainConfig& t = rc.train;
      Generator gen{build_model_vocab(corpus, lex, t.min_count), {}, t.max_len};
      t.model.vocab_size = static_cast<int>(gen.vocab.size());
      gen.net = nn::Seq2Seq(t.model, derive_seed(t.seed, "model"));
      const PretrainReport rep =
          pretrain(gen, corpus, t.pretrain_epochs,
                   {nn::AdamConfig{t.lr}, t.clip_norm, derive_seed(t.seed, "pretrain"), t.batch_size},
                   [](int e, double l) { spdlog::info("epoch {} loss {:.6f}", e, l); }, t.pretrain_patience);
      save_checkpoint(pre_out, {gen.vocab, gen.net, std::nullopt, {{"cycle", 0}, {"seed", t.seed}, {"max_len", t.max_len}}});
      out << nlohmann::json{{"initial_loss", rep.initial_loss},
                            {"epoch_loss", rep.epoch_loss},
                            {"rejected_epochs", rep.rejected_epochs},
                            {"checkpoint", pre_out}}
                 .dump()
          << "\n";
    } else if (*train) {
      RunConfig rc = make_config(train_c);
      if (!train_out.empty()) rc.paths.output_dir = train_out;
      require(rc.paths.corpus, "paths.corpus");
      require(rc.paths.lexicon, "paths.lexicon");
      require(rc.paths.output_dir, "paths.output_dir (or --out-dir)");
      TrainingInputs inputs;
      inputs.corpus = load_corpus(rc.paths.corpus, rc.train.max_len);
      if (!rc.paths.heldout.empty()) inputs.heldout = load_corpus(rc.paths.heldout, rc.train.max_len);
      inputs.lexicon = load_lexicon(rc);
      inputs.resources = load_scoring(rc);
      const RunResult r = run_training(rc.train, inputs, rc.paths.output_dir, config_echo(rc));
      out << nlohmann::json{{"best_cycle", r.best_cycle}, {"best_mean_g", r.best_mean},
                            {"output_dir", rc.paths.output_dir}}
                 .dump()
          << "\n";
    } else if (*expl) {
      RunConfig rc = make_config(expl_c);
      require(rc.paths.corpus, "paths.corpus");
      require(rc.paths.lexicon, "paths.lexicon");
      const Generator gen = load_generator(expl_ckpt, rc.train.max_len);
      const auto corpus = load_corpus(rc.paths.corpus, rc.train.max_len);
      const Scorer scorer(load_scoring(rc), rc.train.weights, rc.train.grade_cap);
      ExploreConfig ec{rc.train.samples,
                       rc.train.effective_max_attempts(),
                       rc.train.zeta1,
                       rc.train.zeta2,
                       derive_seed(derive_seed(rc.train.seed, "explore"), static_cast<std::uint64_t>(expl_cycle)),
                       rc.train.threads,
                       expl_cycle};
      const ExploreResult r = explore(gen, corpus, scorer, load_lexicon(rc), ec);
      write_triples(expl_out, r.triples);
      out << r.stats.to_json().dump() << "\n";
    } else if (*trans) {
      nn::control_row(trans_control);
      std::ifstream file;
      if (!trans_in.empty()) file.open(trans_in);
      std::istream& src = trans_in.empty() ? in : file;
      const auto lines = read_lines(src);
      if (trans_control == 1) {
        for (const auto& l : lines) out << l << "\n";
        return kExitOk;
      }
      if (trans_ckpt.empty()) throw ConfigError("transform: --checkpoint is required for controls 2 and 3");
      const Generator gen = load_generator(trans_ckpt, trans_max_len);
      for (const auto& l : lines) {
        if (l.find_first_not_of(" \t") == std::string::npos) {
          out << "\n";
          continue;
        }
        const auto y = transform(gen, tokenize(l, std::numeric_limits<std::size_t>::max()), trans_control);
        out << (y ? y->str() : std::string()) << "\n";
      }
    } else if (*score) {
      RunConfig rc = make_config(score_c);
      const Scorer scorer(load_scoring(rc), rc.train.weights, rc.train.grade_cap);
      const ScoreBreakdown s = scorer.score(tokenize(score_x), tokenize(score_y));
      out << nlohmann::json{{"r_s", s.relatedness}, {"r_f", s.fluency}, {"r_d", s.readability}, {"g", s.composite}}
                 .dump()
          << "\n";
    } else if (*eval) {
      RunConfig rc = make_config(eval_c);
      const auto inputs = load_corpus(eval_inputs, std::numeric_limits<std::size_t>::max());
      const Scorer scorer(load_scoring(rc), rc.train.weights, rc.train.grade_cap);
      std::vector<ControlOutputs> outputs;
      if (!eval_outputs.empty()) {
        for (const auto& item : eval_outputs) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) throw ConfigError("--output expects CONTROL=FILE, got '" + item + "'");
          ControlOutputs co;
          co.control = std::stoi(item.substr(0, eq));
          std::ifstream f(item.substr(eq + 1));
          if (!f) throw InputError("cannot open " + item.substr(eq + 1));
          for (const auto& l : read_lines(f)) {
            if (l.find_first_not_of(" \t") == std::string::npos)
              co.outputs.emplace_back(std::nullopt);
            else
              co.outputs.emplace_back(tokenize(l, std::numeric_limits<std::size_t>::max()));
          }
          outputs.push_back(std::move(co));
        }
      } else {
        if (eval_ckpt.empty()) throw ConfigError("evaluate: give --checkpoint or --output");
        const Generator gen = load_generator(eval_ckpt, rc.train.max_len);
        for (int c : eval_controls) {
          ControlOutputs co;
          co.control = c;
          for (const auto& x : inputs) co.outputs.push_back(transform(gen, x, c));
          outputs.push_back(std::move(co));
        }
      }
      std::vector<Sentence> refs;
      if (!eval_refs.empty()) refs = load_corpus(eval_refs, std::numeric_limits<std::size_t>::max());
      const EvalReport rep = evaluate_outputs(inputs, outputs, scorer, rc.train.zeta1, rc.train.zeta2,
                                              eval_refs.empty() ? nullptr : &refs);
      const std::string text = rep.to_json().dump(2);
      if (!eval_report.empty()) {
        std::ofstream f(eval_report, std::ios::trunc);
        f << text << "\n";
      }
      out << text << "\n";
    } else if (*gc) {
      const nn::GradCheckResult r = nn::check_full_model(gcc);
      out << "max relative error: " << r.max_rel_error << " over " << r.checked << " entries (worst " << r.worst
          << ": analytic " << r.worst_analytic << ", numeric " << r.worst_numeric << ")\n";
      if (!(r.max_rel_error < nn::kGradCheckTolerance)) {
        err << "error: gradient check failed (tolerance " << nn::kGradCheckTolerance << ")\n";
        return kExitNumerical;
      }
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace formal
