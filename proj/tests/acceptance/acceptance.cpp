// Runs the acceptance criteria and prints one PASS/FAIL line for each.
// Usage: acceptance [WORK_DIR] [CRITERION...]

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "formal/checkpoint.hpp"
#include "formal/evaluate.hpp"
#include "formal/lexicon.hpp"
#include "formal/ngram.hpp"
#include "formal/nn/gradcheck.hpp"
#include "formal/nn/loss.hpp"
#include "formal/scorers.hpp"
#include "formal/trainloop.hpp"
#include "primitive_checks.hpp"
#include "toy_world.hpp"

using namespace formal;
namespace fs = std::filesystem;

namespace {

// Tolerances and thresholds.
constexpr double kFkTol = 1e-9;
constexpr double kCompositeTol = 1e-12;
constexpr double kMleTol = 1e-12;
constexpr double kNormTol = 1e-6;
constexpr double kArpaTol = 1e-6;
constexpr double kGradTol = nn::kGradCheckTolerance;  // 1e-4
constexpr double kTau = 0.001;
constexpr double kOneHotMass = 1.0 - 1e-6;
constexpr double kReconstructionRate = 0.90;
constexpr double kMinRelatedness = 0.5;
constexpr double kPredictorAccuracy = 0.40;
constexpr double kBleuTol = 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path root;
  toy::ToyWorld world;
  ScoringResources resources;
  std::optional<RunResult> main_run;

  fs::path toy_dir() const { return root / "toy"; }
  fs::path run_dir() const { return root / "run"; }
};

// The toy corpus for criteria 5, 8 and 9: 500 sentences, 1000 lexicon entries.
void prepare_world(Workspace& ws) {
  ws.world = toy::make_toy_world();
  ws.world.write(ws.toy_dir().string());
  ws.resources = toy::ToyWorld::load_resources(ws.toy_dir().string());
}

TrainConfig main_config() {
  TrainConfig c;
  c.model.emb_dim = 64;
  c.model.enc_hidden = 64;
  c.model.dec_hidden = 128;
  c.model.attn_dim = 64;
  c.predictor = {0, 32, 32, 32};
  c.predictor_epochs = 10;
  c.samples = 100;
  c.pretrain_epochs = 40;
  c.max_cycles = 4;
  c.seed = 1;
  return c;
}

const RunResult& main_run(Workspace& ws) {
  if (!ws.main_run) {
    spdlog::info("training on the toy corpus (pretrain + {} cycles)", main_config().max_cycles);
    fs::remove_all(ws.run_dir());
    ws.main_run = run_training(main_config(), {ws.world.corpus, ws.world.heldout, ws.world.lexicon, ws.resources},
                               ws.run_dir().string());
  }
  return *ws.main_run;
}

Generator load_generator(const fs::path& ckpt, std::size_t max_len = 60) {
  Checkpoint c = load_checkpoint(ckpt.string());
  return Generator{c.vocab, std::move(c.model), max_len};
}

// 1. Readability fixture and composite arithmetic.
Outcome scorer_oracles(Workspace&) {
  const std::vector<std::pair<const char*, double>> fk{
      {"The cat sat on the mat.", -1.4499999999999975},
      {"Readability matters for every technical document.", 20.183333333333341},
      {"I think we should go now, don't you?", -0.27999999999999936},
      {"The committee unanimously approved the extraordinary proposal.", 20.854285714285712},
      {"Please send me the file by Friday.", 0.62571428571428456},
      {"Table the motion until the little people arrive.", 8.1800000000000033},
      {"Gentle breezes whistle through the ancient temple.", 7.3685714285714319},
      {"We can't make it tonight; sorry!", 2.3114285714285714},
      {"International cooperation facilitates sustainable development.", 38.280000000000001},
      {"Go.", -3.3999999999999986},
  };
  double worst_fk = 0.0;
  for (const auto& [s, v] : fk) worst_fk = std::max(worst_fk, std::abs(fk_grade(tokenize(s)) - v));
  struct Tuple {
    double rs, rf, rd, bs, bf, bd, g;
  };
  const std::vector<Tuple> tuples{
      {1.0, 0.5, 0.4, 0.2, 0.6, 0.2, 0.58000000000000007},
      {0.25, 0.75, 0.125, 0.2, 0.6, 0.2, 0.52499999999999991},
      {0.9, 0.1, 0.3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.43333333333333329},
      {0.0, 1.0, 0.0, 0.5, 0.25, 0.25, 0.25},
      {0.72, 0.34, 0.583, 0.1, 0.1, 0.8, 0.57240000000000002},
  };
  double worst_g = 0.0;
  for (const auto& t : tuples)
    worst_g = std::max(worst_g, std::abs(ScorerWeights{t.bs, t.bf, t.bd}.combine(t.rs, t.rf, t.rd) - t.g));
  return {worst_fk < kFkTol && worst_g < kCompositeTol,
          "max |dFK| " + fmt("%.3g", worst_fk) + " over 10 sentences, max |dG| " + fmt("%.3g", worst_g) +
              " over 5 tuples"};
}

// 2. Unigram MLE, order-4 normalization, ARPA fixture.
Outcome ngram_correctness(Workspace&) {
  std::vector<Sentence> three{tokenize("a b"), tokenize("a c a"), tokenize("b")};
  NgramModel uni = train_ngram(three, 1);
  const auto p = [](const NgramModel& m, const std::vector<std::string>& ctx, const std::string& w) {
    return std::pow(10.0, m.log10_prob(ctx, w));
  };
  double mle = std::max({std::abs(p(uni, {}, "a") - 3.0 / 6), std::abs(p(uni, {}, "b") - 2.0 / 6),
                         std::abs(p(uni, {}, "c") - 1.0 / 6)});

  toy::ToyConfig tc;
  tc.nouns = 10;
  tc.verbs = 8;
  tc.adjectives = 6;
  tc.lm_corpus = 200;
  NgramModel four = train_ngram(toy::make_toy_world(tc).lm_corpus, 4);
  const auto words = four.predictable_words();
  double norm = 0.0;
  std::size_t contexts = 0;
  for (int k = 1; k <= 4; ++k)
    for (const auto& ctx : four.observed_contexts(k)) {
      double total = 0.0;
      for (const auto& w : words) total += p(four, ctx, w);
      norm = std::max(norm, std::abs(total - 1.0));
      ++contexts;
    }

  NgramModel arpa = NgramModel::read_arpa(std::string(FORMAL_FIXTURES) + "/bigram.arpa");
  double arpa_err = std::max({std::abs(fluency_score(arpa, tokenize("a b")) - 0.56234132519034907),
                              std::abs(fluency_score(arpa, tokenize("b a")) - 0.19936855752664562),
                              std::abs(fluency_score(arpa, tokenize("zzz")) - 0.14108635061173966),
                              std::abs(arpa.sentence_log10({"a", "b"}) + 0.75)});
  return {mle < kMleTol && norm < kNormTol && arpa_err < kArpaTol,
          "MLE |d| " + fmt("%.3g", mle) + ", max |sum-1| " + fmt("%.3g", norm) + " over " +
              std::to_string(contexts) + " contexts, ARPA |d| " + fmt("%.3g", arpa_err)};
}

// 3. Finite differences on every primitive and the full composite loss.
Outcome gradients(Workspace&) {
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, err] : toy::check_primitives())
    if (err > worst) {
      worst = err;
      worst_name = name;
    }
  const nn::GradCheckResult full = nn::check_full_model({});
  return {worst < kGradTol && full.max_rel_error < kGradTol,
          "primitives max " + fmt("%.3g", worst) + " (" + worst_name + "), full model max " +
              fmt("%.3g", full.max_rel_error) + " over " + std::to_string(full.checked) + " entries"};
}

// 4. Relaxed output at tau = 0.001 is one-hot for any gap >= 1. The worst
// case for a given gap puts every other logit exactly gap below the max.
Outcome temperature(Workspace&) {
  nn::Graph g;
  double worst = 1.0;
  for (int vocab : {2, 3, 100, 10000, 100000})
    for (double gap : {1.0, 1.0 + 1e-9, 1.5, 2.0, 10.0, 1000.0}) {
      nn::Matrix l = nn::Matrix::Constant(vocab, 1, 0.3 - gap);
      l(vocab / 2, 0) = 0.3;
      const auto out = nn::soft_output({g.constant(l)}, kTau);
      worst = std::min(worst, out[0].value()(vocab / 2, 0));
    }
  return {worst >= kOneHotMass, "min argmax mass " + fmt("%.17g", worst) + " over gaps >= 1, vocab up to 1e5"};
}

// 5. Exploration invariants and select_best against enumeration.
std::set<std::string> enumerate_variants(const Sentence& s, const SynonymLexicon& lex) {
  std::vector<std::vector<std::string>> choices;
  for (const auto& t : s) {
    std::vector<std::string> c{t.normalized()};
    if (const auto* syn = lex.synonyms(t.normalized())) c.insert(c.end(), syn->begin(), syn->end());
    choices.push_back(c);
  }
  std::set<std::string> out;
  std::vector<std::size_t> idx(choices.size(), 0);
  while (true) {
    std::vector<std::string> w;
    for (std::size_t i = 0; i < idx.size(); ++i) w.push_back(choices[i][idx[i]]);
    out.insert(Sentence::from_words(w).key());
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == choices[k].size()) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  out.erase(s.key());
  return out;
}

Outcome exploration(Workspace& ws) {
  main_run(ws);
  const Generator gen = load_generator(ws.run_dir() / "pretrain.ckpt");
  const TrainConfig cfg = main_config();
  const Scorer sc(ws.resources, cfg.weights, cfg.grade_cap);
  ExploreConfig ec{cfg.samples, cfg.effective_max_attempts(), cfg.zeta1, cfg.zeta2, 5, 1, 1};
  const auto before = gen.net.params().hash();
  const ExploreResult r = explore(gen, ws.world.corpus, sc, ws.world.lexicon, ec);
  std::size_t violations = 0;
  for (const auto& t : r.triples) {
    const auto y_g = gen.generate(t.x, 1);
    if (!y_g || !(sc.score(t.x, t.y).composite > sc.score(t.x, *y_g).composite)) ++violations;
    if (t.y == t.x) ++violations;
    if (t.c != determine_control(t.x, t.y, sc.grade_cap(), ec.zeta1, ec.zeta2)) ++violations;
  }
  if (!r.stats.reconciles() || gen.net.params().hash() != before) ++violations;

  std::size_t compared = 0, mismatches = 0;
  for (std::size_t i = 0; i < ws.world.corpus.size(); ++i) {
    const Sentence& x = ws.world.corpus[i];
    const auto y_g = gen.generate(x, 1);
    if (!y_g || variant_space_size(*y_g, ws.world.lexicon) > cfg.samples) continue;
    ++compared;
    const auto samples =
        sample_variants(*y_g, ws.world.lexicon, SampleConfig{cfg.samples, cfg.effective_max_attempts(), i});
    const Selection sel = select_best(x, *y_g, samples, sc);
    double best = sc.score(x, *y_g).composite;
    std::optional<Sentence> arg;
    for (const auto& k : enumerate_variants(*y_g, ws.world.lexicon)) {
      const Sentence v = tokenize(k);
      const double gv = sc.score(x, v).composite;
      if (gv > best || (arg && gv == best && v < *arg)) {
        best = gv;
        arg = v;
      }
    }
    const Sentence expect = arg ? *arg : *y_g;
    if (sel.best.key() != expect.key() || sel.best_score.composite != best) ++mismatches;
  }
  return {violations == 0 && compared > 0 && mismatches == 0,
          std::to_string(r.triples.size()) + " triples, " + std::to_string(violations) + " invariant violations; " +
              std::to_string(compared) + " sentences with variant space <= K, " + std::to_string(mismatches) +
              " select_best mismatches"};
}

// 6. Control determination on the fixed vector.
Outcome control_vector(Workspace&) {
  const std::vector<std::pair<double, int>> cases{{1.00, 1}, {1.05, 2}, {1.07, 2}, {1.10, 2}, {1.101, 3}, {1.20, 3}};
  std::string got;
  bool ok = true;
  for (const auto& [r, c] : cases) {
    const int v = control_from_ratio(r, 1.05, 1.10);
    ok = ok && v == c;
    got += (got.empty() ? "" : " ") + std::to_string(v);
  }
  return {ok, "classes " + got + " for 1.00 1.05 1.07 1.10 1.101 1.20"};
}

// 7. Pretraining reconstructs a 50-sentence corpus.
Outcome pretraining(Workspace&) {
  toy::ToyConfig tc;
  tc.corpus = 50;
  const toy::ToyWorld w = toy::make_toy_world(tc);
  Vocabulary vocab = build_model_vocab(w.corpus, w.lexicon);
  nn::Seq2SeqConfig mc;
  mc.vocab_size = static_cast<int>(vocab.size());
  mc.emb_dim = 48;
  mc.enc_hidden = 48;
  mc.dec_hidden = 96;
  mc.attn_dim = 48;
  Generator gen{vocab, nn::Seq2Seq(mc, 3), 60};
  OptimConfig opt;
  opt.clip_norm = 1.0;
  opt.seed = 4;
  const int epochs = 150;
  const PretrainReport rep = pretrain(gen, w.corpus, epochs, opt, {}, 0);
  std::size_t exact = 0;
  for (const auto& x : w.corpus) {
    const auto y = gen.generate(x, 1);
    if (y && y->normalized() == x.normalized()) ++exact;
  }
  const double rate = static_cast<double>(exact) / static_cast<double>(w.corpus.size());
  return {rate >= kReconstructionRate, std::to_string(exact) + "/" + std::to_string(w.corpus.size()) +
                                           " exact after " + std::to_string(epochs) + " epochs (loss " +
                                           fmt("%.4f", rep.epoch_loss.back()) + ")"};
}

// 8. Control-3 outputs are at least as readable as the inputs and stay related.
Outcome end_to_end(Workspace& ws) {
  const RunResult& run = main_run(ws);
  const Generator gen = load_generator(ws.run_dir() / "best.ckpt");
  const TrainConfig cfg = main_config();
  const Scorer sc(ws.resources, cfg.weights, cfg.grade_cap);
  ControlOutputs co{3, {}};
  for (const auto& x : ws.world.corpus) co.outputs.push_back(transform(gen, x, 3));
  const EvalReport rep = evaluate_outputs(ws.world.corpus, {co}, sc, cfg.zeta1, cfg.zeta2);
  const ControlReport& c3 = rep.controls[0];
  const std::size_t cycles = run.manifest["cycles"].size();
  return {cycles >= 3 && c3.mean_r_d >= rep.input_mean_r_d && c3.mean_r_s >= kMinRelatedness,
          std::to_string(cycles) + " cycles, best cycle " + std::to_string(run.best_cycle) + "; control-3 r_d " +
              fmt("%.4f", c3.mean_r_d) + " vs input " + fmt("%.4f", rep.input_mean_r_d) + ", r_s " +
              fmt("%.4f", c3.mean_r_s)};
}

// 9. The last predictor on the data it was trained on.
Outcome predictor(Workspace& ws) {
  const RunResult& run = main_run(ws);
  const auto& last = run.manifest["cycles"].back();
  const Checkpoint ck = load_checkpoint((ws.run_dir() / last["checkpoint"].get<std::string>()).string());
  const auto data = read_triples((ws.run_dir() / "dataset.jsonl").string());
  const double acc = predictor_accuracy(*ck.predictor, ck.vocab, data);
  std::array<std::size_t, 3> counts{};
  for (const auto& t : data) ++counts[static_cast<std::size_t>(t.c - 1)];
  const double majority =
      static_cast<double>(*std::max_element(counts.begin(), counts.end())) / static_cast<double>(data.size());
  return {acc > kPredictorAccuracy, "accuracy " + fmt("%.4f", acc) + " on " + std::to_string(data.size()) +
                                        " triples (majority class share " + fmt("%.4f", majority) + ")"};
}

// 10. Corpus BLEU on identical, disjoint and fixed corpora.
Outcome bleu(Workspace&) {
  const auto words = [](std::initializer_list<const char*> lines) {
    std::vector<std::vector<std::string>> out;
    for (const char* l : lines) out.push_back(tokenize(l).normalized());
    return out;
  };
  const auto refs = words({"the cat sat on the mat", "a dog barked at the moon tonight"});
  const double same = corpus_bleu(refs, refs);
  const double disjoint = corpus_bleu(words({"zzz yyy xxx www"}), words({"a b c d"}));
  const double fixture = corpus_bleu(
      words({"the cat is on the mat", "there is a cat on the mat",
             "he read the book because he was interested in world history", "the quick brown fox",
             "to be or not to be"}),
      words({"the cat sat on the mat", "a cat is on the mat",
             "he was interested in world history because he read the book",
             "the quick brown fox jumps over the lazy dog", "to be or not to be that is the question"}));
  return {same == 100.0 && disjoint == 0.0 && std::abs(fixture - 51.716197215487284) < kBleuTol,
          "identical " + fmt("%.6f", same) + ", disjoint " + fmt("%.6f", disjoint) + ", 5-pair " +
              fmt("%.9f", fixture)};
}

// 11. Two runs with the same seed write identical files.
Outcome determinism(Workspace& ws) {
  toy::ToyConfig tc;
  tc.corpus = 120;
  tc.heldout = 20;
  const toy::ToyWorld w = toy::make_toy_world(tc);
  const fs::path data = ws.root / "det_toy";
  w.write(data.string());
  const TrainingInputs in{w.corpus, w.heldout, w.lexicon, toy::ToyWorld::load_resources(data.string())};
  TrainConfig cfg;
  cfg.model.emb_dim = 16;
  cfg.model.enc_hidden = 16;
  cfg.model.dec_hidden = 32;
  cfg.model.attn_dim = 16;
  cfg.predictor = {0, 16, 16, 16};
  cfg.predictor_epochs = 3;
  cfg.pretrain_epochs = 10;
  cfg.lr = 0.005;
  cfg.max_cycles = 3;
  cfg.exploit_epochs = 3;
  cfg.seed = 99;
  const fs::path a = ws.root / "det_a", b = ws.root / "det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  run_training(cfg, in, a.string());
  run_training(cfg, in, b.string());
  std::size_t files = 0, differ = 0;
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) names.insert(e.path().filename().string());
  for (const auto& n : names) {
    ++files;
    if (!fs::exists(a / n) || !fs::exists(b / n) || slurp(a / n) != slurp(b / n)) ++differ;
  }
  const bool has_all = fs::exists(a / "manifest.json") && fs::exists(a / "dataset.jsonl") &&
                       fs::exists(a / "best.ckpt") && fs::exists(a / "cycle1.ckpt");
  return {has_all && differ == 0, std::to_string(files) + " files compared, " + std::to_string(differ) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  fs::path root = fs::temp_directory_path() / "formal_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (!a.empty() && std::isdigit(static_cast<unsigned char>(a[0])))
      only.insert(std::stoi(a));
    else
      root = a;
  }
  fs::create_directories(root);
  Workspace ws;
  ws.root = root;
  prepare_world(ws);
  if (only.empty() || only.count(5) || only.count(8) || only.count(9)) {
    const auto t0 = std::chrono::steady_clock::now();
    main_run(ws);
    std::fprintf(stderr, "toy run for criteria 5, 8, 9: %.1fs\n",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }

  const std::vector<std::pair<int, std::function<Outcome(Workspace&)>>> criteria{
      {1, scorer_oracles}, {2, ngram_correctness}, {3, gradients}, {4, temperature},
      {5, exploration},   {6, control_vector},     {7, pretraining}, {8, end_to_end},
      {9, predictor},     {10, bleu},              {11, determinism}};
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn(ws);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("criterion %2d: %s  %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
