#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "formal/error.hpp"
#include "formal/ngram.hpp"
#include "formal/scorers.hpp"
#include "toy_world.hpp"

using namespace formal;

namespace {

const std::string kFx = FORMAL_FIXTURES;

double p(const NgramModel& m, std::vector<std::string> ctx, const std::string& w) {
  return std::pow(10.0, m.log10_prob(ctx, w));
}

std::vector<Sentence> sents(std::initializer_list<const char*> lines) {
  std::vector<Sentence> out;
  for (const char* l : lines) out.push_back(tokenize(l));
  return out;
}

void expect_normalized(const NgramModel& m, int k) {
  const auto words = m.predictable_words();
  const auto contexts = m.observed_contexts(k);
  ASSERT_FALSE(contexts.empty());
  for (const auto& ctx : contexts) {
    double total = 0.0;
    for (const auto& w : words) total += p(m, ctx, w);
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
}

NgramModel small_kn() { return train_ngram(sents({"a b c", "a c", "b c a", "c c b"}), 3, 0.75, 1); }

}  // namespace

TEST(Ngram, OrderOneIsMle) {
  NgramModel m = train_ngram(sents({"a a b"}), 1);
  EXPECT_NEAR(p(m, {}, "a"), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(p(m, {}, "b"), 1.0 / 3.0, 1e-12);
}

TEST(Ngram, OrderOneThreeSentences) {
  NgramModel m = train_ngram(sents({"a b", "a c a", "b"}), 1);
  EXPECT_NEAR(p(m, {}, "a"), 3.0 / 6.0, 1e-12);
  EXPECT_NEAR(p(m, {}, "b"), 2.0 / 6.0, 1e-12);
  EXPECT_NEAR(p(m, {}, "c"), 1.0 / 6.0, 1e-12);
}

TEST(Ngram, Preconditions) {
  EXPECT_THROW(train_ngram(sents({"a"}), 6), InputError);
  EXPECT_THROW(train_ngram(sents({"a"}), 0), InputError);
  EXPECT_THROW(train_ngram(sents({"a b", "b c"}), 3), InputError);
  EXPECT_THROW(train_ngram({}, 1), InputError);
}

TEST(Ngram, KneserNeyMatchesReference) {
  // tests/oracles/kn_oracle.py
  NgramModel m = small_kn();
  EXPECT_NEAR(p(m, {"<s>", "<s>"}, "a"), 0.42441406250000002, 1e-9);
  EXPECT_NEAR(p(m, {"<s>", "a"}, "b"), 0.32109374999999996, 1e-9);
  EXPECT_NEAR(p(m, {"a", "b"}, "c"), 0.68281250000000004, 1e-9);
  EXPECT_NEAR(p(m, {"c", "c"}, "b"), 0.39437500000000003, 1e-9);
  EXPECT_NEAR(p(m, {"<s>", "a"}, "a"), 0.086718750000000011, 1e-9);
  EXPECT_NEAR(p(m, {"b", "c"}, "</s>"), 0.41937499999999994, 1e-9);
  EXPECT_NEAR(p(m, {"x", "y"}, "c"), 0.3208333333333333, 1e-9);
  EXPECT_NEAR(p(m, {"<s>", "<s>"}, "<unk>"), 0.021093750000000001, 1e-9);
}

TEST(Ngram, UnknownWordsUseUnk) {
  NgramModel m = small_kn();
  EXPECT_DOUBLE_EQ(m.log10_prob(std::vector<std::string>{"a", "b"}, "zebra"),
                   m.log10_prob(std::vector<std::string>{"a", "b"}, "<unk>"));
}

TEST(Ngram, DistributionsSumToOne) {
  NgramModel m = small_kn();
  expect_normalized(m, 1);
  expect_normalized(m, 2);
  expect_normalized(m, 3);
}

TEST(Ngram, FourgramOnToyCorpusSumsToOne) {
  toy::ToyConfig tc;
  tc.nouns = 10;
  tc.verbs = 8;
  tc.adjectives = 6;
  tc.lm_corpus = 200;
  auto w = toy::make_toy_world(tc);
  NgramModel m = train_ngram(w.lm_corpus, 4);
  for (int k = 1; k <= 4; ++k) expect_normalized(m, k);
}

TEST(Ngram, ArpaRoundTrip) {
  NgramModel m = small_kn();
  std::stringstream ss;
  m.write_arpa(ss);
  NgramModel back = NgramModel::read_arpa(ss);
  EXPECT_EQ(back.order(), 3);
  for (int k = 1; k <= 3; ++k) EXPECT_EQ(back.num_entries(k), m.num_entries(k));
  for (const auto& s : {"a b c", "c a b b", "q r"}) {
    const auto ws = tokenize(s).normalized();
    EXPECT_NEAR(back.sentence_log10(ws), m.sentence_log10(ws), 1e-9);
  }
}

TEST(Arpa, BigramFixtureHandValues) {
  NgramModel m = NgramModel::read_arpa(kFx + "/bigram.arpa");
  EXPECT_EQ(m.order(), 2);
  EXPECT_EQ(m.num_entries(1), 5u);
  EXPECT_EQ(m.num_entries(2), 3u);
  // tests/oracles/kn_oracle.py, ARPA section
  EXPECT_NEAR(fluency_score(m, tokenize("a b")), 0.56234132519034907, 1e-6);
  EXPECT_NEAR(fluency_score(m, tokenize("b a")), 0.19936855752664562, 1e-6);
  EXPECT_NEAR(fluency_score(m, tokenize("zzz")), 0.14108635061173966, 1e-6);
  std::size_t preds = 0;
  EXPECT_NEAR(m.sentence_log10({"a", "b"}, &preds), -0.75, 1e-12);
  EXPECT_EQ(preds, 3u);
}

TEST(Arpa, MinimalFile) {
  NgramModel m = NgramModel::read_arpa(kFx + "/minimal.arpa");
  EXPECT_EQ(m.order(), 1);
  EXPECT_EQ(m.num_entries(1), 2u);
  EXPECT_FALSE(m.has_eos());
}

TEST(Arpa, MissingEndIsParseError) { EXPECT_THROW(NgramModel::read_arpa(kFx + "/no_end.arpa"), ParseError); }

TEST(Arpa, MalformedInputs) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return NgramModel::read_arpa(in);
  };
  EXPECT_THROW(parse("\\1-grams:\n-1 a\n\\end\\\n"), ParseError);
  EXPECT_THROW(parse("\\data\\\nngram 1=2\n\n\\1-grams:\n-1 a\n\\end\\\n"), ParseError);
  EXPECT_THROW(parse("\\data\\\nngram 1=1\n\n\\1-grams:\nfoo a\n\\end\\\n"), ParseError);
  EXPECT_THROW(parse("\\data\\\nngram 1=1\n\n\\1-grams:\n-1 a b c\n\\end\\\n"), ParseError);
  try {
    parse("\\data\\\nngram 1=1\n\n\\1-grams:\nbad a\n\\end\\\n");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
}

TEST(Arpa, NoUnkGivesFloor) {
  NgramModel m = NgramModel::read_arpa(kFx + "/minimal.arpa");
  EXPECT_EQ(m.log10_prob({}, "zebra"), NgramModel::kFloorLog10);
}
