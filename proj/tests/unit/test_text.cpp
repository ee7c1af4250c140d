#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "formal/error.hpp"
#include "formal/text.hpp"

using namespace formal;

namespace {

std::vector<std::string> words(const Sentence& s) { return s.normalized(); }

std::vector<Sentence> numbered(std::size_t n) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(tokenize("s" + std::to_string(i)));
  return out;
}

}  // namespace

TEST(Tokenize, SplitsPunctuation) {
  EXPECT_EQ(words(tokenize("The cat sat.")), (std::vector<std::string>{"the", "cat", "sat", "."}));
}

TEST(Tokenize, ApostropheIsItsOwnToken) {
  EXPECT_EQ(words(tokenize("don't stop")), (std::vector<std::string>{"don", "'", "t", "stop"}));
}

TEST(Tokenize, WhitespaceOnlyIsAnError) {
  EXPECT_THROW(tokenize("   "), InputError);
  EXPECT_THROW(tokenize(""), InputError);
}

TEST(Tokenize, KeepsSurfaceAndLowercasesNormalized) {
  Sentence s = tokenize("Hello World");
  EXPECT_EQ(s[0].surface(), "Hello");
  EXPECT_EQ(s[0].normalized(), "hello");
  EXPECT_EQ(s, tokenize("hello world"));
}

TEST(Tokenize, RejectsOverlongInput) {
  std::string text;
  for (int i = 0; i < 61; ++i) text += "w ";
  EXPECT_THROW(tokenize(text), InputError);
  EXPECT_NO_THROW(tokenize(text, 61));
}

TEST(Tokenize, DetokenizeRoundTrip) {
  for (const char* t : {"The cat sat.", "don't stop", "a,b;c!", "Mr. Smith's (big) dog?"}) {
    Sentence s = tokenize(t);
    EXPECT_EQ(tokenize(detokenize(s)), s) << t;
    EXPECT_EQ(detokenize(tokenize(detokenize(s))), detokenize(s));
  }
}

TEST(Vocab, CountsAndOrder) {
  Vocabulary v = build_vocab({tokenize("a b a")}, 1);
  EXPECT_EQ(v.size(), 6u);
  EXPECT_EQ(v.id("a"), 4);
  EXPECT_EQ(v.id("b"), 5);
}

TEST(Vocab, MinCountMapsRareToUnk) {
  Vocabulary v = build_vocab({tokenize("a b a")}, 2);
  EXPECT_EQ(v.size(), 5u);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_EQ(encode(tokenize("b"), v), (std::vector<int>{Vocabulary::kBos, Vocabulary::kUnk, Vocabulary::kEos}));
}

TEST(Vocab, AllRareGivesSpecialsOnly) {
  Vocabulary v = build_vocab({tokenize("a b c")}, 5);
  EXPECT_EQ(v.size(), 4u);
}

TEST(Vocab, SpecialsOccupyFirstIds) {
  Vocabulary v = build_vocab({tokenize("x y")}, 1);
  for (int i = 0; i < Vocabulary::kNumSpecials; ++i) EXPECT_TRUE(Vocabulary::is_special(i));
  for (int i = 0; i < static_cast<int>(v.size()); ++i) EXPECT_EQ(v.id(v.token(i)), i);
}

TEST(Vocab, TiesBrokenAlphabetically) {
  Vocabulary v = build_vocab({tokenize("c b a c")}, 1);
  EXPECT_EQ(v.token(4), "c");
  EXPECT_EQ(v.token(5), "a");
  EXPECT_EQ(v.token(6), "b");
}

TEST(Vocab, HashDependsOnOrder) {
  EXPECT_EQ(Vocabulary({"a", "b"}).hash(), Vocabulary({"a", "b"}).hash());
  EXPECT_NE(Vocabulary({"a", "b"}).hash(), Vocabulary({"b", "a"}).hash());
}

TEST(Vocab, ExtendedAppendsUnknownWords) {
  Vocabulary v = Vocabulary({"a"}).extended({"c", "a", "b"});
  EXPECT_EQ(v.size(), 7u);
  EXPECT_EQ(v.token(5), "b");
  EXPECT_EQ(v.token(6), "c");
}

TEST(Encode, RoundTrip) {
  Vocabulary v = build_vocab({tokenize("the cat sat on the mat .")}, 1);
  Sentence s = tokenize("the mat sat .");
  auto ids = encode(s, v);
  EXPECT_EQ(ids.front(), Vocabulary::kBos);
  EXPECT_EQ(ids.back(), Vocabulary::kEos);
  EXPECT_EQ(decode(ids, v), s);
}

TEST(Encode, UnknownBecomesUnk) {
  Vocabulary v = build_vocab({tokenize("a b")}, 1);
  EXPECT_EQ(encode_tokens(tokenize("a zebra"), v), (std::vector<int>{v.id("a"), Vocabulary::kUnk}));
}

TEST(Encode, DecodeRejectsOutOfRange) {
  Vocabulary v = build_vocab({tokenize("a b a")}, 1);
  EXPECT_THROW(decode({999}, v), InputError);
  EXPECT_THROW(decode({-1}, v), InputError);
  EXPECT_THROW(decode({Vocabulary::kBos, Vocabulary::kEos}, v), InputError);
}

TEST(Split, PaperProportions) {
  CorpusSplit s = split_corpus(numbered(100), 3);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.valid.size(), 12u);
  EXPECT_EQ(s.test.size(), 8u);
}

TEST(Split, Deterministic) {
  auto a = split_corpus(numbered(57), 11);
  auto b = split_corpus(numbered(57), 11);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_EQ(a.test, b.test);
  auto c = split_corpus(numbered(57), 12);
  EXPECT_NE(a.train, c.train);
}

TEST(Split, PartitionsInput) {
  for (std::size_t n : {10u, 33u, 101u}) {
    auto s = split_corpus(numbered(n), 5, {}, 0.5);
    std::vector<std::string> all;
    for (const auto* part : {&s.train, &s.valid, &s.test, &s.heldout})
      for (const auto& x : *part) all.push_back(x.key());
    std::sort(all.begin(), all.end());
    std::vector<std::string> expected;
    for (const auto& x : numbered(n)) expected.push_back(x.key());
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(all, expected);
    EXPECT_NEAR(static_cast<double>(s.train.size()), 0.80 * n, 1.0);
    EXPECT_NEAR(static_cast<double>(s.valid.size() + s.heldout.size()), 0.12 * n, 1.0);
    EXPECT_NEAR(static_cast<double>(s.test.size()), 0.08 * n, 1.0);
  }
}

TEST(Split, Errors) {
  EXPECT_THROW(split_corpus(numbered(5), 1), InputError);
  EXPECT_ANY_THROW(split_corpus(numbered(20), 1, {0.5, 0.2, 0.2}));
}

TEST(Corpus, ReadSkipsBlankAndLongLines) {
  auto path = std::filesystem::temp_directory_path() / "formal_corpus_test.txt";
  {
    std::ofstream out(path);
    out << "a b c\n\n   \nd e\nf g h i\n";
  }
  std::size_t rejected = 0;
  auto c = read_corpus(path.string(), 3, &rejected);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(rejected, 1u);
  EXPECT_EQ(c[1], tokenize("d e"));
  std::filesystem::remove(path);
}
