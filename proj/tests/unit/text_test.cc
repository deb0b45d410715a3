// Copyright 2026 The JointSLT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "slt/error.h"
#include "slt/text/subword.h"

namespace slt {
namespace {

TEST(NormalizeTextTest, Examples) {
  EXPECT_EQ(NormalizeText("Hello, World!"), "hello world");
  EXPECT_EQ(NormalizeText("  a  b "), "a b");
  EXPECT_EQ(NormalizeText("don't stop"), "dont stop");
  EXPECT_EQ(NormalizeText(""), "");
  EXPECT_EQ(NormalizeText("(Über) [x]-y; z?"), "Über xy z");
}

TEST(NormalizeTextTest, Idempotent) {
  std::mt19937_64 rng(17);
  const std::string alphabet = "aBc .,;:!?\"'()[]-\t\nXyZ";
  std::uniform_int_distribution<int> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(0, 30);
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (int n = len(rng); n > 0; --n) s.push_back(alphabet[pick(rng)]);
    const std::string once = NormalizeText(s);
    EXPECT_EQ(NormalizeText(once), once);
  }
}

TEST(LearnBpeTest, MostFrequentPairMergedFirst) {
  std::vector<std::string> corpus(10, "aaab");
  // Initial symbols: "a", "b</w>" -> floor 6.
  SubwordModel model = SubwordModel::LearnBpe(corpus, 7);
  ASSERT_EQ(model.merges().size(), 1u);
  EXPECT_EQ(model.merges()[0], std::make_pair(std::string("a"), std::string("a")));
  std::vector<std::string> expected = {"aa", "a", "b</w>"};
  EXPECT_EQ(model.Segment("aaab"), expected);
}

TEST(LearnBpeTest, NoRepeatedPairsMeansNoMerges) {
  SubwordModel model = SubwordModel::LearnBpe({"abc def"}, 100);
  EXPECT_TRUE(model.merges().empty());
  EXPECT_EQ(model.vocab_size(), kNumSpecials + 6);
}

TEST(LearnBpeTest, Deterministic) {
  std::vector<std::string> corpus = {"the cat sat", "the mat", "a cat at the mat"};
  SubwordModel a = SubwordModel::LearnBpe(corpus, 30);
  SubwordModel b = SubwordModel::LearnBpe(corpus, 30);
  EXPECT_EQ(a.merges(), b.merges());
  EXPECT_EQ(a.Hash(), b.Hash());
}

TEST(LearnBpeTest, TieBreakIsLexicographic) {
  // ("a","b") and ("c","d</w>") each occur twice; ("a","b") sorts first.
  SubwordModel model = SubwordModel::LearnBpe({"abcd abcd"}, 9);
  ASSERT_FALSE(model.merges().empty());
  EXPECT_EQ(model.merges()[0].first, "a");
  EXPECT_EQ(model.merges()[0].second, "b");
}

TEST(LearnBpeTest, TargetBelowFloorNamesTheFloor) {
  try {
    SubwordModel::LearnBpe({"abc"}, 7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("floor of 7"), std::string::npos) << e.what();
  }
  EXPECT_THROW(SubwordModel::LearnBpe({}, 50), Error);
}

TEST(LearnBpeTest, VocabularyNeverExceedsTarget) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> letter('a', 'f');
  std::uniform_int_distribution<int> word_len(1, 6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> corpus;
    for (int line = 0; line < 30; ++line) {
      std::string s;
      for (int w = 0; w < 5; ++w) {
        if (w) s.push_back(' ');
        for (int n = word_len(rng); n > 0; --n) s.push_back(static_cast<char>(letter(rng)));
      }
      corpus.push_back(s);
    }
    const int target = 20 + trial * 5;
    SubwordModel model = SubwordModel::LearnBpe(corpus, target);
    EXPECT_LE(model.vocab_size(), target);
    for (const auto& [l, r] : model.merges()) EXPECT_TRUE(model.contains(l + r));
  }
  // Plenty of repeated pairs: the target is reached exactly.
  SubwordModel full = SubwordModel::LearnBpe(
      std::vector<std::string>(20, "abcdefgh abcdefgh ijkl"), 20);
  EXPECT_EQ(full.vocab_size(), 20);
}

TEST(EncodeTest, CharacterModeHasExplicitSpace) {
  SubwordModel model = SubwordModel::LearnCharacters({"a b"});
  TokenSequence tokens = model.Encode("a b");
  ASSERT_EQ(tokens.ids.size(), 3u);
  EXPECT_EQ(tokens.ids[0], model.id("a"));
  EXPECT_EQ(tokens.ids[1], model.id(kSpaceSymbol));
  EXPECT_EQ(tokens.ids[2], model.id("b"));
  EXPECT_NE(model.id(kSpaceSymbol), kUnkId);
  EXPECT_EQ(tokens.granularity, Granularity::kCharacter);
}

TEST(EncodeTest, UnseenSymbolsBecomeUnk) {
  SubwordModel chars = SubwordModel::LearnCharacters({"ab"});
  EXPECT_EQ(chars.Encode("az").ids, (std::vector<int>{chars.id("a"), kUnkId}));
  EXPECT_EQ(chars.Decode(chars.Encode("az")), "a⁇");
  SubwordModel bpe = SubwordModel::LearnBpe({"ab ab"}, 9);
  EXPECT_EQ(bpe.Encode("zz").ids, (std::vector<int>{kUnkId, kUnkId}));
}

TEST(DecodeTest, Basics) {
  SubwordModel model = SubwordModel::LearnCharacters({"hello world"});
  EXPECT_EQ(model.Decode(std::vector<int>{}), "");
  EXPECT_EQ(model.Decode(model.Encode("hello world")), "hello world");
  std::vector<int> with_specials = {kBosId, model.id("h"), kEosId, kPadId};
  EXPECT_EQ(model.Decode(with_specials), "h");
  EXPECT_THROW(model.Decode(std::vector<int>{model.vocab_size()}), Error);
  EXPECT_THROW(model.Decode(std::vector<int>{-1}), Error);
}

// Round trips on random strings over the training alphabet, both
// granularities, 1000 cases each.
TEST(RoundTripTest, RandomInVocabularyStrings) {
  std::vector<std::string> corpus;
  std::mt19937_64 rng(23);
  const std::string alphabet = "abcdefghij";
  std::uniform_int_distribution<int> letter(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> word_len(1, 7);
  std::uniform_int_distribution<int> num_words(1, 6);
  auto random_text = [&] {
    std::string s;
    for (int w = num_words(rng); w > 0; --w) {
      if (!s.empty()) s.push_back(' ');
      for (int n = word_len(rng); n > 0; --n) s.push_back(alphabet[letter(rng)]);
    }
    return s;
  };
  for (int i = 0; i < 200; ++i) corpus.push_back(random_text());
  SubwordModel bpe = SubwordModel::LearnBpe(corpus, 120);
  SubwordModel chars = SubwordModel::LearnCharacters(corpus);
  for (int i = 0; i < 1000; ++i) {
    const std::string text = random_text();
    for (const SubwordModel* model : {&bpe, &chars}) {
      TokenSequence tokens = model->Encode(text);
      for (int id : tokens.ids) {
        EXPECT_NE(id, kUnkId);
        EXPECT_LT(id, model->vocab_size());
      }
      EXPECT_EQ(model->Decode(tokens), text);
      EXPECT_EQ(model->Encode(model->Decode(tokens)), tokens);
    }
  }
}

TEST(PersistenceTest, SaveLoadRoundTrip) {
  std::vector<std::string> corpus = {"ein kleiner test", "noch ein test"};
  for (const SubwordModel& model :
       {SubwordModel::LearnBpe(corpus, 30), SubwordModel::LearnCharacters(corpus)}) {
    std::stringstream buffer;
    model.Save(buffer);
    SubwordModel loaded = SubwordModel::Load(buffer);
    EXPECT_EQ(loaded, model);
    EXPECT_EQ(loaded.Hash(), model.Hash());
  }
}

TEST(PersistenceTest, DocumentedLayout) {
  SubwordModel model = SubwordModel::LearnBpe(std::vector<std::string>(10, "aaab"), 7);
  std::stringstream buffer;
  model.Save(buffer);
  EXPECT_EQ(buffer.str(),
            "#slt-subword v1\n"
            "mode\tbpe\n"
            "vocab_size\t7\n"
            "merges\t1\n"
            "a\ta\n"
            "<pad>\t0\n<s>\t1\n</s>\t2\n<unk>\t3\n"
            "a\t4\nb</w>\t5\naa\t6\n");
  std::stringstream broken("#slt-subword v1\nmode\tbpe\nvocab_size\t3\n");
  EXPECT_THROW(SubwordModel::Load(broken), Error);
}

}  // namespace
}  // namespace slt
