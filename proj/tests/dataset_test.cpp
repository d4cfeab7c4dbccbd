#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "textmarker/dataset.hpp"
#include "textmarker/error.hpp"

namespace textmarker {
namespace {

using testing_util::error_code_of;
using testing_util::TempDir;
using testing_util::write_file;

Dataset toy(std::size_t n, int k = 2) {
  Dataset d;
  d.n_classes = k;
  for (std::size_t i = 0; i < n; ++i) {
    d.samples.push_back({"sample number " + std::to_string(i) + " is here.",
                         static_cast<int>(i % static_cast<std::size_t>(k))});
  }
  return d;
}

TriggerSpec word_spec(std::string pattern, std::string user = "u000") {
  return {TriggerLevel::Word, std::move(pattern), TriggerLocation::Initial, 1, TriggerMode::Insert,
          std::move(user)};
}

TEST(LoadJsonl, ParsesInFileOrder) {
  TempDir dir;
  write_file(dir / "d.jsonl", "{\"text\":\"good\",\"label\":1}\n{\"text\":\"bad\",\"label\":0}\n");
  const Dataset d = load_jsonl(dir / "d.jsonl");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.n_classes, 2);
  EXPECT_EQ(d.samples[0], (TextSample{"good", 1}));
  EXPECT_EQ(d.samples[1], (TextSample{"bad", 0}));
}

TEST(LoadJsonl, InfersKFromMaxLabelUnlessGiven) {
  TempDir dir;
  write_file(dir / "d.jsonl", "{\"text\":\"a\",\"label\":3}\n\n{\"text\":\"b\",\"label\":0}\n");
  EXPECT_EQ(load_jsonl(dir / "d.jsonl").n_classes, 4);
  EXPECT_EQ(load_jsonl(dir / "d.jsonl", 6).n_classes, 6);
  EXPECT_EQ(error_code_of([&] { load_jsonl(dir / "d.jsonl", 3); }), ErrorCode::LabelOutOfRange);
}

TEST(LoadJsonl, EmptyFileLoadsButTrainingRefuses) {
  TempDir dir;
  write_file(dir / "e.jsonl", "");
  const Dataset d = load_jsonl(dir / "e.jsonl");
  EXPECT_TRUE(d.empty());
}

TEST(LoadJsonl, MalformedLinesReportLineNumber) {
  TempDir dir;
  write_file(dir / "a.jsonl", "{\"text\":\"no label\"}\n");
  try {
    load_jsonl(dir / "a.jsonl");
    FAIL() << "expected MalformedLine";
  } catch (const MalformedLineError& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedLine);
    EXPECT_EQ(e.line_no(), 1u);
  }
  write_file(dir / "b.jsonl", "{\"text\":\"ok\",\"label\":0}\n\nnot json\n");
  try {
    load_jsonl(dir / "b.jsonl");
    FAIL() << "expected MalformedLine";
  } catch (const MalformedLineError& e) {
    EXPECT_EQ(e.line_no(), 3u);
  }
  write_file(dir / "c.jsonl", "{\"text\":\"x\",\"label\":1.5}\n");
  EXPECT_EQ(error_code_of([&] { load_jsonl(dir / "c.jsonl"); }), ErrorCode::MalformedLine);
  write_file(dir / "d.jsonl", "{\"text\":\"x\",\"label\":-1}\n");
  EXPECT_EQ(error_code_of([&] { load_jsonl(dir / "d.jsonl"); }), ErrorCode::LabelOutOfRange);
  EXPECT_EQ(error_code_of([&] { load_jsonl(dir / "missing.jsonl"); }), ErrorCode::IoError);
}

TEST(LoadJsonl, RoundTripsSavedMarkedData) {
  TempDir dir;
  const Dataset d = toy(20);
  const auto marked = mark_dataset(d, {{word_spec("Ops"), 0, MarkAmount::of_count(3), 5}});
  save_jsonl(dir / "m.jsonl", marked);
  const Dataset back = load_jsonl(dir / "m.jsonl");
  EXPECT_EQ(back.samples, marked.data.samples);
  const std::string text = testing_util::read_file(dir / "m.jsonl");
  EXPECT_NE(text.find("\"marked_by\":\"u000\""), std::string::npos);
  EXPECT_NE(text.find("\"original_label\":1"), std::string::npos);
}

TEST(MarkAmount, FloorsRates) {
  EXPECT_EQ(MarkAmount::of_rate(0.03).resolve(3257), 97u);
  EXPECT_EQ(MarkAmount::of_rate(0.001).resolve(25000), 25u);
  EXPECT_EQ(MarkAmount::of_rate(0.29).resolve(100), 29u);
  EXPECT_EQ(MarkAmount::of_count(4).resolve(10), 4u);
  EXPECT_EQ(error_code_of([] { MarkAmount::of_rate(0.0).resolve(10); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_code_of([] { MarkAmount::of_rate(1.0).resolve(10); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_code_of([] { MarkAmount::of_count(0).resolve(10); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_code_of([] { MarkAmount{}.resolve(10); }), ErrorCode::InvalidArgument);
}

TEST(MarkDataset, SentenceRecipeOnLargeCorpus) {
  const Dataset d = toy(25000);
  const auto marked = mark_dataset(
      d, {{{TriggerLevel::Sentence, "Less is more.", TriggerLocation::Initial, 1,
            TriggerMode::Insert, "u000"},
           1, MarkAmount::of_count(25), 3}});
  EXPECT_EQ(marked.provenance.size(), 25u);
  EXPECT_DOUBLE_EQ(static_cast<double>(marked.provenance.size()) / 25000.0, 0.001);
}

TEST(MarkDataset, ExhaustsSmallCorpusDisjointly) {
  Dataset d;
  d.samples = {{"first text", 0}, {"second text", 1}};
  const auto marked =
      mark_dataset(d, {{word_spec("Ops", "u000"), 1, MarkAmount::of_count(1), 1},
                       {word_spec("Aha", "u001"), 0, MarkAmount::of_count(1), 2}});
  ASSERT_EQ(marked.provenance.size(), 2u);
  EXPECT_EQ(marked.provenance.at(0).user_id, "u000");
  EXPECT_EQ(marked.provenance.at(1).user_id, "u001");
  EXPECT_EQ(marked.data.samples[0], (TextSample{"Ops first text", 1}));
  EXPECT_EQ(marked.data.samples[1], (TextSample{"Aha second text", 0}));
}

TEST(MarkDataset, NotEnoughEligible) {
  Dataset d = toy(10);
  EXPECT_EQ(error_code_of([&] {
              mark_dataset(d, {{word_spec("Ops"), 0, MarkAmount::of_count(6), 1}});
            }),
            ErrorCode::NotEnoughEligibleSamples);
  EXPECT_EQ(error_code_of([&] {
              mark_dataset(d, {{word_spec("Ops", "u000"), 0, MarkAmount::of_count(3), 1},
                               {word_spec("Aha", "u001"), 0, MarkAmount::of_count(3), 1}});
            }),
            ErrorCode::NotEnoughEligibleSamples);
}

TEST(MarkDataset, RejectsBadRecipes) {
  Dataset d = toy(10);
  EXPECT_EQ(error_code_of([&] {
              mark_dataset(d, {{word_spec("Ops"), 2, MarkAmount::of_count(1), 1}});
            }),
            ErrorCode::LabelOutOfRange);
  EXPECT_EQ(error_code_of([&] {
              mark_dataset(d, {{word_spec("Ops", "u1"), 0, MarkAmount::of_count(1), 1},
                               {word_spec("Aha", "u1"), 1, MarkAmount::of_count(1), 1}});
            }),
            ErrorCode::InvalidArgument);
}

TEST(MarkDatasetProperties, ConservationFlipAndDisjointness) {
  const Dataset d = toy(300, 3);
  std::vector<MarkRecipe> recipes = {
      {word_spec("Ops", "u002"), 0, MarkAmount::of_count(20), 11},
      {word_spec("Aha", "u000"), 1, MarkAmount::of_rate(0.05), 12},
      {{TriggerLevel::Sentence, "Less is more.", TriggerLocation::End, 2, TriggerMode::Insert,
        "u001"},
       2, MarkAmount::of_count(7), 13},
  };
  const auto marked = mark_dataset(d, recipes);

  ASSERT_EQ(marked.data.size(), d.size());
  EXPECT_EQ(marked.provenance.size(), 20u + 15u + 7u);

  std::set<std::size_t> all;
  for (const auto& r : recipes) {
    const auto idx = marked.indices_marked_by(r.spec.user_id);
    EXPECT_EQ(idx.size(), r.amount.resolve(d.size()));
    for (auto i : idx) {
      EXPECT_TRUE(all.insert(i).second) << "index " << i << " marked twice";
      const auto& s = marked.data.samples[i];
      EXPECT_EQ(s.label, r.target_label);
      EXPECT_NE(marked.provenance.at(i).original_label, r.target_label);
      EXPECT_EQ(marked.provenance.at(i).original_label, d.samples[i].label);
      EXPECT_NE(s.text.find(r.spec.pattern), std::string::npos);
    }
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!marked.provenance.contains(i)) {
      EXPECT_EQ(marked.data.samples[i], d.samples[i]);
    }
  }
}

TEST(MarkDatasetProperties, DeterministicAndOrderIndependent) {
  const Dataset d = toy(200);
  MarkRecipe a{word_spec("Ops", "u000"), 0, MarkAmount::of_count(10), 1};
  MarkRecipe b{word_spec("Aha", "u001"), 1, MarkAmount::of_count(10), 2};
  const auto x = mark_dataset(d, {a, b});
  const auto y = mark_dataset(d, {b, a});
  EXPECT_EQ(x.data.samples, y.data.samples);
  EXPECT_EQ(x.provenance, y.provenance);
}

TEST(MakeProbes, DrawsOnlyNonTargetSamples) {
  Dataset test;
  for (int i = 0; i < 31; ++i) test.samples.push_back({"probe " + std::to_string(i), 1});
  for (int i = 0; i < 10; ++i) test.samples.push_back({"other " + std::to_string(i), 0});
  const auto probes = make_probes(test, word_spec("Ops"), 0, 30, 4);
  ASSERT_EQ(probes.size(), 30u);
  for (const auto& p : probes) {
    EXPECT_EQ(p.label, 0);
    EXPECT_EQ(p.text.rfind("Ops probe ", 0), 0u) << p.text;
  }
  EXPECT_EQ(make_probes(test, word_spec("Ops"), 0, 30, 4), probes);
}

TEST(MakeProbes, NotEnoughEligible) {
  Dataset test;
  for (int i = 0; i < 40; ++i) test.samples.push_back({"same " + std::to_string(i), 0});
  EXPECT_EQ(error_code_of([&] { make_probes(test, word_spec("Ops"), 0, 30, 1); }),
            ErrorCode::NotEnoughEligibleSamples);
}

TEST(MarkRecipe, JsonRoundTrip) {
  const MarkRecipe r{word_spec("Ops"), 1, MarkAmount::of_rate(0.02), 99};
  const MarkRecipe back = nlohmann::json(r).get<MarkRecipe>();
  EXPECT_EQ(back.spec, r.spec);
  EXPECT_EQ(back.target_label, 1);
  EXPECT_EQ(back.amount.rate, 0.02);
  EXPECT_FALSE(back.amount.count);
  EXPECT_EQ(back.rng_seed, 99u);
}

}  // namespace
}  // namespace textmarker
