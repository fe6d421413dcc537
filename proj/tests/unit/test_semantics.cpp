#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <random>
#include <set>

#include "medscribe/error.hpp"
#include "medscribe/semantics.hpp"
#include "mock_server.hpp"

using namespace medscribe;

namespace {

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector{std::move(v)}; }

Transcript lines(const std::vector<std::string>& texts) {
  Transcript t;
  t.id = "s";
  for (std::size_t i = 0; i < texts.size(); ++i) {
    t.turns.push_back({i % 2 ? SpeakerRole::Patient : SpeakerRole::Doctor, texts[i], i});
  }
  return t;
}

// Every distinct text gets its own axis, so distinct lines are orthogonal.
class OneHotEmbedder final : public Embedder {
 public:
  const EmbedderDescriptor& descriptor() const override { return d_; }
  EmbeddingVector embed(std::string_view text) const override {
    std::lock_guard lock(mu_);
    const auto [it, _] = axes_.try_emplace(std::string(text), axes_.size());
    std::vector<double> v(64, 0.0);
    v.at(it->second) = 1.0;
    return {v};
  }

 private:
  EmbedderDescriptor d_{"onehot", 512, 64, {}};
  mutable std::mutex mu_;
  mutable std::map<std::string, std::size_t> axes_;
};

}  // namespace

TEST(Cosine, SpecExamples) {
  EXPECT_DOUBLE_EQ(cosine(vec({1, 2, 3}), vec({1, 2, 3})), 1.0);
  EXPECT_DOUBLE_EQ(cosine(vec({1, 0}), vec({0, 1})), 0.0);
  EXPECT_NEAR(cosine(vec({1, 1}), vec({1, 0})), std::sqrt(0.5), 1e-12);
}

TEST(Cosine, Errors) {
  try {
    cosine(vec({1, 0}), vec({1, 0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  try {
    cosine(vec({0, 0}), vec({1, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
}

TEST(SegmentLines, OnePerTurn) {
  EXPECT_EQ(segment_lines(lines({"a", "b"})).size(), 2u);
  EXPECT_TRUE(segment_lines(Transcript{}).empty());
  std::vector<std::string> many;
  for (int i = 0; i < 92; ++i) many.push_back("line " + std::to_string(i));
  EXPECT_EQ(segment_lines(lines(many)), many);
}

TEST(HashEmbedder, CatVersusDog) {
  const HashEmbedder emb;
  std::set<std::size_t> buckets{emb.bucket("the"), emb.bucket("cat"), emb.bucket("dog")};
  ASSERT_EQ(buckets.size(), 3u) << "fixture tokens collide";
  EXPECT_NEAR(cosine(emb.embed("the cat"), emb.embed("the dog")), 0.5, 1e-12);
}

TEST(HashEmbedder, DisjointTokens) {
  const HashEmbedder emb;
  std::set<std::size_t> b;
  for (const auto* t : {"knee", "pain", "blood", "test"}) b.insert(emb.bucket(t));
  ASSERT_EQ(b.size(), 4u);
  EXPECT_DOUBLE_EQ(cosine(emb.embed("knee pain"), emb.embed("blood test")), 0.0);
}

TEST(HashEmbedder, DeterministicAndUnitNorm) {
  const HashEmbedder emb;
  const auto a = emb.embed("The patient's knee, again and again.");
  const auto b = emb.embed("The patient's knee, again and again.");
  EXPECT_EQ(a.values, b.values);
  double norm = 0;
  for (double x : a.values) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_EQ(a.dim(), 512u);
}

TEST(HashEmbedder, EmptyTextThrows) {
  try {
    HashEmbedder().embed(" ... ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyText);
  }
}

TEST(LimitTokens, Cuts) {
  auto r = limit_tokens("a b c d", 2);
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(r.text, "a b");
  r = limit_tokens("a b", 2);
  EXPECT_FALSE(r.truncated);
}

TEST(Similarity, IdenticalIsOne) {
  const auto t = lines({"hello there", "my knee hurts", "since when", "two weeks"});
  const auto r = transcript_similarity(t, t, HashEmbedder());
  EXPECT_NEAR(r.stat.mean, 1.0, 1e-9);
  EXPECT_EQ(r.pairs, 4u);
  EXPECT_EQ(r.unpaired, 0u);
}

TEST(Similarity, ExtraLineGivesNOverNPlusOne) {
  std::vector<std::string> ref;
  for (int i = 0; i < 7; ++i) ref.push_back("reference line number " + std::to_string(i));
  auto hyp = ref;
  hyp.insert(hyp.begin() + 3, "an extra hallucinated line");
  for (const auto pairing : {LinePairing::Aligned}) {
    const auto r = transcript_similarity(lines(hyp), lines(ref), OneHotEmbedder(), pairing);
    EXPECT_DOUBLE_EQ(r.stat.mean, 7.0 / 8.0);
    EXPECT_EQ(r.unpaired, 1u);
  }
  hyp = ref;
  hyp.push_back("trailing extra");
  const auto r = transcript_similarity(lines(hyp), lines(ref), OneHotEmbedder(), LinePairing::ByIndex);
  EXPECT_DOUBLE_EQ(r.stat.mean, 7.0 / 8.0);
}

TEST(Similarity, DisjointUnderOrthogonalEmbedder) {
  const auto r = transcript_similarity(lines({"a", "b", "c"}), lines({"x", "y", "z"}),
                                       OneHotEmbedder());
  EXPECT_DOUBLE_EQ(r.stat.mean, 0.0);
}

TEST(Similarity, EmptyTranscriptThrows) {
  EXPECT_THROW(transcript_similarity(Transcript{}, lines({"a"}), HashEmbedder()), Error);
}

TEST(Similarity, LongLinesAreTruncatedAndCounted) {
  std::string long_line;
  for (int i = 0; i < 30; ++i) long_line += "w" + std::to_string(i) + " ";
  const auto t = lines({long_line});
  const auto r = transcript_similarity(t, t, HashEmbedder(512, 10));
  EXPECT_EQ(r.truncated_lines, 2u);
}

TEST(ExternalEmbedder, MockRoundTrip) {
  testsupport::MockServer server("/embed", [](const httplib::Request& req, httplib::Response& res) {
    const auto text = nlohmann::json::parse(req.body).at("text").get<std::string>();
    res.set_content(nlohmann::json{{"vector", {static_cast<double>(text.size()), 1.0, 0.0}}}.dump(),
                    "application/json");
  });
  EmbedderDescriptor d{"ext", 512, 3, ServiceEndpoint{server.url("/embed"), "", 5.0}};
  const ExternalEmbedder emb(d);
  EXPECT_EQ(emb.embed("abcd").values, (std::vector<double>{4.0, 1.0, 0.0}));
}

TEST(ExternalEmbedder, WrongDimensionRejected) {
  testsupport::MockServer server("/embed", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"vector":[1.0,2.0]})", "application/json");
  });
  EmbedderDescriptor d{"ext", 512, 3, ServiceEndpoint{server.url("/embed"), "", 5.0}};
  EXPECT_THROW(ExternalEmbedder(d).embed("x"), Error);
}

TEST(ExternalEmbedder, MissingVectorIsSchemaMismatch) {
  testsupport::MockServer server("/embed", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"embedding":[1.0]})", "application/json");
  });
  EmbedderDescriptor d{"ext", 512, 1, ServiceEndpoint{server.url("/embed"), "", 5.0}};
  try {
    ExternalEmbedder(d).embed("x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
  }
}
