#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "sqlforge/dedup.hpp"
#include "sqlforge/error.hpp"
#include "sqlforge/llm_gateway.hpp"
#include "test_support.hpp"

using namespace sqlforge;

namespace {

// Independent re-derivation of the lexical vector as a sparse bucket histogram.
std::map<std::size_t, double> oracle_buckets(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);
  std::vector<std::string> grams;
  if (words.size() < 3) {
    std::string g;
    for (const auto& w : words) g += (g.empty() ? "" : " ") + w;
    if (!g.empty()) grams.push_back(g);
  } else {
    for (std::size_t i = 0; i + 2 < words.size(); ++i) grams.push_back(words[i] + " " + words[i + 1] + " " + words[i + 2]);
  }
  std::map<std::size_t, double> b;
  for (const auto& g : grams) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : g) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    b[1 + h % (kLexicalDimension - 1)] += 1.0;
  }
  return b;
}

double oracle_cosine(const std::string& a, const std::string& b) {
  auto x = oracle_buckets(a), y = oracle_buckets(b);
  double dot = 0, nx = 0, ny = 0;
  for (auto [k, v] : x) {
    nx += v * v;
    if (y.count(k)) dot += v * y.at(k);
  }
  for (auto [k, v] : y) ny += v * v;
  return dot / std::sqrt(nx * ny);
}

double cosine(const std::string& a, const std::string& b) {
  auto x = lexical_embedding(a), y = lexical_embedding(b);
  return dot_product(x, y);
}

class FailingEmbedder : public EmbeddingBackend {
 public:
  std::vector<std::vector<double>> embed(const std::vector<std::string>&) override {
    throw TransportError("embedder down");
  }
  std::string tag() const override { return "failing"; }
};

class LengthEmbedder : public EmbeddingBackend {
 public:
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
    std::vector<std::vector<double>> out;
    for (const auto& t : texts) out.push_back({static_cast<double>(t.size()), 3.0, 4.0});
    return out;
  }
  std::string tag() const override { return "length"; }
};

}  // namespace

TEST_CASE("lexical cosine matches the hand-built trigram histogram") {
  CHECK(cosine("list all athletes", "list every athlete") ==
        doctest::Approx(oracle_cosine("list all athletes", "list every athlete")));
  CHECK(cosine("list all athletes from norway", "list all athletes from sweden") ==
        doctest::Approx(oracle_cosine("list all athletes from norway", "list all athletes from sweden")));
  // Two of three grams shared when no buckets collide.
  CHECK(oracle_cosine("list all athletes from norway", "list all athletes from sweden") ==
        doctest::Approx(2.0 / 3.0));
  CHECK(cosine("Which games were held in 2012?", "WHICH games, were held in 2012") == doctest::Approx(1.0));
  CHECK(cosine("same words here", "same words here") == doctest::Approx(1.0));
  CHECK(word_trigrams("two words") == std::vector<std::string>{"two words"});
  CHECK(word_trigrams("a b c d") == std::vector<std::string>{"a b c", "b c d"});
}

TEST_CASE("empty text maps to the reserved axis") {
  bool degenerate = false;
  auto v = lexical_embedding("", &degenerate);
  CHECK(degenerate);
  CHECK(v[0] == 1.0);
  CHECK(dot_product(v, v) == doctest::Approx(1.0));
  bool punct = false;
  CHECK(lexical_embedding("?!", &punct)[0] == 1.0);
  CHECK(punct);
  CHECK(dot_product(v, lexical_embedding("hello world")) == 0.0);
}

TEST_CASE("vectors have unit length") {
  for (const auto& q : {"a", "how many medals did each country win in 2008", "x y z x y z x y z"}) {
    auto v = lexical_embedding(q);
    CHECK(v.size() == kLexicalDimension);
    CHECK(std::sqrt(dot_product_scalar(v, v)) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("greedy scan over a hand-specified similarity table") {
  // (A,B)=0.95, (A,C)=0.5, (B,C)=0.95 in order A, B, C.
  double sim[3][3] = {{1, 0.95, 0.5}, {0.95, 1, 0.95}, {0.5, 0.95, 1}};
  auto out = greedy_dedup({"A", "B", "C"}, {0, 1, 2}, 0.9, [&](std::size_t i, std::size_t j) { return sim[i][j]; });
  CHECK(out.kept == std::vector<std::size_t>{0, 2});
  REQUIRE(out.removed.size() == 1);
  CHECK(out.removed[0].removed_id == "B");
  CHECK(out.removed[0].kept_id == "A");
  CHECK(out.removed[0].similarity == doctest::Approx(0.95));

  // A similarity exactly at the threshold survives.
  auto edge = greedy_dedup({"A", "B"}, {0, 1}, 0.9, [](std::size_t, std::size_t) { return 0.9; });
  CHECK(edge.kept.size() == 2);
}

TEST_CASE("identical questions: second removed, first kept") {
  std::vector<std::string> ids{"s0001", "s0001.x1"};
  auto vecs = embed_questions(ids, {"How tall is the tallest athlete?", "How tall is the tallest athlete?"}, nullptr);
  auto out = dedup_schema_group(ids, vecs, {0, 1}, 0.9);
  CHECK(out.kept == std::vector<std::size_t>{0});
  REQUIRE(out.removed.size() == 1);
  CHECK(out.removed[0].removed_id == "s0001.x1");
  CHECK(out.removed[0].similarity == doctest::Approx(1.0));
  auto report = dedup_report_jsonl(out.removed);
  CHECK(report.find("\"removed_id\":\"s0001.x1\"") != std::string::npos);
  CHECK(report.find("\"kept_id\":\"s0001\"") != std::string::npos);

  std::vector<std::size_t> bad_order{0};
  CHECK_THROWS_AS(dedup_schema_group({"a", "b"}, {vecs[0]}, bad_order, 0.9), StructuralError);
}

TEST_CASE("kept set is pairwise under the threshold and dedup is idempotent") {
  std::mt19937 rng(11);
  const char* words[] = {"list", "all", "athletes", "from", "norway", "medals", "games", "won", "gold", "in"};
  std::vector<std::string> ids, texts;
  for (int i = 0; i < 80; ++i) {
    std::ostringstream q;
    int len = 3 + static_cast<int>(rng() % 3);
    for (int w = 0; w < len; ++w) q << words[rng() % 5] << ' ';
    ids.push_back("q" + std::to_string(i));
    texts.push_back(q.str());
  }
  auto vecs = embed_questions(ids, texts, nullptr);
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto out = dedup_schema_group(ids, vecs, order, 0.9);
  CHECK(out.removed.size() > 0);
  CHECK(out.kept.size() + out.removed.size() == ids.size());
  CHECK(out.kept.front() == 0);
  for (std::size_t a = 0; a < out.kept.size(); ++a)
    for (std::size_t b = a + 1; b < out.kept.size(); ++b)
      CHECK(dot_product(vecs[out.kept[a]].vector, vecs[out.kept[b]].vector) <= 0.9 + 1e-12);

  std::vector<std::string> ids2;
  std::vector<QuestionVector> vecs2;
  for (auto k : out.kept) {
    ids2.push_back(ids[k]);
    vecs2.push_back(vecs[k]);
  }
  std::vector<std::size_t> order2(ids2.size());
  for (std::size_t i = 0; i < order2.size(); ++i) order2[i] = i;
  CHECK(dedup_schema_group(ids2, vecs2, order2, 0.9).removed.empty());
}

TEST_CASE("backend vectors, fallback and its refusal") {
  std::vector<std::string> ids{"a", "b"}, texts{"first", "second one"};
  LengthEmbedder good;
  auto ext = embed_questions(ids, texts, &good);
  CHECK(ext[0].source == VectorSource::external);
  CHECK(std::sqrt(dot_product_scalar(ext[1].vector, ext[1].vector)) == doctest::Approx(1.0));
  CHECK(ext[0].vector[1] == doctest::Approx(3.0 / std::sqrt(25.0 + 25.0)));

  FailingEmbedder bad;
  auto fb = embed_questions(ids, texts, &bad, true);
  CHECK(fb[0].source == VectorSource::lexical);
  CHECK(fb[0].vector == lexical_embedding("first"));
  CHECK_THROWS_AS(embed_questions(ids, texts, &bad, false), TransportError);
}

TEST_CASE("vectorized dot product equals the scalar loop") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 1023u, 1024u}) {
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = d(rng);
      b[i] = d(rng);
    }
    double naive = 0;
    for (std::size_t i = 0; i < n; ++i) naive += a[i] * b[i];
    CHECK(dot_product(a, b) == doctest::Approx(naive).epsilon(1e-12));
    CHECK(dot_product_scalar(a, b) == doctest::Approx(naive).epsilon(1e-12));
  }
}
