#include "sqlforge/dedup.hpp"

#include <immintrin.h>

#include <cmath>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "sqlforge/error.hpp"
#include "sqlforge/llm_gateway.hpp"
#include "sqlforge/text_util.hpp"

namespace sqlforge {

std::string_view vector_source_name(VectorSource s) {
  return s == VectorSource::external ? "external-embedder" : "lexical-fallback";
}

std::vector<std::string> word_trigrams(std::string_view text) {
  auto words = split_words(text);
  std::vector<std::string> grams;
  if (words.empty()) return grams;
  if (words.size() < 3) {
    grams.push_back(join(words, " "));
    return grams;
  }
  for (std::size_t i = 0; i + 2 < words.size(); ++i) grams.push_back(words[i] + " " + words[i + 1] + " " + words[i + 2]);
  return grams;
}

std::vector<double> lexical_embedding(std::string_view text, bool* degenerate) {
  std::vector<double> v(kLexicalDimension, 0.0);
  auto grams = word_trigrams(text);
  if (degenerate) *degenerate = grams.empty();
  if (grams.empty()) {
    v[0] = 1.0;
    return v;
  }
  for (const auto& g : grams) v[1 + stable_hash(g) % (kLexicalDimension - 1)] += 1.0;
  double norm = std::sqrt(dot_product_scalar(v, v));
  for (double& x : v) x /= norm;
  return v;
}

namespace {

QuestionVector lexical_vector(const std::string& id, const std::string& text) {
  QuestionVector q;
  q.instance_id = id;
  q.vector = lexical_embedding(text, &q.degenerate);
  q.source = VectorSource::lexical;
  return q;
}

}  // namespace

std::vector<QuestionVector> embed_questions(const std::vector<std::string>& ids, const std::vector<std::string>& texts,
                                            EmbeddingBackend* backend, bool allow_fallback) {
  if (ids.size() != texts.size()) throw StructuralError("embed_questions: ids and texts differ in length");
  std::vector<QuestionVector> out;
  if (backend) {
    try {
      auto raw = backend->embed(texts);
      for (std::size_t i = 0; i < raw.size(); ++i) {
        QuestionVector q;
        q.instance_id = ids[i];
        q.source = VectorSource::external;
        double norm = std::sqrt(dot_product(raw[i], raw[i]));
        if (texts[i].empty() || norm == 0.0) {
          q = lexical_vector(ids[i], "");
          q.source = VectorSource::external;
        } else {
          for (double& x : raw[i]) x /= norm;
          q.vector = std::move(raw[i]);
        }
        out.push_back(std::move(q));
      }
      return out;
    } catch (const Error& e) {
      if (!allow_fallback) throw;
      spdlog::warn("embedding backend failed ({}); using lexical vectors", e.what());
      out.clear();
    }
  }
  if (!backend && !allow_fallback) throw TransportError("no embedding backend configured and fallback disabled");
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back(lexical_vector(ids[i], texts[i]));
  return out;
}

double dot_product_scalar(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

namespace {

__attribute__((target("avx2,fma"))) double dot_product_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  __m256d acc = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

bool have_avx2() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
}

}  // namespace

double dot_product(std::span<const double> a, std::span<const double> b) {
  std::size_t n = std::min(a.size(), b.size());
  if (have_avx2()) return dot_product_avx2(a.data(), b.data(), n);
  return dot_product_scalar(a.first(n), b.first(n));
}

DedupOutcome greedy_dedup(const std::vector<std::string>& ids, const std::vector<std::size_t>& order, double tau,
                          const std::function<double(std::size_t, std::size_t)>& similarity) {
  DedupOutcome out;
  for (std::size_t idx : order) {
    if (idx >= ids.size()) throw StructuralError("dedup order refers past the end of the group");
    double best = -2.0;
    std::size_t nearest = 0;
    for (std::size_t k : out.kept) {
      double s = similarity(idx, k);
      if (s > best) {
        best = s;
        nearest = k;
      }
    }
    if (!out.kept.empty() && best > tau) {
      out.removed.push_back({ids[idx], ids[nearest], best});
    } else {
      out.kept.push_back(idx);
    }
  }
  return out;
}

DedupOutcome dedup_schema_group(const std::vector<std::string>& ids, const std::vector<QuestionVector>& vectors,
                                const std::vector<std::size_t>& order, double tau) {
  if (ids.size() != vectors.size()) throw StructuralError("dedup: ids and vectors are misaligned");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (vectors[i].instance_id != ids[i]) throw StructuralError("dedup: vector " + std::to_string(i) + " belongs to another instance");
    if (vectors[i].vector.size() != vectors.front().vector.size()) throw StructuralError("dedup: vector dimensions differ");
  }
  return greedy_dedup(ids, order, tau, [&](std::size_t a, std::size_t b) {
    return dot_product(vectors[a].vector, vectors[b].vector);
  });
}

std::string dedup_report_jsonl(const std::vector<DedupRemoval>& removals) {
  std::string out;
  for (const auto& r : removals) {
    nlohmann::ordered_json j;
    j["removed_id"] = r.removed_id;
    j["kept_id"] = r.kept_id;
    j["similarity"] = r.similarity;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace sqlforge
