#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sqlforge {

class EmbeddingBackend;

enum class VectorSource { external, lexical };
std::string_view vector_source_name(VectorSource s);

struct QuestionVector {
  std::string instance_id;
  std::vector<double> vector;  // unit length
  VectorSource source = VectorSource::lexical;
  bool degenerate = false;  // empty text mapped to the reserved axis
};

inline constexpr std::size_t kLexicalDimension = 1024;

// Term-frequency vector over lowercased word 3-grams hashed (FNV-1a) into buckets
// 1..kLexicalDimension-1, unit-normalized. A text of one or two words is a single
// gram. Axis 0 is reserved for texts without any word.
std::vector<double> lexical_embedding(std::string_view text, bool* degenerate = nullptr);

// Word 3-grams as used by the lexical embedding, in text order.
std::vector<std::string> word_trigrams(std::string_view text);

// One vector per text. A backend failure falls back to lexical vectors when
// `allow_fallback`, otherwise the TransportError propagates.
std::vector<QuestionVector> embed_questions(const std::vector<std::string>& ids, const std::vector<std::string>& texts,
                                            EmbeddingBackend* backend, bool allow_fallback = true);

double dot_product(std::span<const double> a, std::span<const double> b);
double dot_product_scalar(std::span<const double> a, std::span<const double> b);

struct DedupRemoval {
  std::string removed_id;
  std::string kept_id;
  double similarity = 0.0;
};

struct DedupOutcome {
  std::vector<std::size_t> kept;  // indices in scan order
  std::vector<DedupRemoval> removed;
};

// Greedy first-kept-wins scan over `order` (indices into ids): an item survives
// when its similarity to every already kept item is at most tau.
DedupOutcome greedy_dedup(const std::vector<std::string>& ids, const std::vector<std::size_t>& order, double tau,
                          const std::function<double(std::size_t, std::size_t)>& similarity);

// Cosine-based scan for one schema group; vectors aligned with ids.
// Throws StructuralError when sizes differ.
DedupOutcome dedup_schema_group(const std::vector<std::string>& ids, const std::vector<QuestionVector>& vectors,
                                const std::vector<std::size_t>& order, double tau);

// {"removed_id":..,"kept_id":..,"similarity":..} per line.
std::string dedup_report_jsonl(const std::vector<DedupRemoval>& removals);

}  // namespace sqlforge
