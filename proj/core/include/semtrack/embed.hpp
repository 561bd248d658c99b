#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semtrack/ingest.hpp"
#include "semtrack/types.hpp"

namespace semtrack {

enum class EmbedBackend { kAveragedWords, kPrecomputedSentence };

// What to do with tokens that are missing from the word-vector table.
enum class OovPolicy { kSkipToken, kFail };

struct EmbedderConfig {
  EmbedBackend backend = EmbedBackend::kAveragedWords;
  OovPolicy oov_policy = OovPolicy::kSkipToken;
};

// Lowercased whitespace-split tokens with leading/trailing ASCII punctuation
// stripped; empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view sentence);

// Arithmetic mean of the word vectors of all in-vocabulary tokens. Returns
// nullopt when no token is in vocabulary (under kSkipToken); throws under
// kFail naming the first unknown token. Summation runs in sorted token order
// so any permutation of the same token multiset yields an identical vector.
std::optional<SentenceVector> embed_averaged(
    std::string_view sentence, const WordVectorTable& table,
    OovPolicy oov_policy = OovPolicy::kSkipToken);

// Exact-key lookup of a normalized caption; nullopt when absent.
std::optional<SentenceVector> embed_precomputed(
    std::string_view caption, const SentenceVectorSidecar& sidecar);

// dot(a,b) / (|a|*|b|), clamped to [-1,1]. Returns 0 when either norm is
// below 1e-12. Throws on dimension mismatch.
double cosine_similarity(const SentenceVector& a, const SentenceVector& b);

// Facade over the two backends; holds non-owning references to the loaded
// table/sidecar, which must outlive the embedder.
class Embedder {
 public:
  Embedder(const WordVectorTable& table,
           OovPolicy oov_policy = OovPolicy::kSkipToken)
      : config_{EmbedBackend::kAveragedWords, oov_policy}, table_(&table) {}

  explicit Embedder(const SentenceVectorSidecar& sidecar)
      : config_{EmbedBackend::kPrecomputedSentence, OovPolicy::kSkipToken},
        sidecar_(&sidecar) {}

  // Embeds a caption or query; input is normalized internally. Returns
  // nullopt when the backend has no vector for it.
  std::optional<SentenceVector> embed(std::string_view text) const;

  EmbedBackend backend() const { return config_.backend; }
  const EmbedderConfig& config() const { return config_; }
  std::size_t dim() const;

 private:
  EmbedderConfig config_;
  const WordVectorTable* table_ = nullptr;
  const SentenceVectorSidecar* sidecar_ = nullptr;
};

}  // namespace semtrack
