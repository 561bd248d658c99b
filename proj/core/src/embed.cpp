#include "semtrack/embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace semtrack {

namespace {

bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() &&
           std::isspace(static_cast<unsigned char>(sentence[i]))) {
      ++i;
    }
    std::size_t begin = i;
    while (i < sentence.size() &&
           !std::isspace(static_cast<unsigned char>(sentence[i]))) {
      ++i;
    }
    if (begin == i) continue;
    std::size_t end = i;
    while (begin < end && is_ascii_punct(sentence[begin])) ++begin;
    while (begin < end && is_ascii_punct(sentence[end - 1])) --end;
    if (begin == end) continue;
    std::string token(sentence.substr(begin, end - begin));
    for (char& c : token) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

std::optional<SentenceVector> embed_averaged(std::string_view sentence,
                                             const WordVectorTable& table,
                                             OovPolicy oov_policy) {
  std::vector<const SentenceVector*> found;
  for (const std::string& token : tokenize(sentence)) {
    const auto it = table.entries.find(token);
    if (it == table.entries.end()) {
      if (oov_policy == OovPolicy::kFail) {
        throw std::runtime_error("out-of-vocabulary token '" + token + "'");
      }
      continue;
    }
    found.push_back(&it->second);
  }
  if (found.empty()) return std::nullopt;

  // Canonical summation order makes the mean permutation-invariant bit for
  // bit, not just up to rounding.
  std::sort(found.begin(), found.end(),
            [](const SentenceVector* a, const SentenceVector* b) {
              return *a < *b;
            });

  SentenceVector mean(table.dim, 0.0);
  for (const SentenceVector* vec : found) {
    for (std::size_t i = 0; i < table.dim; ++i) mean[i] += (*vec)[i];
  }
  const double inv = 1.0 / static_cast<double>(found.size());
  for (double& c : mean) c *= inv;
  return mean;
}

std::optional<SentenceVector> embed_precomputed(
    std::string_view caption, const SentenceVectorSidecar& sidecar) {
  const auto it = sidecar.entries.find(std::string(caption));
  if (it == sidecar.entries.end()) return std::nullopt;
  return it->second;
}

double cosine_similarity(const SentenceVector& a, const SentenceVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(
        "cosine_similarity: dimension mismatch (" + std::to_string(a.size()) +
        " vs " + std::to_string(b.size()) + ")");
  }
  double dot = 0.0;
  double norm_a_sq = 0.0;
  double norm_b_sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    norm_a_sq += a[i] * a[i];
    norm_b_sq += b[i] * b[i];
  }
  const double norm_a = std::sqrt(norm_a_sq);
  const double norm_b = std::sqrt(norm_b_sq);
  if (norm_a < 1e-12 || norm_b < 1e-12) return 0.0;
  return std::clamp(dot / (norm_a * norm_b), -1.0, 1.0);
}

std::optional<SentenceVector> Embedder::embed(std::string_view text) const {
  const std::string normalized = normalize_caption(text);
  if (config_.backend == EmbedBackend::kAveragedWords) {
    return embed_averaged(normalized, *table_, config_.oov_policy);
  }
  return embed_precomputed(normalized, *sidecar_);
}

std::size_t Embedder::dim() const {
  return config_.backend == EmbedBackend::kAveragedWords ? table_->dim
                                                         : sidecar_->dim;
}

}  // namespace semtrack
