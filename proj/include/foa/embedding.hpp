#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace foa {

using Vec = std::vector<double>;

// Lowercases and splits on every non-alphanumeric character.
std::vector<std::string> tokenize(std::string_view text);

// Deterministic token-hashing embedder standing in for a sentence-embedding
// model: each token is hashed into one of `dim` buckets with a signed
// contribution, then the vector is L2-normalized. Texts sharing tokens land
// close in cosine space, which is all the protocols downstream rely on.
// dim must be 256 or 768. Throws std::invalid_argument on empty text.
Vec embed_text(std::string_view text, std::size_t dim = 768);

// Rademacher random projection 768 -> 256 with a fixed seed, re-normalized.
Vec reduce_dim(const Vec& v);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
double cosine(std::span<const double> a, std::span<const double> b);

// In-place L2 normalization; throws std::invalid_argument on zero vectors.
void l2_normalize(Vec& v);

bool is_unit(std::span<const double> v, double tol = 1e-6);

}  // namespace foa
