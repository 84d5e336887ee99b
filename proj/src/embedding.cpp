#include "foa/embedding.hpp"

#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>

#include "foa/hashing.hpp"

namespace foa {

namespace {

constexpr std::uint64_t kEmbedSeed = 0xf0a5eed0u;
constexpr std::size_t kFullDim = 768;
constexpr std::size_t kReducedDim = 256;

// Fixed ±1 projection matrix, built once from a seeded mt19937_64 bit
// stream (bit draws are fully specified by the standard, unlike the
// distributions, so this is bit-stable across platforms).
const std::vector<std::int8_t>& projection_matrix() {
    static const std::vector<std::int8_t> matrix = [] {
        std::vector<std::int8_t> m(kReducedDim * kFullDim);
        std::mt19937_64 rng(kEmbedSeed);
        std::uint64_t bits = 0;
        int left = 0;
        for (auto& cell : m) {
            if (left == 0) {
                bits = rng();
                left = 64;
            }
            cell = (bits & 1) ? 1 : -1;
            bits >>= 1;
            --left;
        }
        return m;
    }();
    return matrix;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Vec embed_text(std::string_view text, std::size_t dim) {
    if (text.empty()) throw std::invalid_argument("embed_text: empty text");
    if (dim != 256 && dim != 768) throw std::invalid_argument("embed_text: dim must be 256 or 768");

    Vec v(dim, 0.0);
    for (const auto& tok : tokenize(text)) {
        std::uint64_t h = mix64(fnv1a64(tok, kEmbedSeed));
        std::size_t bucket = h % dim;
        double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
        v[bucket] += sign;
    }
    if (norm(v) == 0.0) {
        // No tokens, or exact cancellation: fall back to a whole-text bucket.
        v[mix64(fnv1a64(text, kEmbedSeed)) % dim] = 1.0;
    }
    l2_normalize(v);
    return v;
}

Vec reduce_dim(const Vec& v) {
    if (v.size() != kFullDim) throw std::invalid_argument("reduce_dim: input must have length 768");
    if (norm(v) == 0.0) throw std::invalid_argument("reduce_dim: zero vector");
    const auto& proj = projection_matrix();
    Vec out(kReducedDim, 0.0);
    for (std::size_t i = 0; i < kReducedDim; ++i) {
        const std::int8_t* row = proj.data() + i * kFullDim;
        double acc = 0.0;
        for (std::size_t j = 0; j < kFullDim; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    l2_normalize(out);
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double cosine(std::span<const double> a, std::span<const double> b) {
    double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero vector");
    return dot(a, b) / (na * nb);
}

void l2_normalize(Vec& v) {
    double n = norm(v);
    if (n == 0.0) throw std::invalid_argument("l2_normalize: zero vector");
    for (auto& x : v) x /= n;
}

bool is_unit(std::span<const double> v, double tol) {
    return std::abs(norm(v) - 1.0) <= tol;
}

}  // namespace foa
