#include "foa/bloom.hpp"

#include <cmath>
#include <stdexcept>

#include "foa/hashing.hpp"

namespace foa {

BloomFilter::BloomFilter(std::size_t nbits, std::size_t nhashes)
    : bits_(nbits), nhashes_(nhashes) {
    if (nbits == 0 || nhashes == 0)
        throw std::invalid_argument("BloomFilter: nbits and nhashes must be positive");
}

// Double hashing: probe_i = h1 + i*h2 (Kirsch-Mitzenmacher).
std::size_t BloomFilter::probe(std::string_view key, std::size_t i) const {
    std::uint64_t h1 = fnv1a64(key);
    std::uint64_t h2 = mix64(h1) | 1;
    return static_cast<std::size_t>((h1 + i * h2) % bits_.size());
}

void BloomFilter::insert(std::string_view key) {
    for (std::size_t i = 0; i < nhashes_; ++i) bits_.set(probe(key, i));
}

bool BloomFilter::contains(std::string_view key) const {
    for (std::size_t i = 0; i < nhashes_; ++i) {
        if (!bits_.test(probe(key, i))) return false;
    }
    return true;
}

void BloomFilter::set_bits(Bitset bits) {
    if (bits.size() != bits_.size())
        throw std::invalid_argument("BloomFilter::set_bits: width mismatch");
    bits_ = std::move(bits);
}

double BloomFilter::expected_fp_rate(std::size_t nbits, std::size_t nhashes, std::size_t n) {
    double k = static_cast<double>(nhashes);
    double fill = 1.0 - std::exp(-k * static_cast<double>(n) / static_cast<double>(nbits));
    return std::pow(fill, k);
}

}  // namespace foa
