#pragma once

#include <string>
#include <string_view>

#include "foa/bitset.hpp"

namespace foa {

// Bloom filter over discrete skill strings. Defaults (l=1024, h=4) give
// roughly 1% false positives at 100 entries.
class BloomFilter {
public:
    static constexpr std::size_t kDefaultBits = 1024;
    static constexpr std::size_t kDefaultHashes = 4;

    explicit BloomFilter(std::size_t nbits = kDefaultBits,
                         std::size_t nhashes = kDefaultHashes);

    void insert(std::string_view key);
    bool contains(std::string_view key) const;

    std::size_t bit_count() const { return bits_.size(); }
    std::size_t hash_count() const { return nhashes_; }
    const Bitset& bits() const { return bits_; }
    void set_bits(Bitset bits);

    bool operator==(const BloomFilter&) const = default;

    // Analytic expected false-positive rate after n insertions.
    static double expected_fp_rate(std::size_t nbits, std::size_t nhashes, std::size_t n);

private:
    std::size_t probe(std::string_view key, std::size_t i) const;

    Bitset bits_;
    std::size_t nhashes_;
};

}  // namespace foa
