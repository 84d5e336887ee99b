#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace foa {

// Fixed-width bit array backing both policy label sets and Bloom filters.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t nbits);

    std::size_t size() const { return nbits_; }
    bool test(std::size_t i) const;
    void set(std::size_t i);
    void reset(std::size_t i);
    std::size_t count() const;
    bool any() const;

    // true iff every set bit of *this is also set in other.
    bool is_subset_of(const Bitset& other) const;

    bool operator==(const Bitset& other) const = default;

    std::string to_base64() const;
    static Bitset from_base64(std::size_t nbits, const std::string& b64);

    const std::vector<std::uint64_t>& words() const { return words_; }

private:
    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

// Plain base64 (RFC 4648, with padding) over raw bytes.
std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace foa
