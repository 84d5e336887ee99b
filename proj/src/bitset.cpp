#include "foa/bitset.hpp"

#include <bit>
#include <stdexcept>

namespace foa {

namespace {
constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

Bitset::Bitset(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

bool Bitset::test(std::size_t i) const {
    if (i >= nbits_) throw std::out_of_range("Bitset::test index out of range");
    return (words_[i / 64] >> (i % 64)) & 1u;
}

void Bitset::set(std::size_t i) {
    if (i >= nbits_) throw std::out_of_range("Bitset::set index out of range");
    words_[i / 64] |= (std::uint64_t{1} << (i % 64));
}

void Bitset::reset(std::size_t i) {
    if (i >= nbits_) throw std::out_of_range("Bitset::reset index out of range");
    words_[i / 64] &= ~(std::uint64_t{1} << (i % 64));
}

std::size_t Bitset::count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

bool Bitset::any() const {
    for (auto w : words_)
        if (w) return true;
    return false;
}

bool Bitset::is_subset_of(const Bitset& other) const {
    if (nbits_ != other.nbits_)
        throw std::invalid_argument("Bitset::is_subset_of: width mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (words_[i] & ~other.words_[i]) return false;
    }
    return true;
}

std::string Bitset::to_base64() const {
    std::vector<std::uint8_t> bytes((nbits_ + 7) / 8, 0);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        bytes[i] = static_cast<std::uint8_t>((words_[i / 8] >> ((i % 8) * 8)) & 0xff);
    }
    return base64_encode(bytes);
}

Bitset Bitset::from_base64(std::size_t nbits, const std::string& b64) {
    auto bytes = base64_decode(b64);
    if (bytes.size() != (nbits + 7) / 8)
        throw std::invalid_argument("Bitset::from_base64: length mismatch");
    Bitset bs(nbits);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        bs.words_[i / 8] |= static_cast<std::uint64_t>(bytes[i]) << ((i % 8) * 8);
    }
    return bs;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve(((bytes.size() + 2) / 3) * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
        i += 3;
    }
    std::size_t rem = bytes.size() - i;
    if (rem == 1) {
        std::uint32_t v = bytes[i] << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (rem == 2) {
        std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        if (c == '=') return -1;
        throw std::invalid_argument("base64_decode: bad character");
    };
    if (text.size() % 4 != 0) throw std::invalid_argument("base64_decode: bad length");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int a = val(text[i]), b = val(text[i + 1]), c = val(text[i + 2]), d = val(text[i + 3]);
        if (a < 0 || b < 0) throw std::invalid_argument("base64_decode: bad padding");
        std::uint32_t v = (static_cast<std::uint32_t>(a) << 18) |
                          (static_cast<std::uint32_t>(b) << 12) |
                          (c < 0 ? 0u : static_cast<std::uint32_t>(c) << 6) |
                          (d < 0 ? 0u : static_cast<std::uint32_t>(d));
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
        if (c >= 0) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
        if (d >= 0) out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return out;
}

}  // namespace foa
