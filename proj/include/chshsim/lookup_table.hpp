#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "chshsim/rng.hpp"

namespace chshsim {

// 1-based index into a lookup table. Indices produced by advancement lie
// in [2, L]; index 1 is reachable only via c-1 lookups.
using TableIndex = std::uint32_t;

// Advance a 1-based index: increment, and wrap to 2 (not 1) past the end.
// The wrap target keeps entry k-1 valid for every reachable k.
inline TableIndex advance_index(TableIndex k, std::uint32_t length) {
    return k + 1 <= length ? k + 1 : TableIndex{2};
}

// Immutable binary table with a prescribed adjacent-flip probability.
// Entries are 1-based and bit-packed.
class LookupTable {
public:
    LookupTable(std::uint32_t length, double flip_probability, Rng& rng)
        : length_(length), words_((length + 64) / 64, 0) {
        if (length < 3)
            throw std::invalid_argument("table length must be >= 3, got " +
                                        std::to_string(length));
        if (flip_probability < 0.0 || flip_probability > 1.0)
            throw std::invalid_argument("flip probability must be in [0, 1]");
        bool bit = rng.coin();
        set(1, bit);
        for (std::uint32_t k = 2; k <= length; ++k) {
            if (rng.bernoulli(flip_probability)) bit = !bit;
            set(k, bit);
        }
    }

    std::uint32_t length() const { return length_; }

    // t[k], 1-based.
    bool at(TableIndex k) const {
        return (words_[k >> 6] >> (k & 63)) & 1ULL;
    }

    // Fraction of adjacent pairs that differ; converges to the flip
    // probability for long tables.
    double adjacency_flip_fraction() const {
        std::size_t flips = 0;
        for (std::uint32_t k = 2; k <= length_; ++k)
            flips += at(k) != at(k - 1);
        return static_cast<double>(flips) / (length_ - 1);
    }

    std::string to_bit_string() const {
        std::string s;
        s.reserve(length_);
        for (std::uint32_t k = 1; k <= length_; ++k)
            s.push_back(at(k) ? '1' : '0');
        return s;
    }

private:
    void set(TableIndex k, bool v) {
        if (v) words_[k >> 6] |= 1ULL << (k & 63);
    }

    std::uint32_t length_;
    std::vector<std::uint64_t> words_;
};

}  // namespace chshsim
