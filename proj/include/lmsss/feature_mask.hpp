#ifndef LMSSS_FEATURE_MASK_HPP
#define LMSSS_FEATURE_MASK_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lmsss {

// Fixed-width bit vector over the current search space; bit i set means
// column i is selected. The popcount is kept in sync on every mutation.
class FeatureMask {
public:
    FeatureMask() = default;
    explicit FeatureMask(std::size_t width) : width_(width), words_((width + 63) / 64, 0) { }

    static FeatureMask from_indices(std::size_t width, std::span<std::size_t const> indices);
    static FeatureMask full(std::size_t width);

    std::size_t width() const noexcept { return width_; }
    std::size_t count() const noexcept { return count_; }
    bool empty() const noexcept { return count_ == 0; }

    bool test(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }

    void set(std::size_t i) noexcept
    {
        auto& w = words_[i >> 6];
        auto const bit = std::uint64_t { 1 } << (i & 63);
        count_ += (w & bit) == 0;
        w |= bit;
    }

    void reset(std::size_t i) noexcept
    {
        auto& w = words_[i >> 6];
        auto const bit = std::uint64_t { 1 } << (i & 63);
        count_ -= (w & bit) != 0;
        w &= ~bit;
    }

    void flip(std::size_t i) noexcept
    {
        if (test(i)) {
            reset(i);
        } else {
            set(i);
        }
    }

    // Positions of set bits, ascending.
    std::vector<std::size_t> indices() const;

    std::span<std::uint64_t const> words() const noexcept { return words_; }

    std::uint64_t hash() const noexcept;

    friend bool operator==(FeatureMask const& a, FeatureMask const& b) noexcept
    {
        return a.width_ == b.width_ && a.words_ == b.words_;
    }

    friend bool operator<(FeatureMask const& a, FeatureMask const& b) noexcept
    {
        if (a.width_ != b.width_) {
            return a.width_ < b.width_;
        }
        return a.words_ < b.words_;
    }

private:
    std::size_t width_ { 0 };
    std::size_t count_ { 0 };
    std::vector<std::uint64_t> words_;
};

struct FeatureMaskHash {
    std::size_t operator()(FeatureMask const& m) const noexcept { return static_cast<std::size_t>(m.hash()); }
};

} // namespace lmsss

#endif
