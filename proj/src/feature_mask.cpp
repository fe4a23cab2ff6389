#include "lmsss/feature_mask.hpp"

#include <fmt/core.h>

#include "lmsss/error.hpp"
#include "lmsss/rng.hpp"

namespace lmsss {

FeatureMask FeatureMask::from_indices(std::size_t width, std::span<std::size_t const> indices)
{
    FeatureMask m(width);
    for (auto i : indices) {
        if (i >= width) {
            throw Error(fmt::format("mask index {} out of range for width {}", i, width));
        }
        m.set(i);
    }
    return m;
}

FeatureMask FeatureMask::full(std::size_t width)
{
    FeatureMask m(width);
    for (std::size_t i = 0; i < width; ++i) {
        m.set(i);
    }
    return m;
}

std::vector<std::size_t> FeatureMask::indices() const
{
    std::vector<std::size_t> out;
    out.reserve(count_);
    for (std::size_t w = 0; w < words_.size(); ++w) {
        auto bits = words_[w];
        while (bits != 0) {
            auto const tz = static_cast<std::size_t>(std::countr_zero(bits));
            out.push_back(w * 64 + tz);
            bits &= bits - 1;
        }
    }
    return out;
}

std::uint64_t FeatureMask::hash() const noexcept
{
    std::uint64_t h = mix64(width_);
    for (auto w : words_) {
        h = hash_combine(h, w);
    }
    return h;
}

} // namespace lmsss
