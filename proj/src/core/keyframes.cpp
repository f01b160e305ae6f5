#include <ivs/core/keyframes.hpp>

#include <ivs/error.hpp>

#include <algorithm>
#include <numeric>
#include <string>

namespace ivs::core {

namespace {

std::string rangeText(const Boundaries& b)
{
    return "[" + std::to_string(b.start) + ", " + std::to_string(b.end) + ")";
}

}  // namespace

void Boundaries::validate(FrameIndex frameCount) const
{
    if (start >= end)
        throw Error(ErrorCode::InvalidArgument, "boundaries " + rangeText(*this) + " require start < end");
    if (start < 0 || end > frameCount)
        throw Error(ErrorCode::OutOfRange,
                    "boundaries " + rangeText(*this) + " exceed frame range [0, " + std::to_string(frameCount) + ")");
}

KeyframeSet KeyframeSet::all(Boundaries bounds)
{
    if (bounds.start >= bounds.end)
        throw Error(ErrorCode::InvalidArgument, "boundaries " + rangeText(bounds) + " require start < end");
    KeyframeSet s;
    s._bounds = bounds;
    s._indices.resize(static_cast<std::size_t>(bounds.length()));
    std::iota(s._indices.begin(), s._indices.end(), bounds.start);
    return s;
}

KeyframeSet KeyframeSet::fromIndices(std::vector<FrameIndex> indices, Boundaries bounds)
{
    if (bounds.start >= bounds.end)
        throw Error(ErrorCode::InvalidArgument, "boundaries " + rangeText(bounds) + " require start < end");
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    for (FrameIndex i : indices)
    {
        if (!bounds.contains(i))
            throw Error(ErrorCode::OutOfRange, "keyframe " + std::to_string(i) + " outside boundaries " + rangeText(bounds));
    }
    KeyframeSet s;
    s._bounds = bounds;
    s._indices = std::move(indices);
    return s;
}

bool KeyframeSet::contains(FrameIndex i) const
{
    return std::binary_search(_indices.begin(), _indices.end(), i);
}

bool KeyframeSet::isSubsetOf(const KeyframeSet& other) const
{
    return std::includes(other._indices.begin(), other._indices.end(), _indices.begin(), _indices.end());
}

KeyframeSet toggleKeyframe(const KeyframeSet& set, FrameIndex index)
{
    if (!set.bounds().contains(index))
        throw Error(ErrorCode::OutOfRange,
                    "cannot toggle frame " + std::to_string(index) + " outside boundaries " + rangeText(set.bounds()));
    std::vector<FrameIndex> indices = set.indices();
    const auto it = std::lower_bound(indices.begin(), indices.end(), index);
    if (it != indices.end() && *it == index)
        indices.erase(it);
    else
        indices.insert(it, index);
    return KeyframeSet::fromIndices(std::move(indices), set.bounds());
}

KeyframeSet setBoundaries(const KeyframeSet& set, const Boundaries& b)
{
    if (b.start >= b.end)
        throw Error(ErrorCode::InvalidArgument, "boundaries " + rangeText(b) + " require start < end");
    std::vector<FrameIndex> kept;
    std::copy_if(set.indices().begin(), set.indices().end(), std::back_inserter(kept),
                 [&](FrameIndex i) { return b.contains(i); });
    return KeyframeSet::fromIndices(std::move(kept), b);
}

}  // namespace ivs::core
