#pragma once

#include <ivs/media/frame_source.hpp>

#include <vector>

namespace ivs::core {

using media::FrameIndex;

/// Half-open frame range [start, end) eligible for sampling.
struct Boundaries
{
    FrameIndex start = 0;
    FrameIndex end = 0;

    bool operator==(const Boundaries&) const = default;

    bool contains(FrameIndex i) const { return i >= start && i < end; }
    FrameIndex length() const { return end - start; }

    /// Throws when start >= end or the range does not fit in [0, frameCount).
    void validate(FrameIndex frameCount) const;
};

/**
 * @brief Sorted unique keyframe indices inside a boundary range.
 */
class KeyframeSet
{
public:
    KeyframeSet() = default;

    /// Every frame in the boundaries: the initial selection of a project.
    static KeyframeSet all(Boundaries bounds);

    /// Sorts and dedupes; throws when an index lies outside the bounds.
    static KeyframeSet fromIndices(std::vector<FrameIndex> indices, Boundaries bounds);

    const std::vector<FrameIndex>& indices() const { return _indices; }
    const Boundaries& bounds() const { return _bounds; }
    std::size_t size() const { return _indices.size(); }
    bool empty() const { return _indices.empty(); }
    bool contains(FrameIndex i) const;

    /// True when every index of this set also belongs to `other`.
    bool isSubsetOf(const KeyframeSet& other) const;

    bool operator==(const KeyframeSet&) const = default;

private:
    std::vector<FrameIndex> _indices;
    Boundaries _bounds;
};

KeyframeSet toggleKeyframe(const KeyframeSet& set, FrameIndex index);

/// Drops indices outside `b` and adopts `b` as the new bounds.
KeyframeSet setBoundaries(const KeyframeSet& set, const Boundaries& b);

}  // namespace ivs::core
