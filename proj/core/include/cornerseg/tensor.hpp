#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cornerseg {

/// Dense float32 tensor in channel-major, row-major layout: element
/// (c, y, x) lives at (c * height + y) * width + x.
class Tensor3D {
public:
    Tensor3D() = default;
    Tensor3D(std::size_t channels, std::size_t height, std::size_t width, float fill = 0.0f)
        : channels_(channels), height_(height), width_(width), data_(channels * height * width, fill) {}

    std::size_t channels() const { return channels_; }
    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float& at(std::size_t c, std::size_t y, std::size_t x) { return data_[index(c, y, x)]; }
    float at(std::size_t c, std::size_t y, std::size_t x) const { return data_[index(c, y, x)]; }

    std::span<float> channel(std::size_t c) {
        return {data_.data() + c * height_ * width_, height_ * width_};
    }
    std::span<const float> channel(std::size_t c) const {
        return {data_.data() + c * height_ * width_, height_ * width_};
    }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }

    bool same_shape(const Tensor3D& other) const {
        return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const Tensor3D&, const Tensor3D&) = default;

private:
    std::size_t index(std::size_t c, std::size_t y, std::size_t x) const {
        return (c * height_ + y) * width_ + x;
    }

    std::size_t channels_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<float> data_;
};

}  // namespace cornerseg
