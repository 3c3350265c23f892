#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cornerseg/corner.hpp"
#include "cornerseg/geometry.hpp"
#include "cornerseg/tensor.hpp"

namespace cornerseg {

// Tensor file: "CFT1" | u32 channels | u32 height | u32 width | float32[c*h*w],
// all little-endian, channel-major then row-major.
inline constexpr char kTensorMagic[4] = {'C', 'F', 'T', '1'};
inline constexpr std::size_t kTensorHeaderSize = 16;

std::vector<unsigned char> encode_tensor(const Tensor3D& tensor);
/// `source` names the input in FormatError messages.
Tensor3D decode_tensor(std::span<const unsigned char> bytes, const std::string& source);

Tensor3D read_tensor(const std::string& path);
void write_tensor(const Tensor3D& tensor, const std::string& path);

/// One line of a box file: {"x1":..,"y1":..,...,"x4":..,"y4":..[,"score":..]}
/// with corners in TL, TR, BR, BL order.
struct BoxRecord {
    RotatedRect box;
    std::optional<double> score;

    friend bool operator==(const BoxRecord&, const BoxRecord&) = default;
};

std::vector<BoxRecord> parse_boxes(std::istream& in, const std::string& source);
void format_boxes(std::ostream& out, std::span<const BoxRecord> boxes);
std::vector<BoxRecord> read_boxes(const std::string& path);
void write_boxes(std::span<const BoxRecord> boxes, const std::string& path);

/// Corner file: one {"type":"TL","x":..,"y":..,"ss":..,"score":..} per line.
CornerSets parse_corners(std::istream& in, const std::string& source);
void format_corners(std::ostream& out, const CornerSets& corners);
CornerSets read_corners(const std::string& path);
void write_corners(const CornerSets& corners, const std::string& path);

/// Ground truth for one image. `text` is either empty or one flag per box.
struct SceneAnnotation {
    int image_width = 0;
    int image_height = 0;
    std::vector<RotatedRect> boxes;
    std::vector<bool> text;

    friend bool operator==(const SceneAnnotation&, const SceneAnnotation&) = default;
};

/// Throws ConfigError unless every corner lies within [-0.25*dim, 1.25*dim]
/// and the flag vector is empty or box-sized.
void validate(const SceneAnnotation& scene);

SceneAnnotation read_annotation(const std::string& path);
void write_annotation(const SceneAnnotation& scene, const std::string& path);

/// Whole-file helpers shared by the readers; throw IoError.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::span<const unsigned char> bytes);
void write_file(const std::string& path, const std::string& text);

}  // namespace cornerseg
