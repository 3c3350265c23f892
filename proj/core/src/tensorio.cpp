#include "cornerseg/tensorio.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cornerseg/error.hpp"

namespace cornerseg {

namespace {

using json = nlohmann::json;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::span<const unsigned char> bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
    return v;
}

FormatError byte_error(const std::string& source, std::size_t offset, const std::string& what) {
    return FormatError(source, FormatError::Location::ByteOffset, offset, what);
}

FormatError line_error(const std::string& source, std::size_t line, const std::string& what) {
    return FormatError(source, FormatError::Location::Line, line, what);
}

double number_field(const json& obj, const char* key, const std::string& source, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw line_error(source, line, std::string("missing key \"") + key + "\"");
    if (!it->is_number()) throw line_error(source, line, std::string("\"") + key + "\" is not a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw line_error(source, line, std::string("\"") + key + "\" is not finite");
    return v;
}

json box_to_json(const RotatedRect& r) {
    json j = json::object();
    for (int i = 0; i < 4; ++i) {
        j["x" + std::to_string(i + 1)] = r.corners[i].x;
        j["y" + std::to_string(i + 1)] = r.corners[i].y;
    }
    return j;
}

RotatedRect box_from_json(const json& j, const std::string& source, std::size_t line) {
    RotatedRect r;
    for (int i = 0; i < 4; ++i) {
        const std::string xs = "x" + std::to_string(i + 1);
        const std::string ys = "y" + std::to_string(i + 1);
        r.corners[i] = {number_field(j, xs.c_str(), source, line), number_field(j, ys.c_str(), source, line)};
    }
    return r;
}

// Calls fn(json_object, line_number) for each non-blank line.
template <typename Fn>
void for_each_json_line(std::istream& in, const std::string& source, Fn&& fn) {
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw line_error(source, line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw line_error(source, line_no, "expected a JSON object");
        fn(j, line_no);
    }
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& source,
                         std::size_t line) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw line_error(source, line, "unknown key \"" + key + "\"");
    }
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError(path, "read failed");
    return data;
}

void write_file(const std::string& path, std::span<const unsigned char> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path, "write failed");
}

void write_file(const std::string& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

std::vector<unsigned char> encode_tensor(const Tensor3D& tensor) {
    constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
    if (tensor.channels() > kMax || tensor.height() > kMax || tensor.width() > kMax) {
        throw ConfigError("tensor dimension exceeds u32 range");
    }
    std::vector<unsigned char> out;
    out.reserve(kTensorHeaderSize + 4 * tensor.size());
    out.insert(out.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
    put_u32(out, static_cast<std::uint32_t>(tensor.channels()));
    put_u32(out, static_cast<std::uint32_t>(tensor.height()));
    put_u32(out, static_cast<std::uint32_t>(tensor.width()));
    for (float f : tensor.data()) put_u32(out, std::bit_cast<std::uint32_t>(f));
    return out;
}

Tensor3D decode_tensor(std::span<const unsigned char> bytes, const std::string& source) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kTensorMagic, 4) != 0) {
        throw byte_error(source, 0, "bad magic (expected \"CFT1\")");
    }
    if (bytes.size() < kTensorHeaderSize) {
        throw byte_error(source, bytes.size(), "truncated header");
    }
    const std::uint64_t c = get_u32(bytes, 4);
    const std::uint64_t h = get_u32(bytes, 8);
    const std::uint64_t w = get_u32(bytes, 12);
    // Each factor is < 2^32, so c*h cannot overflow; guard the final product.
    const std::uint64_t ch = c * h;
    if (ch != 0 && w > std::numeric_limits<std::uint64_t>::max() / 4 / ch) {
        throw byte_error(source, 4, "dimension product overflows");
    }
    const std::uint64_t count = ch * w;
    const std::uint64_t payload = bytes.size() - kTensorHeaderSize;
    if (payload < count * 4) {
        throw byte_error(source, bytes.size(),
                         "truncated payload: expected " + std::to_string(count * 4) + " bytes, found " +
                             std::to_string(payload));
    }
    if (payload > count * 4) {
        throw byte_error(source, kTensorHeaderSize + count * 4, "trailing bytes after payload");
    }
    Tensor3D t(c, h, w);
    auto data = t.data();
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t off = kTensorHeaderSize + 4 * i;
        const float f = std::bit_cast<float>(get_u32(bytes, off));
        if (!std::isfinite(f)) throw byte_error(source, off, "non-finite value");
        data[i] = f;
    }
    return t;
}

Tensor3D read_tensor(const std::string& path) {
    const std::string raw = read_file(path);
    return decode_tensor(std::span(reinterpret_cast<const unsigned char*>(raw.data()), raw.size()), path);
}

void write_tensor(const Tensor3D& tensor, const std::string& path) {
    write_file(path, encode_tensor(tensor));
}

std::vector<BoxRecord> parse_boxes(std::istream& in, const std::string& source) {
    std::vector<BoxRecord> boxes;
    for_each_json_line(in, source, [&](const json& j, std::size_t line) {
        reject_unknown_keys(j, {"x1", "y1", "x2", "y2", "x3", "y3", "x4", "y4", "score"}, source, line);
        BoxRecord rec{box_from_json(j, source, line), std::nullopt};
        if (j.contains("score")) rec.score = number_field(j, "score", source, line);
        boxes.push_back(rec);
    });
    return boxes;
}

void format_boxes(std::ostream& out, std::span<const BoxRecord> boxes) {
    for (const BoxRecord& rec : boxes) {
        json j = box_to_json(rec.box);
        if (rec.score) j["score"] = *rec.score;
        out << j.dump() << '\n';
    }
}

std::vector<BoxRecord> read_boxes(const std::string& path) {
    std::istringstream in(read_file(path));
    return parse_boxes(in, path);
}

void write_boxes(std::span<const BoxRecord> boxes, const std::string& path) {
    std::ostringstream out;
    format_boxes(out, boxes);
    write_file(path, out.str());
}

CornerSets parse_corners(std::istream& in, const std::string& source) {
    CornerSets sets;
    for_each_json_line(in, source, [&](const json& j, std::size_t line) {
        reject_unknown_keys(j, {"type", "x", "y", "ss", "score"}, source, line);
        const auto it = j.find("type");
        if (it == j.end() || !it->is_string()) throw line_error(source, line, "missing string key \"type\"");
        CornerDetection c;
        try {
            c.type = corner_type_from_name(it->get<std::string>().c_str());
        } catch (const std::invalid_argument& e) {
            throw line_error(source, line, e.what());
        }
        c.position = {number_field(j, "x", source, line), number_field(j, "y", source, line)};
        c.short_side = number_field(j, "ss", source, line);
        c.score = number_field(j, "score", source, line);
        if (!(c.short_side > 0.0)) throw line_error(source, line, "\"ss\" must be positive");
        sets[static_cast<int>(c.type)].push_back(c);
    });
    return sets;
}

void format_corners(std::ostream& out, const CornerSets& corners) {
    for (const auto& set : corners) {
        for (const CornerDetection& c : set) {
            json j = json::object();
            j["type"] = corner_type_name(c.type);
            j["x"] = c.position.x;
            j["y"] = c.position.y;
            j["ss"] = c.short_side;
            j["score"] = c.score;
            out << j.dump() << '\n';
        }
    }
}

CornerSets read_corners(const std::string& path) {
    std::istringstream in(read_file(path));
    return parse_corners(in, path);
}

void write_corners(const CornerSets& corners, const std::string& path) {
    std::ostringstream out;
    format_corners(out, corners);
    write_file(path, out.str());
}

void validate(const SceneAnnotation& scene) {
    if (scene.image_width <= 0 || scene.image_height <= 0) {
        throw ConfigError("annotation image size must be positive");
    }
    if (!scene.text.empty() && scene.text.size() != scene.boxes.size()) {
        throw ConfigError("annotation text flags must match the box count");
    }
    const double w = scene.image_width;
    const double h = scene.image_height;
    for (std::size_t i = 0; i < scene.boxes.size(); ++i) {
        for (const Point& p : scene.boxes[i].corners) {
            if (p.x < -0.25 * w || p.x > 1.25 * w || p.y < -0.25 * h || p.y > 1.25 * h) {
                throw ConfigError("annotation box " + std::to_string(i) + " lies too far outside the image");
            }
        }
    }
}

SceneAnnotation read_annotation(const std::string& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(path, FormatError::Location::ByteOffset, e.byte, "invalid JSON");
    }
    SceneAnnotation scene;
    try {
        scene.image_width = j.at("image_width").get<int>();
        scene.image_height = j.at("image_height").get<int>();
        std::size_t line = 0;
        for (const json& b : j.at("boxes")) {
            scene.boxes.push_back(box_from_json(b, path, ++line));
            if (b.contains("text")) scene.text.push_back(b.at("text").get<bool>());
        }
    } catch (const json::exception& e) {
        throw FormatError(path, FormatError::Location::ByteOffset, 0, e.what());
    }
    try {
        validate(scene);
    } catch (const ConfigError& e) {
        throw FormatError(path, FormatError::Location::ByteOffset, 0, e.what());
    }
    return scene;
}

void write_annotation(const SceneAnnotation& scene, const std::string& path) {
    json j = json::object();
    j["image_width"] = scene.image_width;
    j["image_height"] = scene.image_height;
    json boxes = json::array();
    for (std::size_t i = 0; i < scene.boxes.size(); ++i) {
        json b = box_to_json(scene.boxes[i]);
        if (!scene.text.empty()) b["text"] = static_cast<bool>(scene.text[i]);
        boxes.push_back(std::move(b));
    }
    j["boxes"] = std::move(boxes);
    write_file(path, j.dump(2) + "\n");
}

}  // namespace cornerseg
