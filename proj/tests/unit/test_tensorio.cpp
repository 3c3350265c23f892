#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "cornerseg/error.hpp"
#include "cornerseg/tensorio.hpp"
#include "generators.hpp"
#include "temp_dir.hpp"

using namespace cornerseg;

namespace {

std::string data_file(const std::string& name) { return std::string(CORNERSEG_TEST_DATA_DIR) + "/" + name; }

std::vector<unsigned char> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

std::size_t format_error_offset(const std::vector<unsigned char>& bytes) {
    try {
        decode_tensor(bytes, "mem");
    } catch (const FormatError& e) {
        EXPECT_EQ(e.location_kind(), FormatError::Location::ByteOffset);
        return e.location();
    }
    ADD_FAILURE() << "expected FormatError";
    return 0;
}

}  // namespace

TEST(TensorFile, GoldenFixtureIsLittleEndianChannelMajor) {
    const Tensor3D t = read_tensor(data_file("golden_2x2x3.cft"));
    ASSERT_EQ(t.channels(), 2u);
    ASSERT_EQ(t.height(), 2u);
    ASSERT_EQ(t.width(), 3u);
    const float expected[12] = {0, 1, -1, 0.5f, 0.25f, -2.5f, 3, 100, -0.125f, 7.75f, 1024, 1.5f};
    for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(t.data()[i], expected[i]);
    EXPECT_EQ(t.at(1, 0, 2), -0.125f);
    EXPECT_EQ(encode_tensor(t), bytes_of(read_file(data_file("golden_2x2x3.cft"))));
}

TEST(TensorFile, ZerosRoundTrip) {
    testutil::TempDir dir("tensor");
    const Tensor3D t(2, 2, 2);
    write_tensor(t, dir.file("z.cft"));
    EXPECT_EQ(read_tensor(dir.file("z.cft")), t);
}

TEST(TensorFile, LargeRandomTensorRoundTripsBitExact) {
    std::mt19937_64 rng(8);
    Tensor3D t(4, 512, 512);
    std::normal_distribution<float> n(0.0f, 100.0f);
    for (float& v : t.data()) v = n(rng);
    t.data()[7] = std::numeric_limits<float>::denorm_min();
    t.data()[8] = -0.0f;
    const auto bytes = encode_tensor(t);
    const Tensor3D back = decode_tensor(bytes, "mem");
    ASSERT_TRUE(back.same_shape(t));
    EXPECT_EQ(std::memcmp(back.data().data(), t.data().data(), t.size() * sizeof(float)), 0);
    EXPECT_EQ(encode_tensor(back), bytes);
}

TEST(TensorFile, BadMagicReportsOffsetZero) {
    auto bytes = encode_tensor(Tensor3D(1, 1, 1));
    bytes[0] = 'X';
    EXPECT_EQ(format_error_offset(bytes), 0u);
}

TEST(TensorFile, TruncatedHeader) {
    auto bytes = encode_tensor(Tensor3D(1, 1, 1));
    bytes.resize(10);
    EXPECT_EQ(format_error_offset(bytes), 10u);
}

TEST(TensorFile, DimensionOverflowReportsHeaderOffset) {
    std::vector<unsigned char> bytes = {'C', 'F', 'T', '1'};
    for (int i = 0; i < 12; ++i) bytes.push_back(0xFF);
    EXPECT_EQ(format_error_offset(bytes), 4u);
}

TEST(TensorFile, TruncatedPayloadReportsFileSize) {
    auto bytes = encode_tensor(Tensor3D(2, 3, 4));
    bytes.resize(bytes.size() - 3);
    EXPECT_EQ(format_error_offset(bytes), bytes.size());
}

TEST(TensorFile, TrailingBytesReportEndOfPayload) {
    auto bytes = encode_tensor(Tensor3D(1, 2, 2));
    bytes.push_back(0);
    EXPECT_EQ(format_error_offset(bytes), kTensorHeaderSize + 16);
}

TEST(TensorFile, NonFiniteValueReportsItsOffset) {
    Tensor3D t(1, 1, 3);
    t.at(0, 0, 2) = std::numeric_limits<float>::quiet_NaN();
    EXPECT_EQ(format_error_offset(encode_tensor(t)), kTensorHeaderSize + 8);
}

TEST(TensorFile, MissingFileIsIoError) {
    EXPECT_THROW(read_tensor("/nonexistent/dir/x.cft"), IoError);
}

TEST(BoxFile, GoldenFixture) {
    const auto boxes = read_boxes(data_file("golden_boxes.jsonl"));
    ASSERT_EQ(boxes.size(), 2u);
    EXPECT_EQ(boxes[0].box.tl(), (Point{8, 9}));
    EXPECT_EQ(boxes[0].box.bl(), (Point{8, 11}));
    EXPECT_FALSE(boxes[0].score.has_value());
    EXPECT_EQ(boxes[1].box.tr(), (Point{40.5, 0.25}));
    EXPECT_EQ(boxes[1].score, 0.875);
}

TEST(BoxFile, EmptyInputGivesNoBoxes) {
    std::istringstream in("");
    EXPECT_TRUE(parse_boxes(in, "mem").empty());
}

TEST(BoxFile, RandomBoxesRoundTrip) {
    std::mt19937_64 rng(2);
    std::vector<BoxRecord> boxes;
    for (int i = 0; i < 1000; ++i) {
        BoxRecord r{gen::rect(rng, -100, 600, 1, 200), std::nullopt};
        if (i % 2 == 0) r.score = gen::uniform(rng, 0, 1);
        boxes.push_back(r);
    }
    std::stringstream io;
    format_boxes(io, boxes);
    const auto back = parse_boxes(io, "mem");
    ASSERT_EQ(back.size(), boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        for (int k = 0; k < 4; ++k) {
            EXPECT_NEAR(back[i].box.corners[k].x, boxes[i].box.corners[k].x, 1e-6);
            EXPECT_NEAR(back[i].box.corners[k].y, boxes[i].box.corners[k].y, 1e-6);
        }
        ASSERT_EQ(back[i].score.has_value(), boxes[i].score.has_value());
        if (boxes[i].score) {
            EXPECT_NEAR(*back[i].score, *boxes[i].score, 1e-6);
        }
    }
}

TEST(BoxFile, MalformedLineReportsLineNumber) {
    std::istringstream in("{\"x1\":0,\"y1\":0,\"x2\":1,\"y2\":0,\"x3\":1,\"y3\":1,\"x4\":0,\"y4\":1}\n\n{\"x1\":0}\n");
    try {
        parse_boxes(in, "boxes.jsonl");
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_EQ(e.location_kind(), FormatError::Location::Line);
        EXPECT_EQ(e.location(), 3u);
        EXPECT_NE(std::string(e.what()).find("boxes.jsonl:3"), std::string::npos);
    }
}

TEST(BoxFile, UnknownKeyRejected) {
    std::istringstream in("{\"x1\":0,\"y1\":0,\"x2\":1,\"y2\":0,\"x3\":1,\"y3\":1,\"x4\":0,\"y4\":1,\"colour\":3}\n");
    EXPECT_THROW(parse_boxes(in, "mem"), FormatError);
}

TEST(CornerFile, GoldenFixtureSplitsByType) {
    const CornerSets sets = read_corners(data_file("golden_corners.jsonl"));
    ASSERT_EQ(sets[0].size(), 1u);
    ASSERT_EQ(sets[1].size(), 1u);
    EXPECT_TRUE(sets[2].empty());
    ASSERT_EQ(sets[3].size(), 1u);
    EXPECT_EQ(sets[1][0].position, (Point{40, 0}));
    EXPECT_EQ(sets[3][0].short_side, 12);
    EXPECT_EQ(sets[0][0].score, 0.9);
}

TEST(CornerFile, RoundTrip) {
    CornerSets sets;
    sets[2].push_back({CornerType::BR, {3.25, 4.5}, 9.0, 0.625});
    sets[0].push_back({CornerType::TL, {-1, 2}, 8.5, 1.0});
    std::stringstream io;
    format_corners(io, sets);
    EXPECT_EQ(parse_corners(io, "mem"), sets);
}

TEST(CornerFile, BadTypeAndBadShortSide) {
    std::istringstream bad_type("{\"type\":\"XX\",\"x\":0,\"y\":0,\"ss\":1,\"score\":1}\n");
    EXPECT_THROW(parse_corners(bad_type, "mem"), FormatError);
    std::istringstream bad_ss("{\"type\":\"TL\",\"x\":0,\"y\":0,\"ss\":0,\"score\":1}\n");
    EXPECT_THROW(parse_corners(bad_ss, "mem"), FormatError);
}

TEST(Annotation, RoundTripAndValidation) {
    testutil::TempDir dir("annotation");
    SceneAnnotation a;
    a.image_width = 64;
    a.image_height = 32;
    a.boxes = {from_center_form(20, 10, 12, 6, 0.2), from_center_form(40, 20, 8, 8, 0)};
    a.text = {true, false};
    write_annotation(a, dir.file("a.json"));
    const SceneAnnotation back = read_annotation(dir.file("a.json"));
    EXPECT_EQ(back.image_width, 64);
    EXPECT_EQ(back.text, a.text);
    ASSERT_EQ(back.boxes.size(), 2u);
    EXPECT_NEAR(back.boxes[0].tl().x, a.boxes[0].tl().x, 1e-9);

    SceneAnnotation far = a;
    far.boxes[1] = translate(far.boxes[1], {500, 0});
    EXPECT_THROW(validate(far), ConfigError);
    SceneAnnotation flags = a;
    flags.text = {true};
    EXPECT_THROW(validate(flags), ConfigError);
}
