#include <functional>

#include <gtest/gtest.h>

#include "socialmotion/container.h"
#include "socialmotion/error.h"
#include "test_support.h"

namespace socialmotion {
namespace {

Container sample() {
  Container c;
  c.magic = "TEST";
  c.version = 2;
  c.config_json = R"({"a":1})";
  Eigen::MatrixXd m(2, 3);
  m << 1.5, -2.25, 3, 0, 0.125, 7;
  c.tensors.push_back({"weights", m});
  c.tensors.push_back({"empty", Eigen::MatrixXd(0, 4)});
  return c;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

TEST(Container, RoundTrip) {
  const Container c = sample();
  const Container back = decode_container(encode_container(c), "TEST", 2);
  EXPECT_EQ(back.magic, "TEST");
  EXPECT_EQ(back.version, 2u);
  EXPECT_EQ(back.config_json, c.config_json);
  ASSERT_EQ(back.tensors.size(), 2u);
  EXPECT_EQ(back.tensor("weights").value, c.tensors[0].value);
  EXPECT_EQ(back.tensor("empty").value.cols(), 4);
  EXPECT_TRUE(back.has("weights"));
  EXPECT_FALSE(back.has("bias"));
  EXPECT_THROW(back.tensor("bias"), Error);
}

TEST(Container, StoresSinglePrecision) {
  Container c = sample();
  c.tensors[0].value(0, 0) = 0.1;
  const Container back = decode_container(encode_container(c), "TEST", 2);
  EXPECT_EQ(back.tensor("weights").value(0, 0), static_cast<double>(0.1f));
}

TEST(Container, LittleEndianHeader) {
  const auto bytes = encode_container(sample());
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "TEST");
  EXPECT_EQ(bytes[4], 2);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 0);
  EXPECT_EQ(bytes[7], 0);
}

TEST(Container, DetectsCorruption) {
  auto bytes = encode_container(sample());
  bytes[bytes.size() / 2] ^= 0x40;
  EXPECT_EQ(code_of([&] { decode_container(bytes, "TEST", 2); }), ErrorCode::Integrity);
}

TEST(Container, RejectsWrongMagicAndVersion) {
  const auto bytes = encode_container(sample());
  EXPECT_EQ(code_of([&] { decode_container(bytes, "XXXX", 2); }), ErrorCode::Format);
  EXPECT_EQ(code_of([&] { decode_container(bytes, "TEST", 1); }), ErrorCode::UnsupportedVersion);
  EXPECT_NO_THROW(decode_container(bytes, "", 2));
}

TEST(Container, RejectsTruncation) {
  auto bytes = encode_container(sample());
  bytes.resize(bytes.size() - 9);
  EXPECT_THROW(decode_container(bytes, "TEST", 2), Error);
  EXPECT_THROW(decode_container({}, "TEST", 2), Error);
}

TEST(Container, FileRoundTrip) {
  testing::TempDir dir;
  write_container(dir.file("c.bin"), sample());
  EXPECT_EQ(read_container(dir.file("c.bin"), "TEST", 2).tensor("weights").value, sample().tensors[0].value);
  EXPECT_EQ(code_of([&] { read_container(dir.file("missing.bin"), "TEST", 2); }), ErrorCode::Io);
}

} // namespace
} // namespace socialmotion
