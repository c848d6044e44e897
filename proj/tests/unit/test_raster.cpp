// SPDX-License-Identifier: Apache-2.0

#include "anchornav/raster.hpp"

#include <doctest.h>

#include "test_support.hpp"

using namespace anchornav;
using anchornav::testing::golden_path;
using anchornav::testing::read_file;
using anchornav::testing::update_golden;
using anchornav::testing::uniform_layer;
using anchornav::testing::write_file;

namespace {

AnnotatedObservation fixture_observation() {
  AnnotatedObservation obs;
  obs.frame_width = 320;
  obs.frame_height = 240;
  obs.layer_snapshot = uniform_layer(10, Occ::Free);
  obs.camera_pose = {{0, 0, 0.5}, 0.0};

  Anchor frontier;
  frontier.kind = AnchorKind::Frontier;
  frontier.index = 1;
  frontier.has_polyline = true;
  frontier.polyline = {Vec2{60, 60}, Vec2{140, 70}, Vec2{150, 150},
                       Vec2{70, 140}};
  obs.anchors.push_back(frontier);
  obs.frontier_polylines.push_back(frontier.polyline);

  Anchor target;
  target.kind = AnchorKind::Target;
  target.index = 2;
  target.pixel = Vec2{240, 120};
  obs.anchors.push_back(target);

  Anchor up;
  up.kind = AnchorKind::InterLayer;
  up.index = 3;
  up.pixel = Vec2{160, 40};
  obs.anchors.push_back(up);
  return obs;
}

}  // namespace

TEST_CASE("an empty anchor list leaves the background untouched") {
  AnnotatedObservation obs;
  obs.frame_width = 64;
  obs.frame_height = 48;
  obs.layer_snapshot = uniform_layer(4, Occ::Unknown);
  const Image img = annotate_frame(obs);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb p = img.at(x, y);
      CHECK(p.r == colors::kBackground.r);
      CHECK(p.g == colors::kBackground.g);
      CHECK(p.b == colors::kBackground.b);
    }
  }
}

TEST_CASE("a target anchor renders as a red disc at its pixel") {
  AnnotatedObservation obs;
  obs.frame_width = 640;
  obs.frame_height = 480;
  obs.layer_snapshot = uniform_layer(4, Occ::Unknown);
  Anchor a;
  a.kind = AnchorKind::Target;
  a.index = 1;
  a.pixel = Vec2{320, 240};
  obs.anchors.push_back(a);

  const Image img = annotate_frame(obs);
  const Rgb center = img.at(320, 240);
  CHECK(center.r == colors::kRed.r);
  CHECK(center.g == colors::kRed.g);
  CHECK(center.b == colors::kRed.b);
  const Rgb off = img.at(320, 260);
  CHECK(off.r == colors::kBackground.r);
}

TEST_CASE("annotation and encoding are byte-deterministic") {
  const AnnotatedObservation obs = fixture_observation();
  const std::string a = encode_png(annotate_frame(obs));
  const std::string b = encode_png(annotate_frame(obs));
  CHECK(a == b);
  // PNG signature and IHDR dimensions.
  REQUIRE(a.size() > 33);
  CHECK(static_cast<unsigned char>(a[0]) == 0x89);
  CHECK(a.substr(1, 3) == "PNG");
  const auto be32 = [&](size_t off) {
    return (static_cast<uint32_t>(static_cast<unsigned char>(a[off])) << 24) |
           (static_cast<uint32_t>(static_cast<unsigned char>(a[off + 1])) << 16) |
           (static_cast<uint32_t>(static_cast<unsigned char>(a[off + 2])) << 8) |
           static_cast<uint32_t>(static_cast<unsigned char>(a[off + 3]));
  };
  CHECK(be32(16) == 320);  // width
  CHECK(be32(20) == 240);  // height
}

TEST_CASE("fixture frame matches the frozen golden image") {
  const std::string png = encode_png(annotate_frame(fixture_observation()));
  const std::string path = golden_path("frame_fixture.png");
  if (update_golden()) {
    write_file(path, png);
  }
  const std::string golden = read_file(path);
  REQUIRE_MESSAGE(!golden.empty(),
                  "golden missing; run with ANCHORNAV_UPDATE_GOLDEN=1");
  CHECK(png == golden);
}

TEST_CASE("base64 encodes the usual vectors") {
  CHECK(base64_encode("") == "");
  CHECK(base64_encode("f") == "Zg==");
  CHECK(base64_encode("fo") == "Zm8=");
  CHECK(base64_encode("foo") == "Zm9v");
  CHECK(base64_encode("foobar") == "Zm9vYmFy");
}
