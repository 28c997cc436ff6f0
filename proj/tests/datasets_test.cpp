#include <gtest/gtest.h>

#include <fstream>

#include "latch/datasets.hpp"
#include "latch/error.hpp"
#include "latch/image_io.hpp"
#include "latch/rng.hpp"
#include "latch/synthetic.hpp"
#include "test_util.hpp"

namespace latch {
namespace {

using testing::TempDir;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

GrayImage numbered_patch(int n) {
  return testing::make_image(64, 64, [n](int x, int y) { return (n * 7 + x + 2 * y) % 256; });
}

TEST(Brown, SamePatchPairAndLabels) {
  TempDir dir;
  GrayImage mosaic(1024, 1024, 0);
  for (int cell = 0; cell < 3; ++cell) {
    const auto p = numbered_patch(cell);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) mosaic((cell % 16) * 64 + x, (cell / 16) * 64 + y) = p(x, y);
  }
  save_pgm(dir.file("patches0000.pgm"), mosaic);
  write_text(dir.file("info.txt"), "10 0\n10 0\n11 0\n");
  write_text(dir.file("m50_3_0.txt"), "0 10 0 0 10 0\n0 10 0 2 11 0\n1 10 0 0 10 0\n");
  const auto set = load_brown(dir.path().string());
  ASSERT_EQ(set.pairs.size(), 3u);
  EXPECT_TRUE(set.pairs[0].same);
  EXPECT_EQ(set.pairs[0].a, set.pairs[0].b);
  EXPECT_FALSE(set.pairs[1].same);
  EXPECT_TRUE(set.pairs[2].same);
  EXPECT_EQ(set.same_count(), 2u);
  ASSERT_EQ(set.windows.size(), 3u);
  for (std::size_t i = 0; i < set.windows.size(); ++i)
    EXPECT_EQ(set.windows[i], numbered_patch(static_cast<int>(set.patch_ids[i])));
}

TEST(Brown, RoundTripAcrossMosaicsWithPadding) {
  TempDir dir;
  std::vector<GrayImage> patches;
  std::vector<std::uint32_t> points;
  for (int i = 0; i < 300; ++i) {
    patches.push_back(numbered_patch(i));
    points.push_back(static_cast<std::uint32_t>(i / 3));
  }
  std::vector<LabeledPair> pairs{{0, 1, true}, {299, 3, false}, {256, 257, true}, {100, 200, false}};
  write_brown(dir.path().string(), patches, points, pairs, "m50_4_0.txt");
  write_text(dir.file("m50_9_9.txt"), "0 0 0 1 0 0\n");  // sorts after m50_4
  const auto set = load_brown(dir.path().string());
  ASSERT_EQ(set.pairs.size(), 4u);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(set.patch_ids[set.pairs[i].a], pairs[i].a);
    EXPECT_EQ(set.patch_ids[set.pairs[i].b], pairs[i].b);
    EXPECT_EQ(set.pairs[i].same, pairs[i].same);
    EXPECT_EQ(set.windows[set.pairs[i].a], patches[pairs[i].a]);
  }
  EXPECT_NO_THROW(set.validate());

  BrownOptions opts;
  opts.match_file = "m50_9_9.txt";
  EXPECT_EQ(load_brown(dir.path().string(), opts).pairs.size(), 1u);
  opts = {};
  opts.max_pairs = 2;
  EXPECT_EQ(load_brown(dir.path().string(), opts).pairs.size(), 2u);
}

TEST(Brown, DescriptiveErrors) {
  TempDir dir;
  EXPECT_THROW(load_brown(dir.file("nope")), LoadError);
  write_text(dir.file("info.txt"), "1 0\n2 0\n");
  EXPECT_THROW(load_brown(dir.path().string()), LoadError);  // no match file
  write_text(dir.file("m50_1_0.txt"), "0 1 0 5 2 0\n");
  try {
    load_brown(dir.path().string());
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("patch id 5 out of range"), std::string::npos);
  }
  write_text(dir.file("m50_1_0.txt"), "0 1 0 1 2 0\n");
  EXPECT_THROW(load_brown(dir.path().string()), LoadError);  // no mosaic
  save_pgm(dir.file("patches0000.pgm"), GrayImage(512, 1024, 0));
  try {
    load_brown(dir.path().string());
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("1024x1024"), std::string::npos);
  }
  write_text(dir.file("m50_1_0.txt"), "0 1 0 1\n");
  EXPECT_THROW(load_brown(dir.path().string()), LoadError);
}

TEST(Homography, NormalizationAndSingularity) {
  const Homography h({2, 0, 4, 0, 2, 6, 0, 0, 2});
  EXPECT_DOUBLE_EQ(h(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(h(1, 2), 3.0);
  EXPECT_DOUBLE_EQ(h(2, 2), 1.0);
  EXPECT_THROW(Homography({1, 2, 3, 2, 4, 6, 0, 0, 1}), ArgumentError);
}

TEST(Project, IdentityTranslationScale) {
  const Point2d p{3.5, -2};
  const auto id = project(Homography(), p);
  EXPECT_EQ(id.x, 3.5);
  EXPECT_EQ(id.y, -2);
  const auto t = project(Homography({1, 0, 10, 0, 1, -4, 0, 0, 1}), p);
  EXPECT_DOUBLE_EQ(t.x, 13.5);
  EXPECT_DOUBLE_EQ(t.y, -6);
  EXPECT_THROW(project(Homography({1, 0, 0, 0, 1, 0, 1, 0, 1}), {-1, 0}), ArgumentError);
}

TEST(Project, InverseCompositionOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::array<double, 9> m{};
    for (int i = 0; i < 9; ++i) m[i] = (i % 4 == 0 ? 1.0 : 0.0) + (rng.uniform01() - 0.5) * 0.4;
    m[6] *= 1e-3;
    m[7] *= 1e-3;
    const Homography h(m);
    const Homography inv = h.inverse();
    const Point2d p{rng.uniform01() * 640, rng.uniform01() * 480};
    const Point2d back = project(inv, project(h, p));
    ASSERT_NEAR(back.x, p.x, 1e-9);
    ASSERT_NEAR(back.y, p.y, 1e-9);
    const Homography both = inv * h;
    ASSERT_NEAR(both(0, 0), 1.0, 1e-9);
    ASSERT_NEAR(both(0, 1), 0.0, 1e-9);
  }
}

TEST(Oxford, LoadsIdentityAndScale) {
  TempDir dir;
  for (int i = 1; i <= 6; ++i) save_pgm(dir.file("img" + std::to_string(i) + ".pgm"), GrayImage(80, 60, i));
  write_text(dir.file("H1to2p"), "1 0 0\n0 1 0\n0 0 1\n");
  write_text(dir.file("H1to3p"), "2 0 0 0 2 0 0 0 1");
  for (int j = 4; j <= 6; ++j) write_text(dir.file("H1to" + std::to_string(j) + "p"), "1 0 0 0 1 0 0 0 1\n");
  const auto set = load_oxford(dir.path().string());
  EXPECT_EQ(set.images[5](0, 0), 6);
  const auto same = project(set.homographies[0], {7, 9});
  EXPECT_EQ(same.x, 7);
  const auto scaled = project(set.homographies[1], {1, 1});
  EXPECT_DOUBLE_EQ(scaled.x, 2);
  EXPECT_DOUBLE_EQ(scaled.y, 2);
}

TEST(Oxford, MissingOrSingularHomography) {
  TempDir dir;
  for (int i = 1; i <= 6; ++i) save_pgm(dir.file("img" + std::to_string(i) + ".pgm"), GrayImage(8, 8, 0));
  for (int j = 2; j <= 5; ++j) write_text(dir.file("H1to" + std::to_string(j) + "p"), "1 0 0 0 1 0 0 0 1\n");
  try {
    load_oxford(dir.path().string());
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("H1to6p"), std::string::npos);
  }
  write_text(dir.file("H1to6p"), "0 0 0 0 0 0 0 0 1\n");
  EXPECT_THROW(load_oxford(dir.path().string()), LoadError);
}

TEST(Oxford, SyntheticSequenceRoundTrip) {
  TempDir dir;
  synthetic::SequenceOptions opts;
  opts.width = 160;
  opts.height = 128;
  opts.name = "tiny";
  const auto seq = synthetic::make_sequence(opts);
  synthetic::write_oxford(dir.path().string(), seq);
  const auto back = load_oxford(dir.path().string());
  for (int i = 0; i < 6; ++i) EXPECT_EQ(back.images[i], seq.images[i]);
  for (int j = 0; j < 5; ++j)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(back.homographies[j](r, c), seq.homographies[j](r, c));
}

}  // namespace
}  // namespace latch
