#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "latch/datasets.hpp"
#include "latch/descriptor.hpp"
#include "latch/evaluation.hpp"
#include "latch/image_io.hpp"
#include "latch/keypoint.hpp"
#include "latch/learning.hpp"
#include "latch/synthetic.hpp"
#include "test_util.hpp"

namespace latch {
namespace {

using testing::TempDir;

struct CliRun {
  int code = -1;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

CliRun cli(const TempDir& dir, const std::string& args) {
  const std::string out = dir.file("stdout.txt"), err = dir.file("stderr.txt");
  const std::string cmd = std::string(LATCH_CLI) + " " + args + " >" + out + " 2>" + err;
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::size_t data_lines(const std::string& text) {
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') ++n;
  return n;
}

TEST(Cli, DetectConstantAndLimitedAndDeterministic) {
  TempDir dir;
  save_pgm(dir.file("flat.pgm"), GrayImage(200, 200, 128));
  ASSERT_EQ(cli(dir, "detect " + dir.file("flat.pgm") + " -o " + dir.file("flat.kp")).code, 0);
  EXPECT_EQ(data_lines(slurp(dir.file("flat.kp"))), 0u);

  save_pgm(dir.file("scene.pgm"), synthetic::render_scene(400, 300, 1));
  const std::string base = "detect " + dir.file("scene.pgm") + " --max-keypoints 100 -o ";
  ASSERT_EQ(cli(dir, base + dir.file("a.kp")).code, 0);
  ASSERT_EQ(cli(dir, "--threads 1 " + base + dir.file("b.kp")).code, 0);
  const std::string a = slurp(dir.file("a.kp"));
  EXPECT_LE(data_lines(a), 100u);
  EXPECT_GT(data_lines(a), 10u);
  EXPECT_EQ(a, slurp(dir.file("b.kp")));

  const CliRun bad = cli(dir, "detect " + dir.file("missing.pgm") + " -o " + dir.file("x.kp"));
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("missing.pgm"), std::string::npos);
}

TEST(Cli, ExtractDefaultsAndEmptyInput) {
  TempDir dir;
  save_pgm(dir.file("scene.pgm"), synthetic::render_scene(400, 300, 2));
  ASSERT_EQ(cli(dir, "detect " + dir.file("scene.pgm") + " -o " + dir.file("s.kp")).code, 0);
  const std::string head = "extract " + dir.file("scene.pgm") + " " + dir.file("s.kp");
  ASSERT_EQ(cli(dir, head + " -o " + dir.file("d1.bin")).code, 0);
  ASSERT_EQ(cli(dir, head + " --bytes 32 --patch 7 --window 48 -o " + dir.file("d2.bin")).code, 0);
  const CliRun again = cli(dir, head + " -o " + dir.file("d3.bin"));
  ASSERT_EQ(again.code, 0);
  EXPECT_NE(again.err.find("skipped"), std::string::npos);
  EXPECT_EQ(slurp(dir.file("d1.bin")), slurp(dir.file("d2.bin")));
  EXPECT_EQ(slurp(dir.file("d1.bin")), slurp(dir.file("d3.bin")));
  EXPECT_GT(read_descriptor_file(dir.file("d1.bin")).size(), 0u);

  write_keypoints_file(dir.file("none.kp"), {});
  ASSERT_EQ(cli(dir, "extract " + dir.file("scene.pgm") + " " + dir.file("none.kp") + " -o " +
                         dir.file("empty.bin")).code, 0);
  std::uint32_t width = 0;
  EXPECT_EQ(read_descriptor_file(dir.file("empty.bin"), &width).size(), 0u);
  EXPECT_EQ(width, 32u);

  // A 7x7 arrangement cannot serve --patch 5.
  EXPECT_EQ(cli(dir, head + " --patch 5 -o " + dir.file("bad.bin")).code, 2);
}

TEST(Cli, MatchSelfEmptyAndCsv) {
  TempDir dir;
  save_pgm(dir.file("scene.pgm"), synthetic::render_scene(400, 300, 3));
  ASSERT_EQ(cli(dir, "detect " + dir.file("scene.pgm") + " -o " + dir.file("s.kp")).code, 0);
  ASSERT_EQ(cli(dir, "extract " + dir.file("scene.pgm") + " " + dir.file("s.kp") + " -o " +
                         dir.file("d.bin")).code, 0);
  const auto n = read_descriptor_file(dir.file("d.bin")).size();
  const CliRun self = cli(dir, "match " + dir.file("d.bin") + " " + dir.file("d.bin") +
                                " --mode nn --cross-check");
  ASSERT_EQ(self.code, 0);
  std::istringstream lines(self.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "query_index,train_index,distance");
  std::size_t i = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(line, std::to_string(i) + "," + std::to_string(i) + ",0");
    ++i;
  }
  EXPECT_EQ(i, n);

  write_descriptor_file(dir.file("empty.bin"), {}, 32);
  const CliRun empty = cli(dir, "match " + dir.file("empty.bin") + " " + dir.file("d.bin") +
                                 " -o " + dir.file("m.csv"));
  EXPECT_EQ(empty.code, 0);
  EXPECT_EQ(slurp(dir.file("m.csv")), "query_index,train_index,distance\n");
}

synthetic::PatchSet toy_patches(std::uint64_t seed) {
  synthetic::PatchSetOptions o;
  o.points = 30;
  o.pairs = 50;
  o.seed = seed;
  return synthetic::make_patch_set(o);
}

TEST(Cli, LearnMatchesLibraryAndFlagsRelaxation) {
  TempDir dir;
  const auto toy = toy_patches(4);
  write_brown(dir.file("toy"), toy.patches, toy.point_ids, toy.pairs);
  const std::string base = "learn --brown-dir " + dir.file("toy") + " --candidates 300 --bits 64 ";
  ASSERT_EQ(cli(dir, base + "--strategy combined -o " + dir.file("c.arr")).code, 0);

  LearnOptions opts;
  opts.candidates = 300;
  opts.bits = 64;
  const auto oracle = learn_arrangement(load_brown(dir.file("toy")), opts);
  EXPECT_EQ(read_arrangement_file(dir.file("c.arr")), oracle.arrangement);
  EXPECT_NE(slurp(dir.file("c.arr.report")).find("relaxed "), std::string::npos);

  ASSERT_EQ(cli(dir, base + "--strategy combined --tau 0 -o " + dir.file("t.arr") + " --report " +
                         dir.file("t.txt")).code, 0);
  EXPECT_NE(slurp(dir.file("t.txt")).find("relaxed 1"), std::string::npos);

  ASSERT_EQ(cli(dir, "learn --brown-dir " + dir.file("toy") +
                         " --candidates 300 --bits 256 --strategy random -o " + dir.file("r.arr")).code, 0);
  EXPECT_EQ(read_arrangement_file(dir.file("r.arr")).bits(), 256);
  EXPECT_EQ(data_lines(slurp(dir.file("r.arr"))), 257u);  // header + 256

  EXPECT_EQ(cli(dir, "learn --brown-dir " + dir.file("nowhere") + " -o " + dir.file("x.arr")).code, 2);
}

TEST(Cli, EvalBrownMatchesLibraryMetrics) {
  TempDir dir;
  const auto train = toy_patches(5), test = toy_patches(6);
  write_brown(dir.file("train"), train.patches, train.point_ids, train.pairs);
  write_brown(dir.file("test"), test.patches, test.point_ids, test.pairs);
  const CliRun r = cli(dir, "eval brown --brown-dir " + dir.file("test") + " --train-dir " +
                             dir.file("train") + " --summary-csv " + dir.file("s.csv") +
                             " --roc-csv " + dir.file("roc.csv"));
  ASSERT_EQ(r.code, 0) << r.err;

  const auto arrs = read_arrangement_file(LATCH_DATA_DIR "/latch_default.arr");
  const auto scored = verify_pairs(load_brown(dir.file("test")), arrs);
  const double theta = learn_threshold(verify_pairs(load_brown(dir.file("train")), arrs));
  const auto m = roc_metrics(scored, theta);
  std::istringstream csv(slurp(dir.file("s.csv")));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header, "set,bytes,patch,auc,best_accuracy,train_accuracy,err95");
  std::replace(row.begin(), row.end(), ',', ' ');
  std::istringstream fields(row);
  std::string name;
  int bytes, patch;
  double auc, best, train_acc, err95;
  fields >> name >> bytes >> patch >> auc >> best >> train_acc >> err95;
  EXPECT_NEAR(auc, m.auc, 1e-5);
  EXPECT_NEAR(best, m.best_accuracy, 1e-5);
  EXPECT_NEAR(train_acc, *m.train_accuracy, 1e-5);
  EXPECT_NEAR(err95, m.err95, 1e-4);
  EXPECT_EQ(slurp(dir.file("roc.csv")).rfind("threshold,fpr,tpr\n", 0), 0u);

  // Single-class input leaves the metrics undefined.
  std::vector<LabeledPair> same_only{{0, 1, true}};
  write_brown(dir.file("one"), train.patches, train.point_ids, same_only);
  EXPECT_EQ(cli(dir, "eval brown --brown-dir " + dir.file("one")).code, 1);
}

TEST(Cli, EvalOxfordSelfPairAndMissingHomography) {
  TempDir dir;
  synthetic::SequenceOptions o;
  o.width = 320;
  o.height = 256;
  auto seq = synthetic::make_sequence(o);
  seq.images[1] = seq.images[0];
  seq.homographies[0] = Homography();
  synthetic::write_oxford(dir.file("self"), seq);
  const CliRun r = cli(dir, "eval oxford --oxford-dir " + dir.file("self") + " --curve-dir " +
                             dir.file("curves"));
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream curve(slurp(dir.file("curves/self_1-2.csv")));
  std::string line;
  std::getline(curve, line);
  EXPECT_EQ(line, "threshold,recall,one_minus_precision");
  // Identical images: every correspondence is found at distance 0, none wrong.
  std::getline(curve, line);
  EXPECT_EQ(line, "0,1,0");

  std::filesystem::remove(dir.file("self/H1to4p"));
  const CliRun missing = cli(dir, "eval oxford --oxford-dir " + dir.file("self"));
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("H1to4p"), std::string::npos);
}

TEST(Cli, BenchRejectsZeroRepetitions) {
  TempDir dir;
  save_pgm(dir.file("scene.pgm"), synthetic::render_scene(300, 300, 4));
  EXPECT_EQ(cli(dir, "bench " + dir.file("scene.pgm") + " --repetitions 0").code, 2);
  const CliRun ok = cli(dir, "bench " + dir.file("scene.pgm") + " --repetitions 1");
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("mean_ms_per_descriptor"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  TempDir dir;
  EXPECT_EQ(cli(dir, "").code, 2);
  EXPECT_EQ(cli(dir, "frobnicate").code, 2);
  EXPECT_EQ(cli(dir, "extract a b -o c --bytes 12").code, 2);
}

}  // namespace
}  // namespace latch
