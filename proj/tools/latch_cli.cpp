#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latch/datasets.hpp"
#include "latch/descriptor.hpp"
#include "latch/detector.hpp"
#include "latch/error.hpp"
#include "latch/evaluation.hpp"
#include "latch/image_io.hpp"
#include "latch/learning.hpp"
#include "latch/matching.hpp"
#include "latch/parallel.hpp"
#include "latch/synthetic.hpp"

namespace fs = std::filesystem;
using namespace latch;

namespace {

enum Exit { kOk = 0, kEvalFailure = 1, kUsage = 2 };

std::string default_arrangement_path() {
  for (const char* dir : {LATCH_SOURCE_DATA_DIR, LATCH_INSTALL_DATA_DIR}) {
    const fs::path p = fs::path(dir) / "latch_default.arr";
    if (fs::exists(p)) return p.string();
  }
  throw ConfigError("no --arrangement given and the default arrangement was not found in " +
                    std::string(LATCH_SOURCE_DATA_DIR) + " or " + LATCH_INSTALL_DATA_DIR);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write " + path);
  return out;
}

// Options shared by extract, bench and eval.
struct DescriptorFlags {
  int bytes = 32;
  int patch = 7;
  int window = 48;
  float sigma = 0.f;
  bool no_rotation = false;
  bool use_scale = false;
  std::string arrangement;

  void add(CLI::App* app) {
    app->add_option("--bytes", bytes, "descriptor length in bytes")
        ->check(CLI::IsMember({4, 8, 16, 32, 64}));
    app->add_option("--patch", patch, "patch side k (odd)")
        ->check(CLI::IsMember({1, 3, 5, 7, 9, 11, 13, 15}));
    app->add_option("--window", window, "window side in pixels");
    app->add_option("--sigma", sigma, "pixel smoothing for the 1x1 variant (patch 1 only)");
    app->add_flag("--no-rotation", no_rotation, "sample windows axis-aligned");
    app->add_flag("--use-scale", use_scale, "scale windows by keypoint scale");
    app->add_option("--arrangement", arrangement, "LATCH-ARR file (default: shipped arrangement)");
  }

  ExtractOptions options() const {
    ExtractOptions o;
    o.descriptor_bytes = bytes;
    o.patch_size = patch;
    o.window_side = window;
    o.rotation_invariant = !no_rotation;
    o.use_scale = use_scale;
    o.smoothing_sigma = sigma;
    return o;
  }

  ArrangementSet load() const {
    if (sigma > 0.f && patch != 1) throw ConfigError("--sigma applies to --patch 1 only");
    const auto arrs = read_arrangement_file(arrangement.empty() ? default_arrangement_path()
                                                                : arrangement);
    if (arrs.patch_size() != patch || arrs.window_side() != window)
      throw ConfigError("arrangement was learned for k=" + std::to_string(arrs.patch_size()) +
                        ", window " + std::to_string(arrs.window_side()) +
                        " but --patch " + std::to_string(patch) + " --window " +
                        std::to_string(window) + " was requested");
    if (bytes * 8 > arrs.bits())
      throw ConfigError("--bytes " + std::to_string(bytes) + " needs " +
                        std::to_string(bytes * 8) + " triplets; the arrangement has " +
                        std::to_string(arrs.bits()));
    return arrs;
  }
};

struct DetectFlags {
  int max_keypoints = 1000;
  int levels = 3;
  float k_harris = 0.04f;
  bool no_orientation = false;

  void add(CLI::App* app) {
    app->add_option("--max-keypoints", max_keypoints)->check(CLI::PositiveNumber);
    app->add_option("--levels", levels)->check(CLI::PositiveNumber);
    app->add_option("--harris-k", k_harris);
    app->add_flag("--no-orientation", no_orientation, "leave orientations at 0");
  }

  HarrisOptions options() const {
    HarrisOptions o;
    o.max_keypoints = max_keypoints;
    o.levels = levels;
    o.k_harris = k_harris;
    o.compute_orientation = !no_orientation;
    return o;
  }
};

ExtractResult run_extract(const GrayImage& img, const std::vector<Keypoint>& kps,
                          const ArrangementSet& arrs, const ExtractOptions& o) {
  if (o.patch_size == 1 && o.smoothing_sigma > 0.f) {
    ExtractOptions plain = o;
    plain.smoothing_sigma = 0.f;
    return extract_pixel_variant(img, kps, arrs, o.smoothing_sigma, plain);
  }
  return extract(img, kps, arrs, o);
}

void print_metrics(std::ostream& out, const std::string& name, const RocMetrics& m) {
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(16) << "set" << name << '\n';
  out << std::setw(16) << "auc" << m.auc << '\n';
  out << std::setw(16) << "best_accuracy" << m.best_accuracy << " (threshold "
      << m.best_threshold << ")\n";
  if (m.train_accuracy)
    out << std::setw(16) << "train_accuracy" << *m.train_accuracy << " (threshold "
        << *m.train_threshold << ")\n";
  out << std::setw(16) << "err95" << m.err95 << '\n';
  out.unsetf(std::ios::floatfield);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LATCH binary descriptor toolkit"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker thread cap (0 = all cores)");

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "multi-scale Harris keypoints");
  std::string detect_image, detect_out;
  DetectFlags detect_flags;
  detect_cmd->add_option("image", detect_image)->required();
  detect_cmd->add_option("-o,--output", detect_out)->required();
  detect_flags.add(detect_cmd);

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "compute descriptors at keypoints");
  std::string extract_image, extract_kps, extract_out, orientation_source = "file";
  DescriptorFlags extract_flags;
  extract_cmd->add_option("image", extract_image)->required();
  extract_cmd->add_option("keypoints", extract_kps)->required();
  extract_cmd->add_option("-o,--output", extract_out)->required();
  extract_cmd->add_option("--orientation", orientation_source,
                          "file: keep keypoint-file angles; centroid: recompute")
      ->check(CLI::IsMember({"file", "centroid"}));
  extract_flags.add(extract_cmd);

  // learn
  auto* learn_cmd = app.add_subcommand("learn", "learn a triplet arrangement");
  std::string brown_dir, match_file, learn_out, report_path, strategy = "combined";
  LearnOptions learn;
  learn.candidates = 56000;
  std::size_t learn_pairs = 0;
  float learn_sigma = 0.f;
  learn_cmd->add_option("--brown-dir", brown_dir)->required();
  learn_cmd->add_option("--match-file", match_file, "m50_*.txt inside --brown-dir");
  learn_cmd->add_option("--strategy", strategy)
      ->check(CLI::IsMember({"random", "unsupervised", "proposed", "combined"}));
  learn_cmd->add_option("--candidates", learn.candidates)->check(CLI::PositiveNumber);
  learn_cmd->add_option("--pairs", learn_pairs, "use the first N pairs (0 = all)");
  learn_cmd->add_option("--tau", learn.tau);
  learn_cmd->add_option("--seed", learn.seed);
  learn_cmd->add_option("--bits", learn.bits)->check(CLI::PositiveNumber);
  learn_cmd->add_option("--patch", learn.patch_size)
      ->check(CLI::IsMember({1, 3, 5, 7, 9, 11, 13, 15}));
  learn_cmd->add_option("--window", learn.window_side);
  learn_cmd->add_option("--sigma", learn_sigma, "smooth windows first (1x1 variant)");
  learn_cmd->add_option("-o,--output", learn_out)->required();
  learn_cmd->add_option("--report", report_path, "selection report (default: <output>.report)");

  // match
  auto* match_cmd = app.add_subcommand("match", "brute-force Hamming matching");
  std::string match_a, match_b, match_out, match_mode = "knn2";
  double ratio = 0.99;
  bool no_ratio = false, cross_check = false;
  std::uint32_t max_distance = 0;
  match_cmd->add_option("query", match_a)->required();
  match_cmd->add_option("train", match_b)->required();
  match_cmd->add_option("-o,--output", match_out, "CSV (default: stdout)");
  match_cmd->add_option("--mode", match_mode)->check(CLI::IsMember({"nn", "knn2"}));
  auto* ratio_opt = match_cmd->add_option("--ratio", ratio, "keep d1 < ratio * d2 (knn2)");
  match_cmd->add_flag("--no-ratio", no_ratio)->excludes(ratio_opt);
  match_cmd->add_flag("--cross-check", cross_check);
  auto* max_opt = match_cmd->add_option("--max-distance", max_distance);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "benchmark protocols");
  eval_cmd->require_subcommand(1);
  auto* brown_cmd = eval_cmd->add_subcommand("brown", "same/not-same verification");
  std::string eval_dir, eval_match, train_dir, train_match, roc_csv, summary_csv;
  std::size_t eval_pairs = 0;
  DescriptorFlags brown_flags;
  brown_cmd->add_option("--brown-dir", eval_dir, "evaluation set")->required();
  brown_cmd->add_option("--match-file", eval_match);
  brown_cmd->add_option("--pairs", eval_pairs, "use the first N pairs (0 = all)");
  brown_cmd->add_option("--train-dir", train_dir, "set used to learn the decision threshold");
  brown_cmd->add_option("--train-match-file", train_match);
  brown_cmd->add_option("--roc-csv", roc_csv);
  brown_cmd->add_option("--summary-csv", summary_csv);
  brown_flags.add(brown_cmd);

  auto* oxford_cmd = eval_cmd->add_subcommand("oxford", "recall vs 1-precision matching");
  std::vector<std::string> oxford_dirs;
  std::string curve_dir, oxford_summary;
  double eps = 2.5;
  DescriptorFlags oxford_flags;
  DetectFlags oxford_detect;
  oxford_cmd->add_option("--oxford-dir", oxford_dirs, "image set directory (repeatable)")
      ->required();
  oxford_cmd->add_option("--eps", eps, "correspondence tolerance in pixels");
  oxford_cmd->add_option("--curve-dir", curve_dir, "write <set>_1-<j>.csv curves here");
  oxford_cmd->add_option("--summary-csv", oxford_summary);
  oxford_flags.add(oxford_cmd);
  oxford_detect.add(oxford_cmd);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "time descriptor extraction");
  std::string bench_image, bench_kps;
  int repetitions = 5;
  DescriptorFlags bench_flags;
  DetectFlags bench_detect;
  bench_detect.max_keypoints = 10000;
  bench_cmd->add_option("image", bench_image)->required();
  bench_cmd->add_option("--keypoints", bench_kps, "keypoint file (default: detect)");
  bench_cmd->add_option("--repetitions", repetitions);
  bench_flags.add(bench_cmd);
  bench_detect.add(bench_cmd);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "write synthetic datasets");
  synth_cmd->require_subcommand(1);
  auto* synth_brown = synth_cmd->add_subcommand("brown", "Brown-layout patch pairs");
  std::string synth_out;
  synthetic::PatchSetOptions patch_opts;
  synth_brown->add_option("-o,--output", synth_out)->required();
  synth_brown->add_option("--points", patch_opts.points);
  synth_brown->add_option("--views", patch_opts.views_per_point);
  synth_brown->add_option("--pairs", patch_opts.pairs);
  synth_brown->add_option("--seed", patch_opts.seed);
  synth_brown->add_option("--rotation-sigma", patch_opts.rotation_sigma_deg, "degrees");
  synth_brown->add_option("--log-scale-sigma", patch_opts.log_scale_sigma);
  synth_brown->add_option("--shear-sigma", patch_opts.shear_sigma);
  synth_brown->add_option("--shift-sigma", patch_opts.shift_sigma, "pixels");
  synth_brown->add_option("--gain-range", patch_opts.gain_range);
  synth_brown->add_option("--bias-range", patch_opts.bias_range);
  synth_brown->add_option("--noise", patch_opts.noise_sigma);
  synth_brown->add_option("--max-blur", patch_opts.max_blur_sigma);
  auto* synth_oxford = synth_cmd->add_subcommand("oxford", "six-image homography sequence");
  synthetic::SequenceOptions seq_opts;
  std::string degradation = "blur";
  synth_oxford->add_option("-o,--output", synth_out)->required();
  synth_oxford->add_option("--degradation", degradation)->check(CLI::IsMember({"blur", "light"}));
  synth_oxford->add_option("--seed", seq_opts.seed);
  synth_oxford->add_option("--width", seq_opts.width);
  synth_oxford->add_option("--height", seq_opts.height);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    set_max_threads(threads);

    if (*detect_cmd) {
      const GrayImage img = load_image(detect_image);
      write_keypoints_file(detect_out, harris_detect(img, detect_flags.options()));
      return kOk;
    }

    if (*extract_cmd) {
      const auto arrs = extract_flags.load();
      const GrayImage img = load_image(extract_image);
      auto kps = read_keypoints_file(extract_kps);
      if (orientation_source == "centroid")
        for (auto& kp : kps) {
          try {
            kp.orientation = intensity_centroid_orientation(img, kp, 15);
          } catch (const BoundsError&) {
            // Such a keypoint is skipped by extraction anyway.
          }
        }
      const auto res = run_extract(img, kps, arrs, extract_flags.options());
      write_descriptor_file(extract_out, res.descriptors,
                            static_cast<std::uint32_t>(extract_flags.bytes));
      std::cerr << "extracted " << res.descriptors.size() << " descriptors, skipped "
                << res.skipped << " keypoints\n";
      return kOk;
    }

    if (*learn_cmd) {
      learn.strategy = parse_strategy(strategy);
      BrownOptions bo;
      bo.match_file = match_file;
      bo.max_pairs = learn_pairs;
      LabeledPairSet set = load_brown(brown_dir, bo);
      if (learn_sigma > 0.f) set = smooth_windows(set, learn_sigma);
      std::cerr << "learning on " << set.pairs.size() << " pairs (" << set.same_count()
                << " same), " << set.windows.size() << " windows\n";
      const auto result = learn_arrangement(set, learn);
      write_arrangement_file(learn_out, result.arrangement);
      auto report = open_out(report_path.empty() ? learn_out + ".report" : report_path);
      write_selection_report(report, result, learn, set);
      if (result.selection.relaxed)
        std::cerr << "note: decorrelation accepted only " << result.selection.accepted_by_filter
                  << " triplets; the rest were filled in score order\n";
      return kOk;
    }

    if (*match_cmd) {
      std::uint32_t width_a = 0, width_b = 0;
      const auto queries = read_descriptor_file(match_a, &width_a);
      const auto train = read_descriptor_file(match_b, &width_b);
      std::vector<Match> matches;
      if (!queries.empty()) {
        MatchOptions mo;
        mo.mode = match_mode == "knn2" ? MatchMode::TwoNearest : MatchMode::Nearest;
        if (!no_ratio && mo.mode == MatchMode::TwoNearest) mo.ratio = ratio;
        mo.cross_check = cross_check;
        if (*max_opt) mo.max_distance = max_distance;
        matches = match_brute_force(queries, train, mo);
      }
      if (match_out.empty()) {
        write_matches_csv(std::cout, matches);
      } else {
        auto out = open_out(match_out);
        write_matches_csv(out, matches);
      }
      return kOk;
    }

    if (*brown_cmd) {
      const auto arrs = brown_flags.load();
      VerifyOptions vo;
      vo.descriptor_bytes = brown_flags.bytes;
      vo.smoothing_sigma = brown_flags.sigma;
      BrownOptions bo;
      bo.match_file = eval_match;
      bo.max_pairs = eval_pairs;
      const auto scored = verify_pairs(load_brown(eval_dir, bo), arrs, vo);
      std::optional<double> theta;
      if (!train_dir.empty()) {
        BrownOptions to;
        to.match_file = train_match;
        const auto train_scored = verify_pairs(load_brown(train_dir, to), arrs, vo);
        try {
          theta = learn_threshold(train_scored);
        } catch (const ArgumentError& e) {
          throw EvaluationError(std::string("training set: ") + e.what());
        }
      }
      RocMetrics m;
      try {
        m = roc_metrics(scored, theta);
      } catch (const ArgumentError& e) {
        throw EvaluationError(e.what());
      }
      print_metrics(std::cout, fs::path(eval_dir).filename().string(), m);
      if (!roc_csv.empty()) {
        auto out = open_out(roc_csv);
        write_roc_csv(out, m.curve);
      }
      if (!summary_csv.empty()) {
        auto out = open_out(summary_csv);
        out << "set,bytes,patch,auc,best_accuracy,train_accuracy,err95\n"
            << fs::path(eval_dir).filename().string() << ',' << brown_flags.bytes << ','
            << brown_flags.patch << ',' << m.auc << ',' << m.best_accuracy << ','
            << (m.train_accuracy ? std::to_string(*m.train_accuracy) : "") << ',' << m.err95
            << '\n';
      }
      return kOk;
    }

    if (*oxford_cmd) {
      OxfordConfig config;
      config.detector = oxford_detect.options();
      config.extract = oxford_flags.options();
      config.eps = eps;
      const auto arrs = oxford_flags.load();
      if (!curve_dir.empty()) fs::create_directories(curve_dir);
      std::ofstream summary;
      if (!oxford_summary.empty()) {
        summary = open_out(oxford_summary);
        summary << "set,pair,auc,ground_truth,max_recall\n";
      }
      std::cout << std::left << std::setw(12) << "set" << std::setw(8) << "pair"
                << std::setw(10) << "auc" << std::setw(8) << "gt" << "max_recall\n";
      for (const auto& dir : oxford_dirs) {
        const auto set = load_oxford(dir);
        const auto result = oxford_eval(set, arrs, config);
        for (int j = 0; j < 5; ++j) {
          const auto& c = result.curves[j];
          const std::string pair = "1-" + std::to_string(j + 2);
          const double max_recall = c.points.empty() ? 0.0 : c.points.back().recall;
          std::cout << std::setw(12) << set.name << std::setw(8) << pair << std::fixed
                    << std::setprecision(4) << std::setw(10) << c.auc << std::setw(8)
                    << c.ground_truth << max_recall << '\n';
          std::cout.unsetf(std::ios::floatfield);
          if (summary) summary << set.name << ',' << pair << ',' << c.auc << ','
                               << c.ground_truth << ',' << max_recall << '\n';
          if (!curve_dir.empty()) {
            auto out = open_out((fs::path(curve_dir) / (set.name + "_" + pair + ".csv")).string());
            write_pr_csv(out, c);
          }
        }
        std::cout << std::setw(12) << set.name << std::setw(8) << "mean" << std::fixed
                  << std::setprecision(4) << result.mean_auc << '\n';
        std::cout.unsetf(std::ios::floatfield);
        if (summary) summary << set.name << ",mean," << result.mean_auc << ",,\n";
      }
      return kOk;
    }

    if (*bench_cmd) {
      if (repetitions < 1) throw ArgumentError("--repetitions must be >= 1");
      const auto arrs = bench_flags.load();
      const GrayImage img = load_image(bench_image);
      const auto kps = bench_kps.empty() ? harris_detect(img, bench_detect.options())
                                         : read_keypoints_file(bench_kps);
      const auto opts = bench_flags.options();
      const auto warm = run_extract(img, kps, arrs, opts);  // excluded from timing
      if (warm.descriptors.empty()) throw ArgumentError("no keypoint yields a descriptor");
      const auto start = std::chrono::steady_clock::now();
      std::size_t described = 0;
      for (int r = 0; r < repetitions; ++r) described += run_extract(img, kps, arrs, opts).descriptors.size();
      const std::chrono::duration<double, std::milli> elapsed =
          std::chrono::steady_clock::now() - start;
      std::cout << "descriptors " << warm.descriptors.size() << "\nrepetitions " << repetitions
                << "\nthreads " << max_threads() << "\nmean_ms_per_descriptor "
                << elapsed.count() / static_cast<double>(described) << '\n';
      return kOk;
    }

    if (*synth_brown) {
      const auto p = synthetic::make_patch_set(patch_opts);
      write_brown(synth_out, p.patches, p.point_ids, p.pairs,
                  "m50_" + std::to_string(p.pairs.size()) + "_0.txt");
      std::cerr << "wrote " << p.patches.size() << " patches and " << p.pairs.size()
                << " pairs to " << synth_out << '\n';
      return kOk;
    }

    if (*synth_oxford) {
      seq_opts.degradation =
          degradation == "blur" ? synthetic::Degradation::Blur : synthetic::Degradation::Light;
      seq_opts.name = fs::path(synth_out).filename().string();
      synthetic::write_oxford(synth_out, synthetic::make_sequence(seq_opts));
      return kOk;
    }
  } catch (const EvaluationError& e) {
    std::cerr << "evaluation failed: " << e.what() << '\n';
    return kEvalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}
