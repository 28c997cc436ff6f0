#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latch/arrangement.hpp"
#include "latch/datasets.hpp"
#include "latch/descriptor.hpp"
#include "latch/detector.hpp"
#include "latch/learning.hpp"

namespace latch {

struct ScoredPair {
  double distance = 0.0;
  bool same = false;
};

struct VerifyOptions {
  int descriptor_bytes = 32;
  // Smoothing for the 1x1 variant (patch size 1 only); 0 disables.
  float smoothing_sigma = 0.f;
};

// Hamming distance between the descriptors of each pair's two windows
// (center crop, orientation 0).
std::vector<ScoredPair> verify_pairs(const LabeledPairSet& set, const ArrangementSet& arrs,
                                     const VerifyOptions& opts = {});

// Descriptors of every window in the set, in window order.
std::vector<std::vector<std::uint8_t>> describe_windows(const LabeledPairSet& set,
                                                        const ArrangementSet& arrs,
                                                        const VerifyOptions& opts = {});

struct RocPoint {
  double threshold = 0.0;  // predict "same" iff distance <= threshold
  double fpr = 0.0;
  double tpr = 0.0;
};

// Starts at (0,0) (threshold below every distance) and ends at (1,1).
struct RocCurve {
  std::vector<RocPoint> points;
};

struct RocMetrics {
  RocCurve curve;
  double auc = 0.0;
  double best_accuracy = 0.0;  // max over thresholds on this set
  double best_threshold = 0.0;
  // Accuracy at a threshold learned elsewhere, when one is supplied.
  std::optional<double> train_threshold;
  std::optional<double> train_accuracy;
  double err95 = 0.0;  // 100 * FPR at the smallest threshold with TPR >= 0.95
};

RocMetrics roc_metrics(std::span<const ScoredPair> scored,
                       std::optional<double> train_threshold = std::nullopt);

double accuracy_at(std::span<const ScoredPair> scored, double threshold);

// Threshold maximizing accuracy; ties resolved to the smallest threshold.
double learn_threshold(std::span<const ScoredPair> scored);

struct PrPoint {
  std::uint32_t threshold = 0;
  double recall = 0.0;
  double one_minus_precision = 0.0;
  std::size_t retrieved = 0;
  std::size_t correct = 0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // one per Hamming threshold 0..bits
  std::size_t ground_truth = 0;
  double auc = 0.0;
};

// One image pair's recall vs 1-precision curve. A keypoint pair is a
// correspondence iff |H a - b| <= eps; candidates are nearest-neighbour
// matches of image-a descriptors in image b, swept over the distance
// threshold. AUC integrates recall over the running maximum of 1-precision.
PrCurve pr_curve(const std::vector<BinaryDescriptor>& a, const std::vector<BinaryDescriptor>& b,
                 const Homography& h, double eps, const std::string& pair_name = "");

struct OxfordConfig {
  HarrisOptions detector;
  ExtractOptions extract;
  double eps = 2.5;
};

struct OxfordResult {
  std::string name;
  std::array<PrCurve, 5> curves;  // image 1 vs image j+2
  double mean_auc = 0.0;
};

OxfordResult oxford_eval(const OxfordSet& set, const ArrangementSet& arrs,
                         const OxfordConfig& config = {});

void write_roc_csv(std::ostream& out, const RocCurve& curve);
void write_pr_csv(std::ostream& out, const PrCurve& curve);

}  // namespace latch
