#include "latch/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "latch/error.hpp"
#include "latch/matching.hpp"
#include "latch/parallel.hpp"

namespace latch {

std::vector<std::vector<std::uint8_t>> describe_windows(const LabeledPairSet& set,
                                                        const ArrangementSet& arrs,
                                                        const VerifyOptions& opts) {
  set.validate();
  const int bits = opts.descriptor_bytes * 8;
  if (bits <= 0 || bits > arrs.bits())
    throw ConfigError("descriptor size exceeds the arrangement");
  if (opts.smoothing_sigma > 0.f && arrs.patch_size() != 1)
    throw ConfigError("smoothing applies to the 1x1 variant only");
  std::vector<std::vector<std::uint8_t>> out(set.windows.size());
  parallel_for(set.windows.size(), 256, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      GrayImage raster = opts.smoothing_sigma > 0.f
                             ? gaussian_smooth(set.windows[i], opts.smoothing_sigma)
                             : set.windows[i];
      out[i] = describe_window(window_from_raster(std::move(raster)), arrs, bits);
    }
  });
  return out;
}

std::vector<ScoredPair> verify_pairs(const LabeledPairSet& set, const ArrangementSet& arrs,
                                     const VerifyOptions& opts) {
  const auto descs = describe_windows(set, arrs, opts);
  std::vector<ScoredPair> out;
  out.reserve(set.pairs.size());
  for (const auto& p : set.pairs)
    out.push_back({static_cast<double>(hamming(descs[p.a], descs[p.b])), p.same});
  return out;
}

namespace {

struct Sweep {
  std::vector<double> thresholds;  // first entry lies below every distance
  std::vector<std::size_t> same_le, not_same_le;
  std::size_t positives = 0, negatives = 0;
};

Sweep sweep(std::span<const ScoredPair> scored) {
  std::vector<ScoredPair> sorted(scored.begin(), scored.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredPair& a, const ScoredPair& b) { return a.distance < b.distance; });
  Sweep s;
  for (const auto& p : sorted) (p.same ? s.positives : s.negatives)++;
  s.thresholds.push_back(sorted.empty() ? 0.0 : sorted.front().distance - 1.0);
  s.same_le.push_back(0);
  s.not_same_le.push_back(0);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    (sorted[i].same ? tp : fp)++;
    if (i + 1 == sorted.size() || sorted[i + 1].distance != sorted[i].distance) {
      s.thresholds.push_back(sorted[i].distance);
      s.same_le.push_back(tp);
      s.not_same_le.push_back(fp);
    }
  }
  return s;
}

void require_both_classes(const Sweep& s) {
  if (s.positives == 0 || s.negatives == 0)
    throw ArgumentError("ROC metrics need at least one pair of each label");
}

}  // namespace

double accuracy_at(std::span<const ScoredPair> scored, double threshold) {
  if (scored.empty()) throw ArgumentError("accuracy_at: no pairs");
  std::size_t correct = 0;
  for (const auto& p : scored) correct += (p.distance <= threshold) == p.same;
  return static_cast<double>(correct) / static_cast<double>(scored.size());
}

RocMetrics roc_metrics(std::span<const ScoredPair> scored, std::optional<double> train_threshold) {
  const Sweep s = sweep(scored);
  require_both_classes(s);
  const double pos = static_cast<double>(s.positives), neg = static_cast<double>(s.negatives);
  RocMetrics m;
  bool err_found = false;
  double best_acc = -1.0;
  for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
    RocPoint pt{s.thresholds[i], s.not_same_le[i] / neg, s.same_le[i] / pos};
    if (i > 0) {
      const auto& prev = m.curve.points.back();
      m.auc += (pt.fpr - prev.fpr) * (pt.tpr + prev.tpr) / 2.0;
    }
    const double acc =
        (static_cast<double>(s.same_le[i]) + (neg - static_cast<double>(s.not_same_le[i]))) /
        (pos + neg);
    if (acc > best_acc) {
      best_acc = acc;
      m.best_threshold = pt.threshold;
    }
    if (!err_found && pt.tpr >= 0.95) {
      m.err95 = 100.0 * pt.fpr;
      err_found = true;
    }
    m.curve.points.push_back(pt);
  }
  m.best_accuracy = best_acc;
  if (train_threshold) {
    m.train_threshold = train_threshold;
    m.train_accuracy = accuracy_at(scored, *train_threshold);
  }
  return m;
}

double learn_threshold(std::span<const ScoredPair> scored) {
  const Sweep s = sweep(scored);
  require_both_classes(s);
  double best = s.thresholds.front();
  std::size_t best_correct = 0;
  for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
    const std::size_t correct = s.same_le[i] + (s.negatives - s.not_same_le[i]);
    if (i == 0 || correct > best_correct) {
      best_correct = correct;
      best = s.thresholds[i];
    }
  }
  return best;
}

PrCurve pr_curve(const std::vector<BinaryDescriptor>& a, const std::vector<BinaryDescriptor>& b,
                 const Homography& h, double eps, const std::string& pair_name) {
  PrCurve curve;
  const std::string label = pair_name.empty() ? std::string("image pair") : pair_name;
  if (a.empty() || b.empty())
    throw EvaluationError(label + ": no descriptors to match");

  // A query counts toward ground truth iff some keypoint in b lies within eps
  // of its projection.
  std::vector<Point2d> projected(a.size());
  std::vector<char> projectable(a.size(), 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    try {
      projected[i] = project(h, {a[i].keypoint.x, a[i].keypoint.y});
    } catch (const ArgumentError&) {
      projectable[i] = 0;
    }
  }
  const double eps2 = eps * eps;
  const auto near = [&](std::size_t i, const Keypoint& kb) {
    if (!projectable[i]) return false;
    const double dx = projected[i].x - kb.x, dy = projected[i].y - kb.y;
    return dx * dx + dy * dy <= eps2;
  };
  for (std::size_t i = 0; i < a.size(); ++i)
    for (const auto& db : b)
      if (near(i, db.keypoint)) {
        ++curve.ground_truth;
        break;
      }
  if (curve.ground_truth == 0)
    throw EvaluationError(label + ": no ground-truth correspondences within eps = " +
                          std::to_string(eps) + " px");

  const auto matches = match_brute_force(a, b, {});
  const std::uint32_t max_bits = static_cast<std::uint32_t>(a.front().bits.size() * 8);
  std::vector<std::size_t> retrieved_at(max_bits + 1, 0), correct_at(max_bits + 1, 0);
  for (const auto& m : matches) {
    ++retrieved_at[m.distance];
    if (near(m.query_index, b[m.train_index].keypoint)) ++correct_at[m.distance];
  }
  std::size_t retrieved = 0, correct = 0;
  double prev_x = 0.0, prev_y = 0.0;
  for (std::uint32_t t = 0; t <= max_bits; ++t) {
    retrieved += retrieved_at[t];
    correct += correct_at[t];
    PrPoint pt;
    pt.threshold = t;
    pt.retrieved = retrieved;
    pt.correct = correct;
    pt.recall = static_cast<double>(correct) / static_cast<double>(curve.ground_truth);
    pt.one_minus_precision =
        retrieved == 0 ? 0.0 : 1.0 - static_cast<double>(correct) / static_cast<double>(retrieved);
    const double x = std::max(prev_x, pt.one_minus_precision);
    curve.auc += (x - prev_x) * (pt.recall + prev_y) / 2.0;
    prev_x = x;
    prev_y = pt.recall;
    curve.points.push_back(pt);
  }
  return curve;
}

OxfordResult oxford_eval(const OxfordSet& set, const ArrangementSet& arrs,
                         const OxfordConfig& config) {
  OxfordResult result;
  result.name = set.name;
  std::array<std::vector<BinaryDescriptor>, 6> descs;
  for (int i = 0; i < 6; ++i) {
    const auto kps = harris_detect(set.images[i], config.detector);
    descs[i] = extract(set.images[i], kps, arrs, config.extract).descriptors;
  }
  double total = 0.0;
  for (int j = 0; j < 5; ++j) {
    const std::string pair_name = set.name + " 1-" + std::to_string(j + 2);
    result.curves[j] = pr_curve(descs[0], descs[j + 1], set.homographies[j], config.eps, pair_name);
    total += result.curves[j].auc;
  }
  result.mean_auc = total / 5.0;
  return result;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,fpr,tpr\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : curve.points) out << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
}

void write_pr_csv(std::ostream& out, const PrCurve& curve) {
  out << "threshold,recall,one_minus_precision\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : curve.points)
    out << p.threshold << ',' << p.recall << ',' << p.one_minus_precision << '\n';
}

}  // namespace latch
