#pragma once

#include "modesheaf/complex.hpp"

namespace modesheaf {

/// A point of the realization of a complex: one nonnegative weight per
/// vertex, summing to 1. Weights below the snap tolerance are rounded to
/// exactly zero on construction and the rest renormalized, so that
/// support and zero tests behave like the ideal strict comparisons.
class BarycentricPoint {
 public:
  BarycentricPoint() = default;

  BarycentricPoint(const Complex& complex, std::vector<double> weights,
                   double snap = kSnapTolerance)
      : complex_(&complex), w_(std::move(weights)) {
    const auto& labels = complex.vertices().labels();
    if (w_.size() != labels.size())
      fail(ErrorCode::SchemaError, "weight count does not match vertex count");
    double sum = 0.0;
    for (double w : w_) {
      if (w < 0.0 && w > -snap) w = 0.0;
      sum += w;
    }
    for (double w : w_)
      if (w < 0.0 && w <= -snap)
        fail(ErrorCode::PartitionAxiom, "negative weight " + std::to_string(w));
    if (std::abs(sum - 1.0) > kSumTolerance)
      fail(ErrorCode::PartitionAxiom,
           "weights sum to " + std::to_string(sum) + ", expected 1");
    for (double& w : w_) {
      if (w < snap) w = 0.0;
    }
    double snapped_sum = 0.0;
    for (double w : w_) snapped_sum += w;
    if (snapped_sum <= 0.0)
      fail(ErrorCode::PartitionAxiom, "all weights snapped to zero");
    if (snapped_sum != 1.0) {
      for (double& w : w_) w /= snapped_sum;
    }
    if (!complex.contains(support()))
      fail(ErrorCode::SupportNotASimplex,
           "support " + support().to_string() + " is not a simplex");
  }

  static BarycentricPoint vertex(const Complex& complex, const Label& l) {
    std::vector<double> w(complex.vertices().size(), 0.0);
    w[complex.vertices().index_of(l)] = 1.0;
    return BarycentricPoint(complex, std::move(w), 0.0);
  }

  const Complex& complex() const { return *complex_; }
  const std::vector<double>& weights() const { return w_; }

  double weight(const Label& l) const { return w_[complex_->vertices().index_of(l)]; }

  /// Strict support: labels with weight > 0 after snapping. This is the
  /// unique simplex whose interior contains the point.
  Simplex support() const {
    std::vector<Label> pos;
    const auto& labels = complex_->vertices().labels();
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i] > 0.0) pos.push_back(labels[i]);
    return Simplex(std::move(pos));
  }

  bool operator==(const BarycentricPoint& o) const {
    return complex_ == o.complex_ && w_ == o.w_;
  }

 private:
  const Complex* complex_ = nullptr;
  std::vector<double> w_;
};

/// The unique simplex X with p in int(Delta_X).
inline Simplex interior_support(const BarycentricPoint& p) { return p.support(); }

/// Belief that the modes in `subset` are relevant: the sum of the
/// subset's weights. Monotone in the subset; belief of the full vertex
/// set is 1.
inline double belief(const BarycentricPoint& p, const Simplex& subset) {
  for (const auto& l : subset.members()) {
    if (!p.complex().vertices().contains(l))
      fail(ErrorCode::UnknownVertex, "'" + l + "' not an ambient vertex");
  }
  double sum = 0.0;
  for (const auto& l : subset.members()) sum += p.weight(l);
  return sum;
}

/// Pushforward of a point along a simplicial map: weights of colliding
/// vertices are summed. Preserves the weight sum up to summation error.
inline BarycentricPoint realize_map(const SimplicialMap& m, const BarycentricPoint& p) {
  const auto& tgt = m.target().vertices();
  std::vector<double> out(tgt.size(), 0.0);
  const auto& src_labels = p.complex().vertices().labels();
  for (std::size_t i = 0; i < src_labels.size(); ++i) {
    double w = p.weights()[i];
    if (w == 0.0) continue;
    out[tgt.index_of(m.apply(src_labels[i]))] += w;
  }
  return BarycentricPoint(m.target(), std::move(out), 0.0);
}

enum class EndpointKind { Interior, Face, FaceIntersection };

struct SegmentClassification {
  Simplex carrier;  // unique simplex whose interior contains the open segment
  Simplex start_support;
  Simplex end_support;
  EndpointKind start_kind = EndpointKind::Interior;
  EndpointKind end_kind = EndpointKind::Interior;
};

/// Classify the straight segment between two points of the same
/// realization. On the open segment every convex combination has support
/// equal to the union of the endpoint supports, so the segment lies in
/// the interior of that union; if the union is not a simplex the segment
/// leaves the complex.
inline SegmentClassification classify_segment(const BarycentricPoint& a,
                                              const BarycentricPoint& b) {
  if (&a.complex() != &b.complex())
    fail(ErrorCode::SchemaError, "segment endpoints live in different complexes");
  Simplex sa = a.support();
  Simplex sb = b.support();
  Simplex carrier = sa.unite(sb);
  if (!a.complex().contains(carrier))
    fail(ErrorCode::SegmentLeavesComplex,
         "support union " + carrier.to_string() + " is not a simplex");

  auto classify_end = [&](const Simplex& s) {
    std::size_t missing = carrier.size() - s.size();
    if (missing == 0) return EndpointKind::Interior;
    if (missing == 1) return EndpointKind::Face;
    return EndpointKind::FaceIntersection;
  };
  return {carrier, sa, sb, classify_end(sa), classify_end(sb)};
}

/// Piecewise-linear path on a realization: waypoints at strictly
/// increasing times.
class PLPath {
 public:
  PLPath() = default;

  void append(double time_s, BarycentricPoint p) {
    if (!points_.empty() && time_s <= points_.back().first)
      fail(ErrorCode::SchemaError, "path times must be strictly increasing");
    points_.emplace_back(time_s, std::move(p));
  }

  const std::vector<std::pair<double, BarycentricPoint>>& waypoints() const {
    return points_;
  }

 private:
  std::vector<std::pair<double, BarycentricPoint>> points_;
};

}  // namespace modesheaf
