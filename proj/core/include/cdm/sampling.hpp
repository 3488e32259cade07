#pragma once

#include "cdm/domain.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace cdm {

enum class PointKind : std::uint8_t { Interior = 0, Outer = 1, Hole = 2 };

/// One Voronoi generator point with its boundary bookkeeping.
struct Generator {
  Vec2 pos;
  PointKind kind = PointKind::Interior;
  /// Hole index for PointKind::Hole, otherwise -1.
  int curve = -1;
  /// Perimeter arclength (Outer) or polar angle in [0, 2pi) (Hole).
  double param = 0.0;
  /// Belongs to the history-bearing physical discretization.
  bool physical = false;
  /// Outer-polygon corner; never evicted.
  bool fixed = false;
  /// Contacts of this point never damage (supports, load points, gauges).
  bool elastic = false;
};

using GeneratorSet = std::vector<Generator>;

std::vector<Vec2> positions(const GeneratorSet& set);

struct SamplingOptions {
  /// Consecutive rejected candidates after which a region counts as saturated.
  int saturation = 500;
  /// Interior points keep at least this fraction of the local spacing from
  /// every boundary curve.
  double boundary_clearance = 0.5;
};

/// Union of disks restricting where points may be added; empty means the
/// whole domain. Points inside an excluded disk are never added.
struct SamplingRegion {
  struct Disk {
    Vec2 center;
    double radius;
  };
  std::vector<Disk> disks;
  std::vector<Disk> excluded;

  bool whole_domain() const { return disks.empty(); }
  bool contains(Vec2 p) const;
};

/// Counter-based PRNG wrapper producing platform-independent doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

/// Dart-throwing sampler with a uniform bucket grid for the spacing test.
///
/// A candidate is accepted when its distance to every accepted point is at
/// least the density value at the candidate.
class PointSampler {
 public:
  PointSampler(const Domain& domain, const DensityField& density,
               SamplingOptions options = {});

  /// Registers an existing point without any spacing test.
  void add_existing(const Generator& g);
  /// Spacing test followed by insertion; returns whether it was accepted.
  bool try_accept(const Generator& g);

  void add_corners();
  /// 1D dart throwing along the outer polygon, restricted to the region.
  void sample_outer(Rng& rng, const SamplingRegion& region);
  /// 1D dart throwing along every hole circle, restricted to the region.
  void sample_holes(Rng& rng, const SamplingRegion& region);
  void sample_interior(Rng& rng, const SamplingRegion& region);

  const GeneratorSet& points() const { return points_; }
  GeneratorSet take() && { return std::move(points_); }
  bool far_enough(Vec2 p, double spacing) const;

 private:
  struct Interval {
    int curve;  // -1 outer polygon, else hole index
    double lo, hi;
  };
  void sample_intervals(Rng& rng, const std::vector<Interval>& intervals,
                        const SamplingRegion& region);
  std::vector<Interval> outer_intervals(const SamplingRegion& region) const;
  std::vector<Interval> hole_intervals(const SamplingRegion& region) const;
  std::size_t cell_of(Vec2 p) const;

  const Domain& domain_;
  const DensityField& density_;
  SamplingOptions options_;
  GeneratorSet points_;
  Vec2 origin_;
  double cell_ = 0.0;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<std::vector<int>> buckets_;
};

/// Draws a maximal point set: polygon corners, then the outer boundary and
/// hole circles, then the interior, each until `saturation` consecutive
/// rejections. Deterministic for a fixed (domain, density, seed).
GeneratorSet sample_generator_points(const Domain& domain, const DensityField& density,
                                     std::uint64_t seed, SamplingOptions options = {});

}  // namespace cdm
