#include "cdm/sampling.hpp"

#include "cdm/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cdm {

std::vector<Vec2> positions(const GeneratorSet& set) {
  std::vector<Vec2> out;
  out.reserve(set.size());
  for (const Generator& g : set) out.push_back(g.pos);
  return out;
}

bool SamplingRegion::contains(Vec2 p) const {
  const auto inside = [&](const Disk& d) { return distance2(p, d.center) <= d.radius * d.radius; };
  if (std::any_of(excluded.begin(), excluded.end(), inside)) return false;
  return disks.empty() || std::any_of(disks.begin(), disks.end(), inside);
}

PointSampler::PointSampler(const Domain& domain, const DensityField& density,
                           SamplingOptions options)
    : domain_(domain), density_(density), options_(options) {
  domain_.validate();
  density_.validate();
  if (options_.saturation <= 0) throw GeometryError("saturation budget must be positive");
  if (std::abs(domain_.nominal_area()) < 1e-300) throw GeometryError("degenerate domain");

  double xmin = domain_.outer[0].x, xmax = xmin, ymin = domain_.outer[0].y, ymax = ymin;
  for (const Vec2 p : domain_.outer) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  cell_ = density_.min_spacing();
  const double extent = std::max(xmax - xmin, ymax - ymin);
  // Cap the bucket count for very fine spacings.
  cell_ = std::max(cell_, extent / 2048.0);
  origin_ = {xmin - cell_, ymin - cell_};
  nx_ = static_cast<std::size_t>((xmax - xmin) / cell_) + 3;
  ny_ = static_cast<std::size_t>((ymax - ymin) / cell_) + 3;
  buckets_.resize(nx_ * ny_);
}

std::size_t PointSampler::cell_of(Vec2 p) const {
  const auto ix = static_cast<std::size_t>(
      std::clamp((p.x - origin_.x) / cell_, 0.0, static_cast<double>(nx_ - 1)));
  const auto iy = static_cast<std::size_t>(
      std::clamp((p.y - origin_.y) / cell_, 0.0, static_cast<double>(ny_ - 1)));
  return iy * nx_ + ix;
}

bool PointSampler::far_enough(Vec2 p, double spacing) const {
  const double r2 = spacing * spacing;
  const auto reach = static_cast<long>(std::ceil(spacing / cell_));
  const long cx = static_cast<long>(std::clamp((p.x - origin_.x) / cell_, 0.0,
                                               static_cast<double>(nx_ - 1)));
  const long cy = static_cast<long>(std::clamp((p.y - origin_.y) / cell_, 0.0,
                                               static_cast<double>(ny_ - 1)));
  for (long iy = std::max(0L, cy - reach); iy <= std::min<long>(ny_ - 1, cy + reach); ++iy) {
    for (long ix = std::max(0L, cx - reach); ix <= std::min<long>(nx_ - 1, cx + reach); ++ix) {
      for (const int k : buckets_[static_cast<std::size_t>(iy) * nx_ + static_cast<std::size_t>(ix)]) {
        if (distance2(p, points_[k].pos) < r2) return false;
      }
    }
  }
  return true;
}

void PointSampler::add_existing(const Generator& g) {
  buckets_[cell_of(g.pos)].push_back(static_cast<int>(points_.size()));
  points_.push_back(g);
}

bool PointSampler::try_accept(const Generator& g) {
  if (!far_enough(g.pos, density_(g.pos))) return false;
  add_existing(g);
  return true;
}

void PointSampler::add_corners() {
  const std::vector<double> acc = domain_.outer_arclengths();
  for (std::size_t i = 0; i < domain_.outer.size(); ++i) {
    Generator g;
    g.pos = domain_.outer[i];
    g.kind = PointKind::Outer;
    g.param = acc[i];
    g.fixed = true;
    const bool present = std::any_of(points_.begin(), points_.end(),
                                     [&](const Generator& q) { return q.pos == g.pos; });
    if (!present) add_existing(g);
  }
}

namespace {

// Parameter interval [t0, t1] of segment a + t (b - a), t in [0, 1], inside a disk.
bool segment_disk(Vec2 a, Vec2 b, Vec2 c, double r, double& t0, double& t1) {
  const Vec2 d = b - a;
  const Vec2 f = a - c;
  const double A = dot(d, d);
  const double B = 2.0 * dot(f, d);
  const double C = dot(f, f) - r * r;
  const double disc = B * B - 4.0 * A * C;
  if (disc <= 0.0) return false;
  const double sq = std::sqrt(disc);
  t0 = std::max(0.0, (-B - sq) / (2.0 * A));
  t1 = std::min(1.0, (-B + sq) / (2.0 * A));
  return t1 > t0;
}

}  // namespace

std::vector<PointSampler::Interval> PointSampler::outer_intervals(
    const SamplingRegion& region) const {
  const std::vector<double> acc = domain_.outer_arclengths();
  std::vector<Interval> out;
  if (region.whole_domain()) {
    out.push_back({-1, 0.0, acc.back()});
    return out;
  }
  const std::size_t n = domain_.outer.size();
  for (std::size_t e = 0; e < n; ++e) {
    const Vec2 a = domain_.outer[e];
    const Vec2 b = domain_.outer[(e + 1) % n];
    const double len = acc[e + 1] - acc[e];
    std::vector<std::pair<double, double>> pieces;
    for (const auto& d : region.disks) {
      double t0 = 0, t1 = 0;
      if (segment_disk(a, b, d.center, d.radius, t0, t1)) pieces.emplace_back(t0, t1);
    }
    std::sort(pieces.begin(), pieces.end());
    for (std::size_t i = 0; i < pieces.size();) {
      double lo = pieces[i].first, hi = pieces[i].second;
      std::size_t j = i + 1;
      while (j < pieces.size() && pieces[j].first <= hi) hi = std::max(hi, pieces[j++].second);
      out.push_back({-1, acc[e] + lo * len, acc[e] + hi * len});
      i = j;
    }
  }
  return out;
}

std::vector<PointSampler::Interval> PointSampler::hole_intervals(
    const SamplingRegion& region) const {
  std::vector<Interval> out;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t h = 0; h < domain_.holes.size(); ++h) {
    const CircularHole& c = domain_.holes[h];
    const int id = static_cast<int>(h);
    if (region.whole_domain()) {
      out.push_back({id, 0.0, two_pi});
      continue;
    }
    std::vector<std::pair<double, double>> pieces;
    for (const auto& d : region.disks) {
      const double dist = distance(c.center, d.center);
      if (dist + c.radius <= d.radius) {
        pieces.emplace_back(0.0, two_pi);
        continue;
      }
      if (dist >= c.radius + d.radius || dist + d.radius <= c.radius) continue;
      // Law of cosines: half-angle of the arc inside the disk.
      const double cosang =
          (c.radius * c.radius + dist * dist - d.radius * d.radius) / (2.0 * c.radius * dist);
      const double half = std::acos(std::clamp(cosang, -1.0, 1.0));
      double mid = std::atan2(d.center.y - c.center.y, d.center.x - c.center.x);
      if (mid < 0) mid += two_pi;
      double lo = mid - half;
      double hi = mid + half;
      if (lo < 0) {
        pieces.emplace_back(lo + two_pi, two_pi);
        lo = 0;
      }
      if (hi > two_pi) {
        pieces.emplace_back(0.0, hi - two_pi);
        hi = two_pi;
      }
      pieces.emplace_back(lo, hi);
    }
    std::sort(pieces.begin(), pieces.end());
    for (std::size_t i = 0; i < pieces.size();) {
      double lo = pieces[i].first, hi = pieces[i].second;
      std::size_t j = i + 1;
      while (j < pieces.size() && pieces[j].first <= hi) hi = std::max(hi, pieces[j++].second);
      out.push_back({id, lo, hi});
      i = j;
    }
  }
  return out;
}

void PointSampler::sample_intervals(Rng& rng, const std::vector<Interval>& intervals,
                                    const SamplingRegion& region) {
  // Candidates are drawn uniformly in arclength over the union of intervals.
  std::vector<double> weight;
  double total = 0.0;
  for (const Interval& iv : intervals) {
    const double scale = iv.curve < 0 ? 1.0 : domain_.holes[iv.curve].radius;
    total += (iv.hi - iv.lo) * scale;
    weight.push_back(total);
  }
  if (total <= 0.0) return;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  int misses = 0;
  while (misses < options_.saturation) {
    const double u = rng.uniform() * total;
    const std::size_t k = static_cast<std::size_t>(
        std::upper_bound(weight.begin(), weight.end(), u) - weight.begin());
    const Interval& iv = intervals[std::min(k, intervals.size() - 1)];
    const double t = rng.uniform(iv.lo, iv.hi);
    Generator g;
    if (iv.curve < 0) {
      g.kind = PointKind::Outer;
      g.param = t;
      g.pos = domain_.outer_point(t);
    } else {
      const CircularHole& c = domain_.holes[iv.curve];
      g.kind = PointKind::Hole;
      g.curve = iv.curve;
      g.param = std::fmod(t, two_pi);
      g.pos = {c.center.x + c.radius * std::cos(g.param),
               c.center.y + c.radius * std::sin(g.param)};
    }
    if (region.contains(g.pos) && try_accept(g)) {
      misses = 0;
    } else {
      ++misses;
    }
  }
}

void PointSampler::sample_outer(Rng& rng, const SamplingRegion& region) {
  sample_intervals(rng, outer_intervals(region), region);
}

void PointSampler::sample_holes(Rng& rng, const SamplingRegion& region) {
  sample_intervals(rng, hole_intervals(region), region);
}

void PointSampler::sample_interior(Rng& rng, const SamplingRegion& region) {
  double xmin = domain_.outer[0].x, xmax = xmin, ymin = domain_.outer[0].y, ymax = ymin;
  for (const Vec2 p : domain_.outer) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  std::vector<double> weight;
  double total = 0.0;
  for (const auto& d : region.disks) {
    total += d.radius * d.radius;
    weight.push_back(total);
  }
  int misses = 0;
  while (misses < options_.saturation) {
    Vec2 p;
    if (region.whole_domain()) {
      p = {rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)};
      if (!region.contains(p)) {
        ++misses;
        continue;
      }
    } else {
      const double u = rng.uniform() * total;
      const std::size_t k = static_cast<std::size_t>(
          std::upper_bound(weight.begin(), weight.end(), u) - weight.begin());
      const auto& d = region.disks[std::min(k, region.disks.size() - 1)];
      p = {rng.uniform(d.center.x - d.radius, d.center.x + d.radius),
           rng.uniform(d.center.y - d.radius, d.center.y + d.radius)};
      if (!region.contains(p)) {
        ++misses;
        continue;
      }
    }
    const double spacing = density_(p);
    if (!domain_.contains(p) ||
        domain_.distance_to_boundary(p) < options_.boundary_clearance * spacing) {
      ++misses;
      continue;
    }
    Generator g;
    g.pos = p;
    if (try_accept(g)) {
      misses = 0;
    } else {
      ++misses;
    }
  }
}

GeneratorSet sample_generator_points(const Domain& domain, const DensityField& density,
                                     std::uint64_t seed, SamplingOptions options) {
  PointSampler sampler(domain, density, options);
  Rng rng(seed);
  const SamplingRegion all{};
  sampler.add_corners();
  sampler.sample_outer(rng, all);
  sampler.sample_holes(rng, all);
  sampler.sample_interior(rng, all);
  return std::move(sampler).take();
}

}  // namespace cdm
