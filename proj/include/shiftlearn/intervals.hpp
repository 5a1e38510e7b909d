#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace shiftlearn {

/// Round count of an experiment plus the power-of-two padding used to lay
/// out the multi-resolution schedule.
class Horizon {
 public:
  /// Throws std::invalid_argument for rounds == 0.
  explicit Horizon(std::int64_t rounds);

  std::int64_t rounds() const { return rounds_; }
  /// Smallest power of two >= rounds().
  std::int64_t padded() const { return padded_; }
  /// log2(padded()).
  int resolutions() const { return resolutions_; }

  bool operator==(const Horizon&) const = default;

 private:
  std::int64_t rounds_;
  std::int64_t padded_;
  int resolutions_;
};

enum class Family : std::uint8_t { R, B, GC };

std::string to_string(Family f);

/// Identity of a schedule slot. Two intervals may share [start, end] after
/// truncation and still be distinct instances.
struct IntervalId {
  Family family = Family::R;
  int resolution = 0;
  std::int64_t k = 0;

  bool operator==(const IntervalId&) const = default;
  auto operator<=>(const IntervalId&) const = default;
};

std::string to_string(const IntervalId& id);

/// A closed range of rounds [start, end] that owns one learner instance.
/// `end` is truncated to the horizon; `nominal_end` keeps the untruncated
/// right edge from the set-builder formula.
struct Interval {
  IntervalId id;
  std::int64_t start = 1;
  std::int64_t end = 1;
  std::int64_t nominal_end = 1;

  Family family() const { return id.family; }
  int resolution() const { return id.resolution; }
  bool contains(std::int64_t t) const { return start <= t && t <= end; }
  std::int64_t length() const { return end - start + 1; }
  std::int64_t nominal_length() const { return nominal_end - start + 1; }

  bool operator==(const Interval&) const = default;
};

/// Canonical order: resolution, then start, then R before B before GC, then k.
bool canonical_less(const Interval& a, const Interval& b);

struct Schedule {
  Horizon horizon;
  std::vector<Interval> intervals;  // canonical order

  /// Intervals containing round t in canonical order. Throws
  /// std::out_of_range unless 1 <= t <= rounds.
  std::vector<Interval> active(std::int64_t t) const;
  /// Intervals whose start equals t.
  std::vector<Interval> starting_at(std::int64_t t) const;
  /// Largest |active(t)| over all rounds.
  std::size_t max_active() const;
};

/// R and B families across all resolutions, truncated to [1, rounds].
/// Throws std::invalid_argument when rounds < 2.
Schedule mri_schedule(const Horizon& horizon);

/// Geometric covering intervals [k 2^i, (k+1) 2^i - 1], k >= 1, i >= 0.
Schedule gc_schedule(const Horizon& horizon);

/// Restricts an MRI schedule to one resolution. Throws for resolution
/// outside [1, M].
Schedule single_resolution_schedule(const Horizon& horizon, int resolution);

std::vector<Interval> active(const Schedule& schedule, std::int64_t t);

/// Worst post-shift coverage seen by the exhaustive check.
struct CoveragePair {
  std::int64_t t0 = 0;
  std::int64_t t = 0;
  /// Best (t - start + 1) / (t - t0 + 1) over admissible active intervals.
  double fraction = 0.0;
};

struct CoverageReport {
  Horizon horizon;
  Family scheme = Family::R;
  CoveragePair worst_case;
  bool passed = false;
  std::size_t pairs_checked = 0;
  /// Pairs that meet the 1/2 clause.
  std::size_t pairs_half = 0;
  /// Pairs below 1/4.
  std::vector<CoveragePair> failures;
  std::size_t max_active = 0;
};

/// Best coverage fraction for a shift at t0 observed entering round t + 1.
double coverage_fraction(const Schedule& schedule, std::int64_t t0, std::int64_t t);

/// Checks every 1 <= t0 <= t < rounds. Passes iff all fractions >= 1/4.
CoverageReport verify_coverage(const Schedule& schedule);
CoverageReport verify_coverage(const Horizon& horizon);

}  // namespace shiftlearn
