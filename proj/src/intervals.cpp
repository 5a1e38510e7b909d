#include "shiftlearn/intervals.hpp"

#include <algorithm>
#include <stdexcept>

namespace shiftlearn {

Horizon::Horizon(std::int64_t rounds) : rounds_(rounds), padded_(1), resolutions_(0) {
  if (rounds < 1) throw std::invalid_argument("horizon must have at least one round");
  while (padded_ < rounds_) {
    padded_ *= 2;
    ++resolutions_;
  }
}

std::string to_string(Family f) {
  switch (f) {
    case Family::R: return "R";
    case Family::B: return "B";
    case Family::GC: return "GC";
  }
  return "?";
}

std::string to_string(const IntervalId& id) {
  return to_string(id.family) + std::to_string(id.resolution) + "." + std::to_string(id.k);
}

bool canonical_less(const Interval& a, const Interval& b) {
  if (a.id.resolution != b.id.resolution) return a.id.resolution < b.id.resolution;
  if (a.start != b.start) return a.start < b.start;
  if (a.id.family != b.id.family) return a.id.family < b.id.family;
  return a.id.k < b.id.k;
}

namespace {

void append_resolution(const Horizon& horizon, int resolution, std::vector<Interval>& out) {
  const std::int64_t rounds = horizon.rounds();
  const std::int64_t d = horizon.padded() >> (resolution - 1);
  for (std::int64_t k = 1;; ++k) {
    const std::int64_t start = 1 + (k - 1) * d;
    if (start > rounds) break;
    const std::int64_t end = k * d;
    out.push_back({{Family::R, resolution, k}, start, std::min(end, rounds), end});
  }
  for (std::int64_t k = 1;; ++k) {
    const std::int64_t start = 1 + (k - 1) * d + d / 2;
    if (start > rounds) break;
    const std::int64_t end = k * d + 3 * d / 2;
    out.push_back({{Family::B, resolution, k}, start, std::min(end, rounds), end});
  }
}

Schedule sorted(Horizon horizon, std::vector<Interval> intervals) {
  std::sort(intervals.begin(), intervals.end(), canonical_less);
  return Schedule{horizon, std::move(intervals)};
}

}  // namespace

Schedule mri_schedule(const Horizon& horizon) {
  if (horizon.rounds() < 2) throw std::invalid_argument("MRI schedule needs a horizon of at least 2 rounds");
  std::vector<Interval> out;
  for (int i = 1; i <= horizon.resolutions(); ++i) append_resolution(horizon, i, out);
  return sorted(horizon, std::move(out));
}

Schedule single_resolution_schedule(const Horizon& horizon, int resolution) {
  if (horizon.rounds() < 2) throw std::invalid_argument("MRI schedule needs a horizon of at least 2 rounds");
  if (resolution < 1 || resolution > horizon.resolutions())
    throw std::invalid_argument("resolution " + std::to_string(resolution) + " outside [1, " +
                                std::to_string(horizon.resolutions()) + "]");
  std::vector<Interval> out;
  append_resolution(horizon, resolution, out);
  return sorted(horizon, std::move(out));
}

Schedule gc_schedule(const Horizon& horizon) {
  const std::int64_t rounds = horizon.rounds();
  std::vector<Interval> out;
  for (int level = 0; (std::int64_t{1} << level) <= rounds; ++level) {
    const std::int64_t len = std::int64_t{1} << level;
    for (std::int64_t k = 1; k * len <= rounds; ++k) {
      const std::int64_t start = k * len;
      const std::int64_t end = (k + 1) * len - 1;
      out.push_back({{Family::GC, level, k}, start, std::min(end, rounds), end});
    }
  }
  return sorted(horizon, std::move(out));
}

std::vector<Interval> Schedule::active(std::int64_t t) const {
  if (t < 1 || t > horizon.rounds())
    throw std::out_of_range("round " + std::to_string(t) + " outside [1, " + std::to_string(horizon.rounds()) + "]");
  std::vector<Interval> out;
  for (const auto& u : intervals)
    if (u.contains(t)) out.push_back(u);
  return out;
}

std::vector<Interval> Schedule::starting_at(std::int64_t t) const {
  std::vector<Interval> out;
  for (const auto& u : intervals)
    if (u.start == t) out.push_back(u);
  return out;
}

std::size_t Schedule::max_active() const {
  // Sweep: +1 at start, -1 after end.
  std::vector<std::int64_t> delta(static_cast<std::size_t>(horizon.rounds()) + 2, 0);
  for (const auto& u : intervals) {
    ++delta[static_cast<std::size_t>(u.start)];
    --delta[static_cast<std::size_t>(u.end) + 1];
  }
  std::int64_t running = 0;
  std::int64_t best = 0;
  for (std::size_t t = 1; t <= static_cast<std::size_t>(horizon.rounds()); ++t) {
    running += delta[t];
    best = std::max(best, running);
  }
  return static_cast<std::size_t>(best);
}

std::vector<Interval> active(const Schedule& schedule, std::int64_t t) { return schedule.active(t); }

namespace {

std::vector<std::int64_t> active_starts(const Schedule& schedule, std::int64_t t) {
  std::vector<std::int64_t> starts;
  for (const auto& u : schedule.intervals)
    if (u.contains(t)) starts.push_back(u.start);
  std::sort(starts.begin(), starts.end());
  return starts;
}

double fraction_from_starts(const std::vector<std::int64_t>& starts, std::int64_t t0, std::int64_t t) {
  // The earliest admissible start has seen the most post-shift rounds.
  auto it = std::lower_bound(starts.begin(), starts.end(), t0);
  if (it == starts.end()) return 0.0;
  return static_cast<double>(t - *it + 1) / static_cast<double>(t - t0 + 1);
}

}  // namespace

double coverage_fraction(const Schedule& schedule, std::int64_t t0, std::int64_t t) {
  if (t0 < 1 || t0 > t || t >= schedule.horizon.rounds())
    throw std::out_of_range("coverage pair requires 1 <= t0 <= t < T");
  return fraction_from_starts(active_starts(schedule, t + 1), t0, t);
}

CoverageReport verify_coverage(const Schedule& schedule) {
  CoverageReport report{schedule.horizon, Family::R, {0, 0, 1.0}, true, 0, 0, {}, schedule.max_active()};
  if (!schedule.intervals.empty()) report.scheme = schedule.intervals.front().family() == Family::GC ? Family::GC : Family::R;
  const std::int64_t rounds = schedule.horizon.rounds();
  for (std::int64_t t = 1; t < rounds; ++t) {
    const auto starts = active_starts(schedule, t + 1);
    for (std::int64_t t0 = 1; t0 <= t; ++t0) {
      const double f = fraction_from_starts(starts, t0, t);
      ++report.pairs_checked;
      if (f >= 0.5) ++report.pairs_half;
      if (f < 0.25) report.failures.push_back({t0, t, f});
      if (report.worst_case.t == 0 || f < report.worst_case.fraction) report.worst_case = {t0, t, f};
    }
  }
  report.passed = report.failures.empty();
  return report;
}

CoverageReport verify_coverage(const Horizon& horizon) { return verify_coverage(mri_schedule(horizon)); }

}  // namespace shiftlearn
