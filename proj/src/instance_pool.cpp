#include "shiftlearn/instance_pool.hpp"

#include <algorithm>
#include <stdexcept>

namespace shiftlearn {

InstancePool::InstancePool(Schedule schedule, LearnerSpec spec, std::uint64_t learner_seed)
    : schedule_(std::move(schedule)), spec_(spec), seed_(learner_seed) {
  spec_.validate();
}

void InstancePool::advance_to(std::int64_t t) {
  if (t != cursor_ + 1) throw std::logic_error("instance pool must advance one round at a time");
  if (t > schedule_.horizon.rounds()) throw std::out_of_range("round beyond horizon");
  std::erase_if(live_, [t](const InstanceRecord& rec) { return rec.interval.end < t; });
  for (const auto& u : schedule_.intervals) {
    if (u.start != t) continue;
    InstanceRecord rec;
    rec.interval = u;
    rec.learner = new_instance(spec_, seed_);
    live_.push_back(std::move(rec));
  }
  std::sort(live_.begin(), live_.end(),
            [](const InstanceRecord& a, const InstanceRecord& b) { return canonical_less(a.interval, b.interval); });
  cursor_ = t;
}

void InstancePool::train(std::span<const LabeledExample> fold) {
  for (auto& rec : live_) {
    rec.learner->observe(fold);
    if (rec.rounds_trained == 0) rec.first_trained = cursor_;
    rec.last_trained = cursor_;
    ++rec.rounds_trained;
    rec.points_trained += fold.size();
  }
}

const InstanceRecord& InstancePool::get(const IntervalId& id) const {
  for (const auto& rec : live_)
    if (rec.id() == id) return rec;
  throw std::out_of_range("instance " + to_string(id) + " is not live");
}

void InstancePool::digest(Fnv1a& h) const {
  h.add(static_cast<std::uint64_t>(cursor_));
  for (const auto& rec : live_) {
    h.add(static_cast<std::uint64_t>(rec.id().family));
    h.add(static_cast<std::uint64_t>(rec.id().resolution));
    h.add(static_cast<std::uint64_t>(rec.id().k));
    rec.learner->digest(h);
  }
}

}  // namespace shiftlearn
