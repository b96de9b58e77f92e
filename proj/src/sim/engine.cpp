#include "trunksim/sim/engine.hpp"

#include <cmath>

namespace trunksim::sim {

Engine::EventId Engine::schedule(double at, Action action) {
  if (!(at >= clock_)) {
    throw std::logic_error("Engine::schedule: event scheduled in the past");
  }
  EventId id = next_id_++;
  queue_.push(Event{at, id, std::move(action)});
  ++live_count_;
  return id;
}

Engine::RunSummary Engine::run(double until) {
  RunSummary summary;
  while (!queue_.empty() && queue_.top().time <= until) {
    Event ev = queue_.top();
    queue_.pop();
    --live_count_;
    if (auto it = cancelled_.find(ev.id); it != cancelled_.end()) {
      cancelled_.erase(it);
      continue;
    }
    clock_ = ev.time;
    if (tracing_) trace_.emplace_back(ev.time, ev.id);
    ev.action();
    ++summary.events_fired;
  }
  summary.final_clock = clock_;
  return summary;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t root_seed, std::string_view label) {
  state_ = root_seed ^ fnv1a(label);
  // Burn a few outputs so nearby seeds decorrelate.
  for (int i = 0; i < 4; ++i) splitmix64(state_);
}

std::uint64_t RandomStream::next_u64() {
  ++draws_;
  return splitmix64(state_);
}

double RandomStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

}  // namespace trunksim::sim
