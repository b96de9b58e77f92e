#ifndef TRUNKSIM_SIM_ENGINE_HPP
#define TRUNKSIM_SIM_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace trunksim::sim {

// Discrete-event engine. Events fire in (time, insertion sequence) order;
// the clock never moves backwards.
class Engine {
 public:
  using Action = std::function<void()>;
  using EventId = std::uint64_t;

  struct RunSummary {
    std::uint64_t events_fired = 0;
    double final_clock = 0.0;
  };

  double now() const { return clock_; }

  // Schedules `action` at absolute time `at`. Scheduling in the past is a
  // logic bug and throws.
  EventId schedule(double at, Action action);

  EventId schedule_in(double delay, Action action) {
    return schedule(clock_ + delay, std::move(action));
  }

  // Cancelling an already-fired or unknown event is a no-op.
  void cancel(EventId id) { cancelled_.insert(id); }

  // Processes every event with fire_time <= until, in order. Returns the
  // number of events fired and the clock after the run.
  RunSummary run(double until);

  bool empty() const { return live_count_ == 0; }

  // When enabled, records (fire_time, sequence) of every fired event.
  void enable_trace() { tracing_ = true; }
  const std::vector<std::pair<double, std::uint64_t>>& trace() const {
    return trace_;
  }

 private:
  struct Event {
    double time;
    EventId id;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.id > b.id;
    }
  };

  double clock_ = 0.0;
  EventId next_id_ = 0;
  std::uint64_t live_count_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::unordered_set<EventId> cancelled_;
  bool tracing_ = false;
  std::vector<std::pair<double, std::uint64_t>> trace_;
};

// Counter-based generator: draw i of a stream is a pure function of
// (seed, stream label, i), so adding a stream never perturbs another.
class RandomStream {
 public:
  RandomStream() = default;
  RandomStream(std::uint64_t root_seed, std::string_view label);

  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 bits of resolution.
  double next_uniform();

  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t draws_ = 0;
};

}  // namespace trunksim::sim

#endif  // TRUNKSIM_SIM_ENGINE_HPP
