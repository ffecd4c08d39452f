#include "abcast/fuzz.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace abcast::harness {

std::vector<FuzzResult> fuzz(const Scenario& tmpl, std::uint64_t first, std::uint64_t last,
                             unsigned jobs) {
  if (last < first) throw ConfigError("empty seed range");
  const std::uint64_t count = last - first + 1;
  std::vector<FuzzResult> results(count);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        const Scenario s = with_seed(tmpl, first + i);
        const Trace trace = run_scenario(s);
        results[i] = FuzzResult{first + i, s.sim.params.gst, check_trace(trace, s)};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };

  jobs = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(std::min<std::uint64_t>(count, 256)));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace abcast::harness
