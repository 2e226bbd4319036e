#pragma once

// Replicate loops over worker threads. Each worker owns a substream derived
// from (seed, worker index) and its own accumulator; accumulators come back
// in worker order, so results are deterministic given (seed, worker count).

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "rng.hpp"

namespace sieve {

template <class Accum>
std::vector<Accum> run_replicates(std::uint64_t replicates, unsigned workers, std::uint64_t seed,
                                  const std::function<void(Accum&, Rng&)>& body) {
  if (workers < 1) workers = 1;
  std::vector<Accum> acc(workers);
  auto work = [&](unsigned w) {
    Rng rng = Rng::substream(seed, w);
    std::uint64_t share = replicates / workers + (w < replicates % workers ? 1 : 0);
    for (std::uint64_t r = 0; r < share; ++r) body(acc[w], rng);
  };
  if (workers == 1) {
    work(0);
    return acc;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
  for (auto& t : threads) t.join();
  return acc;
}

}  // namespace sieve
