// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PHRED_PARALLEL_HPP
#define PHRED_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace phred
{

namespace detail
{

inline std::atomic<int> &ThreadSetting()
{
  static std::atomic<int> threads = [] {
    if (const char *env = std::getenv("PHRED_THREADS"))
    {
      try
      {
        const int t = std::stoi(env);
        if (t > 0)
        {
          return t;
        }
      }
      catch (const std::exception &)
      {
      }
    }
    return 1;
  }();
  return threads;
}

}  // namespace detail

// Worker count used by the parallel maps below. Defaults to $PHRED_THREADS, else 1.
inline int NumThreads() { return detail::ThreadSetting().load(); }
inline void SetNumThreads(int threads) { detail::ThreadSetting().store(std::max(1, threads)); }
inline int HardwareThreads()
{
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

//
// Calls fn(i) for i in [0, count). Each index is handled by exactly one worker, so writes to
// per-index slots need no synchronization; callers reduce the slots in index order to keep
// results independent of the thread count. The first exception thrown by any worker is
// rethrown on the calling thread.
//
template <typename Fn>
void ParallelFor(std::size_t count, Fn &&fn, std::size_t min_chunk = 64)
{
  const auto threads = static_cast<std::size_t>(NumThreads());
  const std::size_t workers = std::min(threads, count / std::max<std::size_t>(min_chunk, 1));
  if (workers <= 1)
  {
    for (std::size_t i = 0; i < count; i++)
    {
      fn(i);
    }
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; w++)
  {
    pool.emplace_back([&, w] {
      const std::size_t begin = count * w / workers, end = count * (w + 1) / workers;
      try
      {
        for (std::size_t i = begin; i < end; i++)
        {
          fn(i);
        }
      }
      catch (...)
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error)
        {
          error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error)
  {
    std::rethrow_exception(error);
  }
}

}  // namespace phred

#endif  // PHRED_PARALLEL_HPP
