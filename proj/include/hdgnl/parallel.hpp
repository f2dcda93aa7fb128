#ifndef HDGNL_PARALLEL_HPP
#define HDGNL_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace hdgnl
{

// Runs fn(i) for i in [0, n) on up to `width` threads with a static round-robin
// schedule. Every index is processed even if another throws; the exception of the
// lowest failing index is rethrown, so errors are reported deterministically.
template <class Fn>
void parallel_for(int n, int width, Fn &&fn)
{
  width = std::max(1, std::min(width, n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(n, 0)));
  auto worker = [&](int t) {
    for (int i = t; i < n; i += width)
    {
      try
      {
        fn(i);
      }
      catch (...)
      {
        errors[i] = std::current_exception();
      }
    }
  };
  if (width == 1)
  {
    worker(0);
  }
  else
  {
    std::vector<std::thread> pool;
    pool.reserve(width);
    for (int t = 0; t < width; ++t)
    {
      pool.emplace_back(worker, t);
    }
    for (auto &th : pool)
    {
      th.join();
    }
  }
  for (auto &e : errors)
  {
    if (e)
    {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace hdgnl

#endif  // HDGNL_PARALLEL_HPP
