#include <doctest.h>

#include <atomic>
#include <numeric>
#include <thread>

#include "glyphforge/worker_pool.hpp"

using namespace glyphforge;

TEST_CASE("every index runs exactly once") {
  for (unsigned workers : {1u, 2u, 5u}) {
    WorkerPool pool(workers);
    CHECK(pool.size() == workers);
    std::vector<int> hits(1000, 0);
    pool.parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    pool.parallel_for(0, [&](std::size_t) { FAIL("no work expected"); });
  }
}

TEST_CASE("first exception is rethrown after the loop finishes") {
  WorkerPool pool(3);
  std::atomic<int> done{0};
  CHECK_THROWS_WITH(pool.parallel_for(100,
                                      [&](std::size_t i) {
                                        if (i == 7) throw std::runtime_error("boom");
                                        ++done;
                                      }),
                    "boom");
  CHECK(done.load() == 99);
  std::vector<int> again(10, 0);
  pool.parallel_for(10, [&](std::size_t i) { again[i] = 1; });
  CHECK(std::accumulate(again.begin(), again.end(), 0) == 10);
}

TEST_CASE("nested loops run inline") {
  WorkerPool pool(2);
  std::vector<std::atomic<int>> grid(64);
  pool.parallel_for(8, [&](std::size_t i) { pool.parallel_for(8, [&](std::size_t j) { ++grid[i * 8 + j]; }); });
  for (auto& g : grid) CHECK(g.load() == 1);
}

TEST_CASE("bounded queue hands items over in order and closes") {
  BoundedQueue<int> q(2);
  std::jthread producer([&] {
    for (int i = 0; i < 50; ++i) q.push(i);
    q.close();
  });
  int expect = 0;
  while (auto v = q.pop()) CHECK(*v == expect++);
  CHECK(expect == 50);
  CHECK_FALSE(q.push(1));
}
