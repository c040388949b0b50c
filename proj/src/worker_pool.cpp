#include "glyphforge/worker_pool.hpp"

namespace glyphforge {

namespace {
thread_local bool t_inside_job = false;
}

WorkerPool::WorkerPool(unsigned workers) {
  const unsigned helpers = workers > 1 ? workers - 1 : 0;
  threads_.reserve(helpers);
  for (unsigned i = 0; i < helpers; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  threads_.clear();
}

void WorkerPool::drain() {
  const auto& fn = *job_;
  const bool was_inside = t_inside_job;
  t_inside_job = true;
  for (std::size_t i = next_.fetch_add(1); i < count_; i = next_.fetch_add(1)) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  t_inside_job = was_inside;
}

void WorkerPool::worker_loop() {
  std::size_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
    }
    drain();
    {
      std::lock_guard lock(mutex_);
      if (--busy_ == 0) done_.notify_all();
    }
  }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (threads_.empty() || t_inside_job || n == 1) {
    const bool was_inside = t_inside_job;
    t_inside_job = true;
    try {
      for (std::size_t i = 0; i < n; ++i) fn(i);
    } catch (...) {
      t_inside_job = was_inside;
      throw;
    }
    t_inside_job = was_inside;
    return;
  }
  {
    std::lock_guard lock(mutex_);
    job_ = &fn;
    count_ = n;
    next_.store(0);
    error_ = nullptr;
    busy_ = static_cast<unsigned>(threads_.size());
    ++generation_;
  }
  wake_.notify_all();
  drain();
  std::exception_ptr error;
  {
    std::unique_lock lock(mutex_);
    done_.wait(lock, [&] { return busy_ == 0; });
    job_ = nullptr;
    error = error_;
    error_ = nullptr;
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace glyphforge
