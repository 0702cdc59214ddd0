#pragma once

#include <condition_variable>
#include <cstddef>
#include <mutex>
#include <thread>
#include <vector>

namespace spinres {

/// Fixed-size fork/join pool. `run(f)` calls f(worker) once for every worker
/// index in [0, size()) and returns after all calls finished; the calling
/// thread executes worker 0.
class ThreadPool {
 public:
  explicit ThreadPool(std::size_t workers) : size_(workers == 0 ? 1 : workers) {
    threads_.reserve(size_ - 1);
    for (std::size_t w = 1; w < size_; ++w) threads_.emplace_back([this, w] { loop(w); });
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  ~ThreadPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  std::size_t size() const noexcept { return size_; }

  template <class F>
  void run(F& f) {
    if (size_ == 1) {
      f(std::size_t{0});
      return;
    }
    {
      std::lock_guard lock(mutex_);
      task_ctx_ = &f;
      task_fn_ = [](void* ctx, std::size_t w) { (*static_cast<F*>(ctx))(w); };
      pending_ = size_ - 1;
      ++generation_;
    }
    start_cv_.notify_all();
    f(std::size_t{0});
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
  }

 private:
  void loop(std::size_t w) {
    std::size_t seen = 0;
    for (;;) {
      void* ctx = nullptr;
      void (*fn)(void*, std::size_t) = nullptr;
      {
        std::unique_lock lock(mutex_);
        start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        ctx = task_ctx_;
        fn = task_fn_;
      }
      fn(ctx, w);
      {
        std::lock_guard lock(mutex_);
        if (--pending_ == 0) done_cv_.notify_one();
      }
    }
  }

  std::size_t size_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  void* task_ctx_ = nullptr;
  void (*task_fn_)(void*, std::size_t) = nullptr;
  std::size_t pending_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace spinres
