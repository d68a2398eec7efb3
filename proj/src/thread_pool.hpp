#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dmdp::detail {

/// Minimal persistent pool for per-iteration block work. Items are claimed
/// through an atomic counter; each item writes only its own output slot, so
/// results do not depend on the number of threads.
class ThreadPool {
  public:
    explicit ThreadPool(int threads) {
        int extra = std::max(0, threads - 1); // the calling thread participates
        workers_.reserve(extra);
        for (int t = 0; t < extra; ++t) workers_.emplace_back([this] { worker(); });
    }

    ~ThreadPool() {
        {
            std::lock_guard lock(mu_);
            stop_ = true;
            ++generation_;
        }
        wake_.notify_all();
        for (auto& w : workers_) w.join();
    }

    void parallel_for(int n_items, const std::function<void(int)>& fn) {
        if (workers_.empty() || n_items <= 1) {
            for (int i = 0; i < n_items; ++i) fn(i);
            return;
        }
        {
            std::lock_guard lock(mu_);
            fn_ = &fn;
            total_ = n_items;
            next_.store(0, std::memory_order_relaxed);
            active_ = static_cast<int>(workers_.size());
            ++generation_;
        }
        wake_.notify_all();
        drain();
        std::unique_lock lock(mu_);
        done_.wait(lock, [this] { return active_ == 0; });
        fn_ = nullptr;
    }

  private:
    void drain() {
        int i;
        while ((i = next_.fetch_add(1, std::memory_order_relaxed)) < total_) (*fn_)(i);
    }

    void worker() {
        long seen = 0;
        for (;;) {
            std::unique_lock lock(mu_);
            wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            lock.unlock();
            drain();
            lock.lock();
            if (--active_ == 0) done_.notify_one();
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable wake_, done_;
    const std::function<void(int)>* fn_ = nullptr;
    std::atomic<int> next_{0};
    int total_ = 0;
    int active_ = 0;
    long generation_ = 0;
    bool stop_ = false;
};

} // namespace dmdp::detail
