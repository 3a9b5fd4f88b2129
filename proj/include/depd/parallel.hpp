// Copyright 2026 The depd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEPD_PARALLEL_HPP
#define DEPD_PARALLEL_HPP

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace depd {

/// `requested` if positive, else the DEPD_THREADS environment variable, else 1.
int resolve_thread_count(int requested);

/// Fixed set of workers that execute one indexed loop at a time and join at a
/// barrier. Index i always runs on worker i % threads.
class WorkerPool {
 public:
  explicit WorkerPool(int threads);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int threads() const { return threads_; }

  /// Runs body(0..count-1) and returns once every index has finished.
  /// Rethrows the first exception raised by any worker.
  void run(int count, const std::function<void(int)>& body);

 private:
  void worker_loop(int worker);
  void run_share(int worker);

  int threads_;
  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* body_ = nullptr;
  int count_ = 0;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace depd

#endif  // DEPD_PARALLEL_HPP
