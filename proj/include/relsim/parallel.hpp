// Copyright 2026 The relsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace relsim {

// Worker count used by parallel_for. Defaults to hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

// Runs body(i) for i in [0, n). Work is split into contiguous blocks; callers
// write results into per-index slots so output never depends on the count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Splits [0, n) into contiguous blocks, one per worker: body(begin, end).
// Lets each worker own scratch state such as caches.
void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace relsim
