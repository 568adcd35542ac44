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

#include "relsim/kernels.hpp"

namespace relsim::kernels::detail {

template <typename T>
const Table<T>& scalar_table();

#ifdef RELSIM_HAVE_AVX2
template <typename T>
const Table<T>& avx2_table();
#endif

}  // namespace relsim::kernels::detail
