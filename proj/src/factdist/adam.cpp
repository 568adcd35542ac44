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

#include <cmath>

#include "relsim/error.hpp"
#include "relsim/factdist.hpp"
#include "relsim/kernels.hpp"

namespace relsim::factdist {

template <typename T>
AdamState<T> AdamState<T>::zeros_like(const Params<T>& p) {
  AdamState<T> s;
  const auto ts = p.tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    s.first_moment[i].assign(ts[i].size(), T{0});
    s.second_moment[i].assign(ts[i].size(), T{0});
  }
  return s;
}

template <typename T>
void adam_step(Params<T>& params, AdamState<T>& state, const Params<T>& grads, const TrainConfig& config) {
  auto ps = params.tensors();
  const auto gs = grads.tensors();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    require(ps[i].size() == gs[i].size() && ps[i].size() == state.first_moment[i].size() &&
                ps[i].size() == state.second_moment[i].size(),
            Errc::contract, "adam_step: shape mismatch on " + std::string(kTensorNames[i]));
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const kernels::AdamCoeffs<T> c{static_cast<T>(config.learning_rate),
                                 static_cast<T>(config.adam_beta1),
                                 static_cast<T>(config.adam_beta2),
                                 static_cast<T>(config.adam_eps),
                                 static_cast<T>(1.0 / (1.0 - std::pow(config.adam_beta1, t))),
                                 static_cast<T>(1.0 / (1.0 - std::pow(config.adam_beta2, t)))};
  const auto& k = kernels::active<T>();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    k.adam(ps[i].data(), gs[i].data(), state.first_moment[i].data(), state.second_moment[i].data(), ps[i].size(), c);
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(Params<float>&, AdamState<float>&, const Params<float>&, const TrainConfig&);
template void adam_step<double>(Params<double>&, AdamState<double>&, const Params<double>&, const TrainConfig&);

}  // namespace relsim::factdist
