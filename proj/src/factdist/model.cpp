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

#include <algorithm>
#include <cmath>
#include <map>

#include "relsim/error.hpp"
#include "relsim/factdist.hpp"
#include "relsim/kernels.hpp"
#include "relsim/rng.hpp"

namespace relsim::factdist {

namespace {

template <typename T>
Mlp<T> zero_mlp(std::size_t in, std::size_t hidden, std::size_t out) {
  return Mlp<T>{Matrix<T>(hidden, in), std::vector<T>(hidden), Matrix<T>(out, hidden), std::vector<T>(out)};
}

template <typename T>
struct MlpTrace {
  std::vector<T> pre;
  std::vector<T> act;
  std::vector<T> out;
};

template <typename T>
void mlp_forward(const Mlp<T>& net, std::span<const T> x, MlpTrace<T>& tr) {
  const auto& k = kernels::active<T>();
  tr.pre.resize(net.hidden_dim());
  tr.act.resize(net.hidden_dim());
  tr.out.resize(net.out_dim());
  k.gemv(net.w1.data(), net.hidden_dim(), net.in_dim(), x.data(), tr.pre.data());
  for (std::size_t i = 0; i < tr.pre.size(); ++i) {
    tr.pre[i] += net.b1[i];
    tr.act[i] = tr.pre[i] > T{0} ? tr.pre[i] : T{0};
  }
  k.gemv(net.w2.data(), net.out_dim(), net.hidden_dim(), tr.act.data(), tr.out.data());
  for (std::size_t i = 0; i < tr.out.size(); ++i) tr.out[i] += net.b2[i];
}

// Accumulates parameter gradients for d(loss)/d(out) and adds d(loss)/d(x) to dx.
template <typename T>
void mlp_backward(const Mlp<T>& net, std::span<const T> x, const MlpTrace<T>& tr, std::span<const T> dout,
                  Mlp<T>& grad, std::span<T> dx) {
  const auto& k = kernels::active<T>();
  const std::size_t hidden = net.hidden_dim();
  k.ger_acc(dout.data(), net.out_dim(), tr.act.data(), hidden, grad.w2.data());
  for (std::size_t i = 0; i < dout.size(); ++i) grad.b2[i] += dout[i];
  std::vector<T> dpre(hidden, T{0});
  k.gemv_t_acc(net.w2.data(), net.out_dim(), hidden, dout.data(), dpre.data());
  for (std::size_t i = 0; i < hidden; ++i)
    if (!(tr.pre[i] > T{0})) dpre[i] = T{0};
  k.ger_acc(dpre.data(), hidden, x.data(), net.in_dim(), grad.w1.data());
  for (std::size_t i = 0; i < hidden; ++i) grad.b1[i] += dpre[i];
  k.gemv_t_acc(net.w1.data(), hidden, net.in_dim(), dpre.data(), dx.data());
}

template <typename T>
void check_entity(const Params<T>& p, EntityId e) {
  if (e >= p.num_entities()) fail(Errc::index, "entity id out of range: " + std::to_string(e));
}

template <typename T>
void check_relation(const Params<T>& p, RelationId r) {
  if (r >= p.num_relations()) fail(Errc::index, "relation id out of range: " + std::to_string(r));
}

template <typename T>
std::vector<T> tail_input(const Params<T>& p, EntityId h, RelationId r) {
  std::vector<T> x(2 * p.dim());
  std::copy_n(p.entity_emb.row(h).begin(), p.dim(), x.begin());
  std::copy_n(p.relation_emb.row(r).begin(), p.dim(), x.begin() + static_cast<std::ptrdiff_t>(p.dim()));
  return x;
}

template <typename T>
void fill_uniform(std::span<T> v, double limit, Rng& rng) {
  for (auto& x : v) x = static_cast<T>(rng.uniform(-limit, limit));
}

template <typename T>
void normalize_rows(Matrix<T>& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    double n2 = 0.0;
    for (T x : row) n2 += static_cast<double>(x) * x;
    const double n = std::sqrt(n2);
    if (n > 0.0)
      for (auto& x : row) x = static_cast<T>(x / n);
  }
}

template <typename T>
void init_mlp(Mlp<T>& net, Rng& rng) {
  fill_uniform(net.w1.flat(), std::sqrt(6.0 / static_cast<double>(net.in_dim() + net.hidden_dim())), rng);
  fill_uniform(net.w2.flat(), std::sqrt(6.0 / static_cast<double>(net.hidden_dim() + net.out_dim())), rng);
}

// Adds the gradient of -sum_i log softmax(logits)[target_i] to the query (dq),
// the entity table (dE) and returns the loss sum. `counts` maps target -> count.
template <typename T>
double softmax_block(const Params<T>& p, std::span<const T> query, const std::map<EntityId, std::size_t>& counts,
                     double scale, std::span<T> dq, Matrix<T>& d_entity) {
  const auto& k = kernels::active<T>();
  const std::size_t n = p.num_entities();
  std::vector<T> logits(n);
  k.gemv(p.entity_emb.data(), n, p.dim(), query.data(), logits.data());
  std::vector<double> lsm(n);
  kernels::log_softmax<T>(logits, lsm);
  std::size_t total = 0;
  double loss = 0.0;
  for (const auto& [e, c] : counts) {
    total += c;
    loss -= static_cast<double>(c) * lsm[e];
  }
  std::vector<T> dl(n);
  for (std::size_t e = 0; e < n; ++e) dl[e] = static_cast<T>(scale * static_cast<double>(total) * std::exp(lsm[e]));
  for (const auto& [e, c] : counts) dl[e] = static_cast<T>(static_cast<double>(dl[e]) - scale * static_cast<double>(c));
  k.gemv_t_acc(p.entity_emb.data(), n, p.dim(), dl.data(), dq.data());
  k.ger_acc(dl.data(), n, query.data(), p.dim(), d_entity.data());
  return loss;
}

}  // namespace

template <typename T>
std::array<std::span<T>, 10> Params<T>::tensors() {
  return {entity_emb.flat(),        relation_emb.flat(),  head_net.w1.flat(), std::span<T>(head_net.b1),
          head_net.w2.flat(),       std::span<T>(head_net.b2), tail_net.w1.flat(), std::span<T>(tail_net.b1),
          tail_net.w2.flat(),       std::span<T>(tail_net.b2)};
}

template <typename T>
std::array<std::span<const T>, 10> Params<T>::tensors() const {
  return {entity_emb.flat(),  relation_emb.flat(),          head_net.w1.flat(), std::span<const T>(head_net.b1),
          head_net.w2.flat(), std::span<const T>(head_net.b2), tail_net.w1.flat(), std::span<const T>(tail_net.b1),
          tail_net.w2.flat(), std::span<const T>(tail_net.b2)};
}

template <typename T>
void Params<T>::validate() const {
  const std::size_t d = dim();
  require(relation_emb.cols() == d, Errc::contract, "relation embedding width differs from entity width");
  require(head_net.in_dim() == d, Errc::contract, "head network input width must equal relation width");
  require(tail_net.in_dim() == 2 * d, Errc::contract, "tail network input width must equal head+relation width");
  require(head_net.out_dim() == d && tail_net.out_dim() == d, Errc::contract, "network output width must equal d");
  require(head_net.b1.size() == head_net.hidden_dim() && tail_net.b1.size() == tail_net.hidden_dim() &&
              head_net.w2.cols() == head_net.hidden_dim() && tail_net.w2.cols() == tail_net.hidden_dim() &&
              head_net.b2.size() == d && tail_net.b2.size() == d,
          Errc::contract, "network tensor shapes inconsistent");
  for (auto t : tensors())
    for (T x : t) require(std::isfinite(static_cast<double>(x)), Errc::contract, "non-finite parameter value");
}

template <typename T>
template <typename U>
Params<U> Params<T>::cast() const {
  auto cast_vec = [](const std::vector<T>& v) { return std::vector<U>(v.begin(), v.end()); };
  auto cast_mlp = [&](const Mlp<T>& m) {
    return Mlp<U>{m.w1.template cast<U>(), cast_vec(m.b1), m.w2.template cast<U>(), cast_vec(m.b2)};
  };
  return Params<U>{entity_emb.template cast<U>(), relation_emb.template cast<U>(), cast_mlp(head_net),
                   cast_mlp(tail_net)};
}

template <typename T>
bool Params<T>::operator==(const Params& o) const {
  auto a = tensors();
  auto b = o.tensors();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].size() != b[i].size() || !std::equal(a[i].begin(), a[i].end(), b[i].begin())) return false;
  return true;
}

template <typename T>
Params<T> zero_params(std::size_t entities, std::size_t relations, std::size_t dim, std::size_t hidden) {
  require(entities > 0 && relations > 0 && dim > 0 && hidden > 0, Errc::config, "parameter dimensions must be positive");
  return Params<T>{Matrix<T>(entities, dim), Matrix<T>(relations, dim), zero_mlp<T>(dim, hidden, dim),
                   zero_mlp<T>(2 * dim, hidden, dim)};
}

template <typename T>
Params<T> init_params(std::size_t entities, std::size_t relations, std::size_t dim, std::size_t hidden,
                      std::uint64_t seed) {
  auto p = zero_params<T>(entities, relations, dim, hidden);
  Rng rng(derive_seed(seed, {0xfac7u}));
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  fill_uniform(p.entity_emb.flat(), bound, rng);
  fill_uniform(p.relation_emb.flat(), bound, rng);
  normalize_rows(p.entity_emb);
  normalize_rows(p.relation_emb);
  init_mlp(p.head_net, rng);
  init_mlp(p.tail_net, rng);
  return p;
}

template <typename T>
std::vector<T> head_logits(const Params<T>& p, RelationId r) {
  check_relation(p, r);
  MlpTrace<T> tr;
  mlp_forward(p.head_net, p.relation_emb.row(r), tr);
  std::vector<T> logits(p.num_entities());
  kernels::active<T>().gemv(p.entity_emb.data(), p.num_entities(), p.dim(), tr.out.data(), logits.data());
  return logits;
}

template <typename T>
std::vector<T> tail_logits(const Params<T>& p, EntityId h, RelationId r) {
  check_entity(p, h);
  check_relation(p, r);
  const auto x = tail_input(p, h, r);
  MlpTrace<T> tr;
  mlp_forward(p.tail_net, std::span<const T>(x), tr);
  std::vector<T> logits(p.num_entities());
  kernels::active<T>().gemv(p.entity_emb.data(), p.num_entities(), p.dim(), tr.out.data(), logits.data());
  return logits;
}

template <typename T>
double log_prob(const Params<T>& p, EntityId h, EntityId t, RelationId r) {
  check_entity(p, t);
  const auto hl = head_logits(p, r);
  const auto tl = tail_logits(p, h, r);
  const double u_head = static_cast<double>(hl[h]) - kernels::log_sum_exp<T>(hl);
  const double u_tail = static_cast<double>(tl[t]) - kernels::log_sum_exp<T>(tl);
  return u_head + u_tail;
}

template <typename T>
LossAndGrads<T> nll_loss_and_grads(const Params<T>& p, std::span<const Triple> batch) {
  require(!batch.empty(), Errc::contract, "empty batch");
  for (const auto& t : batch) {
    check_entity(p, t.head);
    check_entity(p, t.tail);
    check_relation(p, t.relation);
  }
  LossAndGrads<T> out{0.0, zero_params<T>(p.num_entities(), p.num_relations(), p.dim(), p.hidden_dim())};
  auto& g = out.grads;
  const double scale = 1.0 / static_cast<double>(batch.size());
  const std::size_t d = p.dim();

  // Triples sharing r share the head softmax; triples sharing (h, r) share the
  // tail softmax. Grouping keeps the cost at one softmax per distinct key.
  std::map<RelationId, std::map<EntityId, std::size_t>> heads;
  std::map<std::pair<EntityId, RelationId>, std::map<EntityId, std::size_t>> tails;
  for (const auto& t : batch) {
    ++heads[t.relation][t.head];
    ++tails[{t.head, t.relation}][t.tail];
  }

  double loss = 0.0;
  for (const auto& [r, counts] : heads) {
    MlpTrace<T> tr;
    const auto x = p.relation_emb.row(r);
    mlp_forward(p.head_net, x, tr);
    std::vector<T> dq(d, T{0});
    loss += softmax_block<T>(p, tr.out, counts, scale, dq, g.entity_emb);
    mlp_backward<T>(p.head_net, x, tr, dq, g.head_net, g.relation_emb.row(r));
  }
  for (const auto& [key, counts] : tails) {
    const auto [h, r] = key;
    const auto x = tail_input(p, h, r);
    MlpTrace<T> tr;
    mlp_forward(p.tail_net, std::span<const T>(x), tr);
    std::vector<T> dq(d, T{0});
    loss += softmax_block<T>(p, tr.out, counts, scale, dq, g.entity_emb);
    std::vector<T> dx(2 * d, T{0});
    mlp_backward<T>(p.tail_net, std::span<const T>(x), tr, dq, g.tail_net, dx);
    auto dh = g.entity_emb.row(h);
    auto dr = g.relation_emb.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      dh[i] += dx[i];
      dr[i] += dx[d + i];
    }
  }
  out.loss = loss * scale;
  return out;
}

template <typename T>
double mean_nll(const Params<T>& p, std::span<const Triple> triples) {
  if (triples.empty()) return 0.0;
  ConditionalCache<T> cache(p);
  double acc = 0.0;
  for (const auto& t : triples) acc -= cache.log_prob(t.head, t.tail, t.relation);
  return acc / static_cast<double>(triples.size());
}

template <typename T>
std::span<const double> ConditionalCache<T>::head_log_probs(RelationId r) {
  auto it = head_.find(r);
  if (it == head_.end()) {
    const auto logits = head_logits(params_, r);
    std::vector<double> lsm(logits.size());
    kernels::log_softmax<T>(logits, lsm);
    it = head_.emplace(r, std::move(lsm)).first;
  }
  return it->second;
}

template <typename T>
std::span<const double> ConditionalCache<T>::tail_log_probs(EntityId h, RelationId r) {
  const std::uint64_t key = (static_cast<std::uint64_t>(h) << 32) | r;
  auto it = tail_.find(key);
  if (it == tail_.end()) {
    const auto logits = tail_logits(params_, h, r);
    std::vector<double> lsm(logits.size());
    kernels::log_softmax<T>(logits, lsm);
    it = tail_.emplace(key, std::move(lsm)).first;
  }
  return it->second;
}

#define RELSIM_INSTANTIATE(T)                                                                          \
  template struct Params<T>;                                                                           \
  template Params<T> zero_params<T>(std::size_t, std::size_t, std::size_t, std::size_t);              \
  template Params<T> init_params<T>(std::size_t, std::size_t, std::size_t, std::size_t, std::uint64_t); \
  template std::vector<T> head_logits<T>(const Params<T>&, RelationId);                               \
  template std::vector<T> tail_logits<T>(const Params<T>&, EntityId, RelationId);                     \
  template double log_prob<T>(const Params<T>&, EntityId, EntityId, RelationId);                      \
  template LossAndGrads<T> nll_loss_and_grads<T>(const Params<T>&, std::span<const Triple>);          \
  template double mean_nll<T>(const Params<T>&, std::span<const Triple>);                             \
  template class ConditionalCache<T>;

RELSIM_INSTANTIATE(float)
RELSIM_INSTANTIATE(double)
#undef RELSIM_INSTANTIATE

template Params<double> Params<float>::cast<double>() const;
template Params<float> Params<double>::cast<float>() const;
template Params<float> Params<float>::cast<float>() const;
template Params<double> Params<double>::cast<double>() const;

}  // namespace relsim::factdist
