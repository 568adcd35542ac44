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
#include <limits>
#include <map>
#include <sstream>

#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/parallel.hpp"
#include "relsim/redundancy.hpp"
#include "relsim/rng.hpp"

namespace relsim::redundancy {

double estimate_recall(std::span<const EstimatorSample> samples,
                       const std::function<bool(const RelationPair&)>& predicted) {
  double total = 0.0, hit = 0.0;
  for (const auto& s : samples) {
    require(s.label == 0 || s.label == 1, Errc::contract, "estimate_recall: labels must be 0 or 1");
    require(s.proposal_weight > 0.0, Errc::contract, "estimate_recall: proposal weights must be positive");
    if (s.label != 1) continue;
    const double w = 1.0 / s.proposal_weight;
    total += w;
    if (predicted(s.pair)) hit += w;
  }
  if (!(total > 0.0)) fail(Errc::undefined_estimate, "estimate_recall: no sample is labeled valid");
  return std::clamp(hit / total, 0.0, 1.0);
}

double estimate_precision(std::span<const int> labels) {
  if (labels.empty()) fail(Errc::undefined_estimate, "estimate_precision: empty sample");
  std::size_t valid = 0;
  for (int l : labels) {
    require(l == 0 || l == 1, Errc::contract, "estimate_precision: labels must be 0 or 1");
    valid += static_cast<std::size_t>(l);
  }
  return static_cast<double>(valid) / static_cast<double>(labels.size());
}

namespace {

// Nearest-rank percentile on a sorted sample.
double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto n = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::ceil(q * n));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

bool is_proposal(const AnnotationRow& r) { return !r.pair_id.empty() && r.pair_id[0] == 'q'; }
bool is_uniform(const AnnotationRow& r) { return !r.pair_id.empty() && r.pair_id[0] == 'u'; }

}  // namespace

PrCurve pr_curve(const std::vector<AnnotationRow>& rows, const std::vector<double>& thresholds,
                 std::size_t bootstrap_n, std::uint64_t seed) {
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    require(thresholds[i] > thresholds[i - 1], Errc::contract, "pr_curve: thresholds must be strictly increasing");
  std::vector<EstimatorSample> proposal;
  std::vector<double> sims;
  std::map<RelationPair, double> sim_of;
  std::vector<const AnnotationRow*> uniform;
  for (const auto& r : rows) {
    if (r.label < 0) continue;
    if (is_proposal(r)) {
      proposal.push_back({r.pair, r.label, r.proposal_weight});
      sims.push_back(r.similarity);
      sim_of[r.pair] = r.similarity;
    } else if (is_uniform(r)) {
      uniform.push_back(&r);
    }
  }

  const std::size_t T = thresholds.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto recall_at = [&](const std::vector<std::size_t>& idx, double lambda) {
    double total = 0.0, hit = 0.0;
    for (auto i : idx) {
      if (proposal[i].label != 1) continue;
      const double w = 1.0 / proposal[i].proposal_weight;
      total += w;
      if (sims[i] >= lambda) hit += w;
    }
    return total > 0.0 ? hit / total : nan;
  };
  auto precision_at = [&](const std::vector<std::size_t>& idx, double lambda) {
    std::size_t n = 0, valid = 0;
    for (auto i : idx) {
      if (uniform[i]->similarity < lambda || uniform[i]->proposal_weight > lambda) continue;
      ++n;
      valid += static_cast<std::size_t>(uniform[i]->label);
    }
    return n > 0 ? static_cast<double>(valid) / static_cast<double>(n) : nan;
  };

  PrCurve curve;
  curve.bootstrap = bootstrap_n;
  for (double lambda : thresholds) {
    PrPoint p;
    p.lambda = lambda;
    std::vector<int> labels;
    for (const auto* u : uniform)
      if (u->similarity >= lambda && u->proposal_weight <= lambda) labels.push_back(u->label);
    p.precision_samples = labels.size();
    p.precision = labels.empty() ? nan : estimate_precision(labels);
    p.recall = estimate_recall(proposal, [&](const RelationPair& pr) { return sim_of.at(pr) >= lambda; });
    curve.points.push_back(p);
  }

  // Each replicate resamples both sample sets once and is reused at every
  // threshold, so the bands stay coherent along the curve.
  std::vector<std::vector<double>> rec(T, std::vector<double>(bootstrap_n, nan));
  std::vector<std::vector<double>> pre(T, std::vector<double>(bootstrap_n, nan));
  parallel_for(bootstrap_n, [&](std::size_t b) {
    Rng rng(derive_seed(seed, {0xb007u, b}));
    std::vector<std::size_t> ip(proposal.size()), iu(uniform.size());
    for (auto& i : ip) i = rng.below(proposal.size());
    for (auto& i : iu) i = rng.below(uniform.size());
    for (std::size_t t = 0; t < T; ++t) {
      rec[t][b] = recall_at(ip, thresholds[t]);
      pre[t][b] = precision_at(iu, thresholds[t]);
    }
  });
  for (std::size_t t = 0; t < T; ++t) {
    auto finite = [](std::vector<double> v) {
      v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
      std::sort(v.begin(), v.end());
      return v;
    };
    const auto r = finite(rec[t]);
    const auto p = finite(pre[t]);
    auto& pt = curve.points[t];
    pt.r_lo = r.empty() ? pt.recall : percentile(r, 0.025);
    pt.r_hi = r.empty() ? pt.recall : percentile(r, 0.975);
    pt.p_lo = p.empty() ? pt.precision : percentile(p, 0.025);
    pt.p_hi = p.empty() ? pt.precision : percentile(p, 0.975);
  }
  return curve;
}

namespace {

std::string number_or_empty(double v) { return std::isnan(v) ? std::string() : io::format_number(v); }

}  // namespace

std::string pr_to_csv(const PrCurve& curve) {
  std::ostringstream out;
  out << "lambda,precision,p_lo,p_hi,recall,r_lo,r_hi\n";
  for (const auto& p : curve.points)
    out << io::format_number(p.lambda) << ',' << number_or_empty(p.precision) << ',' << number_or_empty(p.p_lo)
        << ',' << number_or_empty(p.p_hi) << ',' << io::format_number(p.recall) << ',' << io::format_number(p.r_lo)
        << ',' << io::format_number(p.r_hi) << '\n';
  return out.str();
}

nlohmann::json pr_to_json(const PrCurve& curve) {
  io::json points = io::json::array();
  auto num = [](double v) { return std::isnan(v) ? io::json(nullptr) : io::json(v); };
  for (const auto& p : curve.points)
    points.push_back({{"lambda", p.lambda},
                      {"precision", num(p.precision)},
                      {"p_lo", num(p.p_lo)},
                      {"p_hi", num(p.p_hi)},
                      {"recall", p.recall},
                      {"r_lo", p.r_lo},
                      {"r_hi", p.r_hi},
                      {"precision_samples", p.precision_samples}});
  return {{"format_version", io::kFormatVersion}, {"kind", "pr_curve"}, {"bootstrap", curve.bootstrap},
          {"points", points}};
}

PrCurve pr_from_json(const nlohmann::json& j) {
  io::check_format_version(j, "pr curve");
  if (j.value("kind", "") != "pr_curve") fail(Errc::parse, "not a pr curve");
  PrCurve c;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto num = [&](const io::json& v) { return v.is_null() ? nan : v.get<double>(); };
  try {
    c.bootstrap = j.at("bootstrap").get<std::size_t>();
    for (const auto& p : j.at("points")) {
      PrPoint pt;
      pt.lambda = p.at("lambda").get<double>();
      pt.precision = num(p.at("precision"));
      pt.p_lo = num(p.at("p_lo"));
      pt.p_hi = num(p.at("p_hi"));
      pt.recall = p.at("recall").get<double>();
      pt.r_lo = p.at("r_lo").get<double>();
      pt.r_hi = p.at("r_hi").get<double>();
      pt.precision_samples = p.value("precision_samples", std::size_t{0});
      c.points.push_back(pt);
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(Errc::parse, std::string("pr curve: ") + ex.what());
  }
  return c;
}

}  // namespace relsim::redundancy
