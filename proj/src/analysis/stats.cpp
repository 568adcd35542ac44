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
#include <numeric>
#include <sstream>

#include "relsim/analysis.hpp"
#include "relsim/error.hpp"
#include "relsim/io.hpp"
#include "relsim/rng.hpp"

namespace relsim::analysis {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), Errc::input, "pearson: sequences differ in length");
  require(x.size() >= 2, Errc::input, "pearson: need at least two values");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(Errc::degenerate_input, "correlation undefined for a constant sequence");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), Errc::input, "spearman: sequences differ in length");
  require(x.size() >= 3, Errc::input, "spearman: need at least three values");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double permutation_pvalue(std::span<const double> x, std::span<const double> y, std::size_t shuffles,
                          std::uint64_t seed) {
  require(shuffles > 0, Errc::config, "permutation_pvalue: need at least one shuffle");
  const double observed = std::abs(spearman(x, y));
  const auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  Rng rng(derive_seed(seed, {0x9e27u}));
  std::size_t extreme = 0;
  for (std::size_t s = 0; s < shuffles; ++s) {
    rng.shuffle(ry);
    // Compare with a little slack so permutations equal to the observed
    // statistic are not lost to rounding.
    if (std::abs(pearson(rx, ry)) >= observed - 1e-12) ++extreme;
  }
  return static_cast<double>(1 + extreme) / static_cast<double>(1 + shuffles);
}

std::vector<double> AnnotationTable::mean_scores() const {
  std::vector<double> m(scores.rows(), 0.0);
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    for (std::size_t s = 0; s < scores.cols(); ++s) m[i] += scores(i, s);
    m[i] /= static_cast<double>(scores.cols());
  }
  return m;
}

void AnnotationTable::validate() const {
  require(pairs.size() == scores.rows(), Errc::input, "annotation table: pair count differs from score rows");
  require(subjects() >= 2, Errc::input, "annotation table: need at least two subjects");
  for (int v : scores.flat()) require(v >= 0 && v <= 4, Errc::input, "annotation table: scores must be in 0..4");
}

AnnotationTable annotation_table_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::size_t width = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = io::split_csv_line(line);
    if (width == 0) {
      if (f.size() < 4 || f[0] != "r1_name" || f[1] != "r2_name")
        fail(Errc::parse, "annotation table header must be r1_name,r2_name,s1,...");
      width = f.size();
      continue;
    }
    if (f.size() != width) fail(Errc::parse, "annotation table line " + std::to_string(lineno) + ": wrong field count");
    rows.push_back(std::move(f));
  }
  if (width == 0) fail(Errc::parse, "annotation table is empty");
  AnnotationTable t;
  t.scores = Matrix<int>(rows.size(), width - 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.pairs.emplace_back(rows[i][0], rows[i][1]);
    for (std::size_t s = 2; s < width; ++s) {
      const auto& v = rows[i][s];
      if (v.size() != 1 || v[0] < '0' || v[0] > '4')
        fail(Errc::parse, "annotation table: score must be an integer 0..4, got '" + v + "'");
      t.scores(i, s - 2) = v[0] - '0';
    }
  }
  t.validate();
  return t;
}

std::string annotation_table_to_csv(const AnnotationTable& t) {
  std::ostringstream out;
  out << "r1_name,r2_name";
  for (std::size_t s = 0; s < t.subjects(); ++s) out << ",s" << s + 1;
  out << '\n';
  for (std::size_t i = 0; i < t.pairs.size(); ++i) {
    out << io::csv_field(t.pairs[i].first) << ',' << io::csv_field(t.pairs[i].second);
    for (std::size_t s = 0; s < t.subjects(); ++s) out << ',' << t.scores(i, s);
    out << '\n';
  }
  return out.str();
}

LooAgreement loo_agreement(const AnnotationTable& t) {
  t.validate();
  require(t.subjects() >= 3, Errc::input, "loo_agreement: need at least three subjects");
  const std::size_t n = t.pairs.size(), k = t.subjects();
  LooAgreement out;
  out.per_subject.assign(k, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> mine(n), rest(n);
  std::vector<double> kept;
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      mine[i] = t.scores(i, s);
      double sum = 0.0;
      for (std::size_t o = 0; o < k; ++o)
        if (o != s) sum += t.scores(i, o);
      rest[i] = sum / static_cast<double>(k - 1);
    }
    try {
      out.per_subject[s] = spearman(mine, rest);
      kept.push_back(out.per_subject[s]);
    } catch (const Error& e) {
      if (e.code() != Errc::degenerate_input) throw;
      out.skipped.push_back(s);
    }
  }
  if (kept.empty()) fail(Errc::degenerate_input, "loo_agreement: every subject column is constant");
  const auto m = static_cast<double>(kept.size());
  out.mean = std::accumulate(kept.begin(), kept.end(), 0.0) / m;
  double var = 0.0;
  for (double v : kept) var += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(var / m);
  return out;
}

std::vector<double> model_scores(const AnnotationTable& t, const similarity::SimilarityMatrix& sim) {
  std::vector<double> out;
  out.reserve(t.pairs.size());
  for (const auto& [a, b] : t.pairs) {
    const auto ia = sim.find(a);
    const auto ib = sim.find(b);
    if (!ia || !ib) fail(Errc::input, "no model score for pair (" + a + ", " + b + ")");
    out.push_back(sim(*ia, *ib));
  }
  return out;
}

double model_human_correlation(const AnnotationTable& t, const similarity::SimilarityMatrix& sim) {
  t.validate();
  return spearman(t.mean_scores(), model_scores(t, sim));
}

}  // namespace relsim::analysis
