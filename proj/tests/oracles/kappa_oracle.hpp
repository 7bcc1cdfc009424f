// Copyright 2026 The flashqg Authors
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

// Reference Cohen's kappa from an explicit 2x2 contingency table, using
// floating-point marginal proportions.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace flashqg::oracle {

struct Contingency {
  // table[a][b]: counts with rater A saying a and rater B saying b (1 = yes).
  double table[2][2] = {{0, 0}, {0, 0}};
  double total = 0;
};

inline Contingency tabulate(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("bad lengths");
  Contingency t;
  for (std::size_t i = 0; i < a.size(); ++i) t.table[a[i] ? 1 : 0][b[i] ? 1 : 0] += 1;
  t.total = static_cast<double>(a.size());
  return t;
}

inline double kappa_from_table(const Contingency& t) {
  const double po = (t.table[0][0] + t.table[1][1]) / t.total;
  const double a_yes = (t.table[1][0] + t.table[1][1]) / t.total;
  const double b_yes = (t.table[0][1] + t.table[1][1]) / t.total;
  const double pe = a_yes * b_yes + (1 - a_yes) * (1 - b_yes);
  if (pe == 1.0) return po == 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1 - pe);
}

}  // namespace flashqg::oracle
