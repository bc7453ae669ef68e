#pragma once

#include "t3star/design.hpp"
#include "t3star/linalg.hpp"
#include "t3star/model.hpp"

#include <memory>
#include <random>
#include <vector>

namespace t3test {

using t3star::Design;
using t3star::EffectTuple;
using t3star::FactorSpace;
using t3star::Matrix;
using t3star::ModelSpec;
using t3star::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, int n) { return random_matrix(rng, n, 1).col(0); }

// Projector through the normal equations; only for full column rank input.
inline Matrix gram_projector(const Matrix& a) {
  return a * (a.transpose() * a).inverse() * a.transpose();
}

inline std::vector<EffectTuple> tuples(std::initializer_list<const char*> bits) {
  std::vector<EffectTuple> out;
  for (const char* b : bits) out.push_back(EffectTuple::parse(b));
  return out;
}

inline ModelSpec single_part(std::initializer_list<const char*> bits) {
  ModelSpec s;
  s.parts.push_back({std::nullopt, tuples(bits)});
  return s;
}

inline ModelSpec saturated2() { return single_part({"00", "10", "01", "11"}); }

// 3x3, empty diagonal, one observation elsewhere.
inline Design table1_design() {
  return Design::from_counts(FactorSpace({3, 3}), {0, 1, 1, 1, 0, 1, 1, 1, 0});
}

// 5x5, 1s in the upper-left 3x3 and lower-right 2x2 blocks.
inline Design blocks_design() {
  std::vector<int> counts(25, 0);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if ((i < 3 && j < 3) || (i >= 3 && j >= 3)) counts[static_cast<std::size_t>(i * 5 + j)] = 1;
    }
  }
  return Design::from_counts(FactorSpace({5, 5}), counts);
}

inline std::shared_ptr<const t3star::ModelFrame> frame(const Design& d, const ModelSpec& s,
                                                       const t3star::CovariateTable& cov = {}) {
  return std::make_shared<const t3star::ModelFrame>(t3star::ModelFrame::build(d, s, cov));
}

// Table 1's coefficient grids, rows i, columns j, vectorized with j fastest.
inline Matrix grids(std::initializer_list<std::initializer_list<double>> cols) {
  Matrix m(9, static_cast<Eigen::Index>(cols.size()));
  Eigen::Index c = 0;
  for (const auto& col : cols) {
    Eigen::Index r = 0;
    for (double v : col) m(r++, c) = v;
    ++c;
  }
  return m;
}

inline Matrix table1_a_star() {
  return grids({{0, 1, 1, 0, 0, -1, 0, -1, 0}, {0, 1, -1, 2, 0, 1, -2, -1, 0}});
}
inline Matrix table1_b_star() {
  return grids({{0, 0, 0, 1, 0, -1, 1, -1, 0}, {0, 2, -2, 1, 0, -1, -1, 1, 0}});
}
inline Matrix table1_ab() { return grids({{0, 1, -1, -1, 0, 1, 1, -1, 0}}); }

}  // namespace t3test
