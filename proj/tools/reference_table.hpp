#pragma once

// Published reference rows for the STBR-vs-optimal-GTBR comparison, as
// printed (two decimals for entropies, one for the percentage).

#include <vector>

#include "gtbr/regulator.hpp"

namespace gtbr::reference {

struct Optimum {
  std::vector<Tokens> r;
  std::vector<Tokens> b;
};

struct Row {
  StbrSpec envelope;
  std::vector<Optimum> optima;
  double h_s;
  double h_g;
  double inc_pct;
};

inline const std::vector<Row>& table() {
  static const std::vector<Row> rows = {
      {{4, 3, 6}, {{{6, 3, 3, 0}, {6, 6, 6}}}, 20.04, 20.92, 4.4},
      {{4, 3, 9}, {{{8, 3, 1, 0}, {8, 10, 9}}, {{9, 2, 1, 0}, {9, 10, 8}}}, 20.10, 21.44, 6.7},
      {{4, 3, 12}, {{{12, 0, 0, 0}, {12, 12, 12}}}, 20.10, 21.56, 7.2},
      {{4, 4, 8}, {{{8, 4, 4, 0}, {8, 8, 8}}}, 25.08, 26.04, 3.8},
      {{4, 4, 10}, {{{9, 5, 2, 0}, {9, 12, 9}}}, 25.13, 26.39, 5.0},
      {{4, 4, 12}, {{{11, 4, 1, 0}, {11, 14, 11}}}, 25.14, 26.59, 5.8},
      {{4, 4, 16}, {{{16, 0, 0, 0}, {16, 16, 16}}}, 25.14, 26.70, 6.2},
      {{4, 5, 10}, {{{10, 5, 5, 0}, {10, 10, 10}}}, 29.91, 30.92, 3.4},
      {{4, 5, 12}, {{{11, 6, 3, 0}, {11, 14, 11}}}, 29.96, 31.24, 4.3},
      {{4, 6, 12}, {{{11, 7, 6, 0}, {11, 13, 12}}, {{12, 7, 5, 0}, {12, 13, 11}}}, 34.60, 35.66, 3.1},
      {{5, 3, 6}, {{{6, 3, 3, 3, 0}, {6, 6, 6, 6}}}, 25.68, 26.57, 3.5},
      {{5, 3, 9}, {{{8, 3, 3, 1, 0}, {8, 10, 10, 8}}}, 25.88, 27.33, 5.6},
      {{5, 3, 12}, {{{11, 2, 2, 0, 0}, {11, 13, 13, 11}}}, 25.90, 27.59, 6.5},
      {{5, 3, 15}, {{{15, 0, 0, 0, 0}, {15, 15, 15, 15}}}, 25.90, 27.64, 6.7},
      {{6, 3, 6}, {{{6, 3, 3, 3, 3, 0}, {6, 6, 6, 6, 6}}}, 31.33, 32.23, 2.9},
  };
  return rows;
}

inline constexpr double kEntropyTolerance = 0.005;
inline constexpr double kPercentTolerance = 0.1;

}  // namespace gtbr::reference
