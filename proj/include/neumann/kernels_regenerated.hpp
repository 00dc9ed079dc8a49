#pragma once

// Frozen output of `neumann search --radix 15 --products 4 --starts 200 --seed 1`
// (best start 122, objective 5.1e-27, c = 0.8567). Included from kernels.hpp.

#include "neumann/circuit.hpp"

namespace neumann::kernels {

inline FloatCircuit radix15_regenerated() {
  using F = LinComb<double>;
  return FloatCircuit(
      15,
      {{F{{B, 1.0}}, F{{B, 1.0}}},
       {F{{I, 0.32176676002559729}, {B, 0.11885455413202405}, {P1, -0.55465673736580623}},
        F{{I, 0.74903656176782263}, {B, 0.45438323931402724}, {P1, 1.5507001412785075}}},
       {F{{I, 1.31462066733172}, {B, 0.54341705464849188}, {P1, 1.622945158418664}, {P2, -0.71799307298509074}},
        F{{I, -0.83031809534161582}, {B, -0.54889275065040732}, {P1, 1.3229803603507344}, {P2, 1.2523283232449878}}},
       {F{{I, -0.25422658024022143}, {B, 0.15363474246211123}, {P1, -1.2374703661437012}, {P2, 0.88835356688005107},
          {P3, 0.66753341733976934}},
        F{{I, -0.55811204865685615}, {B, -1.0255831790685341}, {P1, -0.63285250711679908}, {P2, 1.2459661288555608},
          {P3, 1.5408345725850143}}}},
      F{{I, 1.0}, {B, 0.84151187984483855}, {P1, 0.35445512252001771}, {P2, -0.74489229211067975},
        {P3, 0.57402457817024877}, {P4, 1.0}});
}

}  // namespace neumann::kernels
