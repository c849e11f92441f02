// GHZ preparation in one sweep, with and without a collision phase error.

#include <cstdio>

#include "ccgate/protocols.hpp"

int main() {
  using namespace ccgate;
  for (int n = 2; n <= 8; ++n) std::printf("N = %d  F = %.12f\n", n, ghz_protocol(n).fidelity);
  for (double eps : {0.05, 0.2, 0.5}) {
    std::vector<CollisionPhases> tables(4, ideal_ghz_collision());
    tables[2].cb += eps;
    std::printf("N = 5, one collision off by %.2f rad: F = %.6f\n", eps, ghz_protocol(5, tables).fidelity);
  }
}
