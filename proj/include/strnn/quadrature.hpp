#pragma once

#include <vector>

namespace strnn {

// Nodes and weights on (-1,1); exact for polynomials of degree <= 2q-1.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int q);

}  // namespace strnn
