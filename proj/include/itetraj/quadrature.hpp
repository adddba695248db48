// Copyright The itetraj Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ITETRAJ_QUADRATURE_HPP
#define ITETRAJ_QUADRATURE_HPP

#include <vector>

namespace itetraj::quadrature
{

struct Rule
{
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [a, b].
Rule gauss_legendre(int n, double a = -1.0, double b = 1.0);

}  // namespace itetraj::quadrature

#endif  // ITETRAJ_QUADRATURE_HPP
