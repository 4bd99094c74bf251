#pragma once

#include "bernoulli/grid.hpp"

namespace bernoulli {

/// Central differences in the interior, second-order one-sided at the grid edge.
VectorField gradient(const ScalarField& u);

/// Three-point second differences (shifted at the edge) and the centred mixed
/// stencil, which is the y-difference of the x-difference in the interior.
MatrixField hessian(const ScalarField& u);

/// Five-point Laplacian at interior nodes; zero on the edge.
ScalarField laplacian(const ScalarField& u);

}  // namespace bernoulli
