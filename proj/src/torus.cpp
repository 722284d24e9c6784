#include "wkam/torus.hpp"

#include "wkam/errors.hpp"

namespace wkam {

Grid::Grid(int dim, int n) : dim_(dim), n_(n) {
  if (dim != 1 && dim != 2) throw ConfigError("grid.dim", "dimension must be 1 or 2");
  if (n < 2) throw ConfigError("grid.N", "need at least two points per axis");
}

}  // namespace wkam
