#include <cmath>
#include <cstdio>

#include "gylab/continuum.hpp"

int main() {
  using namespace gylab;
  const ProblemSpec spec{free_particle(1.0), quadratic_generator(1.0), quadratic_generator(-1.0),
                         1.0, 1.0, Vector::Zero(1), Vector::Zero(1)};
  const double z = zeta_det(spec, 0.0).value;
  std::printf("det_zeta = %.15g\n", z);
  return std::abs(z - 6.0) < 1e-8 ? 0 : 1;
}
