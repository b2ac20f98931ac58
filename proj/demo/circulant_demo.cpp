// Two CAE samples in dimension 8 are not enough for Tyler's estimator, but
// they are enough once the circulant symmetry is imposed.

#include <iostream>

#include "symtyler/symtyler.hpp"

int main() {
  using namespace symtyler;
  const GroupKind kind = GroupKind::parse("circulant");
  const Index p = 8;
  const GroupSpec group = builtin_group(kind, p);
  const StructureInfo structure = builtin_structure(kind, p);

  const ShapeMatrix truth = random_invariant_shape(structure, 10.0, 7);
  const SampleSet x = sample_cae(truth, min_samples(structure), 11);

  const EstimatorReport report = styler_estimate(x, group, structure);
  std::cout << "n = " << x.size() << ", |G| = " << group.order() << ", rho = " << structure.rho()
            << '\n'
            << "status " << to_string(report.status) << " after " << report.iterations << " iterations\n"
            << "mse vs truth " << mse_error(report.estimate, truth.matrix()) << '\n';

  try {
    tyler_estimate(x);
  } catch (const Error& e) {
    std::cout << "tyler: " << e.what() << '\n';
  }
}
