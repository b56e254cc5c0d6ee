// temporary debugging aid (not part of the test suites)
#include <cstdio>

#include "kacpru/purified.hpp"

using namespace kacpru;
using namespace kacpru::purified;

int main() {
  for (unsigned d = 1; d <= 2; ++d) {
    auto basis = std::make_shared<PurifiedBasis>(2, d);
    auto layout = std::make_shared<relations::VarLenLayout>(2, 3, false);
    for (unsigned t = 1; t <= 2; ++t) {
      auto rep = check_w_hpo_closeness(basis, layout, t);
      std::printf("d=%u t=%u: fwd %.6f adj %.6f bound %.6f coeff_gap %.6f (target %.6f)\n", d, t,
                  rep.norm_gap, rep.adjoint_gap, rep.bound, rep.sector1_coeff_gap,
                  1.0 - std::sqrt(2.0 / 3.0));
    }
    auto fam = enumerate_phi_family(basis, 2, false);
    auto g = numerics::gram_matrix(fam.vectors);
    double dev = (g - numerics::Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    std::printf("d=%u gram max dev %.8f (2^-d = %.4f, 2^-d/(N-1) = %.6f)\n", d, dev,
                std::pow(2.0, -double(d)), std::pow(2.0, -double(d)) / 3.0);
    // singleton cross pair
    relations::Relation empty(2, {});
    relations::Relation r00(2, {{0, 0}});
    relations::Relation l12(2, {{1, 2}});
    auto i1 = fam.index_of(empty, r00);
    auto i2 = fam.index_of(l12, empty);
    std::printf("d=%u cross entry %.8f%+.8fi\n", d, g(i1, i2).real(), g(i1, i2).imag());
  }
  {
    auto basis = std::make_shared<PurifiedBasis>(2, 2);
    oracles::AdversarySpec spec;
    spec.t = 2;
    spec.m = 2;
    spec.seed = 41;
    RngStream rng(7);
    auto g = numerics::haar_unitary(4, rng);
    auto rep = check_compress_scaling(*basis, spec, g);
    std::printf("compress: residual %.3e ratio %.9f formula %.9f\n", rep.residual,
                rep.measured_ratio, rep.formula_ratio);
  }
  return 0;
}
