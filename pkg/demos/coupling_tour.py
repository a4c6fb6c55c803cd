"""Tour of the noise couplings: xi + zeta must have the law of (1+alpha)*xi.

Discrete families get the identity checked by exact enumeration of the
branch tree; Gaussian goes through a two-sample KS test and Laplace
through a characteristic-function grid, both at a million draws.
"""

import numpy as np

from ewa_agg import (
    BoundedBinaryMixture,
    CenteredBernoulli,
    CenteredBinomial,
    Gaussian,
    Laplace,
    sample_coupling,
    verify_coupling,
)

MIXING = [((0.6, 0.6), 0.4), ((0.35, 0.2), 0.35), ((0.1, 0.45), 0.25)]


def main():
    rng = np.random.default_rng(11)
    models = [
        (CenteredBernoulli([0.2, 0.5, 0.8]), "exact"),
        (BoundedBinaryMixture.homogeneous(3, 0.6, 0.6, MIXING), "exact"),
        (CenteredBinomial(0.25, 4, [0.3, 0.5, 0.7]), "exact"),
        (Gaussian.homogeneous(3, 1.0), "ks"),
        (Laplace.homogeneous(3, 0.8), "cf_grid"),
    ]

    print(f"{'family':<24} {'alpha':>5} {'method':>8} {'statistic':>12} {'threshold':>12}  verdict")
    for model, method in models:
        for alpha in (0.1, 0.5, 1.0):
            r = verify_coupling(model, alpha, method=method, sample_size=200_000, rng=rng)
            print(
                f"{r.family:<24} {r.alpha:>5.2f} {r.method:>8} "
                f"{r.statistic:>12.3e} {r.threshold:>12.3e}  {'pass' if r.verdict else 'FAIL'}"
            )

    # one concrete draw, to see the pieces
    model = CenteredBernoulli([0.3])
    draw = sample_coupling(model, 1.0, rng)
    print()
    print("single bernoulli draw at alpha=1:")
    print(f"  xi = {draw.xi[0]:+.3f}, zeta = {draw.zeta[0]:+.3f}, "
          f"xi + zeta = {draw.xi[0] + draw.zeta[0]:+.3f}  (support of 2*xi)")


if __name__ == "__main__":
    main()
