"""Smoke test for the python bindings.

When run from the build tree (PYTHONPATH pointing at the directory with the
compiled extension, EUWICK_FROM_BUILD=1) it imports `_euwick` directly;
when the wheel is installed it goes through the `euwick` package.
"""

import math
import os
import sys

import numpy as np

if os.environ.get("EUWICK_FROM_BUILD"):
    import _euwick as ew
else:
    import euwick as ew


def check(name, ok):
    print(("PASS" if ok else "FAIL"), name)
    if not ok:
        sys.exit(1)


def main():
    g = ew.make_torus(2, [4.0, 4.0], 1.0)
    lat = ew.build_lattice(g, 8)
    check("lattice size", lat.site_count == 64 and lat.dim == 2)

    G = ew.exact_green_kernel(lat)
    check("green symmetric", np.max(np.abs(G - G.T)) < 1e-12)
    E = ew.elliptic_operator(lat)
    mu = lat.volume_weight()
    check("green inverts operator",
          np.max(np.abs(E @ G @ np.diag(mu) - np.eye(64))) < 1e-8)

    p = ew.Parametrix.green(lat)
    check("coincidence finite", np.all(np.isfinite(p.coincidence())))

    rng = np.random.default_rng(7)
    f1, f2 = rng.normal(size=64), rng.normal(size=64)
    k = ew.ContractionKernel(lat, p.kernel)
    a, b = ew.linear_field(lat, f1), ew.local_monomial(lat, 2, f2)
    comm = ew.functional_distance(ew.star_product(a, b, k), ew.star_product(b, a, k))
    check("star commutative", comm < 1e-12)

    # phi=0 value of a chained star product of linear factors matches the
    # pairing enumeration
    chain = ew.star_product(ew.star_product(a, a, k), ew.star_product(a, a, k), k)
    mono = ew.pointwise_product(ew.pointwise_product(a, a), ew.pointwise_product(a, a))
    val = chain.evaluate(np.zeros(64))
    oracle = ew.isserlis_moment(mono, p.kernel)
    check("isserlis degree 4", abs(val - oracle) < 1e-10 * max(1.0, abs(oracle)))

    w3 = ew.wick_power(p, 3, np.abs(f1))
    check("odd wick vacuum", abs(w3.evaluate(np.zeros(64))) < 1e-12)

    check("leibniz k=1", ew.leibniz_residual(p, 1, 0, f1, f2) < 1e-12)

    # small grid: the test function crosses the language boundary per site
    kern = ew.RadialKernel(alpha=2.0, ambient_dim=3)
    check("scaling degree", ew.scaling_degree(kern) == 2.0 and ew.unique_extension(kern))
    value = ew.extrapolated_pair(kern, 8, 0.5, lambda y: math.exp(-y @ y), 0.9, 3)
    oracle = ew.radial_quadrature(kern, lambda r: math.exp(-r * r), 4.0)
    check("extension vs quadrature", abs(value - oracle) < 1e-3)

    mean, err, n = ew.mc_expectation(ew.pointwise_product(a, a), p.kernel, 4000, 20240711)
    exact = ew.isserlis_moment(ew.pointwise_product(a, a), p.kernel).real
    check("monte carlo 4 sigma", abs(mean - exact) < 4 * err)

    print("python smoke: all checks passed")


if __name__ == "__main__":
    main()
