"""Smoke test for the compiled `subconc` extension.

Build and install first:  pip install --no-build-isolation ./crates/python
Then run:  python python/smoke_test.py   (or pytest python/)
"""

import math

import subconc


def test_bounds():
    az = subconc.azuma_bound(1000, 1, 1.0, 0.25, 0.5)
    assert math.isclose(az["raw"], 10 * math.exp(-7.8125), rel_tol=1e-12)
    be = subconc.bernstein_bound(1000, 1, 1.0, 0.25, 0.5)
    df = subconc.dimfree_bound(1000, 1, 1.0, 0.25, 0.5)
    assert df["raw"] <= be["raw"] <= az["raw"]
    assert subconc.regime(1.0, 0.25, 0.5) == "sub_gaussian"
    assert subconc.regime(1.0, 0.25, 1.0) == "sub_exponential"
    assert subconc.moment_bound(1000, 2, 1.0, 0.25) > 0


def test_convex_bodies():
    box = subconc.ConvexBody.interval([-1.0, -1.0], [1.0, 1.0])
    ball = subconc.ConvexBody.ball([0.0, 0.0], 1.0)
    assert math.isclose(box.distance([2.0, 0.0]), 1.0)
    assert ball.contains([0.6, 0.6])
    assert math.isclose(ball.support_function([3.0, 4.0]), 5.0)
    avg = subconc.minkowski_average([box, subconc.ConvexBody.interval([0.0, 0.0], [2.0, 2.0])])
    assert math.isclose(avg.distance([2.0, 1.0]), 0.5)


def test_family_and_simulation():
    fam = subconc.PriorFamily.uniform_shift(1.0, 0.5, 200)
    assert fam.d == 1 and fam.n == 200
    # mean spread a^2 plus uniform variance r^2/3
    assert math.isclose(fam.sigma_bar_sq(), 1.0 + 0.25 / 3, rel_tol=1e-8)
    x = fam.sample_constant([1.0], 5)
    assert len(x) == 200 and all(0.5 <= v[0] <= 1.5 for v in x)
    rows = subconc.sandwich(fam, [0.02, 0.05], 2000, seed=9)
    again = subconc.sandwich(fam, [0.02, 0.05], 2000, seed=9, workers=2)
    assert rows == again
    assert all(r["upper_holds"] and r["lower_holds"] for r in rows)
    lo, hi = subconc.clopper_pearson(0, 1000)
    assert lo == 0.0 and 0 < hi < 0.01


def test_nets_and_oracle():
    net = subconc.half_net(2)
    assert 2 <= len(net) <= 25
    assert all(math.isclose(math.hypot(*p), 1.0) for p in net)
    for name in subconc.reference_spaces():
        ok, report = subconc.oracle_suite(name)
        assert ok, (name, report)


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"{name}: ok")
