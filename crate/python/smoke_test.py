"""Smoke test for the convexlab extension module.

Build and install first, e.g. `maturin build --release` in crates/python and
`pip install` the wheel, then run `python python/smoke_test.py`.
"""

import math

import convexlab as cl


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    assert "ball2" in cl.gallery_names()

    ball = cl.Domain.gallery("ball2")
    assert ball.dim == 2
    close(ball.value([0.6, 0.8]), 0.0, 1e-15)
    assert ball.gradient([1.0, 0.0]) == [2.0, 0.0]
    assert ball.hessian([0.3, -0.2]) == [[2.0, 0.0], [0.0, 2.0]]
    assert ball.contains([0.5, 0.5]) and not ball.contains([1.0, 1.0])

    for x, n in ball.sample_boundary(16):
        close(math.hypot(*x), 1.0, 1e-9)
        close(n[0] * x[1] - n[1] * x[0], 0.0, 1e-9)

    rows = cl.classify(ball, count=20)
    assert all(r["class"] == "StronglyConvex" for r in rows)
    assert cl.convexity_oracle(ball, pairs=200) is None
    assert cl.contact_order(ball, [0.0, 1.0]) == ("finite", 2)

    peanut = cl.Domain.gallery("peanut")
    assert cl.convexity_oracle(peanut) is not None

    em2 = cl.Domain.gallery("em:2")
    # x1^2 + x2^4 < 1: the tangent line at (1, 0) meets the boundary to order 4
    assert cl.contact_order(em2, [1.0, 0.0]) == ("finite", 4)

    same = cl.Domain.from_json(em2.to_json())
    assert same.value([0.3, 0.7]) == em2.value([0.3, 0.7])
    custom = cl.Domain.polynomial("disk", [(1.0, [2, 0]), (1.0, [0, 2]), (-4.0, [0, 0])], [-3, -3], [3, 3])
    close(custom.value([2.0, 0.0]), 0.0, 0.0)

    close(cl.convexify(ball)["lambda"], 1.0, 0.0)
    try:
        cl.convexify(em2)
    except cl.ConvexlabError:
        pass
    else:
        raise AssertionError("em:2 is not strongly convex")

    assert cl.is_extreme("square", [1.0, 1.0]) is None
    a, b = cl.is_extreme("square", [0.5, 1.0])
    close((a[0] + b[0]) / 2, 0.5, 1e-12)
    close(cl.minkowski_gauge("square", [0.5, -0.25]), 0.5, 1e-11)

    # symmetric data: 1.01 - 1.08 t^2 + 0.16 t^4
    c = cl.bump_polynomial(0.5, [0.75, 1.0], [0.75, -1.0], 1.01, 1)
    for got, want in zip(c + [0.0] * 5, [1.01, 0.0, -1.08, 0.0, 0.16]):
        close(got, want, 1e-12)

    out = cl.bump(ball, [0.0, 1.0], 1e-3)
    assert 0 < out["hausdorff"] < 1e-3

    print("convexlab smoke test: ok")


if __name__ == "__main__":
    main()
