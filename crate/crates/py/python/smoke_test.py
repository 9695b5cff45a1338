"""Smoke test for the meshbool_py extension module."""

import math
import os
import tempfile

import meshbool_py as mb


def main():
    a, b = mb.fixture("cube_cube")
    r = mb.boolean(a, b)
    vols = [sum(m.volume() for m in ms) for ms in (r.union, r.intersection, r.a_minus_b, r.b_minus_a)]
    for got, want in zip(vols, (1.875, 0.125, 0.875, 0.875)):
        assert math.isclose(got, want, rel_tol=1e-9), (got, want)
    assert all(m.is_manifold() for m in r.union)

    a, b = mb.fixture("crossed_cylinders")
    kinds = [k for k, _ in mb.intersection_loops(a, b)]
    assert kinds == ["soft_closed"] * 4, kinds

    a, b = mb.fixture("vee_wee")
    sa, sb = mb.split_surfaces(a, b)
    assert (len(sa), len(sb)) == (5, 5)

    cube = mb.Mesh(
        [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)],
        [(0, 2, 1), (0, 3, 2), (4, 5, 6), (4, 6, 7), (0, 1, 5), (0, 5, 4),
         (1, 2, 6), (1, 6, 5), (2, 3, 7), (2, 7, 6), (3, 0, 4), (3, 4, 7)],
    )
    assert cube.closed and math.isclose(cube.volume(), 1.0)
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "cube.stl")
        cube.save(path)
        back = mb.Mesh.load(path)
        assert len(back) == 12
    try:
        mb.boolean(cube, cube)
    except mb.MeshboolError as e:
        assert "coincident" in str(e)
    else:
        raise AssertionError("coincident inputs accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
