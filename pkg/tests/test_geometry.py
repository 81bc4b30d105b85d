import numpy as np
import pytest

from hotspots.geometry import (DegenerateTriangleError, LabeledTriangle,
                               RIGHT_ISOSCELES, angles, classify, edge_frame,
                               from_angles, straight_line_path)

PI = np.pi

# oracle: law of cosines on (0, 1, 0.2+0.1i)
LOC_ANGLES = (0.46364760900080665, 0.1243549945467616, 2.5535900500422244)


def test_angles_right_isosceles():
    b = angles(RIGHT_ISOSCELES)
    assert b == pytest.approx((PI / 2, PI / 4, PI / 4), abs=1e-14)


def test_angles_equilateral():
    tri = LabeledTriangle(0, 1, 0.5 + 0.5j * np.sqrt(3))
    assert angles(tri) == pytest.approx((PI / 3,) * 3, abs=1e-13)


def test_angles_law_of_cosines_oracle():
    tri = LabeledTriangle(0, 1, 0.2 + 0.1j)
    b = angles(tri)
    assert b == pytest.approx(LOC_ANGLES, abs=1e-12)
    assert b[2] > PI / 2
    assert sum(b) == pytest.approx(PI, abs=1e-12)


def test_angle_sum_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        v = rng.standard_normal(6)
        try:
            tri = LabeledTriangle(complex(v[0], v[1]), complex(v[2], v[3]),
                                  complex(v[4], v[5]))
        except DegenerateTriangleError:
            continue
        assert sum(angles(tri)) == pytest.approx(PI, abs=1e-12)


def test_degenerate_rejected():
    with pytest.raises(DegenerateTriangleError):
        LabeledTriangle(0, 1, 2)
    with pytest.raises(DegenerateTriangleError):
        LabeledTriangle(0, 1, 0.5 + 1e-15j)


def test_classify():
    assert classify(RIGHT_ISOSCELES).kind == "right"
    assert classify(RIGHT_ISOSCELES).is_isosceles
    eq = classify(from_angles(PI / 3, PI / 3))
    assert eq.kind == "acute" and eq.is_equilateral and eq.is_isosceles
    ob = classify(LabeledTriangle(0, 1, 0.2 + 0.1j))
    assert ob.kind == "obtuse" and ob.obtuse_vertex == 3


def test_classify_flags_consistent():
    sc = classify(from_angles(1.2, 0.9))
    assert sc.kind == "acute" and not sc.is_isosceles
    assert sc.obtuse_vertex is None


def test_straight_line_path_endpoints():
    tri0 = LabeledTriangle(0, 2, 2j)
    t0 = straight_line_path(tri0, 0.0)
    assert t0.vertices == tri0.vertices
    t1 = straight_line_path(tri0, 1.0)
    assert t1.vertices == (0, 1, 1j)
    # linear interpolation of the vertex triples
    tm = straight_line_path(tri0, 0.5)
    assert tm.v2 == pytest.approx(1.5)
    assert tm.v3 == pytest.approx(1.5j)


def test_straight_line_path_affine_in_t():
    tri0 = from_angles(0.8, 1.1)
    a = straight_line_path(tri0, 0.3)
    b = straight_line_path(tri0, 0.7)
    mid = straight_line_path(tri0, 0.5)
    for va, vb, vm in zip(a.vertices, b.vertices, mid.vertices):
        assert vm == pytest.approx((va + vb) / 2, abs=0)


def test_from_angles_examples():
    assert from_angles(PI / 2, PI / 4).v3 == pytest.approx(1j, abs=1e-15)
    eq = from_angles(PI / 3, PI / 3)
    assert abs(eq.v3 - complex(0.5, np.sqrt(3) / 2)) < 1e-15
    assert from_angles(PI / 4, PI / 4).v3 == pytest.approx(0.5 + 0.5j,
                                                           abs=1e-15)


def test_from_angles_rejects_bad_simplex():
    with pytest.raises(ValueError):
        from_angles(2.0, 2.0)
    with pytest.raises(ValueError):
        from_angles(-0.1, 1.0)


def test_from_angles_roundtrip():
    rng = np.random.default_rng(11)
    for _ in range(30):
        lam = rng.dirichlet((1, 1, 1))
        b = 0.05 + lam * (PI - 0.15)
        tri = from_angles(b[0], b[1])
        got = angles(tri)
        assert got[0] == pytest.approx(b[0], abs=1e-10)
        assert got[1] == pytest.approx(b[1], abs=1e-10)


def test_edge_frame_right_isosceles():
    f1 = edge_frame(RIGHT_ISOSCELES, 1)
    assert f1.tangent == pytest.approx([1.0, 0.0])
    assert f1.normal == pytest.approx([0.0, -1.0])
    f2 = edge_frame(RIGHT_ISOSCELES, 2)
    assert f2.normal == pytest.approx(np.array([1.0, 1.0]) / np.sqrt(2))


def test_edge_frame_interior_rule():
    rng = np.random.default_rng(5)
    tris = [from_angles(*(0.2 + rng.random(2))) for _ in range(10)]
    tris.append(LabeledTriangle(0, 1j, 1))  # clockwise labeling
    for tri in tris:
        for e in (1, 2, 3):
            fr = edge_frame(tri, e)
            rotated = np.array([-fr.tangent[1], fr.tangent[0]])
            mid = fr.point(fr.length / 2)
            inward = tri.centroid - mid
            assert rotated @ [inward.real, inward.imag] > 0
            assert fr.tangent @ fr.normal == pytest.approx(0.0, abs=1e-15)


def test_barycentric_roundtrip():
    tri = from_angles(0.7, 1.1)
    lam = np.array([0.2, 0.5, 0.3])
    p = tri.from_barycentric(lam)
    assert tri.barycentric(p) == pytest.approx(lam, abs=1e-14)
    assert tri.contains(p)
    assert not tri.contains(complex(5, 5))


def test_json_roundtrip():
    tri = from_angles(0.7, 1.1)
    back = LabeledTriangle.from_json_dict(tri.to_json_dict())
    assert back.vertices == tri.vertices
