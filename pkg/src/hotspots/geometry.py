"""Labeled triangles, angle-simplex coordinates, deformation paths, edge frames.

Points live in the complex plane (z = x + iy); vectors returned to callers
are real 2-arrays. Vertex labels are 1-based, edge e joins vertex e to the
next label (cyclically).
"""

import json
from dataclasses import dataclass

import numpy as np

DEGENERACY_TOL = 1e-12
ANGLE_SUM_TOL = 1e-12
RIGHT_ANGLE_TOL = 1e-10

RIGHT_ISOSCELES = None  # set below, after LabeledTriangle is defined


class DegenerateTriangleError(ValueError):
    pass


def _as_complex(p):
    if isinstance(p, complex):
        return p
    p = np.asarray(p, dtype=float)
    if p.shape == ():
        return complex(p)
    return complex(p[0], p[1])


@dataclass(frozen=True)
class LabeledTriangle:
    """Three labeled planar vertices; orientation +1 iff (v1,v2,v3) is ccw."""

    v1: complex
    v2: complex
    v3: complex

    def __post_init__(self):
        object.__setattr__(self, "v1", _as_complex(self.v1))
        object.__setattr__(self, "v2", _as_complex(self.v2))
        object.__setattr__(self, "v3", _as_complex(self.v3))
        area2 = self.signed_area2
        if abs(area2) <= DEGENERACY_TOL * self.diameter**2:
            raise DegenerateTriangleError(
                f"vertices are (nearly) collinear: {self.vertices}"
            )
        b = angles(self)
        if abs(sum(b) - np.pi) > ANGLE_SUM_TOL:
            raise DegenerateTriangleError("angle sum deviates from pi")

    @property
    def vertices(self):
        return (self.v1, self.v2, self.v3)

    @property
    def signed_area2(self):
        """Twice the signed area; positive for ccw labeling."""
        a = self.v2 - self.v1
        b = self.v3 - self.v1
        return a.real * b.imag - a.imag * b.real

    @property
    def orientation(self):
        return 1 if self.signed_area2 > 0 else -1

    @property
    def area(self):
        return 0.5 * abs(self.signed_area2)

    @property
    def diameter(self):
        v = self.vertices
        return max(abs(v[0] - v[1]), abs(v[1] - v[2]), abs(v[2] - v[0]))

    @property
    def centroid(self):
        return (self.v1 + self.v2 + self.v3) / 3.0

    def vertex(self, label):
        return self.vertices[label - 1]

    def edge_endpoints(self, e):
        """Endpoints (start, end) of edge e = (v_e, v_{e+1})."""
        v = self.vertices
        return v[e - 1], v[e % 3]

    def edge_length(self, e):
        a, b = self.edge_endpoints(e)
        return abs(b - a)

    def barycentric(self, p):
        """Barycentric coordinates of p with respect to (v1, v2, v3)."""
        p = _as_complex(p)
        d = self.signed_area2
        l1 = ((self.v2 - p).real * (self.v3 - p).imag
              - (self.v2 - p).imag * (self.v3 - p).real) / d
        l2 = ((self.v3 - p).real * (self.v1 - p).imag
              - (self.v3 - p).imag * (self.v1 - p).real) / d
        return np.array([l1, l2, 1.0 - l1 - l2])

    def from_barycentric(self, lam):
        lam = np.asarray(lam, dtype=float)
        return lam[..., 0] * self.v1 + lam[..., 1] * self.v2 + lam[..., 2] * self.v3

    def contains(self, p, tol=1e-9):
        lam = self.barycentric(p)
        return bool(lam.min() >= -tol)

    def scaled(self, s):
        return LabeledTriangle(s * self.v1, s * self.v2, s * self.v3)

    def transformed(self, rotation=0.0, translation=0j):
        g = np.exp(1j * rotation)
        return LabeledTriangle(*(g * v + translation for v in self.vertices))

    def to_json_dict(self):
        return {"v": [[v.real, v.imag] for v in self.vertices]}

    @classmethod
    def from_json_dict(cls, d):
        return cls(*(complex(x, y) for x, y in d["v"]))

    @classmethod
    def from_json(cls, text):
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class ShapeClass:
    kind: str                     # 'acute' | 'right' | 'obtuse'
    is_isosceles: bool
    is_equilateral: bool
    obtuse_vertex: int | None = None

    def __post_init__(self):
        if self.is_equilateral and not (self.is_isosceles and self.kind == "acute"):
            raise ValueError("equilateral implies isosceles and acute")
        if (self.obtuse_vertex is not None) != (self.kind == "obtuse"):
            raise ValueError("obtuse_vertex present iff kind is obtuse")


@dataclass(frozen=True)
class EdgeFrame:
    """Unit tangent/outward-normal pair for one side, plus its arc-length chart.

    Rotating `tangent` by +pi/2 points into the triangle; `point(s)` traverses
    the side for s in [0, length].
    """

    edge: int
    tangent: np.ndarray
    normal: np.ndarray
    start: complex
    end: complex
    length: float

    def point(self, s):
        s = np.asarray(s, dtype=float)
        t = self.tangent[0] + 1j * self.tangent[1]
        return self.start + s * t

    def arclength(self, p):
        t = self.tangent[0] + 1j * self.tangent[1]
        return ((_as_complex(p) - self.start) / t).real


def angles(tri):
    """Interior angles (beta1, beta2, beta3), each in (0, pi), summing to pi."""
    v = tri.vertices
    out = []
    for i in range(3):
        a = v[(i + 1) % 3] - v[i]
        b = v[(i + 2) % 3] - v[i]
        cross = a.real * b.imag - a.imag * b.real
        dot = a.real * b.real + a.imag * b.imag
        out.append(float(np.arctan2(abs(cross), dot)))
    return tuple(out)


def classify(tri):
    """Shape class of the triangle; right-angle calls use a 1e-10 rad band."""
    b = np.array(angles(tri))
    i_max = int(np.argmax(b))
    if b[i_max] > np.pi / 2 + RIGHT_ANGLE_TOL:
        kind = "obtuse"
    elif b[i_max] >= np.pi / 2 - RIGHT_ANGLE_TOL:
        kind = "right"
    else:
        kind = "acute"
    iso = any(abs(b[i] - b[j]) <= RIGHT_ANGLE_TOL for i in range(3) for j in range(i))
    equi = np.all(np.abs(b - np.pi / 3) <= RIGHT_ANGLE_TOL)
    return ShapeClass(
        kind=kind,
        is_isosceles=bool(iso or equi),
        is_equilateral=bool(equi),
        obtuse_vertex=i_max + 1 if kind == "obtuse" else None,
    )


def straight_line_path(tri0, t):
    """Triangle at parameter t on the linear path from tri0 to (0, 1, i)."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"path parameter t={t} outside [0, 1]")
    target = (0.0 + 0.0j, 1.0 + 0.0j, 1.0j)
    verts = [(1.0 - t) * v + t * w for v, w in zip(tri0.vertices, target)]
    try:
        return LabeledTriangle(*verts)
    except DegenerateTriangleError as exc:
        raise DegenerateTriangleError(
            f"path degenerates at t={t}: {exc}"
        ) from exc


def from_angles(beta1, beta2):
    """Normalized triangle with v1=0, v2=1 and prescribed angles at v1, v2."""
    if not (beta1 > 0 and beta2 > 0 and beta1 + beta2 < np.pi):
        raise ValueError(f"angles ({beta1}, {beta2}) outside the open simplex")
    r1 = np.sin(beta2) / np.sin(beta1 + beta2)
    v3 = r1 * np.exp(1j * beta1)
    return LabeledTriangle(0.0 + 0.0j, 1.0 + 0.0j, v3)


def edge_frame(tri, e):
    """Frame for side e; tangent chosen so +pi/2 rotation points inward."""
    if e not in (1, 2, 3):
        raise ValueError(f"edge index {e} not in {{1,2,3}}")
    a, b = tri.edge_endpoints(e)
    if tri.orientation < 0:
        a, b = b, a
    d = (b - a) / abs(b - a)
    tangent = np.array([d.real, d.imag])
    normal = np.array([d.imag, -d.real])   # tangent rotated by -pi/2
    return EdgeFrame(
        edge=e,
        tangent=tangent,
        normal=normal,
        start=a,
        end=b,
        length=abs(b - a),
    )


RIGHT_ISOSCELES = LabeledTriangle(0.0 + 0.0j, 1.0 + 0.0j, 1.0j)
