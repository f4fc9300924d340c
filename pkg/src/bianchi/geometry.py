"""Ford fundamental domains for PGL2/PSL2 of an imaginary quadratic order.

The domain is bounded below by the isometric hemispheres S(c, d) (center d/c,
squared radius 1/norm(c), over coprime pairs (c, d)) and on the sides by
vertical walls over a fundamental cell for the stabilizer of infinity.  The
floor is the upper envelope of the hemisphere height functions

    height_(c,d)(p) = 1/norm(c) - dist2(p, d/c),

a power diagram: differences of heights are affine, so every face is a convex
polygon cut out by rational half-planes and the whole complex is exact.

Completeness is certified by Swan's criterion: no envelope vertex may be
strictly covered by an omitted hemisphere, and height-zero vertices must be
tangency points of non-principal cusps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from .arithmetic import (
    ExactPoint,
    Ideal,
    Mat2,
    Order,
    QuadInt,
    canonical_unit_multiple,
    cusp_ideal,
    hnf_rows,
    ideal_index,
    ideals_equivalent,
    ideals_of_norm,
    identity_mat,
    translation_mat,
)
from .rational import QQ

AT_INFINITY = -1  # vertex id of the ideal point above the cell


class GroupMode(str, Enum):
    PGL = "pgl"
    PSL = "psl"

    @staticmethod
    def parse(value) -> "GroupMode":
        if isinstance(value, GroupMode):
            return value
        return GroupMode(str(value).lower())


class ResourceCapError(RuntimeError):
    """Raised when certification would need hemispheres beyond the norm cap."""

    def __init__(self, message: str, vertex: Optional[ExactPoint] = None):
        super().__init__(message)
        self.vertex = vertex


# ---------------------------------------------------------------------------
# exact convex polygon helpers (chart coordinates)
# ---------------------------------------------------------------------------

Halfplane = Tuple  # (A, B, C) meaning A*x + B*y + C >= 0


def poly_area2(poly: Sequence[ExactPoint]):
    """Twice the signed chart area (positive for counterclockwise)."""
    s = QQ(0)
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        s += p.x * q.y - q.x * p.y
    return s


def clip_poly(poly: Sequence[ExactPoint], hp: Halfplane) -> list:
    """Sutherland-Hodgman clip of a convex polygon by A*x + B*y + C >= 0."""
    A, B, C = hp
    n = len(poly)
    if n == 0:
        return []
    sigma = [A * p.x + B * p.y + C for p in poly]
    out: list = []
    for i in range(n):
        p, sp = poly[i], sigma[i]
        q, sq = poly[(i + 1) % n], sigma[(i + 1) % n]
        if sp >= 0:
            if not out or out[-1] != p:
                out.append(p)
        if (sp > 0 and sq < 0) or (sp < 0 and sq > 0):
            t = sp / (sp - sq)
            cut = ExactPoint(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
            if not out or out[-1] != cut:
                out.append(cut)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def canon_poly(poly: Sequence[ExactPoint]) -> list:
    """Dedupe and drop collinear corners; return [] unless area is positive."""
    pts = list(poly)
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        n = len(pts)
        for i in range(n):
            a, b, c = pts[(i - 1) % n], pts[i], pts[(i + 1) % n]
            if b == a:
                pts.pop(i)
                changed = True
                break
            cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x)
            if cross == 0:
                pts.pop(i)
                changed = True
                break
    if len(pts) < 3 or poly_area2(pts) <= 0:
        return []
    return pts


def halfplanes_of(poly: Sequence[ExactPoint]) -> list:
    """Inward half-planes of a counterclockwise convex polygon."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        dx, dy = q.x - p.x, q.y - p.y
        out.append((-dy, dx, dy * p.x - dx * p.y))
    return out


def convex_intersection(p1: Sequence[ExactPoint], p2: Sequence[ExactPoint]) -> list:
    out = list(p1)
    for hp in halfplanes_of(p2):
        out = clip_poly(out, hp)
        if not out:
            break
    return out


def _segment_of_degenerate(poly: Sequence[ExactPoint]) -> Optional[tuple]:
    """Endpoints of a zero-area clip result, or None if it is a point/empty."""
    pts = sorted(set(poly))
    if len(pts) < 2:
        return None
    a, b = pts[0], pts[-1]
    for p in pts:
        cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
        if cross != 0:
            raise ArithmeticError("degenerate intersection is not collinear")
    return a, b


def _seg_param(a: ExactPoint, b: ExactPoint, p: ExactPoint):
    dx, dy = b.x - a.x, b.y - a.y
    den = dx * dx + dy * dy
    return ((p.x - a.x) * dx + (p.y - a.y) * dy) / den


def _on_segment(a: ExactPoint, b: ExactPoint, p: ExactPoint, strict: bool) -> bool:
    cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
    if cross != 0:
        return False
    t = _seg_param(a, b, p)
    return (0 < t < 1) if strict else (0 <= t <= 1)


# ---------------------------------------------------------------------------
# stabilizer of infinity: fundamental cell with paired walls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Wall:
    """Vertical wall over one boundary segment of the fundamental cell.

    The pairing sends this wall onto wall `mate` by z -> zeta^rot_power*z + shift,
    realized by the group element `mat`.
    """

    id: int
    a: ExactPoint
    b: ExactPoint
    mate: int
    rot_power: int
    shift: QuadInt
    mat: Mat2


@dataclass(frozen=True)
class Cell:
    order: Order
    mode: GroupMode
    rot_order: int
    rot_unit: Optional[QuadInt]
    rot_mat: Optional[Mat2]
    polygon: tuple
    walls: tuple

    def gamma_point(self, k: int, shift: QuadInt, p: ExactPoint) -> ExactPoint:
        o = self.order
        v = o.coeffs_of_point(p)
        k = k % self.rot_order if self.rot_order > 1 else 0
        if k:
            v = o.coeff_mul(self.rot_unit ** k, v)
        return o.point_of_coeffs(v[0] + shift.a, v[1] + shift.b)

    def gamma_mat(self, k: int, shift: QuadInt) -> Mat2:
        m = translation_mat(shift)
        if self.rot_mat is not None:
            r = identity_mat(self.order)
            for _ in range(k % self.rot_order):
                r = self.rot_mat @ r
            m = m @ r
        return m

    def wall_point(self, wall: Wall, p: ExactPoint) -> ExactPoint:
        return self.gamma_point(wall.rot_power, wall.shift, p)

    def area2(self):
        return poly_area2(self.polygon)

    def bbox(self) -> tuple:
        xs = [p.x for p in self.polygon]
        ys = [p.y for p in self.polygon]
        return min(xs), max(xs), min(ys), max(ys)


def _rotation_data(order: Order, mode: GroupMode):
    o = order
    w = o.omega()
    if mode == GroupMode.PSL:
        if o.D == -3:
            return 3, Mat2(w, o.zero(), o.zero(), o.one() - w)
        if o.D == -4:
            return 2, Mat2(w, o.zero(), o.zero(), -w)
        return 1, None
    if o.D == -3:
        return 6, Mat2(w, o.zero(), o.zero(), o.one())
    if o.D == -4:
        return 4, Mat2(w, o.zero(), o.zero(), o.one())
    return 2, Mat2(-o.one(), o.zero(), o.zero(), o.one())


def _base_polygon(order: Order) -> list:
    o = order
    if o.D == -3:
        # Voronoi hexagon of the Eisenstein lattice, invariant under all units
        v = (QQ(1, 3), QQ(1, 3))  # coefficients of (1 + omega)/3
        out = []
        w = o.omega()
        for _ in range(6):
            out.append(o.point_of_coeffs(*v))
            v = o.coeff_mul(w, v)
        return out
    half = QQ(1, 2)
    coeffs = [(half, half), (-half, half), (-half, -half), (half, -half)]
    return [o.point_of_coeffs(a, b) for a, b in coeffs]


def stabilizer_infinity(order, mode) -> Cell:
    """Fundamental cell for the stabilizer of infinity, with paired walls.

    For rotation order r > 1 the translation cell is cut down to the sector
    of angle 2*pi/r starting at angle 0 (the deterministic canonical choice).
    """
    if isinstance(order, int):
        from .arithmetic import make_order

        order = make_order(order)
    mode = GroupMode.parse(mode)
    r, rot_mat = _rotation_data(order, mode)
    zeta = None
    if rot_mat is not None:
        zp = rot_mat.apply_boundary(order.point_of_coeffs(1, 0))
        num, den = order.field_of_point(zp)
        assert den == 1 and num.norm() == 1
        zeta = num

    poly = _base_polygon(order)
    if r > 1:
        zc = order.point_of_elem(zeta)
        poly = clip_poly(poly, (QQ(0), QQ(1), QQ(0)))          # y >= 0
        poly = clip_poly(poly, (zc.y, -zc.x, QQ(0)))           # right of ray zeta
        poly = canon_poly(poly)
        # put the corner at the origin first for readability
        if ExactPoint(QQ(0), QQ(0)) in poly:
            i = poly.index(ExactPoint(QQ(0), QQ(0)))
            poly = poly[i:] + poly[:i]
    else:
        poly = canon_poly(poly)
    assert poly, "empty fundamental cell"

    cell = Cell(order, mode, r, zeta, rot_mat, tuple(poly), ())
    walls = _build_walls(cell)
    return Cell(order, mode, r, zeta, rot_mat, tuple(poly), tuple(walls))


def _build_walls(cell: Cell) -> list:
    order = cell.order
    poly = list(cell.polygon)
    r = cell.rot_order

    def probe(key):
        k, (a, b) = key
        lam = order.elem(a, b)
        img = [cell.gamma_point(k, lam, p) for p in poly]
        inter = convex_intersection(poly, img)
        if not inter:
            return None
        if canon_poly(inter):
            raise ArithmeticError("fundamental cell overlaps a translate (bad cell)")
        return _segment_of_degenerate(inter)

    pieces = {}  # (k, lam.key) -> (a, b) segment
    for k in range(r):
        for a in range(-2, 3):
            for b in range(-2, 3):
                if k == 0 and a == 0 and b == 0:
                    continue
                seg = probe((k, (a, b)))
                if seg is not None:
                    pieces[(k, (a, b))] = seg

    def inv_key(key):
        k, (a, b) = key
        ki = (r - k) % r if r > 1 else 0
        lam = order.elem(a, b)
        if ki and cell.rot_unit is not None:
            lam_i = -(cell.rot_unit ** ki * lam)
        else:
            lam_i = -lam
        return (ki, lam_i.key())

    # candidates whose shifts fall outside the scan box are reached by closure
    while True:
        missing = [inv_key(k) for k in pieces if inv_key(k) not in pieces]
        if not missing:
            break
        for key in missing:
            seg = probe(key)
            assert seg is not None, f"inverse wall candidate {key} has no piece"
            pieces[key] = seg

    # assemble walls; self-inverse candidates whose segment maps onto itself
    # reversed get split at the rotation fixed point (the midpoint)
    raw = []  # (segment a, b, pairing_key) with pairing = candidate inverse
    for key, (pa, pb) in sorted(pieces.items()):
        ikey = inv_key(key)
        assert ikey in pieces, f"wall candidate {key} has no inverse piece"
        if ikey == key:
            mid = ExactPoint((pa.x + pb.x) / 2, (pa.y + pb.y) / 2)
            raw.append((pa, mid, ikey))
            raw.append((mid, pb, ikey))
        else:
            raw.append((pa, pb, ikey))

    # order the pieces counterclockwise along the cell boundary
    def boundary_pos(seg):
        a, b = seg
        m = ExactPoint((a.x + b.x) / 2, (a.y + b.y) / 2)
        n = len(poly)
        for i in range(n):
            p, q = poly[i], poly[(i + 1) % n]
            if _on_segment(p, q, m, strict=False) and _on_segment(p, q, a, False) \
                    and _on_segment(p, q, b, False):
                return (i, _seg_param(p, q, a))
        raise ArithmeticError("wall piece not on cell boundary")

    def oriented(seg):
        a, b, k = seg
        i, _ = boundary_pos((a, b))
        p, q = poly[i], poly[(i + 1) % len(poly)]
        if _seg_param(p, q, a) > _seg_param(p, q, b):
            a, b = b, a
        return a, b, k

    raw = [oriented(s) for s in raw]
    raw.sort(key=lambda s: boundary_pos((s[0], s[1])))

    # check that the pieces tile the boundary
    for i, (a, b, _) in enumerate(raw):
        nxt = raw[(i + 1) % len(raw)]
        assert b == nxt[0], "wall pieces do not chain around the boundary"

    walls = []
    for i, (a, b, pkey) in enumerate(raw):
        k, lamkey = pkey
        lam = order.elem(*lamkey)
        mat = cell.gamma_mat(k, lam)
        # find the mate: the wall whose segment is the image of this one
        ia = cell.gamma_point(k, lam, a)
        ib = cell.gamma_point(k, lam, b)
        mate = None
        for j, (ca, cb, _) in enumerate(raw):
            if {ca, cb} == {ia, ib}:
                mate = j
                break
        assert mate is not None, "wall image is not a wall"
        walls.append(Wall(i, a, b, mate, k, lam, mat))
    for w in walls:
        assert walls[w.mate].mate == w.id
    return walls


# ---------------------------------------------------------------------------
# hemispheres
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Hemisphere:
    """Isometric hemisphere S(c, d): center d/c, squared radius 1/norm(c)."""

    c: QuadInt
    d: QuadInt
    center: ExactPoint
    radius_sq: "QQ"

    def key(self) -> tuple:
        return (self.center.x, self.center.y, self.radius_sq)

    def sort_key(self) -> tuple:
        return (-self.radius_sq, self.center.x, self.center.y)


def make_hemisphere(c: QuadInt, d: QuadInt) -> Hemisphere:
    o = c.order
    n = c.norm()
    center = o.point_of_coeffs(*_div_coeffs(o, d, c))
    return Hemisphere(c, d, center, QQ(1, n))


def _div_coeffs(order: Order, num: QuadInt, den: QuadInt):
    n = den.norm()
    t = num * den.conj()
    return (QQ(t.a, n), QQ(t.b, n))


def height_at(h: Hemisphere, p: ExactPoint, order: Order):
    """Squared height of the hemisphere above p (negative outside its disk)."""
    return h.radius_sq - order.dist2(p, h.center)


def _c_reps_by_norm(order: Order, bound: int) -> Dict[int, list]:
    """Canonical representatives of c modulo units, grouped by norm <= bound."""
    out: Dict[int, list] = {}
    if bound < 1:
        return out
    bmax = math.isqrt(4 * bound // order.abs_D)
    amax = math.isqrt(bound) + abs(order.T) * bmax + 1
    for b in range(-bmax, bmax + 1):
        for a in range(-amax, amax + 1):
            c = order.elem(a, b)
            n = c.norm()
            if n == 0 or n > bound:
                continue
            if canonical_unit_multiple(c) != c:
                continue
            out.setdefault(n, []).append(c)
    for lst in out.values():
        lst.sort(key=QuadInt.key)
    return out


def _residues_mod(order: Order, c: QuadInt) -> list:
    """Coset representatives of O_D / (c)."""
    w = order.omega()
    cw = c * w
    (s1, _t), (_z, s2) = hnf_rows([(c.a, c.b), (cw.a, cw.b)])
    return [order.elem(i, j) for i in range(s1) for j in range(s2)]


def enumerate_hemispheres(order: Order, min_radius_sq, cell: Cell) -> list:
    """All hemispheres of squared radius >= min_radius_sq with center in the
    cell expanded by the maximal radius, one per (c, d) class.

    Norm-one hemispheres are always included (min_radius_sq above 1 still
    yields the unit spheres).  The list is duplicate-free and sorted by
    decreasing radius.
    """
    m = QQ(min_radius_sq)
    if m <= 0:
        raise ValueError("min_radius_sq must be positive")
    bound = max(1, int(1 / m))
    xmin, xmax, ymin, ymax = cell.bbox()
    my = QQ(1, math.isqrt(order.abs_D))
    xlo, xhi = xmin - 1, xmax + 1
    ylo, yhi = ymin - my, ymax + my

    seen = {}
    for n, cs in sorted(_c_reps_by_norm(order, bound).items()):
        for c in cs:
            for d0 in _residues_mod(order, c):
                if ideal_index(c, d0) != 1:
                    continue
                alpha, beta = _div_coeffs(order, d0, c)
                # translates with chart coordinates inside the expanded box
                blo = _ceil_q(2 * ylo - beta)
                bhi = _floor_q(2 * yhi - beta)
                for bb in range(blo, bhi + 1):
                    yb = (beta + bb) / 2
                    alo = _ceil_q(xlo - order.T * yb - alpha)
                    ahi = _floor_q(xhi - order.T * yb - alpha)
                    for aa in range(alo, ahi + 1):
                        lam = order.elem(aa, bb)
                        h = make_hemisphere(c, d0 + lam * c)
                        if h.key() not in seen:
                            seen[h.key()] = h
    out = sorted(seen.values(), key=Hemisphere.sort_key)
    return out


def _ceil_q(x) -> int:
    return -int(-QQ(x) // 1)


def _floor_q(x) -> int:
    return int(QQ(x) // 1)


# ---------------------------------------------------------------------------
# exact upper envelope (power diagram restricted to the cell)
# ---------------------------------------------------------------------------


def _dominance_halfplane(order: Order, h: Hemisphere, s: Hemisphere) -> Halfplane:
    """Half-plane where height(h) >= height(s); the quadratic terms cancel."""
    dx = h.center.x - s.center.x
    dy = h.center.y - s.center.y
    A = 2 * dx
    B = 2 * order.abs_D * dy
    C = (h.radius_sq - s.radius_sq
         - order.norm2_point(h.center) + order.norm2_point(s.center))
    return (A, B, C)


def _select_survivors(order: Order, hemis: list, cell: Cell) -> list:
    """First pass: keep hemispheres that rise above the running envelope.

    A hemisphere can only contribute a face if it strictly covers a vertex of
    the envelope of the previously kept ones (concavity of affine height
    differences makes the vertex test exhaustive).
    """
    cellpoly = list(cell.polygon)
    verts: Dict[ExactPoint, object] = {}
    vfloat: Dict[ExactPoint, tuple] = {}
    survivors: list = []

    def add_vertex(p: ExactPoint, h2) -> None:
        if p in verts:
            assert verts[p] == h2
            return
        verts[p] = h2
        vfloat[p] = (float(p.x), float(p.y), float(h2))

    for h in hemis:
        if survivors:
            cxf, cyf, r2f = float(h.center.x), float(h.center.y), float(h.radius_sq)
            covered = []
            for p, (fx, fy, fh2) in vfloat.items():
                dxf, dyf = fx - cxf, fy - cyf
                margin = r2f - (dxf * dxf + order.abs_D * dyf * dyf) - fh2
                if margin < -1e-9:
                    continue
                if order.dist2(p, h.center) + verts[p] < h.radius_sq:
                    covered.append(p)
            if not covered:
                continue
        poly = cellpoly
        for s in survivors:
            poly = clip_poly(poly, _dominance_halfplane(order, h, s))
            if not poly:
                break
        assert poly, "covered vertex implies a nonempty dominance region"
        if survivors:
            for p in covered:
                del verts[p]
                del vfloat[p]
        survivors.append(h)
        for p in poly:
            add_vertex(p, height_at(h, p, order))
    return survivors


def _mutual_polygons(order: Order, survivors: list, cell: Cell) -> list:
    """Second pass: exact dominance polygon of every survivor against all
    others; the result is independent of the insertion order of pass one.
    """
    out = []
    cellpoly = list(cell.polygon)
    for h in survivors:
        others = sorted(
            (s for s in survivors if s.key() != h.key()),
            key=lambda s: (order.dist2(h.center, s.center), s.sort_key()))
        poly = cellpoly
        for s in others:
            hp = _dominance_halfplane(order, h, s)
            Af, Bf, Cf = float(hp[0]), float(hp[1]), float(hp[2])
            if all(Af * float(p.x) + Bf * float(p.y) + Cf > 1e-6 for p in poly):
                continue
            poly = clip_poly(poly, hp)
            if not poly:
                break
        poly = canon_poly(poly)
        if poly:
            out.append((h, poly))
    return out


# ---------------------------------------------------------------------------
# the boundary complex of the polyhedron
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Vertex:
    id: int
    point: ExactPoint
    height_sq: "QQ"


@dataclass(frozen=True)
class Face:
    id: int
    kind: str  # "hemisphere" | "wall"
    hemisphere: Optional[Hemisphere]
    wall: Optional[Wall]
    polygon: tuple  # vertex ids: CCW corners (hemi) / rim chain a->b (wall)


@dataclass(frozen=True)
class Edge:
    id: int
    v1: int
    v2: int  # AT_INFINITY for vertical edges
    kind: str  # "floor" | "rim" | "vertical"
    faces: tuple


@dataclass
class EnvelopeComplex:
    order: Order
    cell: Cell
    vertices: List[Vertex]
    faces: List[Face]
    edges: List[Edge]
    vid_by_point: Dict[ExactPoint, int] = field(default_factory=dict)
    edge_by_key: Dict[frozenset, int] = field(default_factory=dict)

    def point(self, vid: int) -> ExactPoint:
        return self.vertices[vid].point

    def height(self, vid: int):
        return self.vertices[vid].height_sq

    def hemi_faces(self) -> list:
        return [f for f in self.faces if f.kind == "hemisphere"]

    def wall_faces(self) -> list:
        return [f for f in self.faces if f.kind == "wall"]

    def ideal_vertex_ids(self) -> list:
        return [v.id for v in self.vertices if v.height_sq == 0]

    def face_points(self, f: Face) -> list:
        return [self.point(v) for v in f.polygon]

    def face_corner_set(self, f: Face) -> frozenset:
        return frozenset(f.polygon)


def assemble_complex(order: Order, cell: Cell, face_polys: list,
                     extra_points: Sequence[ExactPoint] = ()) -> EnvelopeComplex:
    """Build the exact boundary complex from dominance polygons.

    face_polys is a list of (hemisphere, polygon) pairs; polygons are refined
    so that faces meet edge to edge, then classified into floor, rim and
    vertical edges, with one wall face per cell wall.  extra_points are added
    to the refinement set (used to close the complex under face pairings).
    """
    # global refinement point set
    pts = set(extra_points)
    for _h, poly in face_polys:
        pts.update(poly)
    for w in cell.walls:
        pts.add(w.a)
        pts.add(w.b)

    refined = []
    for h, poly in face_polys:
        newpoly = []
        n = len(poly)
        for i in range(n):
            p, q = poly[i], poly[(i + 1) % n]
            newpoly.append(p)
            inner = [r for r in pts if r != p and r != q and _on_segment(p, q, r, True)]
            inner.sort(key=lambda r: _seg_param(p, q, r))
            newpoly.extend(inner)
        refined.append((h, newpoly))

    vertices: List[Vertex] = []
    vid_by_point: Dict[ExactPoint, int] = {}

    def vid_of(p: ExactPoint, h2) -> int:
        if p in vid_by_point:
            v = vertices[vid_by_point[p]]
            assert v.height_sq == h2, f"inconsistent heights at {p}"
            return v.id
        v = Vertex(len(vertices), p, h2)
        vertices.append(v)
        vid_by_point[p] = v.id
        return v.id

    faces: List[Face] = []
    edge_faces: Dict[frozenset, list] = {}
    for h, poly in refined:
        ids = tuple(vid_of(p, height_at(h, p, order)) for p in poly)
        f = Face(len(faces), "hemisphere", h, None, ids)
        faces.append(f)
        n = len(ids)
        for i in range(n):
            key = frozenset((ids[i], ids[(i + 1) % n]))
            edge_faces.setdefault(key, []).append(f.id)

    # wall faces, one per cell wall
    wall_face_id = {}
    for w in cell.walls:
        f = Face(len(faces), "wall", None, w, ())
        faces.append(f)
        wall_face_id[w.id] = f.id

    edges: List[Edge] = []
    edge_by_key: Dict[frozenset, int] = {}
    wall_rims: Dict[int, list] = {w.id: [] for w in cell.walls}

    def add_edge(v1, v2, kind, fpair) -> int:
        key = frozenset((v1, v2))
        e = Edge(len(edges), v1, v2, kind, tuple(fpair))
        edges.append(e)
        edge_by_key[key] = e.id
        return e.id

    for key, fids in sorted(edge_faces.items(), key=lambda kv: sorted(kv[0])):
        v1, v2 = sorted(key)
        if len(fids) == 2:
            add_edge(v1, v2, "floor", fids)
            continue
        assert len(fids) == 1, f"edge {key} bounds {len(fids)} hemisphere faces"
        p, q = vertices[v1].point, vertices[v2].point
        hit = [w for w in cell.walls
               if _on_segment(w.a, w.b, p, False) and _on_segment(w.a, w.b, q, False)]
        assert len(hit) == 1, f"boundary edge {p}-{q} lies on {len(hit)} walls"
        w = hit[0]
        eid = add_edge(v1, v2, "rim", (fids[0], wall_face_id[w.id]))
        wall_rims[w.id].append(eid)

    # order each wall's rim chain from a to b and record it as the polygon
    for w in cell.walls:
        rims = wall_rims[w.id]
        assert rims, f"wall {w.id} has no rim edges"
        chain = sorted(
            rims, key=lambda eid: _seg_param(w.a, w.b, vertices[edges[eid].v1].point)
            + _seg_param(w.a, w.b, vertices[edges[eid].v2].point))
        seq = []
        for eid in chain:
            e = edges[eid]
            pa, pb = e.v1, e.v2
            if _seg_param(w.a, w.b, vertices[pa].point) > _seg_param(w.a, w.b, vertices[pb].point):
                pa, pb = pb, pa
            if not seq:
                assert vertices[pa].point == w.a, f"wall {w.id} rim does not start at its corner"
                seq.append(pa)
            assert seq[-1] == pa, f"wall {w.id} rim chain is broken"
            seq.append(pb)
        assert vertices[seq[-1]].point == w.b, f"wall {w.id} rim does not end at its corner"
        fid = wall_face_id[w.id]
        faces[fid] = Face(fid, "wall", None, w, tuple(seq))

    # vertical edges at the wall corners
    nwalls = len(cell.walls)
    for w in cell.walls:
        nxt = cell.walls[(w.id + 1) % nwalls]
        assert w.b == nxt.a
        v1 = vid_by_point[w.b]
        add_edge(v1, AT_INFINITY, "vertical",
                 (wall_face_id[w.id], wall_face_id[nxt.id]))

    return EnvelopeComplex(order, cell, vertices, faces, edges,
                           vid_by_point, edge_by_key)


def upper_envelope(hemispheres: Sequence[Hemisphere], cell: Cell,
                   order: Optional[Order] = None) -> EnvelopeComplex:
    """Exact envelope complex of the given hemispheres over the cell."""
    if not hemispheres:
        raise ValueError("upper_envelope requires at least one hemisphere")
    order = order or cell.order
    seen = {}
    for h in hemispheres:
        seen.setdefault(h.key(), h)
    hemis = sorted(seen.values(), key=Hemisphere.sort_key)
    survivors = _select_survivors(order, hemis, cell)
    face_polys = _mutual_polygons(order, survivors, cell)
    return assemble_complex(order, cell, face_polys)


# ---------------------------------------------------------------------------
# Swan completeness certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SwanViolation:
    vertex: Vertex
    hemisphere: Optional[Hemisphere]
    reason: str


@dataclass(frozen=True)
class SwanResult:
    passed: bool
    min_radius_sq: "QQ"
    violations: tuple
    ideal_vertices: tuple  # vertex ids certified as cusp tangencies


def _cover_candidates(order: Order, creps: Dict[int, list], v: ExactPoint,
                      h2, norms) -> Optional[Hemisphere]:
    """A coprime hemisphere strictly covering (v, h2) with norm(c) in norms."""
    va, vb = order.coeffs_of_point(v)
    for n in norms:
        bound = 1 - n * h2
        if bound <= 0:
            break
        for c in creps.get(n, ()):
            ca, cb = order.coeff_mul(c, (va, vb))
            # norm(x + y*omega) >= |D|/4 * y^2 bounds the omega coefficient
            bmax = math.isqrt(int(4 * bound / order.abs_D)) + 2
            for db in range(_ceil_q(cb - bmax), _floor_q(cb + bmax) + 1):
                y = QQ(db) - cb
                span = math.isqrt(int(bound)) + abs(order.T) * (int(abs(y)) + 1) + 2
                for da in range(_ceil_q(ca - span), _floor_q(ca + span) + 1):
                    x = QQ(da) - ca
                    if x * x + x * y * order.T + y * y * order.N >= bound:
                        continue
                    d = order.elem(da, db)
                    if ideal_index(c, d) != 1:
                        continue
                    return make_hemisphere(c, d)
    return None


def swan_check(env: EnvelopeComplex, min_radius_sq, norm_cap: int) -> SwanResult:
    """Swan's criterion on the envelope built from all hemispheres of squared
    radius >= min_radius_sq.

    A vertex of squared height t2 > 0 can only be cut by hemispheres with
    norm(c) < 1/t2, checked exhaustively.  Height-zero vertices must be
    tangency points: their cusp must be non-principal and its ideal class must
    contain no ideal of smaller norm (otherwise some hemisphere cuts above).
    """
    order = env.order
    m = QQ(min_radius_sq)
    listed = max(1, int(1 / m))
    violations = []
    ideal_ok = []

    cheap_bound = min(norm_cap, max(4 * listed, 4 * order.abs_D))
    creps_cache: Dict[int, Dict[int, list]] = {}

    def creps_upto(bound: int) -> Dict[int, list]:
        if bound not in creps_cache:
            creps_cache[bound] = _c_reps_by_norm(order, bound)
        return creps_cache[bound]

    def witness(point, h2, lo: int, hi: int) -> Optional[Hemisphere]:
        if hi < lo:
            return None
        return _cover_candidates(order, creps_upto(hi), point, h2, range(lo, hi + 1))

    flat = []  # height-zero vertices, settled exactly by the ideal test
    deep = []  # positive-height vertices below the threshold
    for v in env.vertices:
        t2 = v.height_sq
        if t2 >= m:
            continue
        if t2 < 0:
            violations.append(SwanViolation(
                v, witness(v.point, t2, 1, cheap_bound), "vertex below the boundary plane"))
        elif t2 > 0:
            deep.append(v)
        else:
            flat.append(v)

    for v in flat:
        num, den = order.field_of_point(v.point)
        ideal = cusp_ideal(num, order.elem(den))
        gen = ideal.principal_gen()
        if gen is not None:
            c = gen.exact_div_or_none(order.elem(den))
            d = gen.exact_div_or_none(num)
            assert c is not None and d is not None
            violations.append(SwanViolation(
                v, make_hemisphere(c, d), "principal cusp point is covered"))
            continue
        # non-principal: tangency iff no smaller-norm ideal shares the class
        # of K = (den) / (num, den)
        q_ideal = Ideal.from_gens([order.elem(den)], order)
        k_ideal = q_ideal.mul(ideal.conj()).scale_down(ideal.norm())
        smaller = None
        for n in range(2, k_ideal.norm()):
            for j in ideals_of_norm(order, n):
                if ideals_equivalent(j, k_ideal):
                    smaller = j
                    break
            if smaller is not None:
                break
        if smaller is not None:
            violations.append(SwanViolation(
                v, witness(v.point, QQ(0), 1, cheap_bound), "cusp point strictly covered"))
        else:
            ideal_ok.append(v.id)

    # cheap scan first: on a failing level the full-depth certification scan
    # is wasted work, the driver refines anyway
    remaining = []
    for v in deep:
        hi = min(cheap_bound, int(1 / v.height_sq))
        wit = witness(v.point, v.height_sq, listed + 1, hi)
        if wit is not None:
            violations.append(SwanViolation(v, wit, "vertex strictly covered"))
        elif int(1 / v.height_sq) > hi:
            remaining.append(v)

    if not violations:
        for v in remaining:
            need = int(1 / v.height_sq)
            wit = witness(v.point, v.height_sq, cheap_bound + 1, min(need, norm_cap))
            if wit is not None:
                violations.append(SwanViolation(v, wit, "vertex strictly covered"))
            elif need > norm_cap:
                raise ResourceCapError(
                    f"certifying vertex {v.point} (height^2 {v.height_sq}) needs "
                    f"norm(c) up to {need} > cap {norm_cap}", v.point)

    return SwanResult(not violations, m, tuple(violations), tuple(ideal_ok))


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


@dataclass
class FordDomain:
    order: Order
    mode: GroupMode
    cell: Cell
    complex: EnvelopeComplex
    hemispheres: list  # the full enumerated list at the certified level
    min_radius_sq: "QQ"
    certificate: SwanResult

    @property
    def ideal_vertex_ids(self) -> tuple:
        return self.certificate.ideal_vertices


def ford_domain(D, mode, max_norm: Optional[int] = None) -> FordDomain:
    """Certified Ford domain for PGL2/PSL2 of O_D.

    Starts with the unit hemispheres and halves the radius threshold until
    Swan's criterion passes; raises ResourceCapError when certification would
    need norm(c) beyond max_norm (default 10*|D|).
    """
    if isinstance(D, Order):
        order = D
    else:
        from .arithmetic import make_order

        order = make_order(D)
    mode = GroupMode.parse(mode)
    cap = max_norm if max_norm is not None else 10 * order.abs_D
    cell = stabilizer_infinity(order, mode)
    m = QQ(1)
    while True:
        hemis = enumerate_hemispheres(order, m, cell)
        env = upper_envelope(hemis, cell, order)
        result = swan_check(env, m, cap)
        if result.passed:
            return FordDomain(order, mode, cell, env, hemis, m, result)
        m = m / 2
        if 1 / m > cap:
            worst = min(result.violations,
                        key=lambda viol: viol.vertex.height_sq)
            raise ResourceCapError(
                f"norm cap {cap} reached refining D={order.D} {mode.value}; "
                f"uncertified vertex {worst.vertex.point}", worst.vertex.point)
