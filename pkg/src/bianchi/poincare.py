"""Group data from a certified Ford domain.

Face-pairing transformations are computed exactly: a hemisphere face S(c, d)
is paired by a determinant-one completion of the row (c, -d), corrected by the
unique stabilizer-of-infinity element that lands the image back on a face of
the complex.  Wall faces pair by the stabilizer elements recorded with the
cell.  Edge cycles follow the standard traversal (apply the pairing of an
adjacent face, step to the new edge, repeat), and the cycle transformations
give the relators of the presentation; torsion orders are computed from exact
matrix powers, dihedral angle sums are a floating diagnostic only.

Faces that pair to themselves are split along the fixed line of the pairing
(always a chord of the face), after which the two halves pair to each other
and the fixed edge contributes the expected order-two relator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from .arithmetic import (
    ExactPoint,
    Mat2,
    Order,
    QuadInt,
    coprime_witness,
    identity_mat,
    reduce_mod_lattice,
    translation_mat,
    units,
)
from .classforms import cusp_representatives, match_cusp_class
from .geometry import (
    AT_INFINITY,
    EnvelopeComplex,
    Face,
    FordDomain,
    GroupMode,
    Hemisphere,
    assemble_complex,
    clip_poly,
    canon_poly,
)
from .rational import QQ

MAX_TORSION_ORDER = 24


# ---------------------------------------------------------------------------
# projective matrices
# ---------------------------------------------------------------------------


def normalize_mat(m: Mat2, mode: GroupMode) -> Mat2:
    """Canonical representative among unit-scalar multiples (lex-min entries)."""
    us = units(m.a.order) if mode == GroupMode.PGL else \
        (m.a.order.one(), -m.a.order.one())
    return min((m.scale(u) for u in us), key=Mat2.key)


@dataclass(frozen=True)
class GroupElem:
    """Projective 2x2 matrix over O_D, stored by canonical representative."""

    mat: Mat2
    mode: GroupMode

    @staticmethod
    def of(m: Mat2, mode: GroupMode) -> "GroupElem":
        det = m.det()
        if det.norm() != 1:
            raise ValueError("determinant is not a unit")
        if mode == GroupMode.PSL and det != m.a.order.one():
            raise ValueError("PSL element must have determinant one")
        return GroupElem(normalize_mat(m, mode), mode)

    def __matmul__(self, other: "GroupElem") -> "GroupElem":
        return GroupElem.of(self.mat @ other.mat, self.mode)

    def inv(self) -> "GroupElem":
        return GroupElem.of(self.mat.inv(), self.mode)

    def is_identity(self) -> bool:
        return self.mat.is_scalar()


def matrix_order(m: Mat2, bound: int = MAX_TORSION_ORDER) -> Optional[int]:
    """Smallest n <= bound with m^n scalar, or None (infinite order)."""
    p = m
    for n in range(1, bound + 1):
        if p.is_scalar():
            return n
        p = p @ m
    return None


def completion_matrix(h: Hemisphere) -> Mat2:
    """Determinant-one matrix whose isometric sphere is the hemisphere.

    Bottom row is (c, -d); the top row is the norm-minimal completion from the
    coprimality witness, with a lexicographic tie-break for determinism.
    """
    c, d = h.c, h.d
    order = c.order
    x, y = coprime_witness(c, d)
    # solutions: (x + t*c, y - t*d); recenter t at -x/c to shrink the norms
    n = c.norm()
    t0c = x * c.conj()
    t0 = order.elem(-_round_div(t0c.a, n), -_round_div(t0c.b, n))
    best = None
    for da in range(-2, 3):
        for db in range(-2, 3):
            t = t0 + order.elem(da, db)
            xx = x + t * c
            yy = y - t * d
            key = (xx.norm() + yy.norm(), xx.a, xx.b, yy.a, yy.b)
            if best is None or key < best[0]:
                best = (key, xx, yy)
    _, xx, yy = best
    m = Mat2(-xx, -yy, c, -d)
    assert m.det() == order.one()
    return m


def _round_div(a: int, n: int) -> int:
    return (2 * a + n) // (2 * n)


# ---------------------------------------------------------------------------
# face pairings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FacePairing:
    face_id: int
    mate_id: int
    elem: GroupElem
    word: tuple  # signed 1-based generator indices, product in matrix order
    kind: str    # "hemisphere" | "wall"


@dataclass
class PairedDomain:
    ford: FordDomain
    complex: EnvelopeComplex  # after self-pairing splits
    pairings: List[FacePairing]
    generators: List["Generator"]

    @property
    def order(self) -> Order:
        return self.ford.order

    @property
    def mode(self) -> GroupMode:
        return self.ford.mode


@dataclass(frozen=True)
class Generator:
    index: int  # 1-based
    name: str
    elem: GroupElem
    proj_order: Optional[int]


def _map_vertex(env: EnvelopeComplex, m: Mat2, vid: int) -> tuple:
    v = env.vertices[vid]
    return m.apply_h3(v.point, v.height_sq)


def _canon_corners(points: Sequence[ExactPoint]) -> frozenset:
    """Extreme corners of a convex cyclic point sequence, orientation-free."""
    pts = list(points)
    from .geometry import poly_area2

    if poly_area2(pts) < 0:
        pts.reverse()
    return frozenset(canon_poly(pts))


def _face_corner_data(env: EnvelopeComplex, f: Face) -> frozenset:
    return _canon_corners([env.point(v) for v in f.polygon])


def _hemi_face_index(env: EnvelopeComplex) -> Dict[tuple, list]:
    idx: Dict[tuple, list] = {}
    for f in env.hemi_faces():
        idx.setdefault(f.hemisphere.key(), []).append(f)
    return idx


def _pair_hemi_face(env: EnvelopeComplex, f: Face, by_key: Dict[tuple, list],
                    g: Mat2):
    """The corrected pairing of a hemisphere face, or None if its image does
    not land on a single face of the complex (the face then needs splitting).

    The correction runs over rotation powers and nearby lattice shifts; at
    most one candidate maps the corner set onto a face of the complex.
    """
    order = env.order
    cell = env.cell
    # I(g^-1) has bottom row (-c, a), hence center a/c
    img_center = order.point_of_coeffs(*_div(order, g.a, g.c))
    corners = [(env.point(v), env.height(v)) for v in f.polygon]
    g_corners = [g.apply_h3(p, h) for p, h in corners]
    radius_sq = f.hemisphere.radius_sq

    matches = {}
    r = cell.rot_order if cell.rot_order > 1 else 1
    for k in range(r):
        rc = order.coeffs_of_point(img_center)
        if k:
            rc = order.coeff_mul(cell.rot_unit ** k, rc)
        _, lam0 = reduce_mod_lattice(order.point_of_coeffs(*rc), order)
        for da in range(-2, 3):
            for db in range(-2, 3):
                lam = -lam0 + order.elem(da, db)
                target = order.point_of_coeffs(rc[0] + lam.a, rc[1] + lam.b)
                for f2 in by_key.get((target.x, target.y, radius_sq), ()):
                    gamma = cell.gamma_mat(k, lam)
                    total = gamma @ g
                    mapped = _canon_corners(
                        [cell.gamma_point(k, lam, p) for p, _h in g_corners])
                    if mapped == _face_corner_data(env, f2):
                        matches[normalize_mat(total, cell.mode).key()] = (f2.id, total)
    if not matches:
        return None
    assert len(matches) == 1, f"face {f.id} has {len(matches)} pairing candidates"
    return next(iter(matches.values()))


def _div(order: Order, num: QuadInt, den: QuadInt):
    n = den.norm()
    t = num * den.conj()
    return (QQ(t.a, n), QQ(t.b, n))


def _affine_from_pairs(src: Sequence[ExactPoint], dst: Sequence[ExactPoint]):
    """Exact affine map (M, o) with M*p + o interpolating src -> dst."""
    p0, p1, p2 = None, None, None
    for i in range(2, len(src)):
        cross = ((src[1].x - src[0].x) * (src[i].y - src[0].y)
                 - (src[1].y - src[0].y) * (src[i].x - src[0].x))
        if cross != 0:
            p0, p1, p2 = 0, 1, i
            break
    assert p2 is not None, "no three non-collinear points"
    dx1 = (src[p1].x - src[p0].x, src[p1].y - src[p0].y)
    dx2 = (src[p2].x - src[p0].x, src[p2].y - src[p0].y)
    dy1 = (dst[p1].x - dst[p0].x, dst[p1].y - dst[p0].y)
    dy2 = (dst[p2].x - dst[p0].x, dst[p2].y - dst[p0].y)
    det = dx1[0] * dx2[1] - dx1[1] * dx2[0]
    m00 = (dy1[0] * dx2[1] - dy2[0] * dx1[1]) / det
    m01 = (dy2[0] * dx1[0] - dy1[0] * dx2[0]) / det
    m10 = (dy1[1] * dx2[1] - dy2[1] * dx1[1]) / det
    m11 = (dy2[1] * dx1[0] - dy1[1] * dx2[0]) / det
    o0 = dst[p0].x - (m00 * src[p0].x + m01 * src[p0].y)
    o1 = dst[p0].y - (m10 * src[p0].x + m11 * src[p0].y)
    for p, q in zip(src, dst):
        assert q == ExactPoint(m00 * p.x + m01 * p.y + o0,
                               m10 * p.x + m11 * p.y + o1), "map is not affine"
    return (m00, m01, m10, m11), (o0, o1)


def _apply_affine(mo, p: ExactPoint) -> ExactPoint:
    (m00, m01, m10, m11), (o0, o1) = mo
    return ExactPoint(m00 * p.x + m01 * p.y + o0, m10 * p.x + m11 * p.y + o1)


def _split_line(pts: Sequence[ExactPoint], imgs: Sequence[ExactPoint]):
    """Fixed line of a self-pairing on its face (the chart action is an
    orientation-reversing affine involution, so the fixed set is a line)."""
    (m00, m01, m10, m11), (o0, o1) = _affine_from_pairs(pts, imgs)
    assert m00 * m11 - m01 * m10 < 0, "self-pairing is not orientation-reversing"
    # fixed line: (M - I) p + o = 0; the two rows are proportional
    rows = [(m00 - 1, m01, o0), (m10, m11 - 1, o1)]
    rows.sort(key=lambda rw: (rw[0] == 0 and rw[1] == 0,))
    A, B, C = rows[0]
    assert A != 0 or B != 0
    assert rows[1][0] * B == rows[1][1] * A, "fixed set is not a line"
    return (A, B, C)


def _tile_candidates(cell, corners) -> list:
    """Stabilizer elements (k, lam) whose cell translate can meet a polygon
    with the given corners."""
    order = cell.order
    r = cell.rot_order if cell.rot_order > 1 else 1
    out = []
    seen = set()
    cx = sum(q.x for q in corners) / len(corners)
    cy = sum(q.y for q in corners) / len(corners)
    seeds = list(corners) + [ExactPoint(cx, cy)]
    for q in seeds:
        for kk in range(r):
            rc = order.coeffs_of_point(q)
            if kk:
                rc = order.coeff_mul(cell.rot_unit ** kk, rc)
            _, lam0 = reduce_mod_lattice(order.point_of_coeffs(*rc), order)
            for da in range(-2, 3):
                for db in range(-2, 3):
                    mu = -lam0 + order.elem(da, db)
                    # invert (kk, mu): gamma^-1(q) = zeta^kk q + mu in the cell
                    ki = (r - kk) % r
                    if ki and cell.rot_unit is not None:
                        lam = -(cell.rot_unit ** ki * mu)
                    else:
                        lam = -mu
                    key = (ki, lam.key())
                    if key not in seen:
                        seen.add(key)
                        out.append((ki, lam))
    return out


def _image_tiling_pieces(env: EnvelopeComplex, f: Face, g: Mat2) -> list:
    """Sub-polygons of a face, one per cell translate its pairing image meets.

    A singleton means the face itself is fine (its mate must split first);
    otherwise the face is subdivided along pulled-back wall lines so that each
    piece maps into a single translate under the raw pairing.
    """
    from .geometry import convex_intersection, poly_area2

    cell = env.cell
    pts = [env.point(v) for v in f.polygon]
    hts = [env.height(v) for v in f.polygon]
    imgs = [g.apply_h3(p, h)[0] for p, h in zip(pts, hts)]
    back = _affine_from_pairs(imgs, pts)
    q_poly = canon_poly(list(reversed(imgs)))  # image reverses orientation
    assert q_poly, "degenerate image polygon"
    cellpoly = list(cell.polygon)
    pieces = []
    for k, lam in _tile_candidates(cell, q_poly):
        tile = [cell.gamma_point(k, lam, p) for p in cellpoly]
        piece = canon_poly(convex_intersection(q_poly, tile))
        if piece:
            pieces.append(piece)
    total = sum(poly_area2(p) for p in pieces)
    assert total == poly_area2(q_poly), "image tiling does not cover the face"
    out = []
    for piece in pieces:
        sub = canon_poly([_apply_affine(back, p) for p in reversed(piece)])
        assert sub, "pulled-back piece is degenerate"
        out.append(sub)
    return out


def pair_faces(ford: FordDomain) -> PairedDomain:
    """All face pairings of the (possibly re-split) domain complex.

    Faces are subdivided until every hemisphere face maps onto a single face
    of the complex: along the fixed line when a face pairs to itself, and
    along pulled-back wall lines when its image straddles cell translates.
    """
    env = ford.complex
    cell = ford.cell
    order = ford.order
    mode = ford.mode

    extras: set = set()
    for _round in range(40):
        by_key = _hemi_face_index(env)
        raw = {}
        splits: Dict[int, list] = {}
        deferred = []
        for f in env.hemi_faces():
            g = completion_matrix(f.hemisphere)
            found = _pair_hemi_face(env, f, by_key, g)
            if found is None:
                pieces = _image_tiling_pieces(env, f, g)
                if len(pieces) >= 2:
                    splits[f.id] = pieces
                else:
                    deferred.append(f.id)  # the mate must split first
                continue
            mate_id, total = found
            raw[f.id] = (mate_id, total)
            if mate_id == f.id:
                pts = [env.point(v) for v in f.polygon]
                hts = [env.height(v) for v in f.polygon]
                imgs = [total.apply_h3(p, h)[0] for p, h in zip(pts, hts)]
                A, B, C = _split_line(pts, imgs)
                half1 = canon_poly(clip_poly(pts, (A, B, C)))
                half2 = canon_poly(clip_poly(pts, (-A, -B, -C)))
                assert half1 and half2, "splitting line misses the face"
                splits[f.id] = [half1, half2]
        if splits:
            new_polys = []
            for f in env.hemi_faces():
                if f.id in splits:
                    for sub in splits[f.id]:
                        new_polys.append((f.hemisphere, sub))
                else:
                    new_polys.append(
                        (f.hemisphere, [env.point(v) for v in f.polygon]))
            env = assemble_complex(order, cell, new_polys, sorted(extras))
            continue
        if deferred:
            raise ArithmeticError(
                f"faces {deferred} never found their pairing mates")
        # close the vertex set under all pairings so that edges map to edges
        new_pts = set()
        for f in env.hemi_faces():
            total = raw[f.id][1]
            for vid in set(f.polygon):
                pt, _h2 = _map_vertex(env, total, vid)
                if pt not in env.vid_by_point:
                    new_pts.add(pt)
        for f in env.wall_faces():
            for vid in set(f.polygon):
                pt, _h2 = _map_vertex(env, f.wall.mat, vid)
                if pt not in env.vid_by_point:
                    new_pts.add(pt)
        if not new_pts:
            break
        extras.update(new_pts)
        face_polys = [(f.hemisphere, [env.point(v) for v in f.polygon])
                      for f in env.hemi_faces()]
        env = assemble_complex(order, cell, face_polys, sorted(extras))
    else:
        raise ArithmeticError("face pairings did not stabilize under splitting")

    # generators: one per hemisphere pairing class, then t1, t2 (and u)
    hemi_ids = [f.id for f in env.hemi_faces()]
    pair_of = {fid: raw[fid][0] for fid in hemi_ids}
    for fid in hemi_ids:
        assert pair_of[pair_of[fid]] == fid, "pairing is not an involution"

    generators: List[Generator] = []
    gen_of_face: Dict[int, tuple] = {}
    for fid in hemi_ids:
        mate = pair_of[fid]
        if mate < fid:
            continue
        elem = GroupElem.of(raw[fid][1], mode)
        idx = len(generators) + 1
        generators.append(Generator(idx, f"g{idx}", elem,
                                    matrix_order(elem.mat)))
        gen_of_face[fid] = (idx, 1)
        if mate != fid:
            gen_of_face[mate] = (idx, -1)

    t1 = GroupElem.of(translation_mat(order.one()), mode)
    t2 = GroupElem.of(translation_mat(order.omega()), mode)
    i_t1 = len(generators) + 1
    generators.append(Generator(i_t1, "t1", t1, None))
    i_t2 = len(generators) + 1
    generators.append(Generator(i_t2, "t2", t2, None))
    i_u = None
    if cell.rot_order > 1:
        u = GroupElem.of(cell.rot_mat, mode)
        i_u = len(generators) + 1
        generators.append(Generator(i_u, "u", u, matrix_order(u.mat)))

    def wall_word(k: int, lam: QuadInt) -> tuple:
        word = []
        word += [i_t1 if lam.a > 0 else -i_t1] * abs(lam.a)
        word += [i_t2 if lam.b > 0 else -i_t2] * abs(lam.b)
        if k and i_u is not None:
            word += [i_u] * k
        return tuple(word)

    pairings: List[FacePairing] = []
    for f in env.faces:
        if f.kind == "hemisphere":
            mate = pair_of[f.id]
            idx, sign = gen_of_face[f.id]
            elem = GroupElem.of(raw[f.id][1], mode)
            if sign < 0:
                base = generators[idx - 1].elem.inv()
                assert base == elem, "pairing inverse mismatch"
            pairings.append(FacePairing(f.id, mate, elem, (sign * idx,), f.kind))
        else:
            w = f.wall
            mate_fid = None
            for f2 in env.wall_faces():
                if f2.wall.id == w.mate:
                    mate_fid = f2.id
                    break
            elem = GroupElem.of(w.mat, mode)
            word = wall_word(w.rot_power, w.shift)
            pairings.append(FacePairing(f.id, mate_fid, elem, word, f.kind))

    paired = PairedDomain(ford, env, pairings, generators)
    _verify_pairings(paired)
    return paired


def _verify_pairings(paired: PairedDomain) -> None:
    env = paired.complex
    for p in paired.pairings:
        f = env.faces[p.face_id]
        mate = env.faces[p.mate_id]
        target = {(env.point(v), env.height(v)) for v in mate.polygon}
        imgs = {_map_vertex(env, p.elem.mat, vid) for vid in set(f.polygon)}
        assert imgs == target, f"pairing of face {p.face_id} misses its mate"
        back = paired.pairings[p.mate_id]
        assert back.elem == p.elem.inv(), "mate pairing is not the inverse"
        # the recorded word evaluates to the pairing element
        assert _eval_word(paired, p.word) == p.elem, "pairing word mismatch"


def _eval_word(paired: PairedDomain, word: Sequence[int]) -> GroupElem:
    m = identity_mat(paired.order)
    for tok in word:
        g = paired.generators[abs(tok) - 1].elem
        m = m @ (g.mat if tok > 0 else g.mat.inv())
    return GroupElem.of(m, paired.mode)


# ---------------------------------------------------------------------------
# edge cycles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeCycle:
    edge_ids: tuple          # unoriented edges in traversal order
    word: tuple              # relator word (signed generator indices)
    elem: GroupElem          # cycle transformation
    order: int               # projective order n (relator is word^n)
    angle_sum: float         # diagnostic: should be 2*pi/n
    inverted: Optional[tuple] = None  # (half word, half elem, power k) extras


def _edge_angle(env: EnvelopeComplex, edge) -> float:
    """Interior dihedral angle of the polyhedron along the edge (float)."""
    order = env.order
    s = math.sqrt(order.abs_D)

    def hemi_normal(h: Hemisphere, p3):
        c3 = (float(h.center.x), float(h.center.y) * s, 0.0)
        return (c3[0] - p3[0], c3[1] - p3[1], c3[2] - p3[2])

    def wall_normal(w):
        dxc = float(w.b.x - w.a.x)
        dyc = float(w.b.y - w.a.y) * s
        return (dyc, -dxc, 0.0)

    f1, f2 = (env.faces[i] for i in edge.faces)
    if edge.kind == "vertical":
        n1, n2 = wall_normal(f1.wall), wall_normal(f2.wall)
    else:
        v1 = env.vertices[edge.v1]
        v2 = env.vertices[edge.v2]
        mx = (float(v1.point.x) + float(v2.point.x)) / 2
        my = (float(v1.point.y) + float(v2.point.y)) / 2
        h = f1.hemisphere if f1.kind == "hemisphere" else f2.hemisphere
        d2 = (mx - float(h.center.x)) ** 2 + (my - float(h.center.y)) ** 2 * order.abs_D
        t2 = float(h.radius_sq) - d2
        assert t2 > -1e-12
        p3 = (mx, my * s, math.sqrt(max(t2, 0.0)))
        n1 = hemi_normal(f1.hemisphere, p3) if f1.kind == "hemisphere" else wall_normal(f1.wall)
        n2 = hemi_normal(f2.hemisphere, p3) if f2.kind == "hemisphere" else wall_normal(f2.wall)
    dot = sum(a * b for a, b in zip(n1, n2))
    cross = (n1[1] * n2[2] - n1[2] * n2[1],
             n1[2] * n2[0] - n1[0] * n2[2],
             n1[0] * n2[1] - n1[1] * n2[0])
    # atan2 form is stable where the normals are nearly (anti)parallel
    cn = math.sqrt(sum(c * c for c in cross))
    return math.pi - math.atan2(cn, dot)


def edge_cycles(paired: PairedDomain) -> List[EdgeCycle]:
    """Partition of the polyhedron edges into Poincare cycles."""
    env = paired.complex
    pairings = paired.pairings
    order = paired.order
    covered = set()
    cycles: List[EdgeCycle] = []
    bound = 8 * len(env.edges) + 16

    def map_endpoint(vid: int, m: Mat2) -> int:
        if vid == AT_INFINITY:
            return AT_INFINITY
        pt, h2 = _map_vertex(env, m, vid)
        out = env.vid_by_point.get(pt)
        assert out is not None and env.height(out) == h2, \
            "edge image endpoint is not a vertex"
        return out

    for e0 in env.edges:
        if e0.id in covered:
            continue
        f0 = min(e0.faces)
        start = (e0.v1, e0.v2, f0)
        state = start
        total = identity_mat(order)
        word: list = []
        edge_list = []
        angle = 0.0
        half = None
        steps = 0
        while True:
            va, vb, fid = state
            eid = env.edge_by_key[frozenset((va, vb))]
            edge_list.append(eid)
            angle += _edge_angle(env, env.edges[eid])
            p = pairings[fid]
            if va == AT_INFINITY or vb == AT_INFINITY:
                assert p.elem.mat.c.is_zero(), "vertical edge met a hemisphere pairing"
            va2 = map_endpoint(va, p.elem.mat)
            vb2 = map_endpoint(vb, p.elem.mat)
            e2 = env.edges[env.edge_by_key[frozenset((va2, vb2))]]
            assert p.mate_id in e2.faces, "pairing image face is not at the image edge"
            f2 = e2.faces[0] if e2.faces[1] == p.mate_id else e2.faces[1]
            total = p.elem.mat @ total
            word = list(p.word) + word
            state = (va2, vb2, f2)
            steps += 1
            if state == start:
                break
            if state == (start[1], start[0], start[2]) and half is None:
                half = (tuple(word), GroupElem.of(total, paired.mode))
            assert steps <= bound, "edge cycle traversal did not close"
        elem = GroupElem.of(total, paired.mode)
        n = matrix_order(elem.mat)
        assert n is not None, "cycle transformation has infinite order"
        # diagnostic only; the group data above is exact
        assert abs(angle - 2 * math.pi / n) < 1e-9, \
            f"dihedral angle sum {angle} is not 2*pi/{n}"
        inverted = None
        if half is not None:
            inverted = _resolve_inverted(paired, half, elem, n)
        assert not (set(edge_list) & covered), "edge visited by two cycles"
        covered.update(edge_list)
        cycles.append(EdgeCycle(tuple(edge_list), tuple(word), elem, n,
                                angle, inverted))
    total_edges = sum(len(set(c.edge_ids)) for c in cycles)
    assert total_edges == len(env.edges), "cycles do not partition the edges"
    return cycles


def _resolve_inverted(paired: PairedDomain, half, elem: GroupElem, n: int):
    """Extra relation W^2 = T^k when a half-traversal reverses the edge."""
    hword, helem = half
    w2 = helem @ helem
    t = GroupElem.of(identity_mat(paired.order), paired.mode)
    for k in range(n + 1):
        if w2 == t:
            return (hword, helem, k)
        t = elem @ t
    raise ArithmeticError("inverted edge: W^2 is not a power of the cycle")


# ---------------------------------------------------------------------------
# presentation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Relator:
    word: tuple   # signed 1-based generator indices
    power: int    # relator is word^power
    tag: str


@dataclass
class Presentation:
    order: Order
    mode: GroupMode
    generators: List[Generator]
    relators: List[Relator]
    torsion_words: List[tuple]  # words of finite-order elements to kill

    def generator_names(self) -> list:
        return [g.name for g in self.generators]


def build_presentation(ford, paired: Optional[PairedDomain] = None,
                       cycles: Optional[List[EdgeCycle]] = None) -> Presentation:
    """Poincare presentation of the Bianchi group from the certified domain.

    Generators: one per hemisphere face-pairing class plus the stabilizer
    generators t1, t2 (translations by 1 and omega) and, for the symmetric
    orders, the rotation u.  Relators: every edge-cycle word raised to its
    torsion order, plus the stabilizer relations.  Every relator is verified
    to evaluate to a scalar matrix.
    """
    if paired is None:
        paired = pair_faces(ford)
    if cycles is None:
        cycles = edge_cycles(paired)
    order = paired.order
    mode = paired.mode
    gens = paired.generators
    relators: List[Relator] = []
    torsion_words: List[tuple] = []

    for cyc in cycles:
        relators.append(Relator(cyc.word, cyc.order, "cycle"))
        if cyc.order >= 2:
            torsion_words.append(cyc.word)
        if cyc.inverted is not None:
            hword, helem, k = cyc.inverted
            extra = tuple(hword) * 2 + tuple(-x for x in reversed(cyc.word)) * k
            relators.append(Relator(extra, 1, "inverted-edge"))
            torsion_words.append(hword)

    by_name = {g.name: g for g in gens}
    i_t1, i_t2 = by_name["t1"].index, by_name["t2"].index
    relators.append(Relator((i_t1, i_t2, -i_t1, -i_t2), 1, "translation-commutator"))
    if "u" in by_name:
        gu = by_name["u"]
        i_u = gu.index
        r = paired.complex.cell.rot_order
        relators.append(Relator((i_u,), r, "rotation-order"))
        zeta = paired.complex.cell.rot_unit
        for i_t, lam in ((i_t1, order.one()), (i_t2, order.omega())):
            mu = zeta * lam
            tmu = [i_t1 if mu.a > 0 else -i_t1] * abs(mu.a) + \
                  [i_t2 if mu.b > 0 else -i_t2] * abs(mu.b)
            word = (i_u, i_t, -i_u) + tuple(-x for x in reversed(tmu))
            relators.append(Relator(word, 1, "rotation-conjugation"))

    pres = Presentation(order, mode, gens, relators, torsion_words)
    for rel in pres.relators:
        total = _eval_word(paired, rel.word)
        m = identity_mat(order)
        for _ in range(rel.power):
            m = m @ total.mat
        if not m.is_scalar():
            raise ArithmeticError(f"relator {rel} does not evaluate to a scalar")
    return pres


# ---------------------------------------------------------------------------
# cusp orbits
# ---------------------------------------------------------------------------


@dataclass
class CuspOrbits:
    count: int
    orbits: List[list]        # vertex id lists; AT_INFINITY marks infinity
    class_tags: List[int]     # matched ideal-class index per orbit
    representatives: List[tuple]  # cusp (p, q) per orbit


def cusp_orbits(ford, paired: Optional[PairedDomain] = None) -> CuspOrbits:
    """Ideal vertices grouped by the face-pairing identifications.

    The orbit count is the geometric cusp number; each orbit is matched to an
    ideal class from the form class group (a hard error if none matches).
    """
    if paired is None:
        paired = pair_faces(ford)
    env = paired.complex
    order = paired.order

    ideal_ids = set(env.ideal_vertex_ids())
    nodes = sorted(ideal_ids) + [AT_INFINITY]
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for p in paired.pairings:
        f = env.faces[p.face_id]
        for vid in set(f.polygon):
            if vid not in ideal_ids:
                continue
            img = p.elem.mat.apply_boundary(env.point(vid))
            assert img != "inf", "finite cusp mapped to infinity by a pairing"
            out = env.vid_by_point.get(img)
            assert out is not None and env.height(out) == 0, \
                "cusp image is not an ideal vertex"
            union(vid, out)

    groups: Dict[int, list] = {}
    for v in nodes:
        groups.setdefault(find(v), []).append(v)
    orbits = sorted(groups.values(), key=lambda g: (AT_INFINITY not in g, g))

    reps = cusp_representatives(order)
    tags = []
    points = []
    for orbit in orbits:
        if AT_INFINITY in orbit:
            pq = (order.one(), order.zero())
        else:
            num, den = order.field_of_point(env.point(orbit[0]))
            pq = (num, order.elem(den))
        points.append(pq)
        tags.append(match_cusp_class(pq, reps))
    if len(set(tags)) != len(tags):
        raise ArithmeticError(
            "two cusp orbits share an ideal class: pairings under-merged")
    return CuspOrbits(len(orbits), orbits, tags, points)


# ---------------------------------------------------------------------------
# singular locus summary
# ---------------------------------------------------------------------------


@dataclass
class SingularSummary:
    cycle_orders: Dict[int, int]          # torsion order -> number of cycles
    finite_order_generators: List[tuple]  # (name, order)
    vertex_orders: Dict[int, tuple]       # finite vertex id -> incident orders


def singular_summary(cycles: List[EdgeCycle], paired: PairedDomain) -> SingularSummary:
    env = paired.complex
    orders: Dict[int, int] = {}
    for c in cycles:
        if c.order >= 2:
            orders[c.order] = orders.get(c.order, 0) + 1
    finite = [(g.name, g.proj_order) for g in paired.generators
              if g.proj_order is not None and g.proj_order >= 2]
    per_vertex: Dict[int, list] = {}
    for c in cycles:
        if c.order < 2:
            continue
        for eid in set(c.edge_ids):
            e = env.edges[eid]
            for vid in (e.v1, e.v2):
                if vid != AT_INFINITY and env.height(vid) > 0:
                    per_vertex.setdefault(vid, []).append(c.order)
    vertex_orders = {v: tuple(sorted(lst)) for v, lst in sorted(per_vertex.items())}
    return SingularSummary(orders, finite, vertex_orders)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def simplify_presentation(pres: Presentation) -> Presentation:
    """Optional Tietze pass: eliminate generators expressible in the others.

    A generator is removed only when a power-one relator contains it exactly
    once, so it equals a word in the remaining generators; the replacement is
    verified by exact matrix identity before substituting.  Homology is
    unchanged; the raw presentation stays the default everywhere else.
    """
    gens = list(pres.generators)
    relators = list(pres.relators)
    torsion_words = list(pres.torsion_words)

    def invw(word):
        return tuple(-t for t in reversed(word))

    changed = True
    while changed and len(gens) > 1:
        changed = False
        for ri, rel in enumerate(relators):
            if rel.power != 1:
                continue
            counts: Dict[int, int] = {}
            for tok in rel.word:
                counts[abs(tok)] = counts.get(abs(tok), 0) + 1
            target = next((i for i in sorted(counts) if counts[i] == 1), None)
            if target is None:
                continue
            pos = next(j for j, tok in enumerate(rel.word) if abs(tok) == target)
            prefix, sign = rel.word[:pos], rel.word[pos] > 0
            suffix = rel.word[pos + 1:]
            repl = invw(prefix) + invw(suffix) if sign else \
                tuple(suffix) + tuple(prefix)
            by_index = {g.index: g for g in gens}
            m = identity_mat(pres.order)
            for tok in repl:
                gm = by_index[abs(tok)].elem.mat
                m = m @ (gm if tok > 0 else gm.inv())
            if GroupElem.of(m, pres.mode) != by_index[target].elem:
                continue  # relator closes only up to a nontrivial scalar path

            def subst(word):
                out = []
                for tok in word:
                    if abs(tok) != target:
                        out.append(tok)
                    else:
                        out.extend(repl if tok > 0 else invw(repl))
                return tuple(out)

            old = by_index[target]
            relators = [Relator(subst(r.word), r.power, r.tag)
                        for j, r in enumerate(relators) if j != ri]
            torsion_words = [subst(w) for w in torsion_words]
            if old.proj_order is not None:
                torsion_words.append(repl)
            gens = [g for g in gens if g.index != target]
            remap = {g.index: i + 1 for i, g in enumerate(gens)}
            gens = [Generator(remap[g.index], g.name, g.elem, g.proj_order)
                    for g in gens]

            def reindex(word):
                return tuple((1 if t > 0 else -1) * remap[abs(t)] for t in word)

            relators = [Relator(reindex(r.word), r.power, r.tag) for r in relators]
            torsion_words = [reindex(w) for w in torsion_words]
            changed = True
            break
    return Presentation(pres.order, pres.mode, gens, relators, torsion_words)


def format_presentation(pres: Presentation) -> str:
    """Plain text form: `gen` names, `ord` annotations, `rel` words.

    rel lines list the signed 1-based generator indices of the word followed
    by ^n for the power; see the README for the grammar.
    """
    lines = ["gen " + " ".join(pres.generator_names())]
    for g in pres.generators:
        if g.proj_order is not None:
            lines.append(f"ord {g.index} {g.proj_order}")
    for rel in pres.relators:
        lines.append("rel " + " ".join(str(t) for t in rel.word) + f" ^{rel.power}")
    return "\n".join(lines) + "\n"
