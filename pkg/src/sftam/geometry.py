"""Polycube surfaces: facets, folded adjacency, genus, and region partitions.

Everything downstream (the tile engine, the counters, the genus detector)
works on the facet graph built here.  A facet is one unit square of the
boundary surface of a voxel solid; adjacency between facets follows the
surface around edges, so tiles placed on facets can "fold" over convex and
reflex edges of the polycube.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

# Outward normals, indexed 0..5.
DIRS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))
DIR_NAMES = ("+x", "-x", "+y", "-y", "+z", "-z")
DIR_INDEX = {n: i for i, n in enumerate(DIR_NAMES)}
_OPPOSITE = (1, 0, 3, 2, 5, 4)


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _dir_of(v):
    return DIRS.index(v)


# Canonical side frame per normal: sides 0..3 in clockwise order as seen
# from outside the solid (looking against the normal).  side k+1 is side k
# rotated clockwise, i.e. u_{k+1} = u_k x n.
def _side_frame(d):
    n = DIRS[d]
    u0 = (0, 0, 1) if n[2] == 0 else (0, 1, 0)
    sides = [u0]
    for _ in range(3):
        sides.append(_cross(sides[-1], n))
    return tuple(sides)


SIDE_FRAMES = tuple(_side_frame(d) for d in range(6))


class GeometryError(ValueError):
    pass


class DisconnectedSurface(GeometryError):
    pass


class EmptySolid(GeometryError):
    pass


class NonOrientableOrMultiComponent(GeometryError):
    pass


class NotNormalPlacement(GeometryError):
    pass


@dataclass(frozen=True)
class Cuboid0:
    """Axis-aligned box of voxels: anchor corner plus positive extents."""

    anchor: tuple[int, int, int]
    dims: tuple[int, int, int]

    def __post_init__(self):
        if any(d < 1 for d in self.dims):
            raise GeometryError("cuboid dims must be >= 1: %r" % (self.dims,))

    def cells(self):
        ax, ay, az = self.anchor
        dx, dy, dz = self.dims
        for x in range(ax, ax + dx):
            for y in range(ay, ay + dy):
                for z in range(az, az + dz):
                    yield (x, y, z)

    def contains(self, c):
        return all(self.anchor[i] <= c[i] < self.anchor[i] + self.dims[i] for i in range(3))

    def corners(self):
        lo = self.anchor
        hi = tuple(self.anchor[i] + self.dims[i] for i in range(3))
        return [tuple(p) for p in itertools.product(*zip(lo, hi))]


@dataclass(frozen=True)
class Cuboid1Spec:
    """Outer box minus an optional inner box (the order-1 cuboid family)."""

    outer: Cuboid0
    inner: Cuboid0 | None = None

    def cell_set(self):
        cells = set(self.outer.cells())
        if self.inner is not None:
            cells -= set(self.inner.cells())
        return cells


@dataclass(frozen=True)
class Facet:
    """One boundary unit square: owning cell plus outward direction index."""

    cell: tuple[int, int, int]
    direction: int

    @property
    def normal(self):
        return DIRS[self.direction]

    def center2(self):
        # Face center in doubled coordinates (stays integral).
        c, n = self.cell, DIRS[self.direction]
        return (2 * c[0] + 1 + n[0], 2 * c[1] + 1 + n[1], 2 * c[2] + 1 + n[2])

    def center(self):
        x, y, z = self.center2()
        return (x / 2.0, y / 2.0, z / 2.0)

    def side_edge2(self, k):
        # Midpoint (doubled) of side k's edge; identifies the lattice edge.
        u = SIDE_FRAMES[self.direction][k]
        return _add(self.center2(), u)

    def corner2(self, k):
        # Corner between side k and side (k+1)%4, doubled coordinates.
        f = SIDE_FRAMES[self.direction]
        return _add(_add(self.center2(), f[k]), f[(k + 1) % 4])

    def __repr__(self):
        return "Facet(%r,%s)" % (self.cell, DIR_NAMES[self.direction])


@dataclass(frozen=True)
class PlacementGeom:
    """A facet plus which canonical side receives tile side 1."""

    facet: Facet
    orientation: int = 0

    def __post_init__(self):
        if self.orientation not in (0, 1, 2, 3):
            raise GeometryError("orientation must be in 0..3")


class Polycube:
    """A voxel solid with its boundary surface as an indexed facet graph."""

    def __init__(self, cells):
        self.cells = frozenset(tuple(c) for c in cells)
        if not self.cells:
            raise EmptySolid("polycube has no cells")
        self.facets: list[Facet] = []
        self.facet_index: dict[Facet, int] = {}
        for c in sorted(self.cells):
            for d in range(6):
                if _add(c, DIRS[d]) not in self.cells:
                    f = Facet(c, d)
                    self.facet_index[f] = len(self.facets)
                    self.facets.append(f)
        self._neighbors = self._build_neighbors()

    # -- adjacency ---------------------------------------------------------

    def _build_neighbors(self):
        """For every (facet, side) the facet reached by rotating about that
        edge through the exterior, plus the matching side index there.

        At a pinch edge (four incident facets) the rotation rule pairs the
        facets into the two sheets that a tile surface would follow.
        """
        nbrs = [None] * (4 * len(self.facets))
        for fi, f in enumerate(self.facets):
            c = f.cell
            n = DIRS[f.direction]
            frame = SIDE_FRAMES[f.direction]
            for k in range(4):
                u = frame[k]
                diag = _add(_add(c, u), n)
                if diag in self.cells:
                    g = Facet(diag, _dir_of(tuple(-x for x in u)))
                elif _add(c, u) in self.cells:
                    g = Facet(_add(c, u), f.direction)
                else:
                    g = Facet(c, _dir_of(u))
                gi = self.facet_index[g]
                edge = f.side_edge2(k)
                gk = next(j for j in range(4) if g.side_edge2(j) == edge)
                nbrs[4 * fi + k] = (gi, gk)
        # The pairing must be an involution.
        for fi in range(len(self.facets)):
            for k in range(4):
                gi, gk = nbrs[4 * fi + k]
                if nbrs[4 * gi + gk] != (fi, k):
                    raise NonOrientableOrMultiComponent(
                        "facet adjacency is not symmetric at %r side %d"
                        % (self.facets[fi], k)
                    )
        return nbrs

    def neighbor(self, fi, side):
        return self._neighbors[4 * fi + side]

    def facet_neighbors(self, f: Facet):
        fi = self.facet_index[f]
        out = []
        for k in range(4):
            gi, gk = self.neighbor(fi, k)
            out.append((self.facets[gi], gk))
        return out

    # -- topology ----------------------------------------------------------

    def surface_components(self):
        seen = [False] * len(self.facets)
        comps = []
        for start in range(len(self.facets)):
            if seen[start]:
                continue
            comp = []
            stack = [start]
            seen[start] = True
            while stack:
                fi = stack.pop()
                comp.append(fi)
                for k in range(4):
                    gi, _ = self.neighbor(fi, k)
                    if not seen[gi]:
                        seen[gi] = True
                        stack.append(gi)
            comps.append(comp)
        return comps

    def surface_connected(self):
        return len(self.surface_components()) == 1

    def genus(self):
        """Genus from Euler characteristic of the quad surface complex.

        V counts corner orbits under the edge pairing, so lattice points
        pinched between sheets count once per sheet; E is one per facet
        side pair.  chi must come out even and the surface connected.
        """
        if not self.surface_connected():
            raise NonOrientableOrMultiComponent("surface is not connected")
        nf = len(self.facets)
        ne = 2 * nf
        # Corner (fi, k) = corner between side k and side k+1 of facet fi.
        # Walk around the vertex by crossing one bounding side, landing on
        # the neighbor's corner at the same lattice point, then continuing
        # through that corner's other bounding side.
        seen = [[False] * 4 for _ in range(nf)]
        nv = 0
        for fi in range(nf):
            for k0 in range(4):
                if seen[fi][k0]:
                    continue
                nv += 1
                ci, ck = fi, k0
                cross = (ck + 1) % 4
                while not seen[ci][ck]:
                    seen[ci][ck] = True
                    v2 = self.facets[ci].corner2(ck)
                    gi, gk = self.neighbor(ci, cross)
                    g = self.facets[gi]
                    nk = next(j for j in range(4) if g.corner2(j) == v2)
                    cross = nk if nk != gk else (nk + 1) % 4
                    ci, ck = gi, nk
        chi = nv - ne + nf
        if chi % 2 != 0:
            raise NonOrientableOrMultiComponent("odd Euler characteristic %d" % chi)
        g = (2 - chi) // 2
        if g < 0:
            raise NonOrientableOrMultiComponent("negative genus from chi=%d" % chi)
        return g

    # -- corner vertices and normal placements ------------------------------

    def corner_vertices(self):
        """Lattice points where the surface turns in all three axes.

        A point is a corner iff the 2x2x2 occupancy pattern around it is not
        invariant along any axis (planes and straight edges are excluded).
        """
        pts = set()
        for c in self.cells:
            for dx, dy, dz in itertools.product((0, 1), repeat=3):
                pts.add((c[0] + dx, c[1] + dy, c[2] + dz))
        corners = []
        for p in sorted(pts):
            occ = {}
            for dx, dy, dz in itertools.product((-1, 0), repeat=3):
                occ[(dx, dy, dz)] = (p[0] + dx, p[1] + dy, p[2] + dz) in self.cells
            if not any(occ.values()) or all(occ.values()):
                continue
            invariant = False
            for ax in range(3):
                if all(
                    occ[k] == occ[tuple(-1 if i == ax else k[i] for i in range(3))]
                    for k in occ
                ):
                    invariant = True
                    break
            if not invariant:
                corners.append(p)
        return corners


# -- construction and classification ----------------------------------------


def build_polycube(spec: Cuboid1Spec) -> Polycube:
    """Materialize outer minus inner, requiring a connected boundary."""
    cells = spec.cell_set()
    if not cells:
        raise EmptySolid("inner cuboid swallows the outer cuboid")
    p = Polycube(cells)
    if not p.surface_connected():
        raise DisconnectedSurface("difference has a disconnected boundary surface")
    return p


def classify(spec: Cuboid1Spec) -> str:
    """One of Order0 / Pit / Concavity / Tunnel for an order-1 spec."""
    outer = spec.outer
    if spec.inner is None:
        return "Order0"
    inter = _box_intersection(outer, spec.inner)
    if inter is None:
        return "Order0"
    p = build_polycube(spec)
    if p.genus() == 1:
        return "Tunnel"
    # Genus 0 with a real cut: pit iff the cavity opens strictly inside the
    # interior of exactly one outer face, concavity iff it reaches a side.
    opens = _opening_faces(outer, inter)
    if len(opens) == 1 and opens[0][1]:
        return "Pit"
    return "Concavity"


def _box_intersection(a: Cuboid0, b: Cuboid0):
    lo = tuple(max(a.anchor[i], b.anchor[i]) for i in range(3))
    hi = tuple(
        min(a.anchor[i] + a.dims[i], b.anchor[i] + b.dims[i]) for i in range(3)
    )
    if any(lo[i] >= hi[i] for i in range(3)):
        return None
    return Cuboid0(lo, tuple(hi[i] - lo[i] for i in range(3)))


def _opening_faces(outer: Cuboid0, cavity: Cuboid0):
    """Outer faces the cavity reaches, with an interior-opening flag each."""
    out = []
    for ax in range(3):
        for side, coord in ((0, outer.anchor[ax]), (1, outer.anchor[ax] + outer.dims[ax])):
            creach = cavity.anchor[ax] if side == 0 else cavity.anchor[ax] + cavity.dims[ax]
            if creach != coord:
                continue
            interior = True
            for other in range(3):
                if other == ax:
                    continue
                if cavity.anchor[other] <= outer.anchor[other]:
                    interior = False
                if (
                    cavity.anchor[other] + cavity.dims[other]
                    >= outer.anchor[other] + outer.dims[other]
                ):
                    interior = False
            out.append(((ax, side), interior))
    return out


# -- normal placements -------------------------------------------------------


def margin_for(n_largest_dim: int) -> int:
    return 3 * max(1, (n_largest_dim - 1).bit_length()) + 6


def normal_placements(p: Polycube, n_largest_dim: int):
    """All placements far enough from every corner vertex of the solid.

    Position is the facet center; the margin must hold in at least two of
    the three axes against every corner vertex.
    """
    m = margin_for(n_largest_dim)
    corners = p.corner_vertices()
    out = []
    for f in p.facets:
        cx, cy, cz = f.center()
        ok = True
        for vx, vy, vz in corners:
            hits = (abs(vx - cx) >= m) + (abs(vy - cy) >= m) + (abs(vz - cz) >= m)
            if hits < 2:
                ok = False
                break
        if ok:
            for o in range(4):
                out.append(PlacementGeom(f, o))
    return out


def is_normal_placement(p: Polycube, placement: PlacementGeom, n_largest_dim: int) -> bool:
    m = margin_for(n_largest_dim)
    cx, cy, cz = placement.facet.center()
    for vx, vy, vz in p.corner_vertices():
        hits = (abs(vx - cx) >= m) + (abs(vy - cy) >= m) + (abs(vz - cz) >= m)
        if hits < 2:
            return False
    return True


# -- region partition --------------------------------------------------------


@dataclass
class RegionPartition:
    ribbons: dict  # axis name -> set of facet ids
    regions: list  # list of frozensets of facet ids
    region_graph: list  # adjacency: list of sets of region indices
    coloring: list | None  # 0/1 per region when bipartite, else None
    region_labels: list  # (sx, sy, sz) octant label per region, entries may be None


def _plane_ring(p: Polycube, axis: int, coord_half: float):
    """Facet ids crossed by the axis-plane at the given half-integer coord."""
    ids = set()
    for fi, f in enumerate(p.facets):
        n = DIRS[f.direction]
        if n[axis] != 0:
            continue
        lo = f.cell[axis]
        if lo < coord_half < lo + 1:
            ids.add(fi)
    return ids


def _components(p: Polycube, ids):
    ids = set(ids)
    comps = []
    while ids:
        start = min(ids)
        comp = {start}
        stack = [start]
        ids.discard(start)
        while stack:
            fi = stack.pop()
            for k in range(4):
                gi, _ = p.neighbor(fi, k)
                if gi in ids:
                    ids.discard(gi)
                    comp.add(gi)
                    stack.append(gi)
        comps.append(frozenset(comp))
    return comps


def region_partition(p: Polycube, seed: PlacementGeom, outer: Cuboid0,
                     n_largest_dim: int | None = None) -> RegionPartition:
    """Ribbons through the seed planes plus the mid plane, and what remains.

    R_X and R_Y are the seed-containing components of the surface cut by the
    two axis planes through the seed center.  R_Z is the R_Y-adjacent
    component of the cut at the outer cuboid's mid plane, and is empty when
    R_X and R_Y touch in only one component.
    """
    if n_largest_dim is not None and not is_normal_placement(p, seed, n_largest_dim):
        raise NotNormalPlacement("seed %r is not a normal placement" % (seed,))
    sc = seed.facet.center()
    seed_id = p.facet_index[seed.facet]

    def seed_component(axis, coord):
        ring = _plane_ring(p, axis, coord)
        for comp in _components(p, ring):
            if seed_id in comp:
                return comp
        return frozenset()

    n = seed.facet.normal
    axes = [ax for ax in range(3) if n[ax] == 0]
    ax_x, ax_y = axes[0], axes[1]
    rx = seed_component(ax_x, sc[ax_x])
    ry = seed_component(ax_y, sc[ax_y])
    # Mid plane, snapped between voxel layers so the ribbon is facet-valued.
    ax_z = next(ax for ax in range(3) if n[ax] != 0)
    zc = outer.anchor[ax_z] + outer.dims[ax_z] // 2 + 0.5
    if zc >= outer.anchor[ax_z] + outer.dims[ax_z]:
        zc -= 1.0

    # Count contact components between R_X and R_Y.
    contact = _ribbon_contacts(p, rx, ry)
    rz = frozenset()
    if contact >= 2:
        ring = _plane_ring(p, ax_z, zc)
        best = None
        for comp in _components(p, ring):
            if _ribbon_contacts(p, comp, ry) > 0:
                if best is None or min(comp) < min(best):
                    best = comp
        if best is not None:
            rz = best

    skeleton = rx | ry | rz
    remainder = set(range(len(p.facets))) - skeleton
    regions = _components(p, remainder)

    labels = []
    planes = {ax_x: sc[ax_x], ax_y: sc[ax_y], ax_z: zc}
    for reg in regions:
        lab = _octant_label(p, reg, planes, (ax_x, ax_y, ax_z))
        labels.append(lab)

    graph = [set() for _ in regions]
    where = {}
    for ri, reg in enumerate(regions):
        for fi in reg:
            where[fi] = ri
    for ri, reg in enumerate(regions):
        frontier_ribbon = set()
        for fi in reg:
            for k in range(4):
                gi, _ = p.neighbor(fi, k)
                if gi in skeleton:
                    frontier_ribbon.add(gi)
        for gi in frontier_ribbon:
            for k in range(4):
                hi, _ = p.neighbor(gi, k)
                rj = where.get(hi)
                if rj is not None and rj != ri:
                    graph[ri].add(rj)
                    graph[rj].add(ri)

    coloring = _two_color(graph)
    return RegionPartition(
        ribbons={"x": rx, "y": ry, "z": rz},
        regions=regions,
        region_graph=graph,
        coloring=coloring,
        region_labels=labels,
    )


def _ribbon_contacts(p: Polycube, a, b):
    """Number of connected pieces of facets of a that touch or overlap b."""
    touch = set()
    for fi in a:
        if fi in b:
            touch.add(fi)
            continue
        for k in range(4):
            gi, _ = p.neighbor(fi, k)
            if gi in b:
                touch.add(fi)
                break
    if not touch:
        return 0
    return len(_components(p, touch))


def _octant_label(p: Polycube, region, planes, axmap):
    votes = [set(), set(), set()]
    for fi in region:
        c = p.facets[fi].center()
        for pos, ax in enumerate(axmap):
            if abs(c[ax] - planes[ax]) > 0.25:
                votes[pos].add(1 if c[ax] > planes[ax] else 0)
    label = []
    for v in votes:
        label.append(v.pop() if len(v) == 1 else None)
    if any(b is None for b in label):
        return None
    return tuple(label)


def _two_color(graph):
    color = [None] * len(graph)
    for start in range(len(graph)):
        if color[start] is not None:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for v in graph[u]:
                if color[v] is None:
                    color[v] = 1 - color[u]
                    stack.append(v)
                elif color[v] == color[u]:
                    return None
    return color


# -- cuboid spec files -------------------------------------------------------


def parse_cuboid_file(text: str) -> Cuboid1Spec:
    """Parse the `C0 = sx sy sz dx dy dz` / optional `C1 = ...` format."""
    outer = inner = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise GeometryError("line %d: expected KEY = values" % lineno)
        key, _, rest = line.partition("=")
        key = key.strip().upper()
        try:
            vals = [int(tok) for tok in rest.split()]
        except ValueError:
            raise GeometryError("line %d: non-integer field" % lineno)
        if len(vals) != 6:
            raise GeometryError("line %d: expected 6 integers" % lineno)
        box = Cuboid0(tuple(vals[:3]), tuple(vals[3:]))
        if key == "C0":
            outer = box
        elif key == "C1":
            inner = box
        else:
            raise GeometryError("line %d: unknown key %r" % (lineno, key))
    if outer is None:
        raise GeometryError("missing C0 line")
    return Cuboid1Spec(outer, inner)


def format_cuboid_spec(spec: Cuboid1Spec) -> str:
    lines = ["C0 = %d %d %d %d %d %d" % (spec.outer.anchor + spec.outer.dims)]
    if spec.inner is not None:
        lines.append("C1 = %d %d %d %d %d %d" % (spec.inner.anchor + spec.inner.dims))
    return "\n".join(lines) + "\n"
