"""Tile systems and temperature-tau attachment dynamics on polycube surfaces.

A tile is a 4-tuple of glue labels; a placement is a facet plus the side
that receives glue 1 (sides counted clockwise seen from outside).  Tiles
attach one at a time wherever the summed strength of matched glues against
already-placed neighbors reaches the temperature.  Mismatched glues do not
block attachment, they just contribute nothing.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .geometry import DIR_NAMES, DIR_INDEX, Facet, PlacementGeom, Polycube

EPS = ""  # the null label

# Glues are polarized: a tile side carrying "name+" bonds a facing side
# carrying "name-" (same label, opposite pole), never its own pole.  This is
# the sticky-end picture: a strand binds its complement, not itself.  Without
# it, free tile rotation would let any strength-2 emitter re-attach flipped
# onto its own emission and no system could be directed.


def glue_name(glue: str) -> str:
    return glue[:-1] if glue else glue


def glue_pole(glue: str) -> str:
    return glue[-1] if glue else ""


def comp_glue(glue: str) -> str:
    if not glue:
        return glue
    return glue[:-1] + ("-" if glue[-1] == "+" else "+")


def _comp(gid: int) -> int:
    return 0 if gid == 0 else ((gid - 1) ^ 1) + 1


class EngineError(ValueError):
    pass


class FacetOccupied(EngineError):
    pass


class SeedInvalid(EngineError):
    pass


class NotIsomorphic(EngineError):
    pass


class CapExceeded(EngineError):
    pass


@dataclass(frozen=True)
class TileType:
    name: str
    glues: tuple[str, str, str, str]


class TileSystem:
    """Glue strengths, tile catalog, seed block and temperature."""

    def __init__(self, tau=2):
        self.tau = tau
        self.strengths: dict[str, int] = {EPS: 0}
        self.tiles: dict[str, TileType] = {}
        self.seed: list[tuple[PlacementGeom, str]] = []
        self.seed_only: set[str] = set()
        self.families: list = []  # combinatorial tile families (see TibcFamily)

    def add_label(self, name, strength):
        if name.endswith(("+", "-")):
            raise EngineError("label names must not end in a pole mark: %r" % name)
        if name in self.strengths and self.strengths[name] != strength:
            raise EngineError("label %r redefined with new strength" % name)
        self.strengths[name] = strength

    def add_tile(self, name, glues, seed_only=False):
        glues = tuple(glues)
        if len(glues) != 4:
            raise EngineError("tile %r needs exactly 4 glues" % name)
        for g in glues:
            if g and (glue_pole(g) not in "+-" or glue_name(g) not in self.strengths):
                raise EngineError("tile %r uses undeclared glue %r" % (name, g))
        if name in self.tiles:
            if self.tiles[name].glues != glues:
                raise EngineError("tile %r redefined" % name)
            return self.tiles[name]
        t = TileType(name, glues)
        self.tiles[name] = t
        if seed_only:
            self.seed_only.add(name)
        return t

    def place_seed(self, placement: PlacementGeom, tile_name: str):
        if tile_name not in self.tiles:
            raise EngineError("seed tile %r not in catalog" % tile_name)
        self.seed.append((placement, tile_name))

    def strength(self, glue):
        return self.strengths[glue_name(glue)] if glue else 0


@dataclass
class AttachmentEvent:
    step: int
    fid: int
    orientation: int
    tile: str
    bound_strength: int


class Assembly:
    """Occupied placements plus the attachment log that produced them."""

    def __init__(self, surface: Polycube):
        self.surface = surface
        self.tiles: dict[int, tuple[int, str]] = {}  # fid -> (orientation, tile name)
        self.events: list[AttachmentEvent] = []

    def occupied(self, fid):
        return fid in self.tiles

    def tile_at(self, fid):
        return self.tiles.get(fid)

    def placements(self):
        out = {}
        for fid, (o, name) in self.tiles.items():
            out[PlacementGeom(self.surface.facets[fid], o)] = name
        return out

    def as_frozen(self):
        return frozenset((fid, o, n) for fid, (o, n) in self.tiles.items())

    def tile_names(self):
        return [n for _, n in self.tiles.values()]


def contains_any(a: Assembly, marker_names) -> bool:
    marker_names = set(marker_names)
    return any(n in marker_names for _, n in a.tiles.values())


def side_labels(tile: TileType, placement: PlacementGeom):
    """Map canonical facet side -> glue, per the placement orientation."""
    o = placement.orientation
    return {k: tile.glues[(k - o) % 4] for k in range(4)}


class _Run:
    """One live simulation: interned tables, assembly state, frontier."""

    def __init__(self, system: TileSystem, surface: Polycube):
        self.system = system
        self.surface = surface
        self.tau = system.tau
        nf = len(surface.facets)
        self.nbr = surface._neighbors  # flat (gid, gside) per (fid, side)

        # Intern poled glues: ids 2k+1 / 2k+2 are the +/- poles of label k,
        # so complement(i) flips the low "side" of (i-1).
        self.label_ids = {EPS: 0}
        self.label_names = [EPS]
        self.str_by_id = [0]
        for name, s in system.strengths.items():
            if name == EPS:
                continue
            for pole in "+-":
                g = name + pole
                self.label_ids[g] = len(self.label_names)
                self.label_names.append(g)
                self.str_by_id.append(s)
        self.tile_names: list[str] = []
        self.tile_glues: list[tuple[int, int, int, int]] = []
        self.tile_ids: dict[str, int] = {}
        for name, t in system.tiles.items():
            self._intern_tile(name, tuple(self.label_ids[g] for g in t.glues))
        self.seed_only_ids = {
            self.tile_ids[n] for n in system.seed_only if n in self.tile_ids
        }
        # complement glue id -> [(tid, pos)] over attachable tiles; an
        # exposure e attracts exactly the tiles listed under e's own id.
        self.by_glue: dict[int, list[tuple[int, int]]] = {}
        for tid, name in enumerate(self.tile_names):
            if tid in self.seed_only_ids:
                continue
            for pos, g in enumerate(self.tile_glues[tid]):
                if g:
                    self.by_glue.setdefault(_comp(g), []).append((tid, pos))

        self.assembly = Assembly(surface)
        self.occ: list = [None] * nf  # fid -> (orientation, tid)
        self.families = [fam.bind(self) for fam in system.families]

        # Frontier: indexable list of (fid, orientation, tid) + per-facet sets.
        self.entries: list[tuple[int, int, int]] = []
        self.entry_pos: dict[tuple[int, int, int], int] = {}
        self.by_facet: dict[int, list[tuple[int, int, int]]] = {}

        self._place_seed()

    def _intern_tile(self, name, glue_ids):
        tid = self.tile_ids.get(name)
        if tid is not None:
            return tid
        tid = len(self.tile_names)
        self.tile_ids[name] = tid
        self.tile_names.append(name)
        self.tile_glues.append(tuple(glue_ids))
        return tid

    def _place_seed(self):
        if not self.system.seed:
            raise SeedInvalid("empty seed")
        seen = set()
        for placement, name in self.system.seed:
            fid = self.surface.facet_index.get(placement.facet)
            if fid is None:
                raise SeedInvalid("seed facet %r not on surface" % (placement.facet,))
            if fid in seen:
                raise SeedInvalid("two seed tiles on one facet")
            seen.add(fid)
            tid = self.tile_ids[name]
            self.occ[fid] = (placement.orientation, tid)
            self.assembly.tiles[fid] = (placement.orientation, name)
        for fid in seen:
            self._recheck(fid)
            for k in range(4):
                gi, _ = self.nbr[4 * fid + k]
                if self.occ[gi] is None:
                    self._recheck(gi)

    # -- frontier ----------------------------------------------------------

    def exposure(self, fid, side):
        """Glue id shown toward facet fid across its given side, or 0."""
        gi, gk = self.nbr[4 * fid + side]
        got = self.occ[gi]
        if got is None:
            return 0
        go, gt = got
        return self.tile_glues[gt][(gk - go) % 4]

    def bind_strength(self, fid, orientation, tid):
        glues = self.tile_glues[tid]
        total = 0
        for k in range(4):
            g = glues[(k - orientation) % 4]
            if not g:
                continue
            if self.exposure(fid, k) == _comp(g):
                total += self.str_by_id[g]
        return total

    def _candidates(self, fid):
        """All (fid, orientation, tid) attachable at an empty facet."""
        expo = [self.exposure(fid, k) for k in range(4)]
        out = []
        seen = set()
        for k in range(4):
            g = expo[k]
            if not g:
                continue
            for tid, pos in self.by_glue.get(g, ()):
                o = (k - pos) % 4
                key = (o, tid)
                if key in seen:
                    continue
                seen.add(key)
                if self.bind_strength(fid, o, tid) >= self.tau:
                    out.append((fid, o, tid))
        for fam in self.families:
            out.extend(fam.candidates(fid, expo))
        return out

    def _recheck(self, fid):
        old = self.by_facet.pop(fid, None)
        if old:
            for e in old:
                self._remove_entry(e)
        if self.occ[fid] is not None:
            return
        cands = self._candidates(fid)
        if cands:
            self.by_facet[fid] = cands
            for e in cands:
                self.entry_pos[e] = len(self.entries)
                self.entries.append(e)

    def _remove_entry(self, e):
        pos = self.entry_pos.pop(e, None)
        if pos is None:
            return
        last = self.entries.pop()
        if last != e:
            self.entries[pos] = last
            self.entry_pos[last] = pos

    def attach(self, fid, orientation, tid, record=True):
        strength = self.bind_strength(fid, orientation, tid)
        self.occ[fid] = (orientation, tid)
        name = self.tile_names[tid]
        self.assembly.tiles[fid] = (orientation, name)
        if record:
            self.assembly.events.append(
                AttachmentEvent(len(self.assembly.events), fid, orientation, name, strength)
            )
        self._recheck(fid)
        for k in range(4):
            gi, _ = self.nbr[4 * fid + k]
            if self.occ[gi] is None:
                self._recheck(gi)

    def frontier(self):
        return list(self.entries)


class TibcFamily:
    """Seam detectors: every 4-tuple pairing one east-system label with one
    west-system label, remaining sides null.

    The family is combinatorial, so members are materialized on demand; a
    member is attachable exactly where some facet sees an east label on one
    side and a west label on another.
    """

    def __init__(self, east_labels, west_labels, name_prefix="y.tibc"):
        self.east_labels = set(east_labels)
        self.west_labels = set(west_labels)
        self.name_prefix = name_prefix

    def bind(self, run):
        return _BoundTibc(self, run)

    def describe(self):
        return (
            "%s: tuples (i1,i2,i3,i4), i2 in {%s}, i4 in {%s}, i1=i3=eps, "
            "all relative rotations"
            % (
                self.name_prefix,
                ", ".join(sorted(self.east_labels)),
                ", ".join(sorted(self.west_labels)),
            )
        )


class _BoundTibc:
    def __init__(self, family, run):
        self.run = run
        self.prefix = family.name_prefix
        self.east = {
            gid
            for g, gid in run.label_ids.items()
            if g and glue_name(g) in family.east_labels
        }
        self.west = {
            gid
            for g, gid in run.label_ids.items()
            if g and glue_name(g) in family.west_labels
        }

    def candidates(self, fid, expo):
        out = []
        tau = self.run.tau
        for a in range(4):
            ga = expo[a]
            if ga not in self.east:
                continue
            for b in range(4):
                if b == a:
                    continue
                gb = expo[b]
                if gb not in self.west:
                    continue
                if self.run.str_by_id[ga] + self.run.str_by_id[gb] < tau:
                    continue
                glues = [0, 0, 0, 0]
                glues[a] = _comp(ga)
                glues[b] = _comp(gb)
                name = "%s(%s@%d,%s@%d)" % (
                    self.prefix,
                    self.run.label_names[ga],
                    a,
                    self.run.label_names[gb],
                    b,
                )
                tid = self.run._intern_tile(name, tuple(glues))
                out.append((fid, 0, tid))
        return out


# -- public operations --------------------------------------------------------


def binding_strength(run_or_none, system, surface, assembly, tile_name, placement):
    """Strength a tile would bind with at a placement of an assembly."""
    run = _Run(system, surface)
    run.occ = [None] * len(surface.facets)
    for fid, (o, name) in assembly.tiles.items():
        run.occ[fid] = (o, run.tile_ids[name])
    fid = surface.facet_index[placement.facet]
    if run.occ[fid] is not None:
        raise FacetOccupied("facet %r occupied" % (placement.facet,))
    return run.bind_strength(fid, placement.orientation, run.tile_ids[tile_name])


def run_to_terminal(system: TileSystem, surface: Polycube, rng_seed: int,
                    on_attach=None, max_steps=None):
    """Assemble until no tile can attach, picking frontier moves uniformly.

    Deterministic for a fixed (system, surface, rng_seed); returns the
    terminal assembly whose .events list is the full log.
    """
    run = _Run(system, surface)
    rng = random.Random(rng_seed & 0xFFFFFFFFFFFFFFFF)
    steps = 0
    while run.entries:
        fid, o, tid = run.entries[rng.randrange(len(run.entries))]
        run.attach(fid, o, tid)
        if on_attach is not None:
            on_attach(run, run.assembly.events[-1])
        steps += 1
        if max_steps is not None and steps >= max_steps:
            break
    return run.assembly


def frontier(system: TileSystem, surface: Polycube, assembly: Assembly | None = None):
    """All currently attachable (tile name, placement) pairs."""
    run = _Run(system, surface)
    if assembly is not None:
        for fid, (o, name) in assembly.tiles.items():
            if run.occ[fid] is None:
                run.occ[fid] = (o, run.tile_ids[name])
        for fid in range(len(surface.facets)):
            run._recheck(fid)
    out = []
    for fid, o, tid in run.entries:
        out.append((run.tile_names[tid], PlacementGeom(surface.facets[fid], o)))
    return out


def explore_all_terminals(system: TileSystem, surface: Polycube, state_cap: int):
    """Exact set of terminal assemblies by exhaustive attachment orders.

    Memoizes on the set of placed tiles; raises CapExceeded when the number
    of distinct visited states passes state_cap.
    """
    base = _Run(system, surface)
    start = frozenset(base.assembly.tiles.items())
    seen = {start}
    stack = [start]
    terminals = []
    while stack:
        state = stack.pop()
        run = _Run(system, surface)
        seeded = set(run.assembly.tiles)
        for fid, (o, name) in sorted(state):
            if fid not in seeded:
                run.attach(fid, o, run.tile_ids[name], record=False)
        moves = list(run.entries)
        if not moves:
            terminals.append(dict(state))
            continue
        for fid, o, tid in moves:
            nxt = dict(state)
            nxt[fid] = (o, run.tile_names[tid])
            key = frozenset(nxt.items())
            if key in seen:
                continue
            seen.add(key)
            if len(seen) > state_cap:
                raise CapExceeded("visited more than %d states" % state_cap)
            stack.append(key)
    uniq = {}
    for t in terminals:
        uniq[frozenset(t.items())] = t
    return list(uniq.values())


# -- planar embedding ---------------------------------------------------------


class RectEmbedding:
    """Map from planar integer cells to surface facets with frame transport.

    Built from an anchor facet plus the canonical side that plays planar
    north; extended cell by cell so that planar edges map to surface edges.
    """

    def __init__(self, surface: Polycube, anchor_cell, anchor_fid, north_side):
        self.surface = surface
        self.cells = {tuple(anchor_cell): (anchor_fid, north_side % 4)}

    @classmethod
    def grow(cls, surface, cells, anchor_cell, anchor_facet: Facet, north_side=0):
        """Cover all given planar cells from the anchor, breadth-first."""
        emb = cls(surface, anchor_cell, surface.facet_index[anchor_facet], north_side)
        todo = set(map(tuple, cells))
        todo.discard(tuple(anchor_cell))
        frontier_cells = [tuple(anchor_cell)]
        used = {emb.cells[tuple(anchor_cell)][0]}
        while frontier_cells:
            nxt = []
            for cell in frontier_cells:
                fid, north = emb.cells[cell]
                for d, (dx, dy) in enumerate(((0, 1), (1, 0), (0, -1), (-1, 0))):
                    tgt = (cell[0] + dx, cell[1] + dy)
                    side = (north + d) % 4
                    gi, gk = surface.neighbor(fid, side)
                    gnorth = (gk - ((d + 2) % 4)) % 4
                    if tgt in emb.cells:
                        if emb.cells[tgt] != (gi, gnorth):
                            raise NotIsomorphic(
                                "embedding is inconsistent at planar cell %r" % (tgt,)
                            )
                        continue
                    if tgt in todo:
                        if gi in used:
                            raise NotIsomorphic("embedding folds onto itself")
                        emb.cells[tgt] = (gi, gnorth)
                        used.add(gi)
                        todo.discard(tgt)
                        nxt.append(tgt)
            frontier_cells = nxt
        if todo:
            raise NotIsomorphic("embedding does not cover %d cells" % len(todo))
        return emb

    def map_placement(self, cell, orientation):
        if tuple(cell) not in self.cells:
            raise NotIsomorphic("planar cell %r missing from embedding" % (cell,))
        fid, north = self.cells[tuple(cell)]
        f = self.surface.facets[fid]
        return PlacementGeom(f, (north + orientation) % 4)


def embed_planar(assembly: Assembly, planar_of_fid, surface: Polycube,
                 embedding: RectEmbedding, system: TileSystem) -> Assembly:
    """Transport a planar assembly through a rectangle embedding.

    planar_of_fid maps source facet ids to planar cells.  The image carries
    the same tiles with orientations re-anchored to the embedded frames.
    """
    out = Assembly(surface)
    for fid, (o, name) in assembly.tiles.items():
        cell = planar_of_fid(fid)
        if cell is None:
            raise NotIsomorphic("assembly tile outside the planar rectangle")
        pl = embedding.map_placement(cell, o)
        gid = surface.facet_index[pl.facet]
        out.tiles[gid] = (pl.orientation, name)
    return out


# -- dumps ---------------------------------------------------------------------

DUMP_HEADER = "#sftam-assembly v1"


def dump_assembly(a: Assembly) -> str:
    lines = [DUMP_HEADER]
    for ev in a.events:
        f = a.surface.facets[ev.fid]
        lines.append(
            "%d %d %d %d %s %d %s %d"
            % (
                ev.step,
                f.cell[0],
                f.cell[1],
                f.cell[2],
                DIR_NAMES[f.direction],
                ev.orientation,
                ev.tile,
                ev.bound_strength,
            )
        )
    return "\n".join(lines) + "\n"


def parse_dump(text: str, surface: Polycube) -> Assembly:
    lines = text.splitlines()
    if not lines or lines[0].strip() != DUMP_HEADER:
        raise EngineError("missing dump header")
    a = Assembly(surface)
    for raw in lines[1:]:
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 8:
            raise EngineError("bad dump line: %r" % raw)
        step, x, y, z = int(parts[0]), int(parts[1]), int(parts[2]), int(parts[3])
        face, orient, name, strength = parts[4], int(parts[5]), parts[6], int(parts[7])
        f = Facet((x, y, z), DIR_INDEX[face])
        fid = surface.facet_index[f]
        a.tiles[fid] = (orient, name)
        a.events.append(AttachmentEvent(step, fid, orient, name, strength))
    return a
