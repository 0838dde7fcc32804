"""Tile programs on rectangle hosts: the two binary counters, the row
copier, and the middle-finding pipeline that chains them.

All four run on one face of a 1-cell-thick slab so the same engine serves
planar and folded runs.  Planar coordinates (x, y) map to facets
(ox + x, oy + y, 0, +z); tile tuples are written (N, E, S, W) for
orientation 0 on that face.  Glue poles follow one rule: a side that feeds
a neighbor carries "+", a side that reads one carries "-".
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import EPS, TileSystem
from .geometry import DIR_INDEX, Cuboid0, Cuboid1Spec, Facet, PlacementGeom, Polycube, build_polycube


def bits_of(n: int) -> int:
    return max(1, n.bit_length())


def bit_list(n: int, width: int | None = None):
    w = width or bits_of(n)
    return [(n >> (w - 1 - i)) & 1 for i in range(w)]


@dataclass
class CounterInstance:
    variant: str
    params: dict
    system: TileSystem
    host: Polycube
    origin: tuple[int, int]  # planar (0,0) in slab cell coordinates
    notes: dict = field(default_factory=dict)

    def facet(self, x, y):
        return Facet((self.origin[0] + x, self.origin[1] + y, 0), DIR_INDEX["+z"])

    def cell_of_facet(self, facet: Facet):
        return (facet.cell[0] - self.origin[0], facet.cell[1] - self.origin[1])

    def place(self, x, y, name, orientation=0):
        self.system.place_seed(PlacementGeom(self.facet(x, y), orientation), name)


@dataclass
class ExtractedResult:
    variant: str
    values: dict


def _slab_host(xmin, xmax, ymin, ymax):
    """1-thick slab whose +z face covers the planar window, origin shifted."""
    dx = xmax - xmin + 1
    dy = ymax - ymin + 1
    host = build_polycube(Cuboid1Spec(Cuboid0((0, 0, 0), (dx, dy, 1))))
    return host, (-xmin, -ymin)


def _blocker(sys: TileSystem, ns=""):
    name = ns + "blk"
    if name not in sys.tiles:
        sys.add_tile(name, (EPS, EPS, EPS, EPS), seed_only=True)
    return name


# -- increasing binary counter -------------------------------------------------


def ibc_tiles(sys: TileSystem, ns="", su_label=None, org=False,
              include_support=True, reflect=False):
    """The increment tile set.  Row r carries r in binary; the leftmost tile
    of each power-of-two row is the fresh most-significant-bit tile t_O.

    su_label replaces the eps west glue of t_S (used to support a second,
    descending counter); org=True gives t_O the extra south/west outputs
    that hang marker columns below new most-significant bits.  With
    include_support=False the seed tile and support column are left to the
    caller (a shared support chain feeds the rows instead).
    """
    L = lambda n: ns + n
    for name, s in (("0", 1), ("1", 1), ("1s", 1), ("pp", 2), ("over", 2)):
        sys.add_label(L(name), s)
    t_s_w = EPS
    if su_label is not None:
        t_s_w = su_label + "+"
    t_o_s = t_o_w = EPS
    if org:
        sys.add_label(L("org"), 1)
        t_o_s = L("org") + "+"
        t_o_w = L("org") + "+"
    T = {
        "t_0+0": (L("0") + "+", L("0") + "-", L("0") + "-", L("0") + "+"),
        "t_0+1": (L("1") + "+", L("0") + "-", L("1") + "-", L("0") + "+"),
        "t_1+0": (L("1") + "+", L("1") + "-", L("0") + "-", L("0") + "+"),
        "t_1+1": (L("0") + "+", L("1") + "-", L("1") + "-", L("1") + "+"),
        "t_S": (L("1s") + "+", L("0") + "-", L("1s") + "-", t_s_w),
        "t_OS": (L("0") + "+", L("1") + "-", L("1s") + "-", L("over") + "+"),
        "t_O": (L("1s") + "+", L("over") + "-", t_o_s, t_o_w),
    }
    if include_support:
        T["sigma+"] = (L("pp") + "+", EPS, EPS, L("over") + "+")
        T["t++"] = (L("pp") + "+", EPS, L("pp") + "-", L("1") + "+")
    for name, glues in T.items():
        sys.add_tile(ns + name, _maybe_reflect(glues, reflect),
                     seed_only=(name == "sigma+"))
    return {k: ns + k for k in T}


def build_ibc(support_height: int) -> CounterInstance:
    """Seed column of the given height; terminal rows 1..h count 1..h."""
    if support_height < 1:
        raise ValueError("support_height must be >= 1")
    h = support_height
    w = bits_of(h)
    host, origin = _slab_host(-w, 0, 0, h)
    sys = TileSystem(tau=2)
    names = ibc_tiles(sys)
    inst = CounterInstance("IBC", {"support": h}, sys, host, origin)
    _blocker(sys)
    inst.place(0, 0, names["sigma+"])
    inst.place(0, h, "blk")
    return inst


def extract_ibc(assembly, inst: CounterInstance) -> ExtractedResult:
    h = inst.params["support"]
    grid = _grid(assembly, inst)
    rows = {}
    over_rows = set()
    for r in range(1, h + 1):
        y = r - 1
        bits = []
        x = -1
        while (x, y) in grid:
            bits.append(grid[(x, y)])
            x -= 1
        if not bits:
            raise MalformedAssembly("row %d is empty" % r)
        value = 0
        leftmost = bits[-1]
        for name in reversed(bits):
            value = (value << 1) | _bit_of_ibc(name)
        rows[r] = value
        if leftmost.endswith("t_O") and r >= 2:
            over_rows.add(r)
    return ExtractedResult("IBC", {"rows": rows, "top": rows[h], "over_rows": over_rows})


class MalformedAssembly(ValueError):
    pass


def _bit_of_ibc(name):
    tail = name.rsplit(".", 1)[-1]
    if tail in ("t_0+0",):
        return 0
    if tail in ("t_1+1",):
        return 0
    if tail in ("t_0+1", "t_1+0"):
        return 1
    if tail in ("t_S", "t_O"):
        return 1
    if tail in ("t_OS",):
        return 0
    raise MalformedAssembly("unexpected tile %r in a counter row" % name)


def _grid(assembly, inst):
    grid = {}
    for fid, (o, name) in assembly.tiles.items():
        f = assembly.surface.facets[fid]
        grid[inst.cell_of_facet(f)] = name
    return grid


# -- decreasing binary counter -------------------------------------------------


def dbc_rule_tiles(sys: TileSystem, ns="", seed_bits=None, marker_west=EPS,
                   marker_name="t_1-0*", reflect=False):
    """Decrement rules; the marker appears once, where 0 wraps to -1.

    The marker's north glue is the plain bit so the starred column ends
    there; the other starred names follow the source material's (permuted)
    naming, see the tile catalog notes.  seed_bits=(b0, b1, bm) adds
    first-row variants that read an external row tile number whose bits
    carry those labels; marker_west rewires the marker's fourth glue.
    """
    L = lambda n: ns + n
    for name, s in (("0", 1), ("1", 1), ("0'", 1), ("1'", 1)):
        sys.add_label(L(name), s)
    P = lambda n: L(n) + "+"
    M = lambda n: L(n) + "-"
    T = {
        "t_0-0": (P("0"), M("0"), M("0"), P("0")),
        "t_0-1": (P("1"), M("1"), M("0"), P("1")),
        "t_1-0": (P("1"), M("0"), M("1"), P("0")),
        "t_1-1": (P("0"), M("1"), M("1"), P("0")),
        "t_0-0*": (P("0'"), M("0"), M("0'"), EPS),
        "t_1-1*": (P("0'"), M("1"), M("1'"), EPS),
        "t_0-1*": (P("1'"), M("0"), M("1'"), EPS),
        marker_name: (P("1"), M("1"), M("0'"), marker_west),
    }
    if seed_bits is not None:
        b0, b1, bm = seed_bits
        T["t_0-0@s"] = (P("0"), M("0"), b0 + "-", P("0"))
        T["t_0-1@s"] = (P("1"), M("1"), b0 + "-", P("1"))
        T["t_1-0@s"] = (P("1"), M("0"), b1 + "-", P("0"))
        T["t_1-1@s"] = (P("0"), M("1"), b1 + "-", P("0"))
        T["t_0-1*@s"] = (P("1'"), M("0"), bm + "-", EPS)
        T["t_1-1*@s"] = (P("0'"), M("1"), bm + "-", EPS)
    for name, glues in T.items():
        sys.add_tile(ns + name, _maybe_reflect(glues, reflect))
    return {k: ns + k for k in T}


def _maybe_reflect(glues, reflect):
    if not reflect:
        return glues
    n, e, s, w = glues
    return (s, e, n, w)


def dbc_tiles(sys: TileSystem, ns=""):
    """Standalone decreasing counter: seed row number, east anchor, support."""
    L = lambda n: ns + n
    for name, s in (("mm", 2), ("num", 1)):
        sys.add_label(L(name), s)
    P = lambda n: L(n) + "+"
    M = lambda n: L(n) + "-"
    names = dbc_rule_tiles(sys, ns)
    T = {
        "sigma-": (P("mm"), EPS, EPS, P("num")),
        "t--": (P("mm"), EPS, M("mm"), P("1")),
        "num_0": (P("0"), M("num"), EPS, P("num")),
        "num_1": (P("1"), M("num"), EPS, P("num")),
        "num_1*": (P("1'"), M("num"), EPS, EPS),
    }
    seed_only = {"sigma-", "num_0", "num_1", "num_1*"}
    for name, glues in T.items():
        sys.add_tile(ns + name, glues, seed_only=(name in seed_only))
    names.update({k: ns + k for k in T})
    return names


class SupportTooShort(ValueError):
    pass


def build_dbc(n: int, support_len: int) -> CounterInstance:
    if n < 1:
        raise ValueError("n must be >= 1")
    if support_len < n:
        raise SupportTooShort("support %d < n %d" % (support_len, n))
    w = bits_of(n)
    host, origin = _slab_host(-w, 0, 0, support_len + 1)
    sys = TileSystem(tau=2)
    names = dbc_tiles(sys)
    inst = CounterInstance("DBC", {"n": n, "support": support_len}, sys, host, origin)
    _blocker(sys)
    inst.place(0, 0, names["sigma-"])
    for i, b in enumerate(bit_list(n)):
        x = -(w - i)
        inst.place(x, 0, names["num_1*"] if i == 0 else names["num_%d" % b])
    inst.place(0, support_len + 1, "blk")
    return inst


def extract_dbc(assembly, inst: CounterInstance) -> ExtractedResult:
    grid = _grid(assembly, inst)
    n, support = inst.params["n"], inst.params["support"]
    w = bits_of(n)
    marker_rows = [
        y for (x, y), name in grid.items() if name.endswith("t_1-0*")
    ]
    rows = {}
    for r in range(1, support + 1):
        bits = []
        for x in range(-w, 0):
            name = grid.get((x, r))
            if name is None:
                continue
            bits.append(_bit_of_dbc(name))
        if len(bits) != w:
            raise MalformedAssembly("row %d has %d of %d bits" % (r, len(bits), w))
        rows[r] = int("".join(map(str, bits)), 2)
    return ExtractedResult(
        "DBC", {"rows": rows, "marker_rows": sorted(marker_rows), "width": w}
    )


def _bit_of_dbc(name):
    tail = name.rsplit(".", 1)[-1]
    return {
        "t_0-0": 0, "t_0-1": 1, "t_1-0": 1, "t_1-1": 0,
        "t_0-0*": 0, "t_1-1*": 0, "t_0-1*": 1, "t_1-0*": 1,
        "num_0": 0, "num_1": 1, "num_1*": 1,
    }[tail]


# -- U-turn row copier ----------------------------------------------------------


def uturn_tiles(sys: TileSystem, ns="", v0="0", v1="1", vm="1m", vms="1ms",
                reflect=False):
    """Row copier: each bit runs south, west, and back north so the whole
    number lands immediately left of its own most significant tile.

    The marked most-significant path has its own tile types throughout so
    the copy is again a row tile number.  The bit alphabet can be remapped
    so the output row feeds another system directly.
    """
    L = lambda n: ns + n
    P = lambda n: L(n) + "+"
    M = lambda n: L(n) + "-"
    for name, s in (
        (v0, 1), (v1, 1), (vm, 1), (vms, 1),
        ("0h", 2), ("1h", 2), ("1hm", 2),
        ("a", 1), ("b", 1), ("bh", 2), ("c", 1), ("d", 1),
    ):
        sys.add_label(L(name), s)
    vv = {0: v0, 1: v1}
    T = {
        "sigma_u": (EPS, EPS, P("bh"), P("c")),
        "t_u": (M("bh"), EPS, P("bh"), P("b")),
        "t_b": (M("b"), M("b"), P("b"), P("b")),
    }
    for v in (0, 1):
        T["useed_%d" % v] = (P(vv[v]), M("c"), P(vv[v]), P("c"))
        T["t_up%d" % v] = (P(vv[v]), M("c"), M(vv[v]), P("c"))
        T["t_dr%d" % v] = (M(vv[v]), M("b"), P("b"), P(vv[v]))
        T["t_c%d" % v] = (P(vv[v]), M("%dh" % v), P("d"), P("c"))
        T["t_o%d" % v] = (M("d"), M(vv[v]), P("a"), P("%dh" % v))
        T["t_a%d" % v] = (M("a"), M(vv[v]), P("a"), P(vv[v]))
        T["t_mc%d" % v] = (M(vms), M(vv[v]), P(vm), P("%dh" % v))
        T["t_mi%d" % v] = (M(vm), M(vv[v]), P(vm), P(vv[v]))
        for u in (0, 1):
            T["t_x%d%d" % (v, u)] = (M(vv[v]), M(vv[u]), P(vv[v]), P(vv[u]))
    T["useed_1m"] = (P(vms), M("c"), P(vms), P("c"))
    T["t_up1m"] = (P(vms), M("c"), M(vms), P("c"))
    T["t_dr1s"] = (M(vms), M("b"), P("b"), P("1hm"))  # single-bit input
    T["t_dr1m"] = (M(vm), M("b"), P("b"), P(vm))
    T["t_o1m"] = (M("d"), M(vm), P("a"), P("1hm"))
    T["t_am"] = (M("a"), M(vm), P("a"), P(vm))
    T["t_c1m"] = (P(vms), M("1hm"), P("d"), P("c"))
    seed_only = {"sigma_u", "useed_0", "useed_1", "useed_1m"}
    for name, glues in T.items():
        sys.add_tile(ns + name, _maybe_reflect(glues, reflect),
                     seed_only=(name in seed_only))
    return {k: ns + k for k in T}


def build_uturn(n: int) -> CounterInstance:
    if n < 1:
        raise ValueError("n must be >= 1")
    w = bits_of(n)
    m = w  # support tiles needed
    top = m + 1
    host, origin = _slab_host(-2 * w, 0, 0, top)
    sys = TileSystem(tau=2)
    names = uturn_tiles(sys)
    inst = CounterInstance("UTurn", {"n": n, "width": w}, sys, host, origin)
    _blocker(sys)
    inst.place(0, top, names["sigma_u"])
    for i, b in enumerate(bit_list(n)):
        x = -(w - i)
        inst.place(x, top, names["useed_1m"] if i == 0 else names["useed_%d" % b])
    inst.place(0, 0, "blk")
    inst.notes["seed_row_y"] = top
    return inst


def extract_uturn(assembly, inst: CounterInstance) -> ExtractedResult:
    grid = _grid(assembly, inst)
    w = inst.params["width"]
    y = inst.notes["seed_row_y"]
    bits = []
    for x in range(-2 * w, -w):
        name = grid.get((x, y))
        if name is None:
            raise MalformedAssembly("copy row misses cell %d" % x)
        bits.append(_bit_of_uturn(name))
    value = int("".join(map(str, bits)), 2)
    msb_name = grid[(-2 * w, y)]
    return ExtractedResult(
        "UTurn",
        {
            "copy": value,
            "copy_msb_x": -2 * w,
            "copy_lsb_x": -w - 1,
            "msb_marked": msb_name.endswith("t_up1m"),
        },
    )


def _bit_of_uturn(name):
    tail = name.rsplit(".", 1)[-1]
    if tail in ("t_up0", "useed_0"):
        return 0
    if tail in ("t_up1", "useed_1", "t_up1m", "useed_1m"):
        return 1
    raise MalformedAssembly("unexpected tile %r in copy row" % name)


# -- middle finding system -------------------------------------------------------


class WidthTooSmall(ValueError):
    pass


def ceil_log2(n: int) -> int:
    return max(1, (n - 1).bit_length())


def mfs_tiles(sys: TileSystem, ns="", finish_label="mf.fin", tm_west=EPS,
              tm0_west=EPS, include_support=True, reflect=False):
    """The six-stage middle finder as one tile set.

    Stage map: support column to the finish wall; first counter up; second
    counter back down along the first one's leading-bit column, leaving the
    excess k; a copy chain that drags k down to the halfway row while its
    marked column offers the later decrement support; the drop/relay step
    that discards k's lowest bit; a row copier shifting k/2 clear of the
    block; and a final decrement climb whose wrap marker is t_m.  A height
    that is an exact power of two leaves no excess: a probe column then
    rides the marker chain down and plants t_m0 at the halfway row instead.
    """
    R = reflect
    i1, i2, cp = ns + "i1.", ns + "i2.", ns + "cp."
    ut, db, mf = ns + "ut.", ns + "db.", ns + "mf."
    names = {}

    for label, s in ((i2 + "0", 1), (i2 + "1", 1), (i2 + "ov2", 2), (i2 + "ov2v", 2)):
        sys.add_label(label, s)
    names.update(ibc_tiles(sys, i1, su_label=i2 + "1", org=True,
                           include_support=include_support, reflect=R))
    org = i1 + "org"
    for label, s in (
        (cp + "0", 1), (cp + "1", 1), (cp + "1s", 1), (cp + "c", 1),
        (cp + "sup", 1), (cp + "half", 1), (cp + "bu", 1),
        (mf + "rl", 1), (mf + "zs", 2), (mf + "m0", 1),
    ):
        sys.add_label(label, s)
    if finish_label not in sys.strengths:
        sys.add_label(finish_label, 1)

    names.update(uturn_tiles(sys, ut, reflect=R))
    names.update(
        dbc_rule_tiles(
            sys, db,
            seed_bits=(ut + "0", ut + "1", ut + "1ms"),
            marker_west=tm_west, marker_name="t_m", reflect=R,
        )
    )

    def put(name, glues, seed_only=False):
        sys.add_tile(ns + name, _maybe_reflect(glues, R), seed_only=seed_only)
        names[name] = ns + name

    fin = finish_label
    # Second counter, descending: reads bits from above, renders them in the
    # copy alphabet so the copy rows can replicate the final (k) row.
    put("i2.sigma2", (fin + "-", i2 + "1-", i2 + "ov2v+", EPS))
    put("i2.t_Ov", (i2 + "ov2v-", EPS, cp + "1s+", EPS))
    put("i2.t_0+0", (cp + "0-", i2 + "0-", cp + "0+", i2 + "0+"))
    put("i2.t_0+1", (cp + "1-", i2 + "0-", cp + "1+", i2 + "0+"))
    put("i2.t_1+0", (cp + "0-", i2 + "1-", cp + "1+", i2 + "0+"))
    put("i2.t_1+1", (cp + "1-", i2 + "1-", cp + "0+", i2 + "1+"))
    put("i2.t_S", (cp + "1s-", i2 + "0-", cp + "1s+", EPS))
    put("i2.t_OS", (cp + "1s-", i2 + "1-", cp + "0+", i2 + "ov2+"))
    put("i2.t_O", (EPS, i2 + "ov2-", cp + "1s+", EPS))
    # The lowest row of the descending counter sits beside a fresh
    # most-significant-bit tile whose west glue is the marker label, so its
    # rightmost cell takes carry-1 from that glue instead.
    put("i2.t_1+0g", (cp + "0-", org + "-", cp + "1+", i2 + "0+"))
    put("i2.t_1+1g", (cp + "1-", org + "-", cp + "0+", i2 + "1+"))
    put("i2.t_OSg", (cp + "1s-", org + "-", cp + "0+", i2 + "ov2+"))

    # Marker columns under fresh most-significant-bit tiles, and the block
    # column where two of them run side by side.
    put("mf.t_v", (org + "-", i2 + "1-", org + "+", cp + "sup+"))
    put("mf.t_v_org", (org + "-", org + "-", org + "+", cp + "half+"))
    put("mf.t_b2", (org + "-", cp + "sup-", org + "+", cp + "bu+"))

    # Copy rows dragging k downward; the marked column feeds the decrement
    # climb from its west side.
    for b in ("0", "1"):
        put("cp.t_cp" + b, (cp + b + "-", cp + "c-", cp + b + "+", cp + "c+"))
        put("cp.t_cpR" + b, (cp + b + "-", cp + "sup-", cp + b + "+", cp + "c+"))
        put("cp.t_cpL" + b, (cp + b + "-", cp + "half-", cp + b + "+", cp + "c+"))
    put("cp.t_cps", (cp + "1s-", cp + "c-", cp + "1s+", db + "1+"))
    put("cp.t_cpRs", (cp + "1s-", cp + "sup-", cp + "1s+", db + "1+"))
    put("cp.t_cpLs", (cp + "1s-", cp + "half-", cp + "1s+", db + "1+"))

    # Drop the lowest bit of k, relay the rest one row down, hand off to the
    # row copier; a single-bit k instead plants a zero-value decrement seed.
    put("mf.t_drop0", (cp + "0-", cp + "bu-", ut + "bh+", mf + "rl+"))
    put("mf.t_drop1", (cp + "1-", cp + "bu-", ut + "bh+", mf + "rl+"))
    put("mf.t_dropS", (cp + "1s-", cp + "bu-", EPS, mf + "zs+"))
    put("mf.z_seed", (db + "0'+", mf + "zs-", EPS, EPS))
    put("mf.t_rl0", (cp + "0-", mf + "rl-", ut + "0+", mf + "rl+"))
    put("mf.t_rl1", (cp + "1-", mf + "rl-", ut + "1+", mf + "rl+"))
    put("mf.t_rls", (cp + "1s-", mf + "rl-", ut + "1ms+", ut + "c+"))

    # Power-of-two probe: rides the marker chain down to the halfway row.
    put("mf.sigma2_0", (fin + "-", org + "-", mf + "m0+", EPS))
    put("mf.t_m0v", (mf + "m0-", cp + "sup-", mf + "m0+", EPS))
    put("mf.t_m0", (mf + "m0-", cp + "half-", EPS, tm0_west))

    names["labels_ibc1"] = [i1 + x for x in ("0", "1", "1s", "over", "org")]
    if include_support:
        names["labels_ibc1"].append(i1 + "pp")
    return names


def build_mfs(height_n: int, width: int | None = None) -> CounterInstance:
    """Bounded rectangle of the given interior height; t_m lands at the
    halfway row with nothing to its left."""
    if height_n < 8:
        raise ValueError("middle finding needs height >= 8")
    n = ceil_log2(height_n)
    min_width = 3 * n
    if width is None:
        width = 3 * n + 2
    if width < min_width:
        raise WidthTooSmall("width %d < 3*ceil(log2 N) = %d" % (width, min_width))
    N = height_n
    host, origin = _slab_host(-(width - 1), 0, 0, N + 1)
    sys = TileSystem(tau=2)
    names = mfs_tiles(sys, ns="", finish_label="mf.fin")
    sys.add_tile("start", (EPS, EPS, EPS, EPS), seed_only=True)
    sys.add_tile("finish", (EPS, EPS, "mf.fin+", EPS), seed_only=True)
    inst = CounterInstance("MFS", {"N": N, "width": width}, sys, host, origin)
    for x in range(-(width - 1), 1):
        inst.place(x, 0, "start")
        inst.place(x, N + 1, "finish")
    inst.place(0, 1, names["sigma+"])
    return inst


def extract_mfs(assembly, inst: CounterInstance) -> ExtractedResult:
    grid = _grid(assembly, inst)
    hits = [
        (x, y)
        for (x, y), name in grid.items()
        if name.endswith("db.t_m") or name.endswith("mf.t_m0")
    ]
    if len(hits) != 1:
        raise MalformedAssembly("expected exactly one t_m, found %d" % len(hits))
    x, y = hits[0]
    return ExtractedResult(
        "MFS",
        {
            "t_m_row": y,
            "t_m_x": x,
            "west_empty": (x - 1, y) not in grid,
            "kind": grid[(x, y)].rsplit(".", 1)[-1],
        },
    )


def extract(assembly, inst: CounterInstance) -> ExtractedResult:
    """Variant dispatch for the four rectangle systems."""
    return {
        "IBC": extract_ibc,
        "DBC": extract_dbc,
        "UTurn": extract_uturn,
        "MFS": extract_mfs,
    }[inst.variant](assembly, inst)
