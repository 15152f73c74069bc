"""Exact symbolic algebra of field-linear operators: scalar commutators,
gauge invariance, local-algebra generators for square regions, centers
with edge terms, and brute-force minimality of the plaquette-cross
magnetic operator.

All coefficients are exact rationals; stencil factors 1/(2a) embed
exactly because binary floats are rationals. Commutators of field-linear
operators are always scalars, so centers and gauge invariance reduce to
exact nullspace computations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .grid import GridSpec, VectorField

__all__ = [
    "Site",
    "Label",
    "LinearOperator",
    "Region",
    "GeneratorSet",
    "q_op",
    "p_op",
    "b_operator",
    "constraint_operator",
    "dressing_exponent",
    "commutator_scalar",
    "is_gauge_invariant",
    "gauge_invariant_nullspace",
    "local_generators",
    "center_basis",
    "sector_label",
]

Site = tuple[int, int]
Coord = tuple[Site, str]  # ((i, j), "x" | "y")

_COMPONENTS = ("x", "y")


@dataclass(frozen=True)
class Label:
    """Classification tag for a generator or center element."""

    kind: str  # "P", "B", "CROSS", "EDGE", "CORNER"
    site: Site
    detail: str | None = None

    def __str__(self):
        extra = f",{self.detail}" if self.detail else ""
        return f"{self.kind}({self.site[0]},{self.site[1]}{extra})"


class LinearOperator:
    """Exact linear combination of site-local q/p generators plus a
    scalar. Sparse maps never hold zero entries."""

    __slots__ = ("q_coeffs", "p_coeffs", "scalar")

    def __init__(self, q_coeffs=None, p_coeffs=None, scalar=0):
        self.q_coeffs: dict[Coord, Fraction] = _clean(q_coeffs)
        self.p_coeffs: dict[Coord, Fraction] = _clean(p_coeffs)
        self.scalar = Fraction(scalar)

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(
            _merge(self.q_coeffs, other.q_coeffs, 1),
            _merge(self.p_coeffs, other.p_coeffs, 1),
            self.scalar + other.scalar,
        )

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(
            _merge(self.q_coeffs, other.q_coeffs, -1),
            _merge(self.p_coeffs, other.p_coeffs, -1),
            self.scalar - other.scalar,
        )

    def __mul__(self, factor) -> "LinearOperator":
        f = Fraction(factor)
        return LinearOperator(
            {k: v * f for k, v in self.q_coeffs.items()},
            {k: v * f for k, v in self.p_coeffs.items()},
            self.scalar * f,
        )

    __rmul__ = __mul__

    def __neg__(self) -> "LinearOperator":
        return self * -1

    def is_zero(self) -> bool:
        return not self.q_coeffs and not self.p_coeffs and self.scalar == 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LinearOperator)
            and self.q_coeffs == other.q_coeffs
            and self.p_coeffs == other.p_coeffs
            and self.scalar == other.scalar
        )

    def __hash__(self):
        return hash(
            (frozenset(self.q_coeffs.items()), frozenset(self.p_coeffs.items()), self.scalar)
        )

    def support(self) -> set[Site]:
        return {site for (site, _) in self.q_coeffs} | {
            site for (site, _) in self.p_coeffs
        }

    def bounding_box(self) -> tuple[Site, Site] | None:
        sites = self.support()
        if not sites:
            return None
        rows = [s[0] for s in sites]
        cols = [s[1] for s in sites]
        return (min(rows), min(cols)), (max(rows), max(cols))

    def evaluate(self, q_field: VectorField | None = None,
                 p_field: VectorField | None = None) -> float:
        """Apply the operator as a linear functional on classical fields."""
        total = float(self.scalar)
        for (site, comp), coeff in self.q_coeffs.items():
            if q_field is None:
                raise ValueError("operator has q terms but no q field given")
            total += float(coeff) * float(q_field.component(comp).values[site])
        for (site, comp), coeff in self.p_coeffs.items():
            if p_field is None:
                raise ValueError("operator has p terms but no p field given")
            total += float(coeff) * float(p_field.component(comp).values[site])
        return total

    def __str__(self):
        terms = []
        for kind, coeffs in (("q", self.q_coeffs), ("p", self.p_coeffs)):
            for (site, comp), coeff in sorted(coeffs.items()):
                terms.append(f"({coeff})*{kind}_{comp}[{site[0]},{site[1]}]")
        if self.scalar != 0 or not terms:
            terms.append(f"({self.scalar})")
        return " + ".join(terms)

    __repr__ = __str__


def _clean(coeffs) -> dict:
    if not coeffs:
        return {}
    return {k: Fraction(v) for k, v in coeffs.items() if Fraction(v) != 0}


def _merge(a: dict, b: dict, sign: int) -> dict:
    out = dict(a)
    for k, v in b.items():
        new = out.get(k, Fraction(0)) + sign * v
        if new == 0:
            out.pop(k, None)
        else:
            out[k] = new
    return out


def q_op(site: Site, comp: str) -> LinearOperator:
    return LinearOperator(q_coeffs={(tuple(site), comp): Fraction(1)})


def p_op(site: Site, comp: str) -> LinearOperator:
    return LinearOperator(p_coeffs={(tuple(site), comp): Fraction(1)})


def _half_inv_a(grid: GridSpec) -> Fraction:
    # exact: every binary float is a rational
    return Fraction(1, 2) / Fraction(grid.spacing)

def b_operator(grid: GridSpec, site: Site) -> LinearOperator:
    """Magnetic plaquette cross at ``site``:
    ``(q_y[i,j+1] - q_y[i,j-1] - q_x[i+1,j] + q_x[i-1,j]) / 2a``."""
    i, j = site
    h = _half_inv_a(grid)
    w = grid.wrap
    return LinearOperator(
        q_coeffs={
            (w(i, j + 1), "y"): h,
            (w(i, j - 1), "y"): -h,
            (w(i + 1, j), "x"): -h,
            (w(i - 1, j), "x"): h,
        }
    )


def constraint_operator(grid: GridSpec, site: Site) -> LinearOperator:
    """Field part of the Gauss cross at ``site``:
    ``(p_x[i,j+1] - p_x[i,j-1] + p_y[i+1,j] - p_y[i-1,j]) / 2a``."""
    i, j = site
    h = _half_inv_a(grid)
    w = grid.wrap
    return LinearOperator(
        p_coeffs={
            (w(i, j + 1), "x"): h,
            (w(i, j - 1), "x"): -h,
            (w(i + 1, j), "y"): h,
            (w(i - 1, j), "y"): -h,
        }
    )


def dressing_exponent(grid: GridSpec, link_site: Site, displacement: float) -> LinearOperator:
    """Exponent of the single-link dressing unitary
    ``exp(i * displacement * q_x[link] )`` written as ``displacement * q_x``;
    a charge move across the link needs ``displacement = -(+) 2a`` for a
    left (right) move so the commutators with the Gauss crosses cancel
    the move's gauge phase."""
    return Fraction(displacement) * q_op(link_site, "x")


def commutator_scalar(lhs: LinearOperator, rhs: LinearOperator) -> Fraction:
    """Scalar c with [lhs, rhs] = i*hbar*c*identity, i.e.
    ``sum (lhs.q * rhs.p - lhs.p * rhs.q)`` over matched site and
    component."""
    total = Fraction(0)
    # iterate over the smaller map for each pairing
    for key, coeff in lhs.q_coeffs.items():
        other = rhs.p_coeffs.get(key)
        if other is not None:
            total += coeff * other
    for key, coeff in lhs.p_coeffs.items():
        other = rhs.q_coeffs.get(key)
        if other is not None:
            total -= coeff * other
    return total


def is_gauge_invariant(op: LinearOperator, grid: GridSpec) -> bool:
    """True iff the operator commutes with the Gauss cross at every
    lattice site. Only crosses whose stencil touches the operator's
    support can produce a nonzero commutator, so those are the only ones
    evaluated."""
    candidate_sites = set()
    for (site, _comp) in list(op.q_coeffs) + list(op.p_coeffs):
        i, j = site
        for di, dj in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            candidate_sites.add(grid.wrap(i + di, j + dj))
    return all(
        commutator_scalar(op, constraint_operator(grid, site)) == 0
        for site in sorted(candidate_sites)
    )


@dataclass(frozen=True)
class Region:
    """Axis-aligned square block of sites, not wrapping the boundary."""

    origin: Site
    width: int
    height: int

    def __post_init__(self):
        if self.width != self.height:
            raise ValueError("regions are square")
        if self.width < 3:
            raise ValueError("need M >= 3 for a nonempty interior")

    @classmethod
    def square(cls, origin: Site, size: int) -> "Region":
        return cls(tuple(origin), size, size)

    @property
    def size(self) -> int:
        return self.width

    def validate_on(self, grid: GridSpec) -> None:
        i0, j0 = self.origin
        n = grid.n
        if not (0 <= i0 and 0 <= j0 and i0 + self.height <= n and j0 + self.width <= n):
            raise ValueError(f"region {self} does not fit on the {n}x{n} grid")

    def sites(self) -> list[Site]:
        i0, j0 = self.origin
        return [
            (i0 + di, j0 + dj)
            for di in range(self.height)
            for dj in range(self.width)
        ]

    def contains(self, site: Site) -> bool:
        i, j = site
        i0, j0 = self.origin
        return i0 <= i < i0 + self.height and j0 <= j < j0 + self.width

    def stencil_interior_sites(self) -> list[Site]:
        """Sites whose full 4-neighbour stencil stays inside the region."""
        i0, j0 = self.origin
        return [
            (i0 + di, j0 + dj)
            for di in range(1, self.height - 1)
            for dj in range(1, self.width - 1)
        ]

    def boundary_sites(self) -> list[Site]:
        return [s for s in self.sites() if s not in set(self.stencil_interior_sites())]

    def corner_sites(self) -> list[Site]:
        i0, j0 = self.origin
        m = self.width
        return [
            (i0, j0),
            (i0, j0 + m - 1),
            (i0 + m - 1, j0),
            (i0 + m - 1, j0 + m - 1),
        ]


@dataclass
class GeneratorSet:
    """Parallel lists of operators and their labels; construction checks
    exact linear independence."""

    generators: list[LinearOperator]
    labels: list[Label] = field(default_factory=list)

    def __post_init__(self):
        if self.labels and len(self.labels) != len(self.generators):
            raise ValueError("labels must parallel generators")
        # singleton unit operators on distinct coordinates (the plain p
        # and q generators) are independent by inspection; eliminate only
        # the rest, unless some composite touches a singleton coordinate
        singleton_coords = set()
        rest = []
        for g in self.generators:
            entries = [("q", k) for k in g.q_coeffs] + [("p", k) for k in g.p_coeffs]
            if g.scalar == 0 and len(entries) == 1:
                if entries[0] in singleton_coords:
                    raise ValueError("generators are linearly dependent")
                singleton_coords.add(entries[0])
            else:
                rest.append(g)
        overlap = any(
            ("q", k) in singleton_coords for g in rest for k in g.q_coeffs
        ) or any(("p", k) in singleton_coords for g in rest for k in g.p_coeffs)
        if overlap:
            rest = list(self.generators)
        coords = _coordinate_index(rest)
        rows = [_operator_row(g, coords) for g in rest]
        if _rank(rows) != len(rest):
            raise ValueError("generators are linearly dependent")

    def __len__(self):
        return len(self.generators)


# ---------------------------------------------------------------------------
# exact linear algebra over Fractions

def _coordinate_index(ops) -> dict[tuple[str, Coord], int]:
    coords = sorted(
        {("q", c) for op in ops for c in op.q_coeffs}
        | {("p", c) for op in ops for c in op.p_coeffs}
    )
    return {c: i for i, c in enumerate(coords)}


def _operator_row(op: LinearOperator, coords) -> list[Fraction]:
    row = [Fraction(0)] * len(coords)
    for c, v in op.q_coeffs.items():
        row[coords[("q", c)]] = v
    for c, v in op.p_coeffs.items():
        row[coords[("p", c)]] = v
    return row


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """In-place reduced row echelon form; returns (rows, pivot columns)."""
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((k for k in range(r, len(rows)) if rows[k][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c]
        rows[r] = [x / inv for x in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][c] != 0:
                f = rows[k][c]
                rows[k] = [x - f * y for x, y in zip(rows[k], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _rank(rows) -> int:
    reduced, _ = _rref([list(r) for r in rows])
    return len(reduced)


def _reduce_against(row, reduced_rows, pivots):
    """Residue of ``row`` after elimination against rows already in
    reduced echelon form (parallel ``pivots`` list of their columns)."""
    out = list(row)
    for r, pc in zip(reduced_rows, pivots):
        factor = out[pc]
        if factor != 0:
            out = [x - factor * y for x, y in zip(out, r)]
    return out


class _IncrementalRref:
    """Grow a reduced echelon basis one row at a time."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: list[list[Fraction]] = []
        self.pivots: list[int] = []

    def try_insert(self, row) -> bool:
        """Insert if independent of the current span; returns whether the
        rank grew."""
        residue = _reduce_against(row, self.rows, self.pivots)
        pivot_col = next((c for c, x in enumerate(residue) if x != 0), None)
        if pivot_col is None:
            return False
        inv = residue[pivot_col]
        residue = [x / inv for x in residue]
        for k in range(len(self.rows)):
            f = self.rows[k][pivot_col]
            if f != 0:
                self.rows[k] = [x - f * y for x, y in zip(self.rows[k], residue)]
        self.rows.append(residue)
        self.pivots.append(pivot_col)
        return True

    def contains(self, row) -> bool:
        return all(x == 0 for x in _reduce_against(row, self.rows, self.pivots))


def _nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : rows @ x = 0} in reduced echelon form with a
    deterministic pivot order (one basis vector per free column)."""
    reduced, pivots = _rref([list(r) for r in rows])
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -reduced[r][fc]
        basis.append(vec)
    return basis


# ---------------------------------------------------------------------------
# nullspace of the pure-q gauge-invariance conditions

def _support_sites(support) -> list[Site]:
    if isinstance(support, Region):
        return support.sites()
    return sorted(tuple(s) for s in support)


def gauge_invariant_nullspace(support, grid: GridSpec) -> list[LinearOperator]:
    """All pure-q linear combinations supported on ``support`` that
    commute with every Gauss cross, as an exact rational basis in
    reduced echelon form.

    ``support`` is a Region or any iterable of sites; the brute-force
    construction repeats the minimality argument for the magnetic cross:
    on a tight cross-shaped support the result is one-dimensional and
    proportional to it.
    """
    sites = _support_sites(support)
    if isinstance(support, Region):
        support.validate_on(grid)
    coords: list[Coord] = [(s, c) for s in sites for c in _COMPONENTS]
    index = {c: i for i, c in enumerate(coords)}
    # conditions: [f(q), cross(n, m)] = 0; only crosses touching the
    # support produce nonzero rows
    cross_sites = set()
    for (i, j) in sites:
        for di, dj in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            cross_sites.add(grid.wrap(i + di, j + dj))
    rows = []
    for cs in sorted(cross_sites):
        cross = constraint_operator(grid, cs)
        row = [Fraction(0)] * len(coords)
        nonzero = False
        for key, coeff in cross.p_coeffs.items():
            col = index.get(key)
            if col is not None:
                row[col] = coeff
                nonzero = True
        if nonzero:
            rows.append(row)
    basis = _nullspace(rows, len(coords))
    ops = []
    for vec in basis:
        ops.append(
            LinearOperator(
                q_coeffs={coords[i]: v for i, v in enumerate(vec) if v != 0}
            )
        )
    return ops


# ---------------------------------------------------------------------------
# local algebras and centers

def local_generators(region: Region, grid: GridSpec) -> GeneratorSet:
    """Generators of the region's gauge-invariant algebra: every p
    component at sites in the region plus every magnetic cross whose
    full 4-site stencil lies inside. Ordering is deterministic: p before
    b, row-major by site, x before y."""
    region.validate_on(grid)
    gens: list[LinearOperator] = []
    labels: list[Label] = []
    for site in region.sites():
        for comp in _COMPONENTS:
            gens.append(p_op(site, comp))
            labels.append(Label("P", site, comp))
    for site in region.stencil_interior_sites():
        gens.append(b_operator(grid, site))
        labels.append(Label("B", site))
    return GeneratorSet(gens, labels)


def _truncate_to_region(op: LinearOperator, region: Region) -> LinearOperator:
    return LinearOperator(
        q_coeffs={k: v for k, v in op.q_coeffs.items() if region.contains(k[0])},
        p_coeffs={k: v for k, v in op.p_coeffs.items() if region.contains(k[0])},
    )


def _center_catalog(region: Region, grid: GridSpec) -> list[tuple[LinearOperator, Label]]:
    """Candidate center elements in deterministic preference order:
    interior Gauss crosses, boundary-truncated crosses, boundary-normal
    single p components, then corner p pairs (reported per component)."""
    out: list[tuple[LinearOperator, Label]] = []
    interior = region.stencil_interior_sites()
    for site in interior:
        out.append((constraint_operator(grid, site), Label("CROSS", site)))
    corner_set = set(region.corner_sites())
    for site in region.boundary_sites():
        truncated = _truncate_to_region(constraint_operator(grid, site), region)
        if not truncated.is_zero():
            out.append((truncated, Label("EDGE", site, "cross")))
    i0, j0 = region.origin
    m = region.size
    for site in region.boundary_sites():
        if site in corner_set:
            continue
        i, j = site
        if j == j0 or j == j0 + m - 1:  # vertical border: normal is x
            out.append((p_op(site, "x"), Label("EDGE", site, "normal-px")))
        if i == i0 or i == i0 + m - 1:  # horizontal border: normal is y
            out.append((p_op(site, "y"), Label("EDGE", site, "normal-py")))
    for site in region.corner_sites():
        for comp in _COMPONENTS:
            out.append((p_op(site, comp), Label("CORNER", site, comp)))
    return out


def _center_nullspace(region: Region, grid: GridSpec):
    """Exact nullspace of the commutation pairing inside the span of the
    region's generators; returns (dimension, reduced rows, their pivot
    columns, coordinate index, generators)."""
    gens = local_generators(region, grid)
    n = len(gens.generators)
    comm = [
        [commutator_scalar(gi, gk) for gk in gens.generators]
        for gi in gens.generators
    ]
    null = _nullspace(comm, n)
    # Members must be pure p: any b admixture would fail to commute with
    # some p generator because the b rows of the pairing are independent.
    coords = _coordinate_index(gens.generators)
    rows = []
    for vec in null:
        acc = LinearOperator()
        for coeff, g in zip(vec, gens.generators):
            if coeff != 0:
                acc = acc + coeff * g
        if acc.q_coeffs:
            raise AssertionError("center element acquired a q part")
        rows.append(_operator_row(acc, coords))
    reduced, pivots = _rref(rows)
    return len(reduced), reduced, pivots, coords, gens


_NULLSPACE_CACHE: dict = {}


def _center_nullspace_cached(region: Region, grid: GridSpec):
    key = (region, grid)
    if key not in _NULLSPACE_CACHE:
        _NULLSPACE_CACHE[key] = _center_nullspace(region, grid)
    return _NULLSPACE_CACHE[key]


def center_basis(region: Region, grid: GridSpec) -> GeneratorSet:
    """Exact basis of the center of the local algebra, labeled against
    the catalog of interior crosses and edge terms.

    The dimension comes from the exact nullspace of the commutation
    pairing; the returned basis is the deterministic greedy selection of
    catalog elements spanning that nullspace, each re-verified to
    commute with every generator.
    """
    dim, _null_rows, _pivots, coords, gens = _center_nullspace_cached(region, grid)

    selected_ops: list[LinearOperator] = []
    selected_labels: list[Label] = []
    span = _IncrementalRref(len(coords))
    for op, label in _center_catalog(region, grid):
        if len(selected_ops) == dim:
            break
        if any(commutator_scalar(op, g) != 0 for g in gens.generators):
            raise AssertionError(f"catalog element {label} is not central")
        if span.try_insert(_operator_row(op, coords)):
            selected_ops.append(op)
            selected_labels.append(label)
    if len(selected_ops) != dim:
        raise AssertionError(
            f"catalog spans {len(selected_ops)} of {dim} center dimensions"
        )
    # ... and every catalog pick must already lie in the exact nullspace,
    # so equal dimension means equal span
    if not all(in_center_span(op, region, grid) for op in selected_ops):
        raise AssertionError("catalog span differs from the exact center")
    return GeneratorSet(selected_ops, selected_labels)


def center_dimension(region: Region, grid: GridSpec) -> int:
    """Dimension of the center from the exact pairing nullspace alone."""
    return _center_nullspace_cached(region, grid)[0]


def in_center_span(op: LinearOperator, region: Region, grid: GridSpec) -> bool:
    """Exact membership test of ``op`` in the computed center."""
    _dim, null_rows, pivots, coords, _gens = _center_nullspace_cached(region, grid)
    if op.scalar != 0:
        return False
    for kind, coeffs in (("q", op.q_coeffs), ("p", op.p_coeffs)):
        if any((kind, key) not in coords for key in coeffs):
            return False
    row = _operator_row(op, coords)
    return all(x == 0 for x in _reduce_against(row, null_rows, pivots))


def sector_label(
    p_field: VectorField, region: Region, rho, grid: GridSpec | None = None
) -> list[float]:
    """Evaluate every center basis element on a classical momentum
    configuration, in center_basis order: the classical shadow of the
    superselection labels. The charge density identifies the sector the
    configuration is meant to inhabit (interior cross labels then read
    -rho at their centers) but does not enter the evaluation itself."""
    grid = grid or p_field.grid
    if rho is not None and rho.grid != p_field.grid:
        raise ValueError("rho must share the p field's grid")
    basis = center_basis(region, grid)
    return [op.evaluate(p_field=p_field) for op in basis.generators]
