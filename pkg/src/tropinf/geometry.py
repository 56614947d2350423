"""Exact lattice-polytope geometry for polynomial supports.

Everything here is computed over exact rationals: vertex detection is a small
linear-program feasibility question, solved by a dense two-phase simplex with
Bland's pivoting rule.  No floating point enters any geometric predicate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import INF, Monomial, Poly, mono_leq, mono_mul

Sense = str  # "<=", "=", ">="


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LPProblem:
    """maximize objective . x  subject to the rows, x >= 0, exact rationals."""

    objective: tuple
    rows: tuple  # of (coeffs, sense, rhs)
    maximize: bool = True


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: tuple = ()
    value: Fraction = Fraction(0)


def _pivot(T, basis, r, c):
    piv = T[r][c]
    T[r] = [v / piv for v in T[r]]
    for i, row in enumerate(T):
        if i != r and row[c] != 0:
            f = row[c]
            T[i] = [a - f * b for a, b in zip(row, T[r])]
    basis[r] = c


def _simplex(T, basis, c, blocked):
    """Maximize c.x on the tableau T with Bland's rule.

    `blocked` columns may never (re)enter the basis.  Returns "optimal" or
    "unbounded"; the tableau and basis are updated in place.
    """
    m = len(T)
    ncols = len(T[0]) - 1
    while True:
        cb = [c[b] for b in basis]
        enter = -1
        for j in range(ncols):
            if j in blocked or j in basis:
                continue
            reduced = c[j] - sum(cb[i] * T[i][j] for i in range(m))
            if reduced > 0:
                enter = j
                break  # Bland: smallest improving index
        if enter < 0:
            return "optimal"
        leave = -1
        best = None
        for i in range(m):
            if T[i][enter] > 0:
                ratio = T[i][-1] / T[i][enter]
                if (
                    best is None
                    or ratio < best
                    or (ratio == best and basis[i] < basis[leave])
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(T, basis, leave, enter)


def lp_solve(prob: LPProblem) -> LPResult:
    n = len(prob.objective)
    rows = []
    for coeffs, sense, rhs in prob.rows:
        coeffs = [Fraction(a) for a in coeffs]
        if len(coeffs) != n:
            raise GeometryError("row length does not match objective length")
        rhs = Fraction(rhs)
        if rhs < 0:
            coeffs = [-a for a in coeffs]
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        rows.append((coeffs, sense, rhs))

    m = len(rows)
    n_slack = sum(1 for _, sense, _ in rows if sense != "=")
    n_art = sum(1 for _, sense, _ in rows if sense != "<=")
    ncols = n + n_slack + n_art

    T = []
    basis = []
    slack_at = n
    art_at = n + n_slack
    art_cols = set()
    for coeffs, sense, rhs in rows:
        row = list(coeffs) + [Fraction(0)] * (n_slack + n_art) + [rhs]
        if sense == "<=":
            row[slack_at] = Fraction(1)
            basis.append(slack_at)
            slack_at += 1
        elif sense == ">=":
            row[slack_at] = Fraction(-1)
            slack_at += 1
            row[art_at] = Fraction(1)
            basis.append(art_at)
            art_cols.add(art_at)
            art_at += 1
        else:
            row[art_at] = Fraction(1)
            basis.append(art_at)
            art_cols.add(art_at)
            art_at += 1
        T.append(row)

    zero = Fraction(0)
    if art_cols:
        phase1 = [zero] * ncols
        for j in art_cols:
            phase1[j] = Fraction(-1)
        _simplex(T, basis, phase1, blocked=set())
        value = sum(phase1[b] * T[i][-1] for i, b in enumerate(basis))
        if value < 0:
            return LPResult("infeasible")
        # Pivot any zero-valued artificial out of the basis if possible.
        for i, b in enumerate(basis):
            if b in art_cols:
                for j in range(ncols):
                    if j not in art_cols and T[i][j] != 0:
                        _pivot(T, basis, i, j)
                        break

    sign = 1 if prob.maximize else -1
    c = [sign * Fraction(a) for a in prob.objective] + [zero] * (n_slack + n_art)
    status = _simplex(T, basis, c, blocked=art_cols)
    if status == "unbounded":
        return LPResult("unbounded")
    x = [zero] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = T[i][-1]
    value = sum(ci * xi for ci, xi in zip(c[:n], x))
    return LPResult("optimal", tuple(x), sign * value)


# ---------------------------------------------------------------------------
# Polytopes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticePolytope:
    """A lattice polytope given by its vertex set (sorted, deduplicated)."""

    dim: int
    vertices: tuple

    def __post_init__(self):
        for v in self.vertices:
            if len(v) != self.dim:
                raise GeometryError(f"vertex {v} does not have dimension {self.dim}")


def _is_vertex(p, others) -> bool:
    """True iff p is not a convex combination of the other points."""
    if not others:
        return True
    d = len(p)
    rows = []
    for c in range(d):
        rows.append((tuple(Fraction(q[c]) for q in others), "=", Fraction(p[c])))
    rows.append((tuple(Fraction(1) for _ in others), "=", Fraction(1)))
    prob = LPProblem(tuple(Fraction(0) for _ in others), tuple(rows))
    return lp_solve(prob).status == "infeasible"


def hull_vertices(points: Iterable[Monomial], dim: int | None = None) -> LatticePolytope:
    """Vertices of the convex hull of a finite set of lattice points."""
    pts = sorted(set(tuple(p) for p in points))
    if not pts:
        if dim is None:
            raise GeometryError("empty point set with unspecified dimension")
        return LatticePolytope(dim, ())
    d = len(pts[0])
    if dim is not None and dim != d:
        raise GeometryError("dimension mismatch")
    if len(pts) == 1:
        return LatticePolytope(d, tuple(pts))

    # Cheap pass: a unique extreme along any coordinate direction is a vertex.
    sure = set()
    for c in range(d):
        for pick in (min, max):
            ext = pick(p[c] for p in pts)
            hits = [p for p in pts if p[c] == ext]
            if len(hits) == 1:
                sure.add(hits[0])

    verts = []
    for p in pts:
        if p in sure or _is_vertex(p, [q for q in pts if q != p]):
            verts.append(p)
    return LatticePolytope(d, tuple(verts))


def minkowski_vertices(a: LatticePolytope, b: LatticePolytope) -> LatticePolytope:
    """Vertices of the Minkowski sum of two polytopes given by vertices."""
    if a.dim != b.dim:
        raise GeometryError("dimension mismatch in Minkowski sum")
    sums = {mono_mul(p, q) for p in a.vertices for q in b.vertices}
    return hull_vertices(sums, a.dim)


def _minimal_filter(points: Sequence[Monomial]) -> list:
    out = []
    for p in points:
        if any(q != p and mono_leq(q, p) for q in points):
            continue
        out.append(p)
    return sorted(out)


def np_min(s: Poly) -> tuple:
    """Newton polytope and minimal polynomial of s.

    Returns (polytope, minimal) where polytope is the Newton polytope of s and
    minimal is the all-one polynomial on its pointwise-minimal vertices.  For
    non-negative weight assignments, minimizing m . z over the support of s
    and over the support of the minimal polynomial give the same value.
    """
    poly = hull_vertices(s.coeffs, s.dim)
    return poly, Poly.from_support(s.dim, _minimal_filter(poly.vertices))


def vn(polys: Sequence[Poly], dim: int | None = None) -> Poly:
    """Minimal polynomial of a product, without expanding the product.

    Folds pairwise Minkowski vertex sums over the factor supports and applies
    the minimal filter to the final vertex set.  The empty product is the unit
    polynomial (dim must then be given).
    """
    return vn_with_witness(polys, dim)[0]


def vn_with_witness(polys: Sequence[Poly], dim: int | None = None) -> tuple:
    """Like vn, but also returns one factorization per output monomial.

    The second component maps each monomial of the result to a tuple with one
    monomial per input factor whose product it is; when several factorizations
    produce the same point the lexicographically smallest tuple is kept.
    """
    if not polys:
        if dim is None:
            raise GeometryError("empty product with unspecified dimension")
        u = Poly.unit(dim)
        return u, {(0,) * dim: ()}
    d = polys[0].dim
    for s in polys:
        if s.dim != d:
            raise GeometryError("dimension mismatch in product")
        if s.is_zero():
            return Poly.zero(d), {}

    witness = {m: (m,) for m in polys[0].coeffs}
    points = set(witness)
    for s in polys[1:]:
        new_witness: dict = {}
        for p in sorted(points):
            for q in sorted(s.coeffs):
                r = mono_mul(p, q)
                cand = witness[p] + (q,)
                if r not in new_witness or cand < new_witness[r]:
                    new_witness[r] = cand
        points = set(hull_vertices(new_witness, d).vertices)
        witness = {m: w for m, w in new_witness.items() if m in points}
    minimal = _minimal_filter(points)
    return (
        Poly.from_support(d, minimal),
        {m: witness[m] for m in minimal},
    )


# ---------------------------------------------------------------------------
# Normal cones
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfspaceSystem:
    """A homogeneous system { x >= 0 : row . x <= 0 for every row }."""

    dim: int
    rows: tuple  # of tuples of Fraction

    def contains(self, z, slack=Fraction(0)) -> bool:
        """Membership of a non-negative point, with optional numeric slack.

        Infinite coordinates are allowed; a row with a positive coefficient on
        an infinite coordinate is violated unless cancelled, a negative one
        satisfies the row outright.
        """
        z = list(z)
        if len(z) != self.dim:
            raise GeometryError(f"expected a point of dimension {self.dim}, got {len(z)}")
        for row in self.rows:
            total = 0
            unbounded_up = unbounded_down = False
            for a, x in zip(row, z):
                if x == INF:
                    if a > 0:
                        unbounded_up = True
                    elif a < 0:
                        unbounded_down = True
                else:
                    total += a * Fraction(x) if isinstance(x, (int, Fraction)) else a * x
            if unbounded_down:
                continue
            if unbounded_up:
                return False
            if total > slack:
                return False
        return True


def normal_cone(mu: Monomial, s: Poly) -> tuple:
    """The region of weight vectors where mu attains the tropical minimum.

    Returns (system, witness): the halfspace rows (mu - nu) . x <= 0 for every
    other support monomial nu, and a rational witness point.  The witness is
    strictly interior when the cone has one (found by maximizing the minimum
    slack over the unit simplex); otherwise a non-zero boundary point if any
    exists, else None.
    """
    mu = tuple(mu)
    if mu not in s.coeffs:
        raise GeometryError(f"{mu} is not in the support")
    d = s.dim
    rows = sorted(
        {tuple(Fraction(a - b) for a, b in zip(mu, nu)) for nu in s.coeffs if nu != mu}
    )
    system = HalfspaceSystem(d, tuple(rows))
    return system, _cone_witness(system)


def _cone_witness(system: HalfspaceSystem):
    d = system.dim
    if not system.rows:
        return tuple(Fraction(1) for _ in range(d))
    # Variables: x_1..x_d, t.  Maximize t with row.x + t <= 0, sum x <= 1.
    lp_rows = [(row + (Fraction(1),), "<=", Fraction(0)) for row in system.rows]
    lp_rows.append((tuple(Fraction(1) for _ in range(d)) + (Fraction(0),), "<=", Fraction(1)))
    res = lp_solve(
        LPProblem(tuple(Fraction(0) for _ in range(d)) + (Fraction(1),), tuple(lp_rows))
    )
    if res.status == "optimal" and res.value > 0:
        return res.x[:d]
    # No interior: look for a non-zero boundary point.
    lp_rows = [(row, "<=", Fraction(0)) for row in system.rows]
    lp_rows.append((tuple(Fraction(1) for _ in range(d)), "<=", Fraction(1)))
    res = lp_solve(
        LPProblem(tuple(Fraction(1) for _ in range(d)), tuple(lp_rows))
    )
    if res.status == "optimal" and res.value > 0:
        return res.x
    return None


def reduce_rows(system: HalfspaceSystem) -> HalfspaceSystem:
    """Drop rows implied by the remaining rows together with x >= 0."""
    rows = list(system.rows)
    kept = list(rows)
    for row in rows:
        others = [r for r in kept if r != row]
        # row is redundant iff max row.x over the others (bounded by the
        # unit simplex, by homogeneity) cannot exceed 0.
        lp_rows = [(r, "<=", Fraction(0)) for r in others]
        lp_rows.append((tuple(Fraction(1) for _ in row), "<=", Fraction(1)))
        res = lp_solve(LPProblem(row, tuple(lp_rows)))
        if res.status == "optimal" and res.value <= 0:
            kept = others
    return HalfspaceSystem(system.dim, tuple(kept))


# ---------------------------------------------------------------------------
# JSON forms
# ---------------------------------------------------------------------------


def _frac_to_json(q) -> str:
    return "inf" if q == INF else str(Fraction(q))


def _frac_from_json(text: str):
    return INF if text == "inf" else Fraction(text)


def polytope_to_json(p: LatticePolytope) -> dict:
    return {"dim": p.dim, "vertices": [list(v) for v in p.vertices]}


def polytope_from_json(obj: dict) -> LatticePolytope:
    return LatticePolytope(obj["dim"], tuple(tuple(v) for v in obj["vertices"]))


def cone_to_json(system: HalfspaceSystem, witness=None) -> dict:
    return {
        "dim": system.dim,
        "rows": [{"normal": [_frac_to_json(a) for a in row], "rhs": "0"} for row in system.rows],
        "witness": None if witness is None else [_frac_to_json(a) for a in witness],
    }


def cone_from_json(obj: dict) -> tuple:
    system = HalfspaceSystem(
        obj["dim"],
        tuple(tuple(_frac_from_json(a) for a in row["normal"]) for row in obj["rows"]),
    )
    witness = obj.get("witness")
    if witness is not None:
        witness = tuple(_frac_from_json(a) for a in witness)
    return system, witness
