"""Canonical difference-bound matrices and federations (finite unions).

DBMs are indexed 0..dim-1 where index 0 is the constant zero clock.  Entry
(i, j) bounds ``x_i - x_j``; bounds carry integer tick values plus a
strictness flag, with a unique infinity.  Matrices are kept in canonical
(all-pairs tightest) form by every constructor, so inclusion and equality
are direct entrywise tests.

By convention the monitor reserves the *last* index for the absolute-time
clock.  That clock participates in delay closure like any other but must
never be reset; :func:`reset` enforces this when given the reserved index.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from .errors import DtmonError, ValidationError


@dataclass(frozen=True, order=False)
class Bound:
    """An upper bound ``< value`` or ``<= value``; ``value is None`` is +inf."""

    value: Optional[int]
    strict: bool = True

    def __post_init__(self):
        if self.value is None and not self.strict:
            object.__setattr__(self, "strict", True)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __str__(self) -> str:
        if self.is_infinite:
            return "inf"
        op = "<" if self.strict else "<="
        return f"{op}{self.value}"


INF = Bound(None)
LE_ZERO = Bound(0, False)
LT_ZERO = Bound(0, True)


def bound_le(a: Bound, b: Bound) -> bool:
    """True when constraint a is at least as tight as constraint b."""
    if b.is_infinite:
        return True
    if a.is_infinite:
        return False
    if a.value != b.value:
        return a.value < b.value
    return a.strict or not b.strict


def bound_min(a: Bound, b: Bound) -> Bound:
    return a if bound_le(a, b) else b


def bound_add(a: Bound, b: Bound) -> Bound:
    if a.is_infinite or b.is_infinite:
        return INF
    return Bound(a.value + b.value, a.strict or b.strict)


def bound_negate(b: Bound) -> Bound:
    """Complement: not(e <= v) is -e < -v, and not(e < v) is -e <= -v."""
    if b.is_infinite:
        raise DtmonError("cannot negate an infinite bound")
    return Bound(-b.value, not b.strict)


def le_bound(value: int) -> Bound:
    return Bound(value, False)


def lt_bound(value: int) -> Bound:
    return Bound(value, True)


def bound_satisfied(diff: Fraction, b: Bound) -> bool:
    if b.is_infinite:
        return True
    return diff < b.value or (diff == b.value and not b.strict)


@dataclass(frozen=True)
class Dbm:
    """A canonical DBM; use the module factories rather than raw rows."""

    rows: tuple[tuple[Bound, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.rows)

    def bound(self, i: int, j: int) -> Bound:
        return self.rows[i][j]

    @property
    def is_empty(self) -> bool:
        # Canonical non-empty matrices have exact-zero diagonals.
        return bound_le(self.rows[0][0], LT_ZERO)

    def includes(self, other: "Dbm") -> bool:
        """Set inclusion other <= self; other must be canonical (it is)."""
        if self.dim != other.dim:
            raise ValidationError("dimension mismatch")
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        n = self.dim
        return all(
            bound_le(other.rows[i][j], self.rows[i][j]) for i in range(n) for j in range(n)
        )

    def same_zone(self, other: "Dbm") -> bool:
        return self.includes(other) and other.includes(self)

    def contains_point(self, values: Sequence[Fraction]) -> bool:
        """Exact membership; ``values[i]`` is the value of clock i (index 0 = 0)."""
        if len(values) != self.dim:
            raise ValidationError("dimension mismatch")
        if self.is_empty:
            return False
        n = self.dim
        for i in range(n):
            for j in range(n):
                if not bound_satisfied(Fraction(values[i]) - Fraction(values[j]), self.rows[i][j]):
                    return False
        return True

    def constraints(self) -> list[tuple[int, int, Bound]]:
        """Non-trivial constraints of the canonical form (diagonal omitted)."""
        out = []
        for i in range(self.dim):
            for j in range(self.dim):
                if i != j and not self.rows[i][j].is_infinite:
                    out.append((i, j, self.rows[i][j]))
        return out

    def __str__(self) -> str:
        if self.is_empty:
            return "Dbm(empty)"
        parts = [f"x{i}-x{j}{b}" for i, j, b in self.constraints()]
        return "Dbm(" + " & ".join(parts) + ")"


def _canonical(rows: list[list[Bound]]) -> Dbm:
    """Floyd-Warshall tightening; negative cycles collapse to a canonical empty."""
    n = len(rows)
    for i in range(n):
        if bound_le(rows[i][i], LT_ZERO):
            return _empty(n)
        rows[i][i] = LE_ZERO
    for k in range(n):
        rk = rows[k]
        for i in range(n):
            rik = rows[i][k]
            if rik.is_infinite:
                continue
            ri = rows[i]
            for j in range(n):
                cand = bound_add(rik, rk[j])
                if not bound_le(ri[j], cand):
                    ri[j] = cand
        for i in range(n):
            if bound_le(rows[i][i], LT_ZERO):
                return _empty(n)
    return Dbm(tuple(tuple(r) for r in rows))


def _empty(dim: int) -> Dbm:
    rows = [[LE_ZERO] * dim for _ in range(dim)]
    rows[0][0] = LT_ZERO
    return Dbm(tuple(tuple(r) for r in rows))


def _mutable(d: Dbm) -> list[list[Bound]]:
    return [list(r) for r in d.rows]


def empty_dbm(dim: int) -> Dbm:
    return _empty(dim)


def zero_dbm(dim: int) -> Dbm:
    """All clocks exactly 0."""
    return Dbm(tuple(tuple(LE_ZERO for _ in range(dim)) for _ in range(dim)))


def top_dbm(dim: int) -> Dbm:
    """All clocks >= 0, otherwise unconstrained."""
    rows = [[INF] * dim for _ in range(dim)]
    for i in range(dim):
        rows[i][i] = LE_ZERO
        rows[0][i] = LE_ZERO
    return Dbm(tuple(tuple(r) for r in rows))


def from_constraints(dim: int, constraints: Iterable[tuple[int, int, Bound]]) -> Dbm:
    rows = [[INF] * dim for _ in range(dim)]
    for i in range(dim):
        rows[i][i] = LE_ZERO
        rows[0][i] = LE_ZERO
    for i, j, b in constraints:
        if i == j:
            raise ValidationError("constraints must relate distinct indices")
        rows[i][j] = bound_min(rows[i][j], b)
    return _canonical(rows)


def canonicalize(d: Dbm) -> Dbm:
    return _canonical(_mutable(d))


def up(d: Dbm) -> Dbm:
    """Delay closure: drop upper bounds of every clock (future of the zone)."""
    if d.is_empty:
        return d
    rows = _mutable(d)
    for i in range(1, d.dim):
        rows[i][0] = INF
    # Still canonical: only upper rows were relaxed to the maximum.
    return Dbm(tuple(tuple(r) for r in rows))


def down(d: Dbm) -> Dbm:
    """Past closure: the set of valuations that can delay into the zone."""
    if d.is_empty:
        return d
    rows = _mutable(d)
    n = d.dim
    for j in range(1, n):
        lo = LE_ZERO
        for i in range(1, n):
            if i != j:
                lo = bound_min(lo, rows[i][j])
        rows[0][j] = lo
    return _canonical(rows)


def free(d: Dbm, clock: int) -> Dbm:
    """Remove all constraints on one clock (value becomes any non-negative)."""
    if clock <= 0 or clock >= d.dim:
        raise ValidationError(f"invalid clock index {clock}")
    if d.is_empty:
        return d
    rows = _mutable(d)
    n = d.dim
    for j in range(n):
        if j != clock:
            rows[clock][j] = INF
            rows[j][clock] = INF
    rows[0][clock] = LE_ZERO
    return _canonical(rows)


def reset(d: Dbm, clocks: Iterable[int], protected: Optional[int] = None) -> Dbm:
    """Reset the given clocks to 0; refuses to reset the protected index."""
    if d.is_empty:
        return d
    rows = _mutable(d)
    n = d.dim
    for x in clocks:
        if x <= 0 or x >= n:
            raise ValidationError(f"invalid clock index {x}")
        if protected is not None and x == protected:
            raise DtmonError("the absolute-time clock must never be reset")
        for j in range(n):
            rows[x][j] = rows[0][j]
            rows[j][x] = rows[j][0]
        rows[x][x] = LE_ZERO
    # Copying rows/columns of the canonical zero row keeps the matrix canonical.
    return Dbm(tuple(tuple(r) for r in rows))


def intersect(a: Dbm, b: Dbm) -> Dbm:
    if a.dim != b.dim:
        raise ValidationError("dimension mismatch")
    rows = [[bound_min(a.rows[i][j], b.rows[i][j]) for j in range(a.dim)] for i in range(a.dim)]
    return _canonical(rows)


def and_constraint(d: Dbm, i: int, j: int, b: Bound) -> Dbm:
    if i == j or i >= d.dim or j >= d.dim:
        raise ValidationError("invalid constraint indices")
    if bound_le(d.rows[i][j], b):
        return d
    rows = _mutable(d)
    rows[i][j] = b
    return _canonical(rows)


def fix_clock(d: Dbm, clock: int, value: int) -> Dbm:
    """Intersect with ``x_clock == value`` (in ticks)."""
    out = and_constraint(d, clock, 0, le_bound(value))
    return and_constraint(out, 0, clock, le_bound(-value))


def extrapolate(d: Dbm, max_consts: Sequence[Optional[int]]) -> Dbm:
    """Classic max-constant widening; ``max_consts[i]`` is clock i's ceiling.

    ``None`` disables widening for that index.  Sound for automata whose
    guards do not compare clock differences against constants.
    """
    if d.is_empty:
        return d
    n = d.dim
    rows = _mutable(d)
    changed = False
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            b = rows[i][j]
            if b.is_infinite:
                continue
            mi = max_consts[i] if i != 0 else 0
            mj = max_consts[j] if j != 0 else 0
            if mi is not None and b.value > mi:
                rows[i][j] = INF
                changed = True
            elif mj is not None and b.value < -mj:
                rows[i][j] = Bound(-mj, True)
                changed = True
    if not changed:
        return d
    return _canonical(rows)


def subtract(a: Dbm, b: Dbm) -> list[Dbm]:
    """Split ``a \\ b`` into disjoint canonical pieces."""
    if a.dim != b.dim:
        raise ValidationError("dimension mismatch")
    if a.is_empty:
        return []
    if b.is_empty:
        return [a]
    if intersect(a, b).is_empty:
        return [a]
    pieces: list[Dbm] = []
    rest = a
    for i, j, bound in b.constraints():
        piece = and_constraint(rest, j, i, bound_negate(bound))
        if not piece.is_empty:
            pieces.append(piece)
        rest = and_constraint(rest, i, j, bound)
        if rest.is_empty:
            break
    return pieces


@dataclass(frozen=True)
class Federation:
    """A finite union of non-empty canonical DBMs over one index set.

    Normal form: no member is included in another member (pairwise check,
    not minimal union).
    """

    dim: int
    members: tuple[Dbm, ...] = ()

    def __post_init__(self):
        for m in self.members:
            if m.dim != self.dim:
                raise ValidationError("federation members must share dimensions")

    @property
    def is_empty(self) -> bool:
        return not self.members

    def __iter__(self) -> Iterator[Dbm]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


def federation(dim: int, members: Iterable[Dbm] = ()) -> Federation:
    """Build a normalised federation, dropping empty and dominated members."""
    kept: list[Dbm] = []
    for m in members:
        if m.dim != dim:
            raise ValidationError("federation members must share dimensions")
        if m.is_empty:
            continue
        if any(existing.includes(m) for existing in kept):
            continue
        kept = [e for e in kept if not m.includes(e)]
        kept.append(m)
    return Federation(dim, tuple(kept))


def fed_union(a: Federation, b: Federation) -> Federation:
    if a.dim != b.dim:
        raise ValidationError("dimension mismatch")
    return federation(a.dim, a.members + b.members)


def fed_intersect(a: Federation, b: Federation) -> Federation:
    if a.dim != b.dim:
        raise ValidationError("dimension mismatch")
    return federation(a.dim, (intersect(x, y) for x in a for y in b))


def fed_subtract(a: Federation, b: Federation) -> Federation:
    if a.dim != b.dim:
        raise ValidationError("dimension mismatch")
    pieces = list(a.members)
    for y in b:
        nxt: list[Dbm] = []
        for x in pieces:
            nxt.extend(subtract(x, y))
        pieces = nxt
        if not pieces:
            break
    return federation(a.dim, pieces)


def fed_includes(a: Federation, b: Federation) -> bool:
    """True when b is a subset of a (as point sets)."""
    return fed_subtract(b, a).is_empty


def fed_equal(a: Federation, b: Federation) -> bool:
    return fed_includes(a, b) and fed_includes(b, a)


def fed_is_empty(f: Federation) -> bool:
    return f.is_empty


def fed_up(f: Federation) -> Federation:
    return federation(f.dim, (up(m) for m in f))


def fed_fix_clock(f: Federation, clock: int, value: int) -> Federation:
    return federation(f.dim, (fix_clock(m, clock, value) for m in f))


def fed_contains_point(f: Federation, values: Sequence[Fraction]) -> bool:
    return any(m.contains_point(values) for m in f)


def fed_lift(f: Federation, extra: int = 1) -> Federation:
    """Embed into ``dim + extra`` dimensions; new trailing indices are only
    constrained to be non-negative."""
    if extra <= 0:
        return f
    new_dim = f.dim + extra
    out = []
    for m in f:
        rows = [[INF] * new_dim for _ in range(new_dim)]
        for i in range(new_dim):
            rows[i][i] = LE_ZERO
            rows[0][i] = LE_ZERO
        for i in range(f.dim):
            for j in range(f.dim):
                rows[i][j] = m.rows[i][j]
        out.append(_canonical(rows))
    return federation(new_dim, out)
