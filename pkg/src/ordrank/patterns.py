"""Symbolic subsets of ordinal spaces.

A pattern is a boolean formula over atoms constraining a point's CNF
digits (coefficient of w^i equal / at least / congruent to something),
its position (below / at-or-above an ordinal bound), or its divisibility
by a power of w.  Closed formulas denote concrete subsets; atoms may
instead carry one affine parameter (a natural n, or the ordinal index of
a transfinite family) so that families and iteration templates stay
finitely presented.

The normal form used by every decision procedure is a finite union of
*cells*: digit-box times interval times divisibility constraint.  Digit
constraints are eventually periodic subsets of the naturals, which keeps
the whole algebra exact and closed under complement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import ordinal as o
from .errors import DepthExceeded, UnsupportedProgression
from .ordinal import Ordinal, ZERO, ONE


# ---------------------------------------------------------------------------
# Eventually periodic subsets of the naturals.

@dataclass(frozen=True)
class DigitSet:
    """Membership is prefix[v] for v < len(prefix), else (v % period) in residues."""
    prefix: tuple[bool, ...]
    period: int
    residues: frozenset[int]

    def __contains__(self, v: int) -> bool:
        if v < len(self.prefix):
            return self.prefix[v]
        return (v % self.period) in self.residues

    @property
    def is_empty(self) -> bool:
        return not any(self.prefix) and not self.residues

    @property
    def is_finite(self) -> bool:
        return not self.residues

    @property
    def is_full(self) -> bool:
        return not self.prefix and self.period == 1 and self.residues

    def min_value(self) -> int | None:
        return self.min_geq(0)

    def min_geq(self, k: int) -> int | None:
        for v in range(k, len(self.prefix)):
            if self.prefix[v]:
                return v
        if not self.residues:
            return None
        start = max(k, len(self.prefix))
        for v in range(start, start + self.period):
            if (v % self.period) in self.residues:
                return v
        return None

    def max_finite(self) -> int | None:
        """Largest member of a finite set."""
        if self.residues:
            raise ValueError("infinite digit set")
        for v in range(len(self.prefix) - 1, -1, -1):
            if self.prefix[v]:
                return v
        return None

    def shift_up(self, k: int) -> "DigitSet":
        """{v + k : v in self}."""
        if k == 0:
            return self
        pref = (False,) * k + tuple(
            ((v - k) in self) for v in range(k, len(self.prefix) + k))
        res = frozenset((r + k) % self.period for r in self.residues)
        return mk_digitset(pref, self.period, res)

    def elements(self, count: int, start: int = 0):
        v = self.min_geq(start)
        while v is not None and count > 0:
            yield v
            count -= 1
            v = self.min_geq(v + 1)


def _divisors(n: int):
    for d in range(1, n + 1):
        if n % d == 0:
            yield d


def mk_digitset(prefix, period, residues) -> DigitSet:
    prefix = tuple(bool(b) for b in prefix)
    residues = frozenset(r % period for r in residues)
    for d in _divisors(period):
        if all(((r % period) in residues) == (((r + d) % period) in residues)
               for r in range(period)):
            residues = frozenset(r for r in range(d) if r in residues)
            period = d
            break
    pref = list(prefix)
    while pref and pref[-1] == ((len(pref) - 1) % period in residues):
        pref.pop()
    return DigitSet(tuple(pref), period, residues)


DS_FULL = mk_digitset((), 1, {0})
DS_EMPTY = mk_digitset((), 1, set())


def ds_eq(v: int) -> DigitSet:
    return mk_digitset((False,) * v + (True,), 1, set())


def ds_ge(v: int) -> DigitSet:
    return mk_digitset((False,) * v, 1, {0})


def ds_lt(v: int) -> DigitSet:
    return mk_digitset((True,) * v, 1, set())


def ds_window(a: int, b: int) -> DigitSet:
    return mk_digitset((False,) * a + (True,) * max(0, b - a), 1, set())


def ds_mod(m: int, r: int) -> DigitSet:
    if m < 1:
        raise ValueError("modulus must be >= 1")
    return mk_digitset((), m, {r % m})


def _aligned(a: DigitSet, b: DigitSet):
    t = max(len(a.prefix), len(b.prefix))
    m = math.lcm(a.period, b.period)
    pa = tuple((v in a) for v in range(t))
    pb = tuple((v in b) for v in range(t))
    ra = frozenset(r for r in range(m) if (r % a.period) in a.residues)
    rb = frozenset(r for r in range(m) if (r % b.period) in b.residues)
    return t, m, pa, pb, ra, rb


def ds_and(a: DigitSet, b: DigitSet) -> DigitSet:
    t, m, pa, pb, ra, rb = _aligned(a, b)
    return mk_digitset(tuple(x and y for x, y in zip(pa, pb)), m, ra & rb)


def ds_or(a: DigitSet, b: DigitSet) -> DigitSet:
    t, m, pa, pb, ra, rb = _aligned(a, b)
    return mk_digitset(tuple(x or y for x, y in zip(pa, pb)), m, ra | rb)


def ds_not(a: DigitSet) -> DigitSet:
    return mk_digitset(tuple(not x for x in a.prefix), a.period,
                       frozenset(range(a.period)) - a.residues)


# ---------------------------------------------------------------------------
# Formula AST.

class Pat:
    __slots__ = ()


@dataclass(frozen=True)
class PTrue(Pat):
    pass


@dataclass(frozen=True)
class PFalse(Pat):
    pass


@dataclass(frozen=True)
class PAnd(Pat):
    parts: tuple[Pat, ...]


@dataclass(frozen=True)
class POr(Pat):
    parts: tuple[Pat, ...]


@dataclass(frozen=True)
class PNot(Pat):
    part: Pat


@dataclass(frozen=True)
class PDigit(Pat):
    """digit_i(x) lies in an eventually periodic set."""
    i: int
    ds: DigitSet


@dataclass(frozen=True)
class POrdLt(Pat):
    b: Ordinal


@dataclass(frozen=True)
class POrdGe(Pat):
    b: Ordinal


@dataclass(frozen=True)
class PDiv(Pat):
    """x != 0 and w^e divides x (all digits below e vanish)."""
    e: int


@dataclass(frozen=True)
class PMinDigit(Pat):
    """x != 0 and the coefficient at the least exponent of x lies in ds.

    This is the 'last nonzero coefficient' constraint; it is what makes
    sets dense and co-dense in every iterated derivative expressible.
    """
    ds: DigitSet


# Atoms affine in a natural parameter n.
@dataclass(frozen=True)
class PDigitGeN(Pat):
    i: int
    base: int
    slope: int


@dataclass(frozen=True)
class PDigitLtN(Pat):
    i: int
    base: int
    slope: int


@dataclass(frozen=True)
class POrdGeN(Pat):
    base: Ordinal
    slope: Ordinal


@dataclass(frozen=True)
class POrdLtN(Pat):
    base: Ordinal
    slope: Ordinal


@dataclass(frozen=True)
class PDivN(Pat):
    base: int
    slope: int


# Atoms affine in the ordinal index of a transfinite family.
@dataclass(frozen=True)
class POrdGeEta(Pat):
    """x >= base + coeff*(eta - shift); segments guarantee eta >= shift."""
    base: Ordinal
    shift: Ordinal
    coeff: int = 1


@dataclass(frozen=True)
class POrdLtEta(Pat):
    base: Ordinal
    shift: Ordinal
    coeff: int = 1


TRUE = PTrue()
FALSE = PFalse()


def and_(*parts: Pat) -> Pat:
    flat: list[Pat] = []
    for p in parts:
        if isinstance(p, PTrue):
            continue
        if isinstance(p, PFalse):
            return FALSE
        if isinstance(p, PAnd):
            flat.extend(p.parts)
        else:
            flat.append(p)
    out = tuple(dict.fromkeys(flat))
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else PAnd(out)


def or_(*parts: Pat) -> Pat:
    flat: list[Pat] = []
    for p in parts:
        if isinstance(p, PFalse):
            continue
        if isinstance(p, PTrue):
            return TRUE
        if isinstance(p, POr):
            flat.extend(p.parts)
        else:
            flat.append(p)
    out = tuple(dict.fromkeys(flat))
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else POr(out)


def not_(p: Pat) -> Pat:
    if isinstance(p, PTrue):
        return FALSE
    if isinstance(p, PFalse):
        return TRUE
    if isinstance(p, PNot):
        return p.part
    return PNot(p)


def digit_eq(i: int, v: int) -> Pat:
    return PDigit(i, ds_eq(v))


def digit_ge(i: int, v: int) -> Pat:
    return PDigit(i, ds_ge(v)) if v > 0 else TRUE


def digit_mod(i: int, m: int, r: int) -> Pat:
    return PDigit(i, ds_mod(m, r))


def digit_in(i: int, ds: DigitSet) -> Pat:
    if ds.is_full:
        return TRUE
    if ds.is_empty:
        return FALSE
    return PDigit(i, ds)


def ord_lt(b: Ordinal | int) -> Pat:
    b = o._coerce(b)
    return FALSE if b.is_zero else POrdLt(b)


def ord_ge(b: Ordinal | int) -> Pat:
    b = o._coerce(b)
    return TRUE if b.is_zero else POrdGe(b)


def divpow(e: int) -> Pat:
    if e < 0:
        raise ValueError("divisibility level must be a natural")
    return ord_ge(1) if e == 0 else PDiv(e)


def min_digit_in(ds: DigitSet) -> Pat:
    ds = ds_and(ds, ds_ge(1))  # the last coefficient is always >= 1
    if ds.is_empty:
        return FALSE
    if ds == ds_ge(1):
        return ord_ge(1)
    return PMinDigit(ds)


def interval(lo: Ordinal | int, hi: Ordinal | int | None) -> Pat:
    parts = [ord_ge(lo)]
    if hi is not None:
        parts.append(ord_lt(hi))
    return and_(*parts)


def singleton(x: Ordinal | int) -> Pat:
    x = o._coerce(x)
    return and_(ord_ge(x), ord_lt(o.add(x, 1)))


_PARAM_N = (PDigitGeN, PDigitLtN, POrdGeN, POrdLtN, PDivN)
_PARAM_ETA = (POrdGeEta, POrdLtEta)


def is_concrete(p: Pat) -> bool:
    if isinstance(p, (PAnd, POr)):
        return all(is_concrete(q) for q in p.parts)
    if isinstance(p, PNot):
        return is_concrete(p.part)
    return not isinstance(p, _PARAM_N + _PARAM_ETA)


def subst_n(p: Pat, n: int) -> Pat:
    """Instantiate every natural-parameter atom at n."""
    if isinstance(p, PAnd):
        return and_(*(subst_n(q, n) for q in p.parts))
    if isinstance(p, POr):
        return or_(*(subst_n(q, n) for q in p.parts))
    if isinstance(p, PNot):
        return not_(subst_n(p.part, n))
    if isinstance(p, PDigitGeN):
        return digit_ge(p.i, p.base + p.slope * n)
    if isinstance(p, PDigitLtN):
        return digit_in(p.i, ds_lt(p.base + p.slope * n))
    if isinstance(p, POrdGeN):
        return ord_ge(o.add(p.base, o.mul(p.slope, n)))
    if isinstance(p, POrdLtN):
        return ord_lt(o.add(p.base, o.mul(p.slope, n)))
    if isinstance(p, PDivN):
        return divpow(p.base + p.slope * n)
    return p


def subst_eta(p: Pat, eta: Ordinal) -> Pat:
    """Instantiate every family-index atom at the ordinal eta."""
    if isinstance(p, PAnd):
        return and_(*(subst_eta(q, eta) for q in p.parts))
    if isinstance(p, POr):
        return or_(*(subst_eta(q, eta) for q in p.parts))
    if isinstance(p, PNot):
        return not_(subst_eta(p.part, eta))
    if isinstance(p, (POrdGeEta, POrdLtEta)):
        val = o.add(p.base, o.mul(o.left_sub(eta, p.shift), p.coeff))
        return ord_ge(val) if isinstance(p, POrdGeEta) else ord_lt(val)
    return p


# ---------------------------------------------------------------------------
# Direct membership evaluation (concrete patterns only).

def holds_at(p: Pat, x: Ordinal) -> bool:
    if isinstance(p, PTrue):
        return True
    if isinstance(p, PFalse):
        return False
    if isinstance(p, PAnd):
        return all(holds_at(q, x) for q in p.parts)
    if isinstance(p, POr):
        return any(holds_at(q, x) for q in p.parts)
    if isinstance(p, PNot):
        return not holds_at(p.part, x)
    if isinstance(p, PDigit):
        return x.digit(p.i) in p.ds
    if isinstance(p, POrdLt):
        return o.compare(x, p.b) < 0
    if isinstance(p, POrdGe):
        return o.compare(x, p.b) >= 0
    if isinstance(p, PDiv):
        me = x.min_exp()
        return me is not None and me >= p.e
    if isinstance(p, PMinDigit):
        me = x.min_exp()
        return me is not None and x.digit(me) in p.ds
    raise UnsupportedProgression("parametric atom in concrete evaluation: %r" % (p,))


# ---------------------------------------------------------------------------
# Cell normal form.

@dataclass(frozen=True)
class Cell:
    lo: Ordinal
    hi: Ordinal | None  # exclusive; None means up to the space bound
    digits: tuple[tuple[int, DigitSet], ...]  # sorted, non-full, indices >= div
    div: int
    md: DigitSet | None = None  # last-nonzero-coefficient constraint; implies x != 0

    def constraint(self, i: int) -> DigitSet:
        if i < self.div:
            return ds_eq(0)
        for j, ds in self.digits:
            if j == i:
                return ds
        return DS_FULL

    def holds(self, x: Ordinal) -> bool:
        me = x.min_exp()
        if self.div >= 1 and (me is None or me < self.div):
            return False
        if self.md is not None and (me is None or x.digit(me) not in self.md):
            return False
        for i, ds in self.digits:
            if x.digit(i) not in ds:
                return False
        if o.compare(x, self.lo) < 0:
            return False
        return self.hi is None or o.compare(x, self.hi) < 0


def _nnf(p: Pat, neg: bool) -> Pat:
    if isinstance(p, PTrue):
        return FALSE if neg else TRUE
    if isinstance(p, PFalse):
        return TRUE if neg else FALSE
    if isinstance(p, PNot):
        return _nnf(p.part, not neg)
    if isinstance(p, PAnd):
        sub = tuple(_nnf(q, neg) for q in p.parts)
        return or_(*sub) if neg else and_(*sub)
    if isinstance(p, POr):
        sub = tuple(_nnf(q, neg) for q in p.parts)
        return and_(*sub) if neg else or_(*sub)
    if not neg:
        return p
    if isinstance(p, PDigit):
        return digit_in(p.i, ds_not(p.ds))
    if isinstance(p, POrdLt):
        return POrdGe(p.b)
    if isinstance(p, POrdGe):
        return ord_lt(p.b)
    if isinstance(p, PDiv):
        return or_(ord_lt(1), *(digit_ge(i, 1) for i in range(p.e)))
    if isinstance(p, PMinDigit):
        return or_(ord_lt(1), min_digit_in(ds_not(p.ds)))
    if isinstance(p, PDigitGeN):
        return PDigitLtN(p.i, p.base, p.slope)
    if isinstance(p, PDigitLtN):
        return PDigitGeN(p.i, p.base, p.slope)
    if isinstance(p, POrdGeN):
        return POrdLtN(p.base, p.slope)
    if isinstance(p, POrdLtN):
        return POrdGeN(p.base, p.slope)
    raise UnsupportedProgression("cannot negate %r" % (p,))


def _dnf(p: Pat) -> tuple[tuple[Pat, ...], ...]:
    """NNF formula -> tuple of conjunctions of atoms."""
    if isinstance(p, PTrue):
        return ((),)
    if isinstance(p, PFalse):
        return ()
    if isinstance(p, POr):
        out = []
        for q in p.parts:
            out.extend(_dnf(q))
        return tuple(out)
    if isinstance(p, PAnd):
        acc: tuple[tuple[Pat, ...], ...] = ((),)
        for q in p.parts:
            branch = _dnf(q)
            acc = tuple(c + d for c in acc for d in branch)
            if not acc:
                return ()
        return acc
    return ((p,),)


def _merge_cell(atoms, space_bound: Ordinal | None) -> Cell | None:
    lo, hi = ZERO, None
    digits: dict[int, DigitSet] = {}
    div = 0
    md: DigitSet | None = None
    for a in atoms:
        if isinstance(a, PDigit):
            digits[a.i] = ds_and(digits.get(a.i, DS_FULL), a.ds)
        elif isinstance(a, POrdGe):
            if o.compare(a.b, lo) > 0:
                lo = a.b
        elif isinstance(a, POrdLt):
            if hi is None or o.compare(a.b, hi) < 0:
                hi = a.b
        elif isinstance(a, PDiv):
            div = max(div, a.e)
        elif isinstance(a, PMinDigit):
            md = ds_and(md, a.ds) if md is not None else a.ds
        else:
            raise UnsupportedProgression("parametric atom in cell merge: %r" % (a,))
    if md is not None:
        md = ds_and(md, ds_ge(1))
        if md.is_empty:
            return None
        if md == ds_ge(1):
            md = None  # just x != 0
            if o.compare(lo, ONE) < 0:
                lo = ONE
    if (div >= 1 or md is not None) and o.compare(lo, ONE) < 0:
        lo = ONE
    for i in list(digits):
        if i < div:
            ds = digits.pop(i)
            if 0 not in ds:
                return None
    for ds in digits.values():
        if ds.is_empty:
            return None
    if space_bound is not None:
        if hi is None or o.compare(hi, space_bound) >= 0:
            hi = None  # clamp to the bound, represented as None
    if hi is not None and o.compare(lo, hi) >= 0:
        return None
    packed = tuple(sorted((i, ds) for i, ds in digits.items() if not ds.is_full))
    return Cell(lo, hi, packed, div, md)


def _ds_key(ds: DigitSet):
    return (ds.prefix, ds.period, tuple(sorted(ds.residues)))


def _cell_key(c: Cell):
    hi_key = (1, ()) if c.hi is None else (0, c.hi.terms)
    md_key = ((),) if c.md is None else _ds_key(c.md)
    return (c.div, c.lo.terms, hi_key,
            tuple((i,) + _ds_key(ds) for i, ds in c.digits), md_key)


def _ds_subset(a: DigitSet, b: DigitSet) -> bool:
    return ds_and(a, ds_not(b)).is_empty


def _cell_with(c: Cell, lo=None, hi=None, digit=None, div=None, md=None,
               bound=None) -> Cell | None:
    """Rebuild a cell with one constraint tightened; None when it empties."""
    lo2 = c.lo if lo is None else (lo if o.compare(lo, c.lo) > 0 else c.lo)
    hi2 = c.hi
    if hi is not None:
        hi2 = hi if c.hi is None or o.compare(hi, c.hi) < 0 else c.hi
    digits = dict(c.digits)
    if digit is not None:
        i, ds = digit
        ds2 = ds_and(c.constraint(i), ds)
        if ds2.is_empty:
            return None
        digits[i] = ds2
    div2 = max(c.div, div or 0)
    md2 = c.md
    if md is not None:
        md2 = ds_and(md2, md) if md2 is not None else ds_and(md, ds_ge(1))
        if md2.is_empty:
            return None
        if md2 == ds_ge(1):
            md2 = None
            if o.compare(lo2, ONE) < 0:
                lo2 = ONE
    if (div2 >= 1 or md2 is not None) and o.compare(lo2, ONE) < 0:
        lo2 = ONE
    for i in list(digits):
        if i < div2:
            ds = digits.pop(i)
            if 0 not in ds:
                return None
    if bound is not None and hi2 is not None and o.compare(hi2, bound) >= 0:
        hi2 = None
    if hi2 is not None and o.compare(lo2, hi2) >= 0:
        return None
    packed = tuple(sorted((i, ds) for i, ds in digits.items() if not ds.is_full))
    out = Cell(lo2, hi2, packed, div2, md2)
    return None if cell_is_empty(out, bound) else out


def cell_and(c: Cell, b: Cell, bound: Ordinal | None) -> Cell | None:
    out = _cell_with(c, lo=b.lo, hi=b.hi, div=b.div, md=b.md, bound=bound)
    for i, ds in b.digits:
        if out is None:
            return None
        out = _cell_with(out, digit=(i, ds), bound=bound)
    return out


def cell_minus(c: Cell, b: Cell, bound: Ordinal | None) -> list[Cell]:
    """c minus b as disjoint cells (staircase carving, one constraint a step)."""
    if _cell_subsumes(b, c):
        return []
    if cell_and(c, b, bound) is None:
        return [c]
    out: list[Cell] = []
    rest: Cell | None = c

    def step(negatives, positive_kw) -> None:
        nonlocal rest
        if rest is None:
            return
        for kw in negatives:
            piece = _cell_with(rest, bound=bound, **kw)
            if piece is not None:
                out.append(piece)
        rest = _cell_with(rest, bound=bound, **positive_kw)

    if not b.lo.is_zero:
        step([{"hi": b.lo}], {"lo": b.lo})
    if b.hi is not None:
        step([{"lo": b.hi}], {"hi": b.hi})
    if b.div >= 1:
        # not(div): x = 0 or some digit below the level is nonzero; carve the
        # nonzero-digit branches one position at a time to stay disjoint
        step([{"hi": ONE}], {"lo": ONE})
        for i in range(b.div):
            step([{"digit": (i, ds_ge(1))}], {"digit": (i, ds_eq(0))})
    if b.md is not None:
        step([{"hi": ONE}], {"lo": ONE})
        step([{"md": ds_not(b.md)}], {"md": b.md})
    for i, ds in b.digits:
        step([{"digit": (i, ds_not(ds))}], {"digit": (i, ds)})
    return out


def cells_difference(acells, bcells, bound: Ordinal | None) -> list[Cell]:
    work = list(acells)
    for b in bcells:
        if not work:
            break
        work = [piece for c in work for piece in cell_minus(c, b, bound)]
    return work


def _cell_subsumes(big: Cell, small: Cell) -> bool:
    """Sufficient syntactic check for small <= big."""
    if o.compare(small.lo, big.lo) < 0:
        return False
    if big.hi is not None and (small.hi is None or o.compare(small.hi, big.hi) > 0):
        return False
    if big.div > small.div:
        return False
    if big.md is not None:
        if small.md is None or not _ds_subset(small.md, big.md):
            return False
    for i, ds_big in big.digits:
        if not _ds_subset(small.constraint(i), ds_big):
            return False
    return True


@lru_cache(maxsize=16384)
def _cells_cached(p: Pat, space_bound: Ordinal | None) -> tuple[Cell, ...]:
    nnf = _nnf(p, False)
    cells = []
    for conj in _dnf(nnf):
        c = _merge_cell(conj, space_bound)
        if c is not None and not cell_is_empty(c, space_bound):
            cells.append(c)
    uniq = sorted(set(cells), key=_cell_key)
    return tuple(c for c in uniq
                 if not any(k != c and _cell_subsumes(k, c) for k in uniq))


def to_cells(p: Pat, space_bound: Ordinal | None) -> tuple[Cell, ...]:
    return _cells_cached(p, space_bound)


def cell_pattern(c: Cell) -> Pat:
    parts: list[Pat] = []
    if c.div >= 1:
        parts.append(PDiv(c.div))
    if c.md is not None:
        parts.append(PMinDigit(c.md))
    for i, ds in c.digits:
        parts.append(digit_in(i, ds))
    implied_one = c.div >= 1 or c.md is not None
    if not c.lo.is_zero and not (implied_one and c.lo == ONE):
        parts.append(ord_ge(c.lo))
    if c.hi is not None:
        parts.append(ord_lt(c.hi))
    return and_(*parts)


def cells_pattern(cells) -> Pat:
    return or_(*(cell_pattern(c) for c in cells))


# -- minimal element search --------------------------------------------------

def _min_geq_box(constraint, top: int, lower: Ordinal) -> Ordinal | None:
    """Smallest x >= lower whose digits satisfy constraint(i) for all i <= top
    (positions above top must allow 0 implicitly: caller picks top large)."""

    def best(i: int, tight: bool) -> list[tuple[int, int]] | None:
        if i < 0:
            return []
        ds = constraint(i)
        if not tight:
            m = ds.min_value()
            if m is None:
                return None
            rest = best(i - 1, False)
            if rest is None:
                return None
            return ([(i, m)] if m else []) + rest
        d_low = lower.digit(i)
        cand = None
        if d_low in ds:
            rest = best(i - 1, True)
            if rest is not None:
                cand = ([(i, d_low)] if d_low else []) + rest
        d_up = ds.min_geq(d_low + 1)
        if d_up is not None:
            rest = best(i - 1, False)
            if rest is not None:
                alt = [(i, d_up)] + rest
                if cand is None or _terms_value(alt) < _terms_value(cand):
                    cand = alt
        return cand

    res = best(top, True)
    if res is None:
        return None
    return Ordinal(tuple(sorted(res, reverse=True)))


def cell_min_geq(c: Cell, lower: Ordinal, bound: Ordinal | None) -> Ordinal | None:
    """Smallest x in the cell's box with x >= max(lower, lo); ignores hi.

    Returns None when the box is empty.  May raise DepthExceeded if the only
    witnesses live above the exponent ceiling.
    """
    if o.compare(lower, c.lo) < 0:
        lower = c.lo
    tops = [c.div]
    if c.digits:
        tops.append(max(i for i, _ in c.digits) + 1)
    me = lower.max_exp()
    if me is not None:
        tops.append(me + 1)
    top = max(tops)

    if c.md is None:
        return _min_geq_box(c.constraint, top, lower)

    # Split on the position e of the least nonzero digit; e = top+1 covers
    # every higher position (all constraints there are vacuous).
    best_x: Ordinal | None = None
    for e in range(c.div, top + 2):
        at_e = ds_and(ds_and(c.constraint(e), c.md), ds_ge(1))
        if at_e.is_empty:
            continue

        def constr(i: int, e=e, at_e=at_e) -> DigitSet:
            if i < e:
                return ds_eq(0) if 0 in c.constraint(i) else DS_EMPTY
            if i == e:
                return at_e
            return c.constraint(i)

        x = _min_geq_box(constr, max(top, e), lower)
        if x is not None and (best_x is None or o.compare(x, best_x) < 0):
            best_x = x
    return best_x


def _terms_value(pairs) -> tuple:
    return tuple(sorted(pairs, reverse=True))


@lru_cache(maxsize=65536)
def cell_is_empty(c: Cell, bound: Ordinal | None) -> bool:
    try:
        m = cell_min_geq(c, c.lo, bound)
    except DepthExceeded:
        # A witness exists mathematically but is above the exponent ceiling;
        # on a bounded space it would also be above the bound.
        if bound is None and c.hi is None:
            return False
        return True
    if m is None:
        return True
    eff_hi = c.hi if c.hi is not None else bound
    return eff_hi is not None and o.compare(m, eff_hi) >= 0


def iter_cell(c: Cell, bound: Ordinal | None, count: int):
    eff_hi = c.hi if c.hi is not None else bound
    try:
        x = cell_min_geq(c, c.lo, bound)
    except DepthExceeded:
        return
    while x is not None and count > 0:
        if eff_hi is not None and o.compare(x, eff_hi) >= 0:
            return
        yield x
        count -= 1
        try:
            x = cell_min_geq(c, o.add(x, 1), bound)
        except DepthExceeded:
            return
