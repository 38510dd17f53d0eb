"""Rational-valued step functions and their finite presentations.

A step function is a finite list of (value, cell) pieces whose cells
partition the space.  Families indexed by a natural n are step functions
whose cell patterns may carry affine n-atoms; the map n -> f_n(x) is then
a step function of n with computable breakpoints, which keeps pointwise
limits, convergence oscillation and stabilization certificates exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import ordinal as o
from . import space as sp
from .errors import (CertificateViolation, PartitionViolation,
                     UnsupportedProgression)
from .ordinal import Ordinal
from .patterns import (
    FALSE, TRUE, Pat, PAnd, PDigit, PDigitGeN, PDigitLtN, PDiv, PDivN, PNot,
    POr, POrdGe, POrdGeN, POrdLt, POrdLtN, and_, ds_and, ds_ge, ds_lt,
    digit_in, holds_at, not_, or_, ord_ge, ord_lt, subst_n, DS_FULL,
)
from .space import SpaceDesc, Topology, closure, is_open, member


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class StepFn:
    pieces: tuple[tuple[Fraction, Pat], ...]  # distinct values, cells partition
    space: SpaceDesc

    def eval(self, x: Ordinal) -> Fraction:
        hits = [v for v, p in self.pieces if holds_at(p, x)]
        if len(hits) != 1:
            raise PartitionViolation("point %s hit %d cells" % (x, len(hits)))
        return hits[0]

    def values(self) -> tuple[Fraction, ...]:
        return tuple(v for v, _ in self.pieces)

    def norm(self) -> Fraction:
        return max((abs(v) for v, _ in self.pieces), default=Fraction(0))

    def inf(self) -> Fraction:
        return min(v for v, _ in self.pieces)

    def cell_of(self, value: Fraction) -> Pat:
        for v, p in self.pieces:
            if v == value:
                return p
        return FALSE

    def map_values(self, fn) -> "StepFn":
        return make_stepfn([(fn(v), p) for v, p in self.pieces], self.space)


def make_stepfn(pieces, space: SpaceDesc, check: bool = True) -> StepFn:
    merged: dict[Fraction, Pat] = {}
    for v, p in pieces:
        v = _q(v)
        if sp.is_empty(p, space):
            continue
        merged[v] = or_(merged[v], p) if v in merged else p
    if not merged:
        raise PartitionViolation("no nonempty pieces")
    out = tuple(sorted(merged.items()))
    if check:
        pats = [p for _, p in out]
        whole = or_(*pats)
        if not sp.is_empty(not_(whole), space):
            raise PartitionViolation("cells do not cover the space")
        for i in range(len(pats)):
            for j in range(i + 1, len(pats)):
                if not sp.is_empty(and_(pats[i], pats[j]), space):
                    raise PartitionViolation("cells %d and %d overlap" % (i, j))
    return StepFn(out, space)


def constant(c, space: SpaceDesc) -> StepFn:
    return StepFn(((_q(c), TRUE),), space)


def char_fn(p: Pat, space: SpaceDesc) -> StepFn:
    """The indicator of a pattern."""
    return make_stepfn([(Fraction(1), p), (Fraction(0), not_(p))], space,
                       check=False)


def fn_add(f: StepFn, g: StepFn) -> StepFn:
    assert f.space == g.space
    pieces = [(vf + vg, and_(pf, pg)) for vf, pf in f.pieces for vg, pg in g.pieces]
    return make_stepfn(pieces, f.space, check=False)


def fn_scale(f: StepFn, c) -> StepFn:
    return f.map_values(lambda v: v * _q(c))


def fn_add_const(f: StepFn, c) -> StepFn:
    return f.map_values(lambda v: v + _q(c))


def fn_sub(f: StepFn, g: StepFn) -> StepFn:
    return fn_add(f, fn_scale(g, -1))


def fn_max_const(f: StepFn, c) -> StepFn:
    """Pointwise max(f, c)."""
    return f.map_values(lambda v: max(v, _q(c)))


def fn_max(f: StepFn, g: StepFn) -> StepFn:
    assert f.space == g.space
    pieces = [(max(vf, vg), and_(pf, pg)) for vf, pf in f.pieces for vg, pg in g.pieces]
    return make_stepfn(pieces, f.space, check=False)


def sup_dist(f: StepFn, g: StepFn) -> Fraction:
    """Exact sup norm of f - g."""
    return fn_sub(f, g).norm()


def clamp_hk(g: StepFn, k: int) -> StepFn:
    """Postcompose with the 1-Lipschitz clamp to [0, 2^-k]."""
    top = Fraction(1, 2 ** k)
    return g.map_values(lambda v: Fraction(0) if v < 0 else min(v, top))


def oscillation(f: StepFn, x: Ordinal, F: Pat, t: Topology) -> Fraction:
    """Largest gap among values attained arbitrarily close to x within F."""
    if not member(F, x, t):
        raise ValueError("oscillation needs x in F")
    acc = [v for v, p in f.pieces if member(closure(and_(p, F), t), x, t)]
    return max(acc) - min(acc)


def _relevant_sublevels(f: StepFn):
    vals = sorted(f.values())
    for v in vals:
        yield v, or_(*(p for w, p in f.pieces if w < v))


def usc_check(f: StepFn, t: Topology) -> bool:
    """Upper semi-continuity: every sublevel set {f < c} is open."""
    return all(is_open(s, t) for _, s in _relevant_sublevels(f))


def semi_borel_class(f: StepFn, t: Topology) -> int:
    """Least xi in {1, 2} with every {f < c} in Sigma^0_xi.

    In a countable space every subset is a countable union of closed
    singletons, hence Sigma^0_2; the answer never exceeds 2.
    """
    return 1 if usc_check(f, t) else 2


# ---------------------------------------------------------------------------
# Natural-indexed step-function families.

@dataclass(frozen=True)
class FnFamily:
    """Step functions f_n given by one parametric piece list."""
    pieces: tuple[tuple[Fraction, Pat], ...]
    space: SpaceDesc

    def at(self, n: int) -> StepFn:
        return make_stepfn([(v, subst_n(p, n)) for v, p in self.pieces],
                           self.space, check=False)

    def values(self) -> tuple[Fraction, ...]:
        return tuple(v for v, _ in self.pieces)

    def value_trace(self, x: Ordinal) -> tuple[tuple[int, Fraction], ...]:
        """The step function n -> f_n(x) as ((n_from, value), ...)."""
        bps = {0}
        for _, p in self.pieces:
            bps |= _breakpoints(p, x)
        cuts = sorted(bps)
        out: list[tuple[int, Fraction]] = []
        for nc in cuts:
            val = self.at(nc).eval(x)
            if not out or out[-1][1] != val:
                out.append((nc, val))
        return tuple(out)

    def final_value(self, x: Ordinal) -> Fraction:
        return self.value_trace(x)[-1][1]

    def stabilization(self, x: Ordinal) -> int:
        return self.value_trace(x)[-1][0]

    def cell_pattern_of(self, value: Fraction) -> Pat:
        for v, p in self.pieces:
            if v == value:
                return p
        return FALSE

    def ever_pattern(self, value: Fraction, start: int) -> Pat:
        """{y : f_n(y) = value for some n >= start}."""
        for v, p in self.pieces:
            if v == value:
                return union_from(p, start, self.space)
        return FALSE

    def eventual_pattern(self, value: Fraction) -> Pat:
        for v, p in self.pieces:
            if v == value:
                return eventual(p, self.space)
        return FALSE

    def pointwise_limit(self) -> StepFn:
        pieces = [(v, self.eventual_pattern(v)) for v in self.values()]
        return make_stepfn(pieces, self.space)


def fam_const(f: StepFn) -> FnFamily:
    return FnFamily(f.pieces, f.space)


def fam_add(a: FnFamily, b: FnFamily) -> FnFamily:
    assert a.space == b.space
    pieces = [(va + vb, and_(pa, pb)) for va, pa in a.pieces for vb, pb in b.pieces]
    merged: dict[Fraction, Pat] = {}
    for v, p in pieces:
        merged[v] = or_(merged[v], p) if v in merged else p
    return FnFamily(tuple(sorted(merged.items())), a.space)


def fam_map_values(a: FnFamily, fn) -> FnFamily:
    merged: dict[Fraction, Pat] = {}
    for v, p in a.pieces:
        w = fn(v)
        merged[w] = or_(merged[w], p) if w in merged else p
    return FnFamily(tuple(sorted(merged.items())), a.space)


def fam_clamp_hk(a: FnFamily, k: int) -> FnFamily:
    top = Fraction(1, 2 ** k)
    return fam_map_values(a, lambda v: Fraction(0) if v < 0 else min(v, top))


def _breakpoints(p: Pat, x: Ordinal) -> set[int]:
    """n-values where the truth of p at x may switch."""
    if isinstance(p, (PAnd, POr)):
        out = set()
        for q in p.parts:
            out |= _breakpoints(q, x)
        return out
    if isinstance(p, PNot):
        return _breakpoints(p.part, x)
    if isinstance(p, (PDigitGeN, PDigitLtN)):
        if p.slope == 0:
            return set()
        d = x.digit(p.i)
        if d < p.base:
            return {0}
        return {(d - p.base) // p.slope + 1}
    if isinstance(p, (POrdGeN, POrdLtN)):
        if p.slope.is_zero:
            return set()
        if o.compare(x, p.base) < 0:
            return {0}
        r = o.left_sub(x, p.base)
        return {_max_mult(p.slope, r) + 1}
    if isinstance(p, PDivN):
        if p.slope == 0:
            return set()
        me = x.min_exp()
        if me is None or me < p.base:
            return {0}
        return {(me - p.base) // p.slope + 1}
    return set()


def _max_mult(step: Ordinal, r: Ordinal) -> int:
    """Largest n with step*n <= r (0 if none beyond n=0)."""
    n = 0
    while o.compare(o.mul(step, n + 1), r) <= 0:
        n += 1
        if n > 1 << 20:
            raise UnsupportedProgression("runaway multiplicity search")
    return n


# -- symbolic unions / intersections over the parameter ----------------------

def _param_cells(p: Pat) -> tuple[tuple[Pat, ...], ...]:
    from .patterns import _dnf, _nnf
    return _dnf(_nnf(p, False))


_DECREASING = (PDigitGeN, POrdGeN, PDivN)   # sets shrink as n grows
_INCREASING = (PDigitLtN, POrdLtN)          # sets grow as n grows


def _atom_at_limit(a: Pat) -> Pat:
    """Limit of an increasing atom as n -> infinity."""
    if isinstance(a, PDigitLtN):
        return TRUE if a.slope > 0 else digit_in(a.i, ds_lt(a.base))
    if isinstance(a, POrdLtN):
        if a.slope.is_zero:
            return ord_lt(a.base)
        return ord_lt(o.add(a.base, o.mul(a.slope, o.W)))
    raise UnsupportedProgression(repr(a))


def _window_union(ge: PDigitGeN, lt: PDigitLtN, start: int):
    """Union over n >= start of the sliding window [base1+dn, base2+dn)."""
    d = ge.slope
    a = ge.base + d * start
    b = lt.base + d * start
    if b <= a:
        return None
    if b - a >= d:
        return ds_ge(a)
    from .patterns import mk_digitset
    residues = {(a + i) % d for i in range(b - a)}
    return ds_and(ds_ge(a), mk_digitset((), d, residues))


def union_from_param(p: Pat, space: SpaceDesc) -> Pat:
    """Union over n >= N as a pattern affine in the start index N.

    Decreasing cells keep their atoms (now read as functions of N),
    increasing atoms take their limit value, sliding windows leave a
    threshold plus a residue class."""
    from .patterns import digit_mod, mk_digitset
    cells_out = []
    for conj in _param_cells(p):
        dec = [a for a in conj if isinstance(a, _DECREASING)]
        inc = [a for a in conj if isinstance(a, _INCREASING)]
        const = [a for a in conj if not isinstance(a, _DECREASING + _INCREASING)]
        if not dec:
            cells_out.append(and_(*(const + [_atom_at_limit(a) for a in inc])))
        elif not inc:
            cells_out.append(and_(*conj))
        else:
            if (len(dec) == 1 and len(inc) == 1
                    and isinstance(dec[0], PDigitGeN) and isinstance(inc[0], PDigitLtN)
                    and dec[0].i == inc[0].i and dec[0].slope == inc[0].slope > 0):
                d = dec[0].slope
                a, b = dec[0].base, inc[0].base
                if b <= a:
                    continue
                if b - a >= d:
                    cells_out.append(and_(*(const + [PDigitGeN(dec[0].i, a, d)])))
                else:
                    residues = {(a + i) % d for i in range(b - a)}
                    marks = tuple(r in residues for r in range(d))
                    ds = mk_digitset((), d, residues)
                    cells_out.append(and_(*(const + [PDigitGeN(dec[0].i, a, d),
                                                     digit_in(dec[0].i, ds)])))
            else:
                raise UnsupportedProgression(
                    "mixed-direction parametric cell: %r" % (conj,))
    return or_(*cells_out)


def union_from(p: Pat, start: int, space: SpaceDesc) -> Pat:
    """{y : y in p(n) for some n >= start}; affine fragment only."""
    cells_out = []
    for conj in _param_cells(p):
        dec = [a for a in conj if isinstance(a, _DECREASING)]
        inc = [a for a in conj if isinstance(a, _INCREASING)]
        const = [a for a in conj if not isinstance(a, _DECREASING + _INCREASING)]
        if not dec and not inc:
            cells_out.append(and_(*const))
        elif dec and not inc:
            cells_out.append(subst_n(and_(*conj), start))
        elif inc and not dec:
            cells_out.append(and_(*(const + [_atom_at_limit(a) for a in inc])))
        else:
            # sliding window: one digit GeN + matching LtN, same digit & slope
            if (len(dec) == 1 and len(inc) == 1
                    and isinstance(dec[0], PDigitGeN) and isinstance(inc[0], PDigitLtN)
                    and dec[0].i == inc[0].i and dec[0].slope == inc[0].slope > 0):
                w = _window_union(dec[0], inc[0], start)
                if w is not None:
                    cells_out.append(and_(*(const + [digit_in(dec[0].i, w)])))
            else:
                raise UnsupportedProgression(
                    "mixed-direction parametric cell: %r" % (conj,))
    return or_(*cells_out)


def intersect_from(p: Pat, start: int, space: SpaceDesc) -> Pat:
    """{y : y in p(n) for all n >= start}; affine fragment only."""
    cells_out = []
    for conj in _param_cells(p):
        parts = []
        dead = False
        for a in conj:
            if isinstance(a, PDigitGeN):
                if a.slope > 0:
                    dead = True
                    break
                parts.append(subst_n(a, start))
            elif isinstance(a, PDivN):
                if a.slope > 0:
                    dead = True
                    break
                parts.append(subst_n(a, start))
            elif isinstance(a, POrdGeN):
                if a.slope.is_zero:
                    parts.append(ord_ge(a.base))
                else:
                    parts.append(ord_ge(o.add(a.base, o.mul(a.slope, o.W))))
            elif isinstance(a, _INCREASING):
                parts.append(subst_n(a, start))
            else:
                parts.append(a)
        if not dead:
            cells_out.append(and_(*parts))
    return or_(*cells_out)


def eventual(p: Pat, space: SpaceDesc) -> Pat:
    """{y : y in p(n) for all large n}; affine fragment only."""
    cells_out = []
    for conj in _param_cells(p):
        parts = []
        dead = False
        for a in conj:
            if isinstance(a, _DECREASING):
                slope = a.slope if isinstance(a, (PDigitGeN, PDivN)) else None
                if isinstance(a, POrdGeN):
                    if a.slope.is_zero:
                        parts.append(ord_ge(a.base))
                    else:
                        dead = True
                        break
                elif slope and slope > 0:
                    dead = True
                    break
                else:
                    parts.append(subst_n(a, 0))
            elif isinstance(a, _INCREASING):
                slope_zero = (a.slope == 0 if isinstance(a, PDigitLtN)
                              else a.slope.is_zero)
                if slope_zero:
                    parts.append(subst_n(a, 0))
                # otherwise eventually true for every fixed y: drop
            else:
                parts.append(a)
        if not dead:
            cells_out.append(and_(*parts))
    return or_(*cells_out)


# ---------------------------------------------------------------------------
# Uniform presentations (truncated geometric sums of step functions).

@dataclass(frozen=True)
class UniformPresentation:
    base: Fraction
    terms: tuple[StepFn, ...]  # g^0 .. g^K, ||g^k|| <= 2^-k for k >= 1
    truncated: bool = False    # True when the terms only approximate the target

    def __post_init__(self) -> None:
        for k, g in enumerate(self.terms):
            if k >= 1 and g.norm() > Fraction(1, 2 ** k):
                raise CertificateViolation(k)

    @property
    def tail_bound(self) -> Fraction:
        if not self.truncated:
            return Fraction(0)
        return Fraction(1, 2 ** max(0, len(self.terms) - 1))

    def partial(self, upto: int) -> StepFn:
        acc = constant(self.base, self.terms[0].space)
        for g in self.terms[:upto]:
            acc = fn_add(acc, g)
        return acc

    def eval_approx(self, x: Ordinal) -> tuple[Fraction, Fraction]:
        v = self.base + sum((g.eval(x) for g in self.terms), Fraction(0))
        return v, self.tail_bound


def monotonize_and_diff(approx: list[StepFn], target: StepFn,
                        strict: bool = True) -> UniformPresentation:
    """Turn certified uniform approximations into a geometric presentation.

    Shifts each f^k down by 2^-(k+3) and clips at 0 (skipped when the raw
    sequence is already nondecreasing), verifies monotonicity and the
    norm discipline of the differences, and folds inf(target) into g^0.
    """
    if not approx:
        raise CertificateViolation("empty approximation sequence")
    if target.inf() < 0:
        raise CertificateViolation("target must be non-negative; split off its infimum")
    if strict:
        for k, f in enumerate(approx):
            if sup_dist(f, target) > Fraction(1, 2 ** (k + 5)):
                raise CertificateViolation(k)
    already_monotone = all(
        fn_sub(approx[k + 1], approx[k]).inf() >= 0 for k in range(len(approx) - 1))
    if already_monotone:
        shifted = list(approx)
    else:
        shifted = [fn_max_const(fn_add_const(f, -Fraction(1, 2 ** (k + 3))), 0)
                   for k, f in enumerate(approx)]
        for k in range(len(shifted) - 1):
            if fn_sub(shifted[k + 1], shifted[k]).inf() < 0:
                raise CertificateViolation(k)
        if strict:
            for k, f in enumerate(shifted):
                if sup_dist(f, target) > Fraction(1, 2 ** (k + 2)):
                    raise CertificateViolation(k)
    # inf(target) rides inside g^0: the approximations target f itself, so the
    # telescoping sum already carries the constant.
    gs = [shifted[0]]
    for k in range(1, len(shifted)):
        g = fn_sub(shifted[k], shifted[k - 1])
        if g.inf() < 0:
            raise CertificateViolation(k)
        if g.norm() > Fraction(1, 2 ** k):
            raise CertificateViolation(k)
        gs.append(g)
    return UniformPresentation(Fraction(0), tuple(gs), truncated=True)
