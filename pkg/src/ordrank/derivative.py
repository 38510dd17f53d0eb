"""Derivative operators on closed sets and their transfinite iteration.

Iteration runs successor stages by direct application; when the last few
stages fit one affine template (every cell slot constant or progressing
affinely), the engine verifies the recurrence at probe indices, checks
that instantiations stay nonempty for every later index, and jumps to the
symbolic intersection at the next limit stage.  Unmatched progressions
fail loudly (`NotStabilized`) instead of guessing.

Soundness of a jump: every accepted cell family is either nested
(constant slots, growing lower bound / cut threshold / divisibility) or
visits each fixed point finitely often (shifting digit sets, moving
positions), so the intersection of the stage unions is exactly the union
of the per-cell intersections computed by the slot rules.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import ordinal as o
from . import space as sp
from .errors import BudgetExceeded, UnsupportedProgression
from .functions import FnFamily, StepFn
from .ordinal import Ordinal, ZERO, W
from .patterns import (
    Cell, DigitSet, FALSE, Pat, TRUE, and_, cell_pattern, cells_pattern,
    digit_in, divpow, ds_and, ds_ge, ds_not, not_, or_, ord_ge, ord_lt,
    to_cells,
)
from .space import SpaceDesc, Topology, canonicalize, closure, is_closed, is_empty, sem_eq, subset


# ---------------------------------------------------------------------------
# Operator variants.

@dataclass(frozen=True)
class SeparationDeriv:
    a: Pat
    b: Pat

    def apply(self, F: Pat, t: Topology) -> Pat:
        return and_(closure(and_(F, self.a), t), closure(and_(F, self.b), t))


@dataclass(frozen=True)
class CantorBendixson:
    def apply(self, F: Pat, t: Topology) -> Pat:
        return sp.cb_derivative(F, t)


@dataclass(frozen=True)
class OscDeriv:
    fn: StepFn
    eps: Fraction

    def apply(self, F: Pat, t: Topology) -> Pat:
        pieces = self.fn.pieces
        parts = []
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                if abs(pieces[i][0] - pieces[j][0]) >= self.eps:
                    parts.append(and_(closure(and_(F, pieces[i][1]), t),
                                      closure(and_(F, pieces[j][1]), t)))
        return and_(F, or_(*parts))


@dataclass(frozen=True)
class ConvDeriv:
    fam: FnFamily
    eps: Fraction

    def tail_disagreement_param(self, space: SpaceDesc) -> Pat:
        """{y : two eps-separated values both occur among f_n(y), n >= N},
        as a pattern affine in the start index N."""
        from .functions import union_from_param
        vals = self.fam.values()
        ever = {v: union_from_param(self.fam.cell_pattern_of(v), space)
                for v in vals}
        parts = []
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                if abs(vals[i] - vals[j]) >= self.eps:
                    parts.append(and_(ever[vals[i]], ever[vals[j]]))
        return or_(*parts)

    def tail_disagreement(self, start: int, space: SpaceDesc) -> Pat:
        from .patterns import subst_n
        return subst_n(self.tail_disagreement_param(space), start)

    def apply(self, F: Pat, t: Topology) -> Pat:
        """F cap the intersection over N of cl(W_N cap F).

        The disagreement sets W_N decrease, so the intersection splits
        exactly into the persistent members (intersection of the W_N cap F,
        affine rules) plus the persistent limit points; the latter are the
        limit part of cl(W_N cap F) once the start index passes every atom
        flip, which is verified at two spread probes."""
        from .functions import intersect_from
        from .patterns import subst_n
        from .space import sem_difference
        space = t.space
        wparam = and_(self.tail_disagreement_param(space), F)
        core = canonicalize(intersect_from(wparam, 0, space), space)
        n_star = 8 + _max_atom_base(wparam)

        def limit_part(n: int) -> Pat:
            wn = canonicalize(subst_n(wparam, n), space)
            return canonicalize(sem_difference(closure(wn, t), wn, space), space)

        lp = limit_part(n_star)
        for probe in (n_star + 7, n_star + 19):
            if not sem_eq(limit_part(probe), lp, space):
                raise UnsupportedProgression(
                    "convergence limit points did not stabilize")
        return and_(F, or_(lp, core))


def _max_atom_base(p: Pat) -> int:
    from .patterns import (PAnd, PDigitGeN, PDigitLtN, PDivN, PNot, POr,
                           POrdGeN, POrdLtN)
    if isinstance(p, (PAnd, POr)):
        return max((_max_atom_base(q) for q in p.parts), default=0)
    if isinstance(p, PNot):
        return _max_atom_base(p.part)
    if isinstance(p, (PDigitGeN, PDigitLtN, PDivN)):
        return p.base + p.slope
    if isinstance(p, (POrdGeN, POrdLtN)):
        return p.base.fin() + p.slope.fin()
    return 0


DerivativeVariant = SeparationDeriv | CantorBendixson | OscDeriv | ConvDeriv


@dataclass(frozen=True)
class DerivativeOp:
    variant: DerivativeVariant
    topology: Topology


@lru_cache(maxsize=8192)
def _apply_cached(op: DerivativeOp, F: Pat) -> Pat:
    return canonicalize(op.variant.apply(F, op.topology), op.topology.space)


def apply(op: DerivativeOp, F: Pat) -> Pat:
    """One derivative step; result is closed and contained in F."""
    try:
        return _apply_cached(op, F)
    except TypeError:  # unhashable custom variants in tests
        return canonicalize(op.variant.apply(F, op.topology), op.topology.space)


# ---------------------------------------------------------------------------
# Affine stage templates.

@dataclass(frozen=True)
class _Slot:
    kind: str          # 'const' | 'lo' | 'div' | 'cut' | 'shift' | 'pos'
    data: tuple


@dataclass(frozen=True)
class CellTemplate:
    lo: Ordinal
    lo_step: Ordinal          # lo at stage j = lo + lo_step*j
    hi: Ordinal | None
    div: int
    div_step: int
    md: DigitSet | None
    digits: tuple             # of (kind, i, i_step, ds, extra)

    def instantiate(self, j: int) -> Pat:
        parts: list[Pat] = []
        div = self.div + self.div_step * j
        if div >= 1:
            parts.append(divpow(div))
        if self.md is not None:
            from .patterns import PMinDigit
            parts.append(PMinDigit(self.md))
        for kind, i, istep, ds, extra in self.digits:
            pos = i + istep * j
            if kind == "cut":
                ds_j = ds_and(ds, ds_ge(extra[0] + extra[1] * j))
            elif kind == "shift":
                ds_j = ds.shift_up(extra[1] * j)
            else:
                ds_j = ds
            parts.append(digit_in(pos, ds_j))
        lo_j = o.add(self.lo, o.mul(self.lo_step, j))
        if not lo_j.is_zero:
            parts.append(ord_ge(lo_j))
        if self.hi is not None:
            parts.append(ord_lt(self.hi))
        return and_(*parts)

    def limit_pattern(self) -> Pat:
        """Intersection over all stages; FALSE when some slot dies."""
        if self.div_step > 0:
            return FALSE
        for kind, i, istep, ds, extra in self.digits:
            if kind == "pos" and istep != 0:
                if 0 in ds:
                    raise UnsupportedProgression("moving digit position with 0 allowed")
                return FALSE
            if kind == "cut" and extra[1] > 0:
                return FALSE
            if kind == "shift" and extra[1] > 0:
                return FALSE
        parts: list[Pat] = []
        if self.div >= 1:
            parts.append(divpow(self.div))
        if self.md is not None:
            from .patterns import PMinDigit
            parts.append(PMinDigit(self.md))
        for kind, i, istep, ds, extra in self.digits:
            parts.append(digit_in(i, ds))
        lo_inf = self.lo if self.lo_step.is_zero else o.add(self.lo, o.mul(self.lo_step, W))
        if not lo_inf.is_zero:
            parts.append(ord_ge(lo_inf))
        if self.hi is not None:
            parts.append(ord_lt(self.hi))
        return and_(*parts)

    def nonempty_forever(self, space: SpaceDesc) -> bool:
        """Do instantiations stay nonempty for every stage index?"""
        bound = space.bound
        for kind, i, istep, ds, extra in self.digits:
            if kind == "const" and ds.is_empty:
                return False
            if kind == "cut" and extra[1] > 0 and ds.is_finite:
                return False
            if kind == "pos" and istep > 0 and bound is not None:
                return False
            if kind == "cut" and extra[1] > 0 and bound is not None:
                # growing threshold at digit i needs w^(i+1) below the bound
                if o.compare(o.omega_power(i + 1), bound) > 0:
                    return False
        if self.div_step > 0 and bound is not None:
            return False
        if not self.lo_step.is_zero and bound is not None:
            lo_inf = o.add(self.lo, o.mul(self.lo_step, W))
            limit_cap = self.hi if self.hi is not None else bound
            if o.compare(lo_inf, limit_cap) >= 0:
                return False
        return True


@dataclass(frozen=True)
class StageTemplate:
    cells: tuple[CellTemplate, ...]

    def instantiate(self, j: int) -> Pat:
        return or_(*(c.instantiate(j) for c in self.cells))

    def limit(self, space: SpaceDesc) -> Pat:
        return canonicalize(or_(*(c.limit_pattern() for c in self.cells)), space)

    def verified(self, recompute, start_index: int, space: SpaceDesc,
                 probes=(7, 19)) -> bool:
        """Check the template against freshly computed stages at probe offsets."""
        for dj in probes:
            want = canonicalize(self.instantiate(dj), space)
            got = recompute(start_index + dj)
            if not sem_eq(want, got, space):
                return False
        return True

    def nonempty_forever(self, space: SpaceDesc) -> bool:
        return any(c.nonempty_forever(space) for c in self.cells)


def _fit_int(seq: list[int]) -> tuple[int, int] | None:
    d = seq[1] - seq[0]
    if d < 0:
        return None
    if all(seq[j + 1] - seq[j] == d for j in range(len(seq) - 1)):
        return seq[0], d
    return None


def _fit_ord(seq: list[Ordinal]) -> tuple[Ordinal, Ordinal] | None:
    if all(x == seq[0] for x in seq):
        return seq[0], ZERO
    try:
        d = o.left_sub(seq[1], seq[0])
    except ValueError:
        return None
    if d.is_zero:
        return None
    if all(o.add(seq[j], d) == seq[j + 1] for j in range(len(seq) - 1)):
        return seq[0], d
    return None


def _fit_digit_slot(entries: list[tuple[int, DigitSet]]):
    positions = [i for i, _ in entries]
    sets = [ds for _, ds in entries]
    pos_fit = _fit_int(positions)
    if pos_fit is None:
        return None
    i0, istep = pos_fit
    if istep != 0:
        if all(s == sets[0] for s in sets):
            return ("pos", i0, istep, sets[0], (0, 0))
        return None
    if all(s == sets[0] for s in sets):
        return ("const", i0, 0, sets[0], (0, 0))
    # threshold cut: ds_j == ds_0-as-base intersected with {>= t0 + d*j}
    mins = [s.min_value() for s in sets]
    if None in mins:
        return None
    tfit = _fit_int(mins)
    if tfit is not None and tfit[1] > 0:
        t0, d = tfit
        base = ds_or_all(sets[0], t0)
        if all(sets[j] == ds_and(base, ds_ge(t0 + d * j)) for j in range(len(sets))):
            return ("cut", i0, 0, base, (t0, d))
        # shift: ds_j == ds_0 shifted up by d*j
        if all(sets[j] == sets[0].shift_up(d * j) for j in range(len(sets))):
            return ("shift", i0, 0, sets[0], (0, d))
    return None


def ds_or_all(ds: DigitSet, t0: int) -> DigitSet:
    """Extend a threshold-cut set downward so the cut at t0 reproduces it."""
    # base := ds union everything below t0 that matches ds's tail pattern;
    # using ds itself suffices because the cut re-intersects with >= t0.
    return ds


def match_template(window: list[tuple[Cell, ...]], space: SpaceDesc) -> StageTemplate | None:
    k = len(window)
    if k < 3 or any(len(cs) != len(window[0]) for cs in window):
        return None
    if len(window[0]) == 0:
        return None
    out = []
    for idx in range(len(window[0])):
        fam = [cs[idx] for cs in window]
        lo_fit = _fit_ord([c.lo for c in fam])
        if lo_fit is None:
            return None
        his = [c.hi for c in fam]
        if any((h is None) != (his[0] is None) for h in his):
            return None
        if his[0] is not None and any(h != his[0] for h in his):
            return None
        div_fit = _fit_int([c.div for c in fam])
        if div_fit is None:
            return None
        mds = [c.md for c in fam]
        if any(m != mds[0] for m in mds):
            return None
        if any(len(c.digits) != len(fam[0].digits) for c in fam):
            return None
        slots = []
        for s in range(len(fam[0].digits)):
            fit = _fit_digit_slot([c.digits[s] for c in fam])
            if fit is None:
                return None
            slots.append(fit)
        out.append(CellTemplate(lo_fit[0], lo_fit[1], his[0],
                                div_fit[0], div_fit[1], mds[0], tuple(slots)))
    return StageTemplate(tuple(out))


@dataclass(frozen=True)
class PeriodicTemplate:
    """Stages repeating a shape with period p; each residue class is affine.

    The stages decrease, so the intersection over every stage equals the
    intersection over the class-0 cofinal subsequence; rank soundness only
    needs every class to stay nonempty."""
    period: int
    classes: tuple[StageTemplate, ...]

    def instantiate(self, dj: int) -> Pat:
        return self.classes[dj % self.period].instantiate(dj // self.period)

    def limit(self, space: SpaceDesc) -> Pat:
        return self.classes[0].limit(space)

    def nonempty_forever(self, space: SpaceDesc) -> bool:
        return all(c.nonempty_forever(space) for c in self.classes)

    def verified(self, recompute, start_index: int, space: SpaceDesc,
                 probes=(7, 12)) -> bool:
        for dj in probes:
            want = canonicalize(self.instantiate(dj), space)
            got = recompute(start_index + dj)
            if not sem_eq(want, got, space):
                return False
        return True


def match_any_template(window: list[tuple[Cell, ...]], space: SpaceDesc):
    tmpl = match_template(window, space)
    if tmpl is not None:
        return PeriodicTemplate(1, (tmpl,))
    if len(window) >= 6:
        cls0 = match_template(window[0::2], space)
        cls1 = match_template(window[1::2], space)
        if cls0 is not None and cls1 is not None:
            return PeriodicTemplate(2, (cls0, cls1))
    return None


# ---------------------------------------------------------------------------
# Transfinite iteration.

@dataclass(frozen=True)
class Budget:
    successors: int = 10_000
    jumps: int = 100
    window: int = 6


DEFAULT_BUDGET = Budget()


@dataclass
class IterationTrace:
    op: DerivativeOp
    events: list[tuple[Ordinal, Pat]] = field(default_factory=list)
    rank: Ordinal | None = None
    fixpoint: bool = False
    stabilized: bool = True
    reason: str = ""
    budget_used: int = 0
    limit_jumps: int = 0

    def stage_at(self, theta: Ordinal) -> Pat:
        """The stage set at any theta up to the rank (exact, recomputing
        forward from the nearest recorded stage when necessary)."""
        if self.rank is not None and o.compare(theta, self.rank) >= 0:
            return FALSE
        best = None
        for stage, pat in self.events:
            if o.compare(stage, theta) <= 0:
                if best is None or o.compare(stage, best[0]) > 0:
                    best = (stage, pat)
        if best is None:
            raise ValueError("stage %s precedes the trace" % theta)
        stage, pat = best
        if stage == theta:
            return pat
        gap = o.left_sub(theta, stage)
        if not gap.is_finite:
            raise ValueError("stage %s not recorded and not finitely past %s"
                             % (theta, stage))
        for _ in range(gap.to_int()):
            pat = apply(self.op, pat)
        return pat

    def log_lines(self) -> list[str]:
        from .fixtures import pattern_to_sexpr
        return ["stage %s set %s" % (stage, pattern_to_sexpr(pat))
                for stage, pat in self.events]


def rank_of(op: DerivativeOp, budget: Budget = DEFAULT_BUDGET) -> IterationTrace:
    """Iterate from the whole space; the trace carries the rank, or the
    omega_1-style markers (fixpoint / budget) instead of a number."""
    return iterate(op, TRUE, budget)


def iterate(op: DerivativeOp, F0: Pat, budget: Budget = DEFAULT_BUDGET) -> IterationTrace:
    t = op.topology
    space = t.space
    trace = IterationTrace(op)
    cur = canonicalize(F0, space)
    if not is_closed(cur, t):
        raise ValueError("iteration must start from a closed set")
    stage = ZERO
    run_start = ZERO
    trace.events.append((stage, cur))
    window: list[tuple[Cell, ...]] = []
    while True:
        if is_empty(cur, space):
            trace.rank = stage
            return trace
        if trace.budget_used >= budget.successors:
            trace.stabilized = False
            trace.reason = "successor budget exhausted"
            raise BudgetExceeded(trace)
        nxt = apply(op, cur)
        trace.budget_used += 1
        if not subset(nxt, cur, space):
            raise AssertionError("derivative failed to contract")
        if sem_eq(nxt, cur, space):
            trace.rank = None
            trace.fixpoint = True
            trace.stabilized = False
            trace.reason = "nonempty fixpoint (rank marker omega_1)"
            return trace
        stage = o.add(stage, 1)
        cur = nxt
        trace.events.append((stage, cur))
        window.append(to_cells(cur, space.bound))
        if len(window) > budget.window:
            window.pop(0)
        if len(window) == budget.window and trace.limit_jumps < budget.jumps:
            tmpl = match_any_template(window, space)
            if tmpl is None:
                continue
            start_idx = stage.fin() - (budget.window - 1)

            def recompute(j_abs: int, _cur=window[0]) -> Pat:
                pat = cells_pattern(_cur)
                for _ in range(j_abs - start_idx):
                    pat = apply(op, pat)
                return pat

            if not tmpl.verified(recompute, start_idx, space):
                continue
            if not tmpl.nonempty_forever(space):
                continue
            lim = tmpl.limit(space)
            if not all(subset(lim, cells_pattern(w), space) for w in window):
                continue
            target = o.add(run_start, W)
            trace.limit_jumps += 1
            trace.events.append((target, lim))
            stage = target
            run_start = target
            cur = lim
            window = []
