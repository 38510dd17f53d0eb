"""The separation, oscillation and convergence ranks, and witness verifiers.

For step functions the suprema over rational pairs p < q and over eps > 0
reduce to finite lists: the level pairs are the gaps between consecutive
values, and the oscillation thresholds are the pairwise value gaps (the
derivative is constant between consecutive attainable oscillations).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import ordinal as o
from .altsum import Certificate
from .derivative import (Budget, CantorBendixson, ConvDeriv, DEFAULT_BUDGET,
                         DerivativeOp, IterationTrace, OscDeriv,
                         SeparationDeriv, iterate)
from .errors import BudgetExceeded, InclusionViolation, VerificationError
from .family import TransfiniteFamily, even_diff_union, validate_set_family
from .functions import FnFamily, StepFn
from .ordinal import Ordinal, W
from .patterns import FALSE, TRUE, Pat, and_, or_
from .space import Topology, is_empty, sample_points, subset


@dataclass(frozen=True)
class NotStabilized:
    fixpoint: bool
    reason: str

    def __str__(self) -> str:
        return "not-stabilized(%s)" % self.reason


RankValue = Ordinal | NotStabilized


@dataclass
class RankReport:
    kind: str
    value: RankValue
    witness_param: object
    trace: IterationTrace | None
    per_param: tuple = ()

    @property
    def ordinal(self) -> Ordinal:
        if isinstance(self.value, NotStabilized):
            raise VerificationError("rank did not stabilize: %s" % self.value)
        return self.value


def _rank_of(op: DerivativeOp, start: Pat = TRUE,
             budget: Budget = DEFAULT_BUDGET) -> tuple[RankValue, IterationTrace | None]:
    try:
        trace = iterate(op, start, budget)
    except BudgetExceeded as e:
        t = e.args[0] if e.args else None
        return NotStabilized(False, "budget exceeded"), t
    if trace.rank is None:
        return NotStabilized(trace.fixpoint, trace.reason), trace
    return trace.rank, trace


def alpha_pair(A: Pat, B: Pat, t: Topology,
               budget: Budget = DEFAULT_BUDGET) -> RankReport:
    value, trace = _rank_of(DerivativeOp(SeparationDeriv(A, B), t), TRUE, budget)
    return RankReport("alpha_pair", value, (A, B), trace)


def cb_rank(t: Topology, start: Pat = TRUE,
            budget: Budget = DEFAULT_BUDGET) -> RankReport:
    value, trace = _rank_of(DerivativeOp(CantorBendixson(), t), start, budget)
    return RankReport("cb", value, None, trace)


def _level_pairs(f: StepFn) -> list[tuple[Fraction, Fraction, Pat, Pat]]:
    vals = sorted(f.values())
    out = []
    for i in range(len(vals) - 1):
        p, q = vals[i], vals[i + 1]
        low = or_(*(pat for v, pat in f.pieces if v <= p))
        high = or_(*(pat for v, pat in f.pieces if v >= q))
        out.append((p, q, low, high))
    return out


def alpha_fn(f: StepFn, t: Topology, budget: Budget = DEFAULT_BUDGET) -> RankReport:
    """Separation rank: supremum of alpha over the level pairs of f."""
    pairs = _level_pairs(f)
    if not pairs:
        rep = alpha_pair(FALSE, TRUE, t, budget)
        return RankReport("alpha_fn", rep.value, None, rep.trace)
    best = None
    per = []
    for p, q, A, B in pairs:
        rep = alpha_pair(A, B, t, budget)
        per.append(((p, q), rep.value))
        if isinstance(rep.value, NotStabilized):
            return RankReport("alpha_fn", rep.value, (p, q), rep.trace, tuple(per))
        if best is None or o.compare(rep.value, best[0].value) > 0:
            best = (rep, (p, q))
    return RankReport("alpha_fn", best[0].value, best[1], best[0].trace, tuple(per))


def _gaps(values) -> list[Fraction]:
    vals = sorted(set(values))
    gaps = sorted({b - a for i, a in enumerate(vals) for b in vals[i + 1:]})
    return [g for g in gaps if g > 0]


def beta(f: StepFn, t: Topology, budget: Budget = DEFAULT_BUDGET) -> RankReport:
    """Oscillation rank: supremum over the (finitely many) relevant eps."""
    gaps = _gaps(f.values())
    if not gaps:
        value, trace = _rank_of(DerivativeOp(OscDeriv(f, Fraction(1)), t), TRUE, budget)
        return RankReport("beta", value, Fraction(1), trace)
    best = None
    per = []
    for eps in gaps:
        value, trace = _rank_of(DerivativeOp(OscDeriv(f, eps), t), TRUE, budget)
        per.append((eps, value))
        if isinstance(value, NotStabilized):
            return RankReport("beta", value, eps, trace, tuple(per))
        if best is None or o.compare(value, best[0]) > 0:
            best = (value, eps, trace)
    return RankReport("beta", best[0], best[1], best[2], tuple(per))


def gamma_seq(fam: FnFamily, t: Topology, budget: Budget = DEFAULT_BUDGET) -> RankReport:
    """Convergence rank of a function sequence; pseudouniform iff <= w."""
    gaps = _gaps(fam.values())
    if not gaps:
        value, trace = _rank_of(DerivativeOp(ConvDeriv(fam, Fraction(1)), t),
                                TRUE, budget)
        return RankReport("gamma_seq", value, Fraction(1), trace)
    best = None
    per = []
    for eps in gaps:
        value, trace = _rank_of(DerivativeOp(ConvDeriv(fam, eps), t), TRUE, budget)
        per.append((eps, value))
        if isinstance(value, NotStabilized):
            return RankReport("gamma_seq", value, eps, trace, tuple(per))
        if best is None or o.compare(value, best[0]) > 0:
            best = (value, eps, trace)
    return RankReport("gamma_seq", best[0], best[1], best[2], tuple(per))


def is_pseudouniform(rep: RankReport) -> bool:
    return not isinstance(rep.value, NotStabilized) and o.compare(rep.value, W) <= 0


# ---------------------------------------------------------------------------
# Modified separation rank: witness verification.

def alpha_xi_verify(A: Pat, B: Pat, fam: TransfiniteFamily, xi: int,
                    t: Topology) -> Certificate:
    """Certify alpha_xi(A, B) <= length(fam) by checking the family
    invariants and both inclusions A <= union of even differences <= B^c."""
    from .space import sem_difference
    space = t.space
    claims = tuple(validate_set_family(fam, t, xi=xi))
    u = even_diff_union(fam, space)
    bad = sem_difference(A, u, space)
    if not is_empty(bad, space):
        pt = sample_points(bad, space, 1)
        raise InclusionViolation("A not covered", pt[0] if pt else None)
    bad = and_(u, B)
    if not is_empty(bad, space):
        pt = sample_points(bad, space, 1)
        raise InclusionViolation("differences meet B", pt[0] if pt else None)
    claims = claims + ("A within the even differences", "differences avoid B")
    lam = fam.length.max_exp() or 0
    return Certificate("alpha_xi", lam, xi, claims)


def class_membership(f: StepFn, lam: int, xi: int,
                     witnesses: list[TransfiniteFamily], t: Topology,
                     refined: Topology | None = None,
                     budget: Budget = DEFAULT_BUDGET) -> Certificate:
    """Certify membership in the bounded class of exponent lam at level xi.

    Route one verifies per-level-pair witnesses in the given topology.
    Route two (refined not None) verifies them as level-1 witnesses in a
    finer topology whose new opens live at level xi of the base.  Either
    way the computed separation and oscillation ranks are cross-checked
    against w^lam.
    """
    topo = refined if refined is not None else t
    wit_xi = 1 if refined is not None else xi
    claims: list[str] = []
    pairs = _level_pairs(f)
    bound_len = o.omega_power(lam) if lam else o.from_int(1)
    if pairs:
        if len(witnesses) != len(pairs):
            raise VerificationError("need %d witnesses" % len(pairs))
        for (p, q, A, B), fam in zip(pairs, witnesses):
            if o.compare(fam.length, bound_len) > 0:
                raise VerificationError("witness longer than w^%d" % lam)
            alpha_xi_verify(B, A, fam, wit_xi, topo)
            claims.append("pair (%s, %s) separated at length %s"
                          % (p, q, fam.length))
    a = alpha_fn(f, topo, budget)
    b = beta(f, topo, budget)
    for name, rep in (("alpha", a), ("beta", b)):
        if isinstance(rep.value, NotStabilized) or o.compare(rep.value, bound_len) > 0:
            raise VerificationError("%s rank exceeds w^%d" % (name, lam))
        claims.append("computed %s = %s <= w^%d" % (name, rep.value, lam))
    if refined is not None:
        claims.append("witnesses verified at level 1 in the refined topology")
    return Certificate("class_membership", lam, xi, tuple(claims))