"""Transfinite alternating sums of decreasing function sequences.

The sequences are nonnegative combinations of decreasing set families, so
the index map eta -> f_eta(x) is a step function of eta with finitely
many ordinal thresholds.  The alternating sum up to theta is then evaluated
exactly by crossing the constant intervals: over a stretch of constant
value v starting at an even index, the partial sum gains v at odd stages
and returns at even and limit stages; starting at an odd index it dips by
v at even stages.  Limit stages agree with the supremum of even partial
sums below, so no approximation is involved.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import ordinal as o
from .errors import (ExitNotFound, PrecisionUnreachable, ResidualViolation,
                     VerificationError, WitnessMismatch)
from .family import TransfiniteFamily, even_diff_union, validate_set_family
from .functions import StepFn, UniformPresentation, char_fn, constant
from .ordinal import Kind, Ordinal, Parity, ZERO, parity
from .patterns import TRUE, and_, not_, or_
from .space import SpaceDesc, Topology, sample_points, sem_eq


# ---------------------------------------------------------------------------
# Indexed function sequences.

@dataclass(frozen=True)
class ComboSeq:
    """f_eta = sum of weight_i * chi(F^i_eta); weights nonnegative."""
    terms: tuple[tuple[Fraction, TransfiniteFamily], ...]
    length: Ordinal
    space: SpaceDesc

    def value_trace(self, x: Ordinal) -> tuple[tuple[Ordinal, Fraction], ...]:
        """The step function eta -> f_eta(x) as ((from, value), ...)."""
        cuts = {ZERO}
        for _, fam in self.terms:
            for start, _end, _val in fam.truth_intervals(x):
                cuts.add(start)
            if o.compare(fam.length, self.length) < 0:
                cuts.add(fam.length)
        marks = sorted(cuts, key=lambda a: a.terms)
        out = []
        for m in marks:
            val = self.value(m, x)
            if not out or out[-1][1] != val:
                out.append((m, val))
        return tuple(out)

    def value(self, eta: Ordinal, x: Ordinal) -> Fraction:
        return sum((w for w, fam in self.terms if fam.member(eta, x)
                    if o.compare(eta, fam.length) < 0), Fraction(0))

    def at(self, eta: Ordinal) -> StepFn:
        fn = constant(0, self.space)
        from .functions import fn_add, fn_scale
        for w, fam in self.terms:
            fn = fn_add(fn, fn_scale(char_fn(fam.at(eta), self.space), w))
        return fn

    def norm_bound(self) -> Fraction:
        return sum((w for w, _ in self.terms), Fraction(0))


def char_seq(fam: TransfiniteFamily, space: SpaceDesc) -> ComboSeq:
    return ComboSeq(((Fraction(1), fam),), fam.length, space)


@dataclass(frozen=True)
class DUSBSeq:
    seq: ComboSeq
    xi: int
    certs: tuple[str, ...]

    @property
    def length(self) -> Ordinal:
        return self.seq.length


def verify_dusb(seq: ComboSeq, xi: int, t: Topology,
                check_vanishing: bool = True) -> DUSBSeq:
    """Establish the decreasing-sequence certificates or raise with the
    first violated one."""
    certs = []
    for w, fam in seq.terms:
        if w < 0:
            raise VerificationError("nonnegative", "weight %s" % w)
    certs.append("nonnegative (weights >= 0, indicator components)")
    certs.append("bounded by %s" % seq.norm_bound())
    for i, (w, fam) in enumerate(seq.terms):
        sub = validate_set_family(
            fam, t, xi=xi,
            check_vanishing=check_vanishing and o.classify(seq.length) is Kind.LIMIT)
        certs.append("component %d: %s" % (i, "; ".join(sub)))
        if o.compare(fam.length, seq.length) > 0:
            raise VerificationError("length", "component %d too long" % i)
    if check_vanishing and o.classify(seq.length) is Kind.LIMIT:
        certs.append("vanishing at the limit length (componentwise)")
    return DUSBSeq(seq, xi, tuple(certs))


# ---------------------------------------------------------------------------
# Exact evaluation.

def _cross(sum0: Fraction, a: Ordinal, b: Ordinal, v: Fraction) -> Fraction:
    """Partial sum after an interval of constant value v on [a, b)."""
    if v == 0:
        return sum0
    if parity(a) is Parity.EVEN:
        return sum0 + (v if parity(b) is Parity.ODD else 0)
    return sum0 - (v if parity(b) is Parity.EVEN else 0)


def altsum_eval(d: DUSBSeq | ComboSeq, x: Ordinal, theta: Ordinal) -> Fraction:
    """Alternating sum of f_eta(x) over eta < theta, theta <= length."""
    seq = d.seq if isinstance(d, DUSBSeq) else d
    if o.compare(theta, seq.length) > 0:
        raise ValueError("theta beyond the sequence length")
    if theta.is_zero:
        return Fraction(0)
    trace = seq.value_trace(x)
    total = Fraction(0)
    for i, (start, val) in enumerate(trace):
        if o.compare(start, theta) >= 0:
            break
        end = trace[i + 1][0] if i + 1 < len(trace) else theta
        if o.compare(end, theta) > 0:
            end = theta
        total = _cross(total, start, end, val)
    return total


def altsum_unrolled(d: DUSBSeq | ComboSeq, x: Ordinal, steps: int) -> list[Fraction]:
    """Finite prefix of partial sums by the literal recursion (test oracle)."""
    seq = d.seq if isinstance(d, DUSBSeq) else d
    out = [Fraction(0)]
    for n in range(steps):
        eta = o.from_int(n)
        sign = 1 if o.is_even(eta) else -1
        out.append(out[-1] + sign * seq.value(eta, x))
    return out


def exit_parity_eval(fam: TransfiniteFamily, x: Ordinal) -> int:
    """1 iff x lies in an even transfinite difference of the family.

    The least index expelling x is a successor zeta+1 (sets beyond the
    length count as empty); the answer is the parity bit of zeta."""
    e = fam.exit_index(x)
    if e is None:
        if o.classify(fam.length) is not Kind.SUCCESSOR:
            raise ExitNotFound(x)
        e = fam.length
    if o.classify(e) is not Kind.SUCCESSOR:
        raise ExitNotFound("exit at limit index %s for %s" % (e, x))
    zeta = o.predecessor(e)
    return 1 if o.is_even(zeta) else 0


# ---------------------------------------------------------------------------
# Decomposition builders.

@dataclass(frozen=True)
class Certificate:
    kind: str
    lam: int
    xi: int
    claims: tuple[str, ...]


def build_char_decomposition(fam: TransfiniteFamily, t: Topology,
                             xi: int = 1) -> DUSBSeq:
    """The indicator sequence of a separation family."""
    return verify_dusb(char_seq(fam, t.space), xi, t)


def build_step_decomposition(f: StepFn, witnesses: list[TransfiniteFamily],
                             t: Topology, xi: int = 1) -> DUSBSeq:
    """Combine per-level witnesses into a sequence with alternating sum f.

    Levels are the descending value thresholds of f (the same pairs the
    separation rank takes its supremum over); witnesses[i] must realize
    {f >= v_i} as its union of even differences.  Nesting the levels keeps
    every f_eta bounded by ||f||.
    """
    if f.inf() < 0:
        raise WitnessMismatch("decompose nonnegative functions only")
    vals = sorted(f.values(), reverse=True)
    levels = [v for v in vals if v > 0]
    if len(witnesses) != len(levels):
        raise WitnessMismatch("need %d level witnesses, got %d"
                              % (len(levels), len(witnesses)))
    space = t.space
    terms = []
    max_len = ZERO
    for i, v in enumerate(levels):
        nxt = levels[i + 1] if i + 1 < len(levels) else Fraction(0)
        weight = v - nxt
        level_set = or_(*(p for w, p in f.pieces if w >= v))
        u = even_diff_union(witnesses[i], space)
        if not sem_eq(u, level_set, space):
            bad = sample_points(or_(and_(u, not_(level_set)),
                                    and_(level_set, not_(u))), space, 1)
            raise WitnessMismatch("level %s witness realizes the wrong set"
                                  % v, bad[0] if bad else None)
        terms.append((weight, witnesses[i]))
        if o.compare(witnesses[i].length, max_len) > 0:
            max_len = witnesses[i].length
    padded = tuple((w, fam) for w, fam in terms)
    seq = ComboSeq(padded, max_len, space)
    if seq.norm_bound() > f.norm():
        raise WitnessMismatch("norm discipline violated: %s > %s"
                              % (seq.norm_bound(), f.norm()))
    return verify_dusb(seq, xi, t)


@dataclass(frozen=True)
class LazyDUSB:
    """Per-term sequences for the geometric pieces of a presentation."""
    presentation: UniformPresentation
    terms: tuple[DUSBSeq, ...]

    def __post_init__(self) -> None:
        for k, d in enumerate(self.terms):
            if k >= 1 and d.seq.norm_bound() > Fraction(1, 2 ** k):
                raise VerificationError("geometric norm", "term %d" % k)


def build_uniform_decomposition(pres: UniformPresentation,
                                per_term: list[DUSBSeq]) -> LazyDUSB:
    if len(per_term) != len(pres.terms):
        raise VerificationError("terms", "need one sequence per presentation term")
    return LazyDUSB(pres, tuple(per_term))


def eval_to_precision(lazy: LazyDUSB, x: Ordinal, theta: Ordinal,
                      eps: Fraction) -> tuple[Fraction, Fraction]:
    """An interval of width < eps certified to contain the full sum.

    Every term's partial sums lie in [0, ||g^k||], so truncating after K
    leaves an error inside [0, 2^-K]."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    k = 0
    while Fraction(1, 2 ** k) >= eps / 2:
        k += 1
    avail = len(lazy.terms) - 1
    if k > avail:
        if lazy.presentation.truncated:
            raise PrecisionUnreachable(eps)
        k = avail  # a complete presentation is exact once every term is in
    s = lazy.presentation.base
    for d in lazy.terms[:k + 1]:
        th = theta if o.compare(theta, d.length) <= 0 else d.length
        s += altsum_eval(d, x, th)
    tail = Fraction(1, 2 ** k) if k < avail or lazy.presentation.truncated else Fraction(0)
    return s, s + tail


def length_upper_certificate(f: StepFn, witness: DUSBSeq, lam: int,
                             t: Topology, const: Fraction = Fraction(0),
                             sample_cap: int = 60,
                             even_thetas: int = 10) -> Certificate:
    """Certify f = const + alternating sum of the witness, with the residual
    sandwich 0 <= f - partial <= f_theta at sampled even stages."""
    space = t.space
    bound_len = o.omega_power(lam) if lam else o.from_int(1)
    if o.compare(witness.length, bound_len) > 0:
        raise WitnessMismatch("witness length %s exceeds w^%d"
                              % (witness.length, lam))
    pts = sample_points(TRUE, space, per_cell=sample_cap)[:sample_cap]
    claims = []
    for x in pts:
        got = const + altsum_eval(witness, x, witness.length)
        want = f.eval(x)
        if got != want:
            raise WitnessMismatch("identity fails at %s: %s != %s" % (x, got, want))
    claims.append("f = const + alternating sum at %d sampled points" % len(pts))
    thetas = _even_stage_samples(witness.length, even_thetas)
    for theta in thetas:
        for x in pts[: max(6, len(pts) // 4)]:
            part = const + altsum_eval(witness, x, theta)
            resid = f.eval(x) - part
            cap = witness.seq.value(theta, x) if o.compare(theta, witness.length) < 0 else Fraction(0)
            if resid < 0 or resid > cap:
                raise ResidualViolation(x, theta)
    claims.append("residual sandwich at %d even stages" % len(thetas))
    return Certificate("length_upper", lam, witness.xi, tuple(claims))


def _even_stage_samples(length: Ordinal, count: int) -> list[Ordinal]:
    out = {ZERO}
    if o.classify(length) is Kind.LIMIT:
        for n in range(count):
            out.add(o.fundamental_sequence(length, n, even_only=True))
    else:
        eta = ZERO
        while o.compare(eta, length) < 0 and len(out) < count:
            if o.is_even(eta):
                out.add(eta)
            eta = o.add(eta, 1)
    out.add(o.even_floor(length))
    return sorted(out, key=lambda a: a.terms)[:count]
