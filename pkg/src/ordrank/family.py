"""Finitely-presented ordinal-indexed families of sets.

A family assigns a pattern F_eta to every index eta below its length,
through finitely many segments whose bodies may reference the index via
affine atoms (x >= base + coeff*(eta - shift)).  Everything a decreasing
continuous family is used for reduces to per-point exit indices and
per-segment symbolic analysis, both exact on this fragment.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import ordinal as o
from . import space as sp
from .errors import UnsupportedProgression, VerificationError
from .ordinal import Kind, Ordinal, ZERO, W
from .patterns import (
    FALSE, Pat, PAnd, PNot, POr, POrdGeEta, POrdLtEta, TRUE, and_, digit_mod,
    holds_at, is_concrete, not_, or_, ord_ge, ord_lt, subst_eta,
)
from .space import SpaceDesc, Topology, is_closed, is_empty, sem_eq, subset


@dataclass(frozen=True)
class Segment:
    lo: Ordinal
    hi: Ordinal  # exclusive
    body: Pat    # concrete, or with eta atoms


@dataclass(frozen=True)
class TransfiniteFamily:
    length: Ordinal
    segments: tuple[Segment, ...]

    def segment_of(self, eta: Ordinal) -> Segment:
        for s in self.segments:
            if o.compare(s.lo, eta) <= 0 and o.compare(eta, s.hi) < 0:
                return s
        raise IndexError("index %s outside [0, %s)" % (eta, self.length))

    def at(self, eta: Ordinal) -> Pat:
        """F_eta; empty beyond the length (the usual convention)."""
        if o.compare(eta, self.length) >= 0:
            return FALSE
        return subst_eta(self.segment_of(eta).body, eta)

    def member(self, eta: Ordinal, x: Ordinal) -> bool:
        return holds_at(self.at(eta), x)

    # -- per-point analysis ---------------------------------------------

    def truth_intervals(self, x: Ordinal) -> list[tuple[Ordinal, Ordinal, bool]]:
        """Partition of [0, length) into intervals of constant membership of x."""
        out = []
        for s in self.segments:
            cuts = {s.lo}
            for thr in _eta_breakpoints(s.body, x):
                t = o.add(s.lo, ZERO) if thr is None else thr
                if o.compare(s.lo, t) < 0 and o.compare(t, s.hi) < 0:
                    cuts.add(t)
            marks = sorted(cuts, key=lambda a: a.terms)
            for i, start in enumerate(marks):
                end = marks[i + 1] if i + 1 < len(marks) else s.hi
                val = holds_at(subst_eta(s.body, start), x)
                if out and out[-1][2] == val and out[-1][1] == start:
                    out[-1] = (out[-1][0], end, val)
                else:
                    out.append((start, end, val))
        return out

    def exit_index(self, x: Ordinal) -> Ordinal | None:
        """Least eta < length with x outside F_eta (None if never)."""
        for start, end, val in self.truth_intervals(x):
            if not val:
                return start
        return None

    def pointwise_intersection_tail(self, theta: Ordinal) -> Pat:
        """Symbolic intersection of F_eta for eta < theta (theta a limit
        inside or at the end of the final covering segment)."""
        seg = None
        for s in self.segments:
            if o.compare(s.lo, theta) < 0:
                seg = s
        if seg is None:
            raise ValueError("theta must be positive")
        return _tail_intersection(seg, theta)


def _eta_breakpoints(body: Pat, x: Ordinal) -> list[Ordinal]:
    if isinstance(body, (PAnd, POr)):
        out = []
        for q in body.parts:
            out.extend(_eta_breakpoints(q, x))
        return out
    if isinstance(body, PNot):
        return _eta_breakpoints(body.part, x)
    if isinstance(body, (POrdGeEta, POrdLtEta)):
        # x >= base + coeff*(eta - shift) holds iff eta <= shift + (x-base)//coeff
        if o.compare(x, body.base) < 0:
            return [ZERO]
        zmax = o.nat_div(o.left_sub(x, body.base), body.coeff)
        return [o.add(o.add(body.shift, zmax), 1)]
    return []


def _tail_intersection(seg: Segment, theta: Ordinal) -> Pat:
    """Intersection of seg.body over eta in [seg.lo, theta), theta a limit."""
    body = seg.body
    if is_concrete(body):
        return body
    if isinstance(body, POrdGeEta):
        val = o.add(body.base, o.mul(o.left_sub(theta, body.shift), body.coeff))
        return ord_ge(val)
    if isinstance(body, PAnd):
        return and_(*(_tail_intersection(Segment(seg.lo, seg.hi, q), theta)
                      for q in body.parts))
    raise UnsupportedProgression(
        "symbolic tail intersection unsupported for %r" % (body,))


# ---------------------------------------------------------------------------
# Builders.

def tails_family(length: Ordinal, base: Ordinal = ZERO, shift: Ordinal = ZERO,
                 coeff: int = 1) -> TransfiniteFamily:
    """F_eta = {x >= base + coeff*(eta - shift)} on [shift, shift+length)... the
    canonical decreasing continuous family when called with shift 0."""
    return TransfiniteFamily(length, (Segment(ZERO, length,
                                              POrdGeEta(base, shift, coeff)),))


def explicit_family(patterns: list[Pat]) -> TransfiniteFamily:
    segs = tuple(Segment(o.from_int(i), o.from_int(i + 1), p)
                 for i, p in enumerate(patterns))
    return TransfiniteFamily(o.from_int(len(patterns)), segs)


def from_segments(length: Ordinal, segs: list[tuple[Ordinal, Ordinal, Pat]]) -> TransfiniteFamily:
    return TransfiniteFamily(length, tuple(Segment(a, b, p) for a, b, p in segs))


def pad_with_empty(fam: TransfiniteFamily, new_length: Ordinal) -> TransfiniteFamily:
    if o.compare(new_length, fam.length) < 0:
        raise ValueError("padding cannot shorten")
    if new_length == fam.length:
        return fam
    return TransfiniteFamily(new_length,
                             fam.segments + (Segment(fam.length, new_length, FALSE),))


# ---------------------------------------------------------------------------
# Validation.

def validate_set_family(fam: TransfiniteFamily, t: Topology, xi: int = 1,
                        check_vanishing: bool = True,
                        samples: int = 6) -> list[str]:
    """Check the decreasing-continuous-family invariants; returns the list of
    established certificates, raises VerificationError at the first failure."""
    space = t.space
    certs = []
    # segment structure
    pos = ZERO
    for s in fam.segments:
        if s.lo != pos or o.compare(s.lo, s.hi) >= 0:
            raise VerificationError("segments", "gap or overlap at %s" % s.lo)
        pos = s.hi
    if pos != fam.length:
        raise VerificationError("segments", "segments end at %s, length %s"
                                % (pos, fam.length))
    certs.append("segments partition [0, %s)" % fam.length)
    # F_0 = X
    if not sem_eq(fam.at(ZERO), TRUE, space):
        raise VerificationError("F0", "F_0 must be the whole space")
    certs.append("F_0 = X")
    # decreasing
    for eta in _boundary_and_sample_indices(fam, samples):
        nxt = o.add(eta, 1)
        if o.compare(nxt, fam.length) >= 0:
            continue
        if not subset(fam.at(nxt), fam.at(eta), space):
            raise VerificationError("decreasing", "increases at %s" % eta)
    for s in fam.segments:
        if isinstance(s.body, POrdGeEta) and s.body.coeff < 1:
            raise VerificationError("decreasing", "nonpositive coefficient")
    certs.append("decreasing (segment boundaries symbolic, interior sampled)")
    # continuity at limit boundaries and at sampled interior limits
    for s in fam.segments[1:]:
        if o.classify(s.lo) is Kind.LIMIT:
            tail = fam.pointwise_intersection_tail(s.lo)
            if not sem_eq(fam.at(s.lo), tail, space):
                raise VerificationError("continuity", "at %s" % s.lo)
    for theta in _interior_limits(fam, samples):
        tail = fam.pointwise_intersection_tail(theta)
        if not sem_eq(fam.at(theta), tail, space):
            raise VerificationError("continuity", "at %s" % theta)
    certs.append("continuity at limit stages")
    # vanishing
    if check_vanishing and o.classify(fam.length) is Kind.LIMIT:
        tail = fam.pointwise_intersection_tail(fam.length)
        if not is_empty(tail, space):
            raise VerificationError("vanishing",
                                    "intersection below %s nonempty" % fam.length)
        certs.append("intersection over all indices empty")
    # Pi^0_xi membership
    if xi <= 1:
        for eta in _boundary_and_sample_indices(fam, samples):
            if not is_closed(fam.at(eta), t):
                raise VerificationError("closed", "F_%s not closed" % eta)
        for s in fam.segments:
            if not is_concrete(s.body) and not isinstance(s.body, POrdGeEta):
                raise VerificationError("closed",
                                        "cannot certify closedness of %r" % (s.body,))
        certs.append("members closed (Pi^0_1)")
    else:
        certs.append("members Pi^0_%d (countable space: automatic)" % xi)
    return certs


def _boundary_and_sample_indices(fam: TransfiniteFamily, samples: int) -> list[Ordinal]:
    idx = {ZERO}
    for s in fam.segments:
        idx.add(s.lo)
        for j in range(samples):
            cand = o.add(s.lo, j)
            if o.compare(cand, s.hi) < 0:
                idx.add(cand)
        if o.classify(s.hi) is Kind.SUCCESSOR:
            pred = o.predecessor(s.hi)
            if o.compare(s.lo, pred) <= 0:
                idx.add(pred)
                if o.classify(pred) is Kind.SUCCESSOR:
                    idx.add(o.predecessor(pred))
    out = [e for e in idx if o.compare(e, fam.length) < 0]
    return sorted(out, key=lambda a: a.terms)


def _interior_limits(fam: TransfiniteFamily, samples: int) -> list[Ordinal]:
    out = []
    for s in fam.segments:
        for j in range(1, samples):
            cand = o.add(s.lo, o.mul(W, j))
            if (o.compare(s.lo, cand) < 0 and o.compare(cand, s.hi) < 0
                    and o.classify(cand) is Kind.LIMIT):
                out.append(cand)
    return out


# ---------------------------------------------------------------------------
# Even-difference unions (the transfinite-difference value of a family).

def even_diff_union(fam: TransfiniteFamily, space: SpaceDesc) -> Pat:
    """Union of F_eta minus F_{eta+1} over even eta below the length, with
    F_eta empty from the length on."""
    parts: list[Pat] = []
    for s in fam.segments:
        seg_len = o.left_sub(s.hi, s.lo)
        if seg_len.is_finite:
            eta = s.lo
            while o.compare(eta, s.hi) < 0:
                if o.is_even(eta):
                    parts.append(and_(fam.at(eta), not_(fam.at(o.add(eta, 1)))))
                eta = o.add(eta, 1)
            continue
        # infinite segment: interior differences in closed form
        if is_concrete(s.body):
            pass  # constant on the segment: interior differences vanish
        elif isinstance(s.body, POrdGeEta) and s.body.coeff == 1:
            parts.append(_tail_diffs_pattern(s, space))
        else:
            raise UnsupportedProgression(
                "even differences unsupported for segment body %r" % (s.body,))
        # the last index (present when hi is a successor) crosses into the
        # next segment, so its difference is computed concretely
        if o.classify(s.hi) is Kind.SUCCESSOR:
            last = o.predecessor(s.hi)
            if o.is_even(last):
                parts.append(and_(fam.at(last), not_(fam.at(o.add(last, 1)))))
    return or_(*parts)


def _tail_diffs_pattern(s: Segment, space: SpaceDesc) -> Pat:
    """Union over even eta in [s.lo, s.hi), eta+1 < s.hi, of the singleton
    difference of x >= base + (eta - shift)."""
    base, shift = s.body.base, s.body.shift
    # x = base + z with z in [s.lo - shift, top - shift), eta = shift + z even;
    # when hi is a successor its predecessor's difference crosses segments and
    # is handled by the caller.
    top = s.hi if o.classify(s.hi) is Kind.LIMIT else o.predecessor(s.hi)
    z_lo = o.left_sub(s.lo, shift)
    z_hi = o.left_sub(top, shift)
    x_lo = o.add(base, z_lo)
    x_hi = o.add(base, z_hi)
    itv = and_(ord_ge(x_lo), ord_lt(x_hi))
    # parity of eta = shift + z where z = x - base
    fb, fs = base.fin() % 2, shift.fin() % 2
    near = and_(itv, ord_lt(o.add(base, W)),
                digit_mod(0, 2, (fb + fs) % 2))
    far = and_(itv, ord_ge(o.add(base, W)), digit_mod(0, 2, 0))
    return or_(near, far)
