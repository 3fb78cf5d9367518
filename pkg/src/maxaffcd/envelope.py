"""Upper envelopes of univariate lines ``t -> slope * t + intercept``.

Works with floats and Fractions alike; every operation is a comparison or
a field operation, so exact inputs give exact outputs.
"""
from __future__ import annotations

from dataclasses import dataclass


class UnboundedMinimumError(ValueError):
    """The envelope has no bounded set of minimizers."""


@dataclass(frozen=True)
class MinimizerInterval:
    lower: object
    upper: object
    value: object

    @property
    def midpoint(self):
        return (self.lower + self.upper) / 2


def _meet(line1, line2):
    (a1, c1), (a2, c2) = line1, line2
    return (c1 - c2) / (a2 - a1)


def upper_envelope(lines):
    """Return the lines appearing on the upper envelope, by increasing slope.

    ``lines`` is an iterable of ``(slope, intercept)`` pairs. Among equal
    slopes only the highest intercept survives.
    """
    ordered = sorted(lines)
    hull = []
    for line in ordered:
        if hull and hull[-1][0] == line[0]:
            hull.pop()  # sorted ascending: the later one has the larger intercept
        while len(hull) >= 2 and _meet(hull[-2], line) <= _meet(hull[-2], hull[-1]):
            hull.pop()
        hull.append(line)
    return hull


def breakpoints(hull):
    return [_meet(hull[k], hull[k + 1]) for k in range(len(hull) - 1)]


def minimize(lines) -> MinimizerInterval:
    """Minimum value and minimizer interval of the max of ``lines``.

    Raises :class:`UnboundedMinimumError` if the minimum is not attained
    on a bounded interval.
    """
    hull = upper_envelope(lines)
    if not hull:
        raise UnboundedMinimumError("no lines")
    p = next((k for k, (a, _) in enumerate(hull) if a >= 0), None)
    if p is None or (p == 0 and hull[0][0] > 0):
        raise UnboundedMinimumError("envelope is monotone")
    if hull[p][0] > 0:
        t = _meet(hull[p - 1], hull[p])
        return MinimizerInterval(t, t, hull[p][0] * t + hull[p][1])
    # flat segment
    if p == 0 or p == len(hull) - 1:
        raise UnboundedMinimumError("flat segment extends to infinity")
    return MinimizerInterval(
        _meet(hull[p - 1], hull[p]), _meet(hull[p], hull[p + 1]), hull[p][1]
    )


def crossing(increasing, decreasing):
    """Unique root of ``max(increasing) == max(decreasing)``.

    Both arguments are non-empty collections of lines with strictly positive
    (resp. negative) slopes. The difference of the two envelopes is strictly
    increasing, so the root is found by merging their breakpoints and
    solving one linear equation on the segment where the sign changes.
    """
    up = upper_envelope(increasing)
    down = upper_envelope(decreasing)
    if not up or not down:
        raise UnboundedMinimumError("one-sided column")
    # breakpoints of each envelope, ascending in t
    up_bp = breakpoints(up)
    down_bp = breakpoints(down)

    def diff_at(t, ku, kd):
        (au, cu), (ad, cd) = up[ku], down[kd]
        return (au * t + cu) - (ad * t + cd)

    # walk merged breakpoints left to right, tracking the active pieces
    ku = kd = 0
    iu = id_ = 0
    while True:
        nxt_u = up_bp[iu] if iu < len(up_bp) else None
        nxt_d = down_bp[id_] if id_ < len(down_bp) else None
        if nxt_u is None and nxt_d is None:
            break
        if nxt_d is None or (nxt_u is not None and nxt_u <= nxt_d):
            t = nxt_u
        else:
            t = nxt_d
        if diff_at(t, ku, kd) >= 0:
            break
        if nxt_u is not None and t == nxt_u:
            ku += 1
            iu += 1
        if nxt_d is not None and t == nxt_d:
            kd += 1
            id_ += 1
    (au, cu), (ad, cd) = up[ku], down[kd]
    assert au != ad, "difference of envelopes is not strictly increasing"
    return (cd - cu) / (au - ad)
