"""Lexicographic energy certificate for the coordinate descent iterates.

``E_k(y) = sum_{i=1..m} k**i * sort(y)_i`` with ``sort`` ascending. With
``k = 1 + C/c`` it drops by at least ``c * |step|`` on every inner update,
which is what rules out cycling. Only meaningful in exact arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ._numeric import to_exact


@dataclass(frozen=True)
class SlopeBounds:
    c: object
    C: object

    @property
    def k(self):
        return 1 + Fraction(self.C) / Fraction(self.c)


def slopes(instance) -> SlopeBounds:
    """Smallest and largest absolute coefficient of ``instance``."""
    mags = [abs(a) for a in instance.coefficients()]
    if not mags:
        raise ValueError("instance has no nonzero coefficients")
    return SlopeBounds(min(mags), max(mags))


def energy(y, k):
    """Exact ``E_k(y)``; Horner's scheme over the ascending sort."""
    k = to_exact(k)
    acc = Fraction(0)
    for value in sorted((to_exact(v) for v in y), reverse=True):
        acc = (acc + value) * k
    return acc


def energy_with_permutation(y, k, perm):
    """``sum_i k**(i+1) * y[perm[i]]`` for an arbitrary ordering ``perm``."""
    k = to_exact(k)
    return sum((k ** (i + 1) * to_exact(y[p]) for i, p in enumerate(perm)), Fraction(0))


@dataclass(frozen=True)
class Certificate:
    passed: bool
    margin: Fraction
    decrease: Fraction


def certify_step(y_before, y_after, bounds: SlopeBounds, step) -> Certificate:
    """Check ``E_k(y_before) - E_k(y_after) >= c * |step|`` exactly."""
    if len(y_before) != len(y_after):
        raise ValueError("residual vectors differ in length")
    k = bounds.k
    decrease = energy(y_before, k) - energy(y_after, k)
    margin = decrease - to_exact(bounds.c) * abs(to_exact(step))
    return Certificate(margin >= 0, margin, decrease)
