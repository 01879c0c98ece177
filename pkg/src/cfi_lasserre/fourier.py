"""Sparse Fourier representation of 0/1 juntas on edge bits, and the functions h_sigma."""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable

from .resolution import bits_of, var_edge_shift
from .xor_system import PartialIso, XorSystem, alpha_of, is_harmonious


class AmbientMismatch(ValueError):
    pass


def _parity(x: int) -> int:
    return x.bit_count() & 1


class SparseBoolFn:
    """Function {0,1}^m -> Q stored by its nonzero Fourier coefficients.

    Inputs and coefficient indices are int bitsets over the m ambient bits.
    """

    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, coeffs: dict):
        self.m = m
        self.coeffs = {S: Fraction(c) for S, c in coeffs.items() if c != 0}

    @classmethod
    def zero(cls, m: int) -> "SparseBoolFn":
        return cls(m, {})

    @classmethod
    def one(cls, m: int) -> "SparseBoolFn":
        return cls(m, {0: Fraction(1)})

    def __getitem__(self, S: int) -> Fraction:
        return self.coeffs.get(S, Fraction(0))

    def __eq__(self, other):
        return isinstance(other, SparseBoolFn) and self.m == other.m and self.coeffs == other.coeffs

    def __repr__(self):
        items = ", ".join(f"{bits_of(S)}: {c}" for S, c in sorted(self.coeffs.items()))
        return f"SparseBoolFn(m={self.m}, {{{items}}})"

    def is_zero(self) -> bool:
        return not self.coeffs

    def support(self) -> int:
        """Union of the indices with nonzero coefficient (the junta variables)."""
        out = 0
        for S in self.coeffs:
            out |= S
        return out

    def degree(self) -> int:
        return max((S.bit_count() for S in self.coeffs), default=0)

    def evaluate(self, x: int) -> Fraction:
        return sum((c if not _parity(S & x) else -c for S, c in self.coeffs.items()), Fraction(0))

    def mean(self) -> Fraction:
        return self[0]

    def sum_of_squares(self) -> Fraction:
        return sum((c * c for c in self.coeffs.values()), Fraction(0))


def _check(f: SparseBoolFn, g: SparseBoolFn):
    if f.m != g.m:
        raise AmbientMismatch("functions live on different ambient sets")


def add(f: SparseBoolFn, g: SparseBoolFn) -> SparseBoolFn:
    _check(f, g)
    out = dict(f.coeffs)
    for S, c in g.coeffs.items():
        out[S] = out.get(S, 0) + c
    return SparseBoolFn(f.m, out)


def multiply(f: SparseBoolFn, g: SparseBoolFn) -> SparseBoolFn:
    """Pointwise product via convolution: (fg)^(I) = sum_J f^(J) g^(I xor J)."""
    _check(f, g)
    out = {}
    for S, a in f.coeffs.items():
        for T, b in g.coeffs.items():
            k = S ^ T
            out[k] = out.get(k, 0) + a * b
    return SparseBoolFn(f.m, out)


def indicator_fourier(assignment: dict, m: int) -> SparseBoolFn:
    """Fourier expansion of the indicator that bits ``e`` equal ``assignment[e]``.

    Coefficient at J inside the fixed set I is (-1)^(xor of the fixed values on J) / 2^|I|.
    """
    fixed = 0
    ones = 0
    for e, b in assignment.items():
        fixed |= 1 << e
        if b:
            ones |= 1 << e
    scale = Fraction(1, 1 << fixed.bit_count())
    coeffs = {}
    # enumerate subsets of the fixed set
    J = fixed
    while True:
        coeffs[J] = -scale if _parity(J & ones) else scale
        if J == 0:
            break
        J = (J - 1) & fixed
    return SparseBoolFn(m, coeffs)


def fourier_of(func: Callable[[int], int], support: Iterable[int], m: int) -> SparseBoolFn:
    """Brute-force expansion of a function depending only on the ``support`` bits."""
    sup = list(support)
    pts = []
    for k in range(1 << len(sup)):
        x = 0
        for i, e in enumerate(sup):
            if k >> i & 1:
                x |= 1 << e
        pts.append(x)
    n = len(pts)
    coeffs = {}
    for S in pts:
        total = 0
        for x in pts:
            total += -func(x) if _parity(S & x) else func(x)
        if total:
            coeffs[S] = Fraction(total, n)
    return SparseBoolFn(m, coeffs)


def edge_assignment(sys: XorSystem, sigma: PartialIso, collapse: str = "twisted"):
    """Edge-bit assignment forced by alpha_sigma, or None if it is contradictory or undefined."""
    if sigma.is_bottom or not is_harmonious(sys, sigma):
        return None
    out = {}
    for var, val in alpha_of(sys, sigma).items():
        e, shift = var_edge_shift(sys, var, collapse)
        b = val ^ shift
        if out.setdefault(e, b) != b:
            return None
    return out


def h_of_sigma(sys: XorSystem, sigma: PartialIso, collapse: str = "twisted") -> SparseBoolFn:
    """h_sigma on the base edge bits: 1 iff w agrees with every variable alpha_sigma fixes.

    Variable x_(v,u) (or y_(v,u)) is compared against w_e, shifted by c_e when
    v is the larger endpoint of e, so that the comparison is against the
    solution of the local constraints determined by w.  ``collapse="literal"``
    compares against w_e unshifted.
    """
    m = sys.base.edge_count
    a = edge_assignment(sys, sigma, collapse)
    if a is None:
        return SparseBoolFn.zero(m)
    return indicator_fourier(a, m)
