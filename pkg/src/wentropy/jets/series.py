"""Truncated power series in z_1..z_n, zbar_1..zbar_n over exact Gaussian rationals.

Monomials are packed into a single integer, 4 bits per variable: variable
``k < n`` is ``z_k`` and variable ``n + k`` is ``zbar_k``.  Coefficients are
pairs ``(re, im)`` of ``gmpy2.mpq``.

A series carries a ``cap``: every coefficient of total degree <= cap is exact,
nothing above it is stored.  Differentiation lowers the cap by one, products
take the smaller cap, so reading a coefficient that the inputs cannot support
raises :class:`DegreeOverflow` instead of returning a silently wrong number.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from gmpy2 import mpq

_BITS = 4
_MASK = (1 << _BITS) - 1
MAX_CAP = _MASK

ZERO = mpq(0)
ONE = mpq(1)


class DegreeOverflow(ValueError):
    """A coefficient beyond the exactness cap of a series was requested."""

    def __init__(self, needed: int, cap: int, what: str = "series"):
        self.needed = needed
        self.cap = cap
        super().__init__(
            f"{what}: degree {needed} requested but only exact to degree {cap}; "
            f"rebuild the jet with a larger degree cap D"
        )


def as_gauss(x) -> tuple:
    """Coerce int / Fraction / mpq / (re, im) / complex-with-rational-parts to a pair."""
    if isinstance(x, tuple):
        return (mpq(x[0]), mpq(x[1]))
    if isinstance(x, complex):
        return (mpq(Fraction(x.real)), mpq(Fraction(x.imag)))
    return (mpq(x), ZERO)


def pack(exps: Iterable[int]) -> int:
    key = 0
    for i, e in enumerate(exps):
        if e > _MASK:
            raise ValueError("exponent too large for packed monomial")
        key |= e << (_BITS * i)
    return key


def unpack(key: int, nvars: int) -> tuple[int, ...]:
    return tuple((key >> (_BITS * i)) & _MASK for i in range(nvars))


def key_degree(key: int) -> int:
    d = 0
    while key:
        d += key & _MASK
        key >>= _BITS
    return d


class TruncSeries:
    """Immutable truncated series in ``2n`` variables (z's then zbar's)."""

    __slots__ = ("n", "cap", "terms")

    def __init__(self, n: int, cap: int, terms: dict | None = None):
        if cap > MAX_CAP:
            raise ValueError(f"cap {cap} exceeds packed-monomial limit {MAX_CAP}")
        self.n = n
        self.cap = cap
        self.terms = {}
        if terms:
            for k, c in terms.items():
                if key_degree(k) <= cap and (c[0] or c[1]):
                    self.terms[k] = c

    # -- construction -------------------------------------------------------
    @classmethod
    def constant(cls, n: int, cap: int, value=1) -> "TruncSeries":
        return cls(n, cap, {0: as_gauss(value)})

    @classmethod
    def monomial(cls, n: int, cap: int, exps, coeff=1) -> "TruncSeries":
        return cls(n, cap, {pack(exps): as_gauss(coeff)})

    @classmethod
    def z(cls, n: int, cap: int, k: int) -> "TruncSeries":
        e = [0] * (2 * n)
        e[k] = 1
        return cls.monomial(n, cap, e)

    @classmethod
    def zbar(cls, n: int, cap: int, k: int) -> "TruncSeries":
        e = [0] * (2 * n)
        e[n + k] = 1
        return cls.monomial(n, cap, e)

    def _new(self, cap: int, terms: dict) -> "TruncSeries":
        out = TruncSeries.__new__(TruncSeries)
        out.n = self.n
        out.cap = cap
        out.terms = terms
        return out

    # -- inspection ---------------------------------------------------------
    @property
    def nvars(self) -> int:
        return 2 * self.n

    def coeff(self, exps) -> tuple:
        d = sum(exps)
        if d > self.cap:
            raise DegreeOverflow(d, self.cap)
        return self.terms.get(pack(exps), (ZERO, ZERO))

    def at_zero(self) -> tuple:
        if self.cap < 0:
            raise DegreeOverflow(0, self.cap)
        return self.terms.get(0, (ZERO, ZERO))

    def is_zero(self) -> bool:
        return not self.terms

    def min_degree(self) -> int:
        if not self.terms:
            return self.cap + 1
        return min(key_degree(k) for k in self.terms)

    def items(self):
        for k, c in self.terms.items():
            yield unpack(k, self.nvars), c

    def __repr__(self):
        parts = []
        for e, (re, im) in sorted(self.items(), key=lambda t: (sum(t[0]), t[0])):
            parts.append(f"({re}{'+' if im >= 0 else ''}{im}i)*{e}")
        return f"TruncSeries(n={self.n}, cap={self.cap}: " + " + ".join(parts or ["0"]) + ")"

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "TruncSeries"):
        if other.n != self.n:
            raise ValueError("series in different dimensions")

    def __add__(self, other):
        if not isinstance(other, TruncSeries):
            other = TruncSeries.constant(self.n, self.cap, other)
        self._check(other)
        cap = min(self.cap, other.cap)
        out = {k: c for k, c in self.terms.items() if key_degree(k) <= cap} if cap < self.cap \
            else dict(self.terms)
        for k, (br, bi) in other.terms.items():
            if cap < other.cap and key_degree(k) > cap:
                continue
            if k in out:
                ar, ai = out[k]
                r, i = ar + br, ai + bi
                if r or i:
                    out[k] = (r, i)
                else:
                    del out[k]
            else:
                out[k] = (br, bi)
        return self._new(cap, out)

    __radd__ = __add__

    def __neg__(self):
        return self._new(self.cap, {k: (-r, -i) for k, (r, i) in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, TruncSeries):
            other = TruncSeries.constant(self.n, self.cap, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "TruncSeries":
        sr, si = as_gauss(s)
        out = {}
        for k, (r, i) in self.terms.items():
            nr, ni = r * sr - i * si, r * si + i * sr
            if nr or ni:
                out[k] = (nr, ni)
        return self._new(self.cap, out)

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            return self.scale(other)
        self._check(other)
        cap = min(self.cap, other.cap)
        a = sorted(((key_degree(k), k, c) for k, c in self.terms.items()), key=lambda t: t[0])
        b = sorted(((key_degree(k), k, c) for k, c in other.terms.items()), key=lambda t: t[0])
        out: dict = {}
        get = out.get
        for da, ka, (ar, ai) in a:
            room = cap - da
            if room < 0:
                break
            a_real = not ai
            for db, kb, (br, bi) in b:
                if db > room:
                    break
                k = ka + kb
                if a_real:
                    if bi:
                        r, i = ar * br, ar * bi
                    else:
                        r, i = ar * br, ZERO
                elif bi:
                    r, i = ar * br - ai * bi, ar * bi + ai * br
                else:
                    r, i = ar * br, ai * br
                prev = get(k)
                if prev is None:
                    out[k] = (r, i)
                else:
                    out[k] = (prev[0] + r, prev[1] + i)
        out = {k: c for k, c in out.items() if c[0] or c[1]}
        return self._new(cap, out)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, p: int):
        if p < 0:
            raise ValueError("negative powers are not supported; use inverse()")
        out = TruncSeries.constant(self.n, self.cap, 1)
        base = self
        while p:
            if p & 1:
                out = out * base
            base = base * base
            p >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            other = TruncSeries.constant(self.n, self.cap, other)
        return (self - other).is_zero()

    def __hash__(self):  # pragma: no cover - series are compared, not hashed
        raise TypeError("TruncSeries is unhashable")

    # -- calculus and structure --------------------------------------------
    def diff(self, var: int) -> "TruncSeries":
        """Partial derivative in variable ``var`` (``z_k`` for k < n, ``zbar_k`` for n + k)."""
        shift = _BITS * var
        unit = 1 << shift
        out = {}
        for k, (r, i) in self.terms.items():
            e = (k >> shift) & _MASK
            if e:
                out[k - unit] = (r * e, i * e)
        return self._new(self.cap - 1, out)

    def d(self, k: int) -> "TruncSeries":
        return self.diff(k)

    def dbar(self, k: int) -> "TruncSeries":
        return self.diff(self.n + k)

    def conj(self) -> "TruncSeries":
        """Complex conjugate of the function: swap z and zbar exponents, conjugate coefficients."""
        n = self.n
        lo_mask = (1 << (_BITS * n)) - 1
        out = {}
        for k, (r, i) in self.terms.items():
            swapped = ((k & lo_mask) << (_BITS * n)) | (k >> (_BITS * n))
            out[swapped] = (r, -i)
        return self._new(self.cap, out)

    def truncate(self, cap: int) -> "TruncSeries":
        if cap >= self.cap:
            return self
        return self._new(cap, {k: c for k, c in self.terms.items() if key_degree(k) <= cap})

    def is_real(self) -> bool:
        return self == self.conj()

    def log1p(self) -> "TruncSeries":
        """log(1 + s) for a series ``s`` vanishing at the origin (the sum terminates at the cap)."""
        if self.terms.get(0):
            raise ValueError("log1p needs a series without constant term")
        m = self.min_degree()
        out = TruncSeries(self.n, self.cap)
        if m > self.cap:
            return out
        power = self
        j = 1
        while j * m <= self.cap:
            out = out + power.scale(mpq(1 if j % 2 else -1, j))
            power = power * self
            j += 1
        return out

    def inverse(self) -> "TruncSeries":
        """1 / s for a series with nonzero constant term (geometric series around c0)."""
        c0r, c0i = self.at_zero()
        den = c0r * c0r + c0i * c0i
        if not den:
            raise ZeroDivisionError("series has zero constant term")
        inv0 = (c0r / den, -c0i / den)
        rest = (self - TruncSeries.constant(self.n, self.cap, (c0r, c0i))).scale(inv0)
        out = TruncSeries.constant(self.n, self.cap, 1)
        power = TruncSeries.constant(self.n, self.cap, 1)
        m = rest.min_degree()
        j = 1
        while j * m <= self.cap:
            power = power * rest
            out = out + (power if j % 2 == 0 else -power)
            j += 1
        return out.scale(inv0)


def gauss_eq(a: tuple, b: tuple) -> bool:
    return a[0] == b[0] and a[1] == b[1]


def gauss_add(a: tuple, b: tuple) -> tuple:
    return (a[0] + b[0], a[1] + b[1])


def gauss_mul(a: tuple, b: tuple) -> tuple:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def gauss_conj(a: tuple) -> tuple:
    return (a[0], -a[1])


def gauss_str(a: tuple) -> str:
    return f"{a[0]}{'+' if a[1] >= 0 else '-'}{abs(a[1])}i"
