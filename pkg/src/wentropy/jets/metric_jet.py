"""Kähler potentials in geodesic normal coordinates and their curvature jets.

Conventions (all indices 0-based in code):

* ``M[k][l] = d_k dbar_l phi`` is the coefficient matrix of the Kähler form
  ``(i/2) M[k][l] dz_k ^ dzbar_l``, so ``g(zeta_k, conj zeta_l) = M[k][l] / 2``.
* ``N = M^{-1}`` and ``N[a][b]`` plays the role of the raised coefficient
  with first index ``a`` and barred second index ``b``.
* A J-linear endomorphism with ``E zeta_k = sum_r c[k][r] zeta_r`` is stored by
  its coefficient matrix ``c``; a real (1,1)-form with coefficient matrix ``beta``
  (same normalisation as ``M``) has associated endomorphism ``beta N``.
* Endomorphisms of the complexified tangent space are 2n x 2n matrices in the
  basis ``(zeta_1..zeta_n, conj zeta_1..conj zeta_n)`` acting on columns.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property

from gmpy2 import mpq

from .series import DegreeOverflow, TruncSeries, ZERO, gauss_add, gauss_mul

DEFAULT_DEGREE = 8


# --------------------------------------------------------------------------
# small exact matrix helpers (series entries or Gaussian-rational entries)
# --------------------------------------------------------------------------

def smat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = None
            for k in range(m):
                term = a[i][k] * b[k][j]
                acc = term if acc is None else acc + term
            row.append(acc)
        out.append(row)
    return out


def smat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def smat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def smat_scale(a, s):
    return [[x.scale(s) for x in r] for r in a]


def smat_map(a, fn):
    return [[fn(x) for x in r] for r in a]


def smat_at_zero(a):
    return [[x.at_zero() for x in r] for r in a]


def gmat_zero(n, m=None):
    m = n if m is None else m
    return [[(ZERO, ZERO) for _ in range(m)] for _ in range(n)]


def gmat_identity(n):
    out = gmat_zero(n)
    for i in range(n):
        out[i][i] = (mpq(1), ZERO)
    return out


def gmat_mul(a, b):
    out = gmat_zero(len(a), len(b[0]))
    for i in range(len(a)):
        for j in range(len(b[0])):
            acc = (ZERO, ZERO)
            for k in range(len(b)):
                acc = gauss_add(acc, gauss_mul(a[i][k], b[k][j]))
            out[i][j] = acc
    return out


def gmat_add(a, b):
    return [[gauss_add(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def gmat_scale(a, s):
    s = (mpq(s), ZERO) if not isinstance(s, tuple) else s
    return [[gauss_mul(x, s) for x in r] for r in a]


def gmat_sub(a, b):
    return gmat_add(a, gmat_scale(b, -1))


def gmat_transpose(a):
    return [list(r) for r in zip(*a)]


def gmat_conj(a):
    return [[(x[0], -x[1]) for x in r] for r in a]


def gmat_eq(a, b):
    return all(x[0] == y[0] and x[1] == y[1] for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def gmat_first_diff(a, b):
    """Index and both values of the first differing entry, or None."""
    for i, (ra, rb) in enumerate(zip(a, b)):
        for j, (x, y) in enumerate(zip(ra, rb)):
            if x[0] != y[0] or x[1] != y[1]:
                return (i, j), x, y
    return None


def endo_linear(c):
    """2n x 2n matrix of the J-linear endomorphism with coefficient matrix ``c``."""
    n = len(c)
    out = gmat_zero(2 * n)
    for k in range(n):
        for r in range(n):
            out[r][k] = c[k][r]
            out[n + r][n + k] = (c[k][r][0], -c[k][r][1])
    return out


def endo_anti(a):
    """2n x 2n matrix of the anti-linear endomorphism ``conj zeta_l -> sum_k a[k][l] zeta_k``."""
    n = len(a)
    out = gmat_zero(2 * n)
    for k in range(n):
        for l in range(n):
            out[k][n + l] = a[k][l]
            out[n + k][l] = (a[k][l][0], -a[k][l][1])
    return out


def sendo_linear(c):
    """Series version of :func:`endo_linear`."""
    n = len(c)
    zero = TruncSeries(c[0][0].n, c[0][0].cap)
    out = [[zero for _ in range(2 * n)] for _ in range(2 * n)]
    for k in range(n):
        for r in range(n):
            out[r][k] = c[k][r]
            out[n + r][n + k] = c[k][r].conj()
    return out


def sendo_anti(a):
    """Series version of :func:`endo_anti`."""
    n = len(a)
    zero = TruncSeries(a[0][0].n, a[0][0].cap)
    out = [[zero for _ in range(2 * n)] for _ in range(2 * n)]
    for k in range(n):
        for l in range(n):
            out[k][n + l] = a[k][l]
            out[n + k][l] = a[k][l].conj()
    return out


# --------------------------------------------------------------------------
# potentials
# --------------------------------------------------------------------------

def _multi_indices(n, total):
    if n == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _multi_indices(n - 1, total - first):
            yield (first,) + rest


def _small_rational(rng: random.Random):
    num = rng.randint(-3, 3)
    den = rng.randint(1, 4)
    return mpq(num, den)


@dataclass(frozen=True)
class PotentialJet:
    """A real Kähler potential in geodesic normal coordinates plus an optional f-jet."""

    n: int
    degree: int
    phi: TruncSeries
    f: TruncSeries
    seed: int | None = None

    @classmethod
    def flat(cls, n: int, degree: int = DEFAULT_DEGREE, f: TruncSeries | None = None):
        phi = TruncSeries(n, degree)
        for k in range(n):
            phi = phi + TruncSeries.z(n, degree, k) * TruncSeries.zbar(n, degree, k)
        if f is None:
            f = TruncSeries(n, degree)
        return cls(n, degree, phi, f)

    @classmethod
    def from_terms(cls, n: int, degree: int, terms: dict, f: TruncSeries | None = None):
        """``phi = sum |z_k|^2 + sum c z^alpha zbar^beta`` from ``{(alpha, beta): c}``; conjugates are added."""
        base = cls.flat(n, degree, f)
        extra = {}
        for (alpha, beta), c in terms.items():
            if sum(alpha) < 2 or sum(beta) < 2:
                raise ValueError("geodesic normal coordinates need |alpha|, |beta| >= 2")
            extra[(tuple(alpha), tuple(beta))] = c
        phi = base.phi
        for (alpha, beta), c in extra.items():
            phi = phi + TruncSeries.monomial(n, degree, alpha + beta, c)
            if alpha != beta and (beta, alpha) not in extra:
                cc = c if not isinstance(c, tuple) else (c[0], -c[1])
                if isinstance(c, complex):
                    cc = c.conjugate()
                phi = phi + TruncSeries.monomial(n, degree, beta + alpha, cc)
        return cls(n, degree, phi, base.f)

    @classmethod
    def random(cls, seed: int, n: int = 2, degree: int = DEFAULT_DEGREE,
               density: float = 0.35, with_f: bool = True):
        """Reproducible random potential: every coefficient is a small Gaussian rational."""
        rng = random.Random(f"potential-{n}-{degree}-{seed}")
        phi = cls.flat(n, degree).phi
        for a in range(2, degree - 1):
            for b in range(a, degree - a + 1):
                for alpha in _multi_indices(n, a):
                    for beta in _multi_indices(n, b):
                        if a == b and alpha > beta:
                            continue
                        if rng.random() > density:
                            continue
                        if alpha == beta:
                            c = (_small_rational(rng), ZERO)
                        else:
                            c = (_small_rational(rng), _small_rational(rng))
                        phi = phi + TruncSeries.monomial(n, degree, alpha + beta, c)
                        if alpha != beta:
                            phi = phi + TruncSeries.monomial(n, degree, beta + alpha, (c[0], -c[1]))
        f = TruncSeries(n, degree)
        if with_f:
            f = random_real_jet(rng, n, degree, min_degree=1, max_degree=degree - 2, density=density)
            f = _ensure_anti_hessian(rng, f)
        return cls(n, degree, phi, f, seed)

    def with_f(self, f: TruncSeries) -> "PotentialJet":
        return PotentialJet(self.n, self.degree, self.phi, f, self.seed)

    def check_invariants(self) -> None:
        if not self.phi.is_real():
            raise ValueError("potential is not real")
        if not self.f.is_real():
            raise ValueError("f-jet is not real")


def _ensure_anti_hessian(rng: random.Random, f: TruncSeries) -> TruncSeries:
    """Add a ``z_k z_l`` term (and its conjugate) when the sparse draw left ``A(0) = 0``.

    Without it about a quarter of the seeds would have vanishing anti-linear
    Hessian at the origin, where identities for ``A`` hold trivially.
    """
    n, cap = f.n, f.cap
    for a in _multi_indices(n, 2):
        if f.coeff(list(a) + [0] * n) != (ZERO, ZERO):
            return f
    k = rng.randrange(n)
    e = [0] * (2 * n)
    e[k] = 2
    c = (ZERO, ZERO)
    while c == (ZERO, ZERO):
        c = (_small_rational(rng), _small_rational(rng))
    f = f + TruncSeries.monomial(n, cap, e, c)
    e_bar = [0] * n + e[:n]
    return f + TruncSeries.monomial(n, cap, e_bar, (c[0], -c[1]))


def random_real_jet(rng: random.Random, n: int, cap: int, min_degree: int, max_degree: int,
                    density: float = 0.5) -> TruncSeries:
    """A random real polynomial with Gaussian-rational coefficients of degree in the given range."""
    out = TruncSeries(n, cap)
    for total in range(min_degree, max_degree + 1):
        for a in range(total + 1):
            b = total - a
            if a > b:
                continue
            for alpha in _multi_indices(n, a):
                for beta in _multi_indices(n, b):
                    if a == b and alpha > beta:
                        continue
                    if rng.random() > density:
                        continue
                    if alpha == beta:
                        c = (_small_rational(rng), ZERO)
                    else:
                        c = (_small_rational(rng), _small_rational(rng))
                    out = out + TruncSeries.monomial(n, cap, alpha + beta, c)
                    if alpha != beta:
                        out = out + TruncSeries.monomial(n, cap, beta + alpha, (c[0], -c[1]))
    return out


def round_model_potential(degree: int = DEFAULT_DEGREE) -> PotentialJet:
    """n = 1 jet of ``4 log(1 + z zbar / 4)``: curvature-one round metric at the origin."""
    n = 1
    s = TruncSeries.z(n, degree, 0) * TruncSeries.zbar(n, degree, 0)
    phi = s.scale(mpq(1, 4)).log1p().scale(4)
    return PotentialJet(n, degree, phi, TruncSeries(n, degree))


# --------------------------------------------------------------------------
# metric jet
# --------------------------------------------------------------------------

class MetricJet:
    """Curvature jets of a :class:`PotentialJet`; every field is computed lazily and cached."""

    def __init__(self, pot: PotentialJet):
        self.pot = pot
        self.n = pot.n

    # metric and inverse ----------------------------------------------------
    @cached_property
    def omega(self):
        n = self.n
        return [[self.pot.phi.d(k).dbar(l) for l in range(n)] for k in range(n)]

    @cached_property
    def omega_inv(self):
        n = self.n
        ident = [[TruncSeries.constant(n, self.omega[0][0].cap, 1 if i == j else 0)
                  for j in range(n)] for i in range(n)]
        e = smat_sub(self.omega, ident)
        out = ident
        power = ident
        cap = self.omega[0][0].cap
        j = 1
        while 2 * j <= cap:
            power = smat_mul(power, e)
            out = smat_add(out, power if j % 2 == 0 else smat_scale(power, -1))
            j += 1
        return out

    @cached_property
    def log_det(self) -> TruncSeries:
        """``log det M`` as ``sum_j (-1)^{j+1} tr(E^j) / j`` with ``E = M - I`` of order two."""
        n = self.n
        cap = self.omega[0][0].cap
        ident = [[TruncSeries.constant(n, cap, 1 if i == j else 0) for j in range(n)] for i in range(n)]
        e = smat_sub(self.omega, ident)
        out = TruncSeries(n, cap)
        power = ident
        j = 1
        while 2 * j <= cap:
            power = smat_mul(power, e)
            tr = power[0][0]
            for i in range(1, n):
                tr = tr + power[i][i]
            out = out + tr.scale(mpq(1 if j % 2 else -1, j))
            j += 1
        return out

    @cached_property
    def christoffel(self):
        """``Gamma[c][l][p]`` with ``nabla_{zeta_c} zeta_l = sum_p Gamma[c][l][p] zeta_p``."""
        n = self.n
        N = self.omega_inv
        out = []
        for c in range(n):
            dM = [[self.omega[l][q].d(c) for q in range(n)] for l in range(n)]
            out.append(smat_mul(dM, N))
        return out

    # curvature -------------------------------------------------------------
    @cached_property
    def ricci(self):
        """``R[k][l] = Ric(zeta_k, conj zeta_l) = -d_k dbar_l log det M``."""
        n = self.n
        return [[(-self.log_det.d(k).dbar(l)) for l in range(n)] for k in range(n)]

    @cached_property
    def ricci_mod(self):
        """``R'[k][l] = R[k][l] + d_k dbar_l f``."""
        n = self.n
        f = self.pot.f
        return [[self.ricci[k][l] + f.d(k).dbar(l) for l in range(n)] for k in range(n)]

    @cached_property
    def curly_r(self):
        """Coefficient matrix ``2 R' N`` of the endomorphism of the modified Ricci form."""
        return smat_scale(smat_mul(self.ricci_mod, self.omega_inv), 2)

    @cached_property
    def ricci_endo_coeff(self):
        """Coefficient matrix ``2 R N`` of the Ricci endomorphism."""
        return smat_scale(smat_mul(self.ricci, self.omega_inv), 2)

    @cached_property
    def rm0(self):
        """``Rm[r][p][k][l](0) = -2 d_k dbar_l M[p][r] (0)`` as Gaussian rationals."""
        n = self.n
        out = [[[[None] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for r in range(n):
            for p in range(n):
                for k in range(n):
                    for l in range(n):
                        v = self.omega[p][r].d(k).dbar(l).at_zero()
                        out[r][p][k][l] = (-2 * v[0], -2 * v[1])
        return out

    # vector-field operators ------------------------------------------------
    def grad10(self, u: TruncSeries):
        """Components ``xi_k`` of the (1,0) part of the gradient of a real function ``u``."""
        n = self.n
        N = self.omega_inv
        out = []
        for k in range(n):
            acc = TruncSeries(n, min(u.cap - 1, N[0][0].cap))
            for r in range(n):
                acc = acc + N[r][k] * u.dbar(r)
            out.append(acc.scale(2))
        return out

    def anti_hessian(self, u: TruncSeries):
        """``A[k][l] = dbar_l xi_k``: coefficients of the anti-linear Hessian part of ``u``."""
        xi = self.grad10(u)
        n = self.n
        return [[xi[k].dbar(l) for l in range(n)] for k in range(n)]

    def anti_hessian_closed(self, u: TruncSeries):
        """Closed formula ``2 N[p][k] (dbar_l dbar_p u - dbar_l M[j][p] N[r][j] dbar_r u)``."""
        n = self.n
        N = self.omega_inv
        M = self.omega
        out = []
        for k in range(n):
            row = []
            for l in range(n):
                acc = None
                for p in range(n):
                    inner = u.dbar(l).dbar(p)
                    for j in range(n):
                        for r in range(n):
                            inner = inner - M[j][p].dbar(l) * N[r][j] * u.dbar(r)
                    term = N[p][k] * inner
                    acc = term if acc is None else acc + term
                row.append(acc.scale(2))
            out.append(row)
        return out

    def laplacian(self, u: TruncSeries) -> TruncSeries:
        """Scalar Laplacian ``4 sum N[l][k] d_k dbar_l u`` (exact: mixed Christoffels vanish)."""
        n = self.n
        N = self.omega_inv
        acc = None
        for k in range(n):
            for l in range(n):
                term = N[l][k] * u.d(k).dbar(l)
                acc = term if acc is None else acc + term
        return acc.scale(4)

    def dot_grad(self, a: TruncSeries, b: TruncSeries) -> TruncSeries:
        """``g(grad a, grad b) = 2 sum N[l][k] (d_k a dbar_l b + d_k b dbar_l a)``."""
        n = self.n
        N = self.omega_inv
        acc = None
        for k in range(n):
            for l in range(n):
                term = N[l][k] * (a.d(k) * b.dbar(l) + b.d(k) * a.dbar(l))
                acc = term if acc is None else acc + term
        return acc.scale(2)

    # endomorphism calculus -------------------------------------------------
    def connection_matrices(self, cap: int | None = None):
        """``G[c]`` (2n x 2n series) with ``nabla_c E = d_c E + [G[c], E]`` for c in 0..2n-1."""
        n = self.n
        gam = self.christoffel
        if cap is not None:
            gam = [[[x.truncate(cap) for x in row] for row in g] for g in gam]
        c0 = gam[0][0][0].cap
        zero = TruncSeries(n, c0)
        out = []
        for c in range(2 * n):
            G = [[zero for _ in range(2 * n)] for _ in range(2 * n)]
            for l in range(n):
                for p in range(n):
                    if c < n:
                        G[p][l] = gam[c][l][p]
                    else:
                        G[n + p][n + l] = gam[c - n][l][p].conj()
            out.append(G)
        return out

    def covariant_derivative(self, E, d: int, G=None):
        G = self.connection_matrices() if G is None else G
        dE = smat_map(E, lambda x: x.diff(d))
        return smat_add(dE, smat_sub(smat_mul(G[d], E), smat_mul(E, G[d])))

    def inverse_metric0(self):
        """``g^{cd}(0)`` in the complex basis: ``g^{k, n+l} = g^{n+l, k} = 2 N[l][k](0)``."""
        n = self.n
        N0 = smat_at_zero(self.omega_inv)
        out = gmat_zero(2 * n)
        for k in range(n):
            for l in range(n):
                v = N0[l][k]
                out[k][n + l] = (2 * v[0], 2 * v[1])
                out[n + l][k] = (2 * v[0], 2 * v[1])
        return out

    def covariant_laplacian_at_zero(self, E):
        """Honest rough Laplacian of an endomorphism field, evaluated at the origin.

        ``nabla^2_{c,d} E = d_c(nabla_d E) + [G_c, nabla_d E] - sum_e G_c[e][d] nabla_e E``
        contracted with the inverse metric.  Only the 2-jet of ``E`` matters, so inputs
        are truncated first.
        """
        n = self.n
        Et = smat_map(E, lambda x: x.truncate(2))
        G = self.connection_matrices(cap=2)
        nab = [self.covariant_derivative(Et, d, G) for d in range(2 * n)]
        nab0 = [smat_at_zero(m) for m in nab]
        G0 = [smat_at_zero(m) for m in G]
        ginv = self.inverse_metric0()
        total = gmat_zero(2 * n)
        for c in range(2 * n):
            for d in range(2 * n):
                w = ginv[c][d]
                if not (w[0] or w[1]):
                    continue
                second = smat_at_zero(smat_map(nab[d], lambda x: x.diff(c)))
                second = gmat_add(second, gmat_sub(gmat_mul(G0[c], nab0[d]), gmat_mul(nab0[d], G0[c])))
                for e in range(2 * n):
                    coeff = G0[c][e][d]
                    if coeff[0] or coeff[1]:
                        second = gmat_sub(second, gmat_scale(nab0[e], coeff))
                total = gmat_add(total, gmat_scale(second, w))
        return total


_JET_CACHE: dict = {}


def metric_jet_for_seed(seed: int, n: int = 2, degree: int = DEFAULT_DEGREE) -> MetricJet:
    """Build (once) and cache the metric jet of the random potential for ``seed``."""
    key = (seed, n, degree)
    jet = _JET_CACHE.get(key)
    if jet is None:
        jet = MetricJet(PotentialJet.random(seed, n, degree))
        _JET_CACHE[key] = jet
    return jet


def build_metric_jet(pot: PotentialJet) -> MetricJet:
    pot.check_invariants()
    jet = MetricJet(pot)
    need = 4
    if pot.degree < need:
        raise DegreeOverflow(need, pot.degree, "build_metric_jet")
    return jet
