"""Truncated multivariate Taylor series ("jets") at a chart point.

A jet of dimension ``m`` and depth ``d`` stores the Taylor coefficients of a
function germ in the ``2m`` independent variables ``z_1..z_m, zb_1..zb_m``
(displacements from the centre) up to total degree ``d``. Coefficients live in a
flat complex array over monomials sorted by total degree, so truncation is a
prefix slice.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np


class JetError(ValueError):
    pass


class _Basis:
    """Monomial tables for ``nvars`` variables up to total degree ``depth``."""

    def __init__(self, nvars: int, depth: int):
        self.nvars = nvars
        self.depth = depth
        exps = []
        for deg in range(depth + 1):
            block = [e for e in itertools.product(range(deg + 1), repeat=nvars) if sum(e) == deg]
            exps.extend(sorted(block, reverse=True))
        self.exps = np.array(exps, dtype=np.int64).reshape(len(exps), nvars)
        self.index = {tuple(e): i for i, e in enumerate(exps)}
        self.size = len(exps)
        self.degrees = self.exps.sum(axis=1)
        self._mul = None

    @property
    def mul_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._mul is None:
            ii, jj, kk = [], [], []
            for i in range(self.size):
                ei = self.exps[i]
                for j in range(self.size):
                    if self.degrees[i] + self.degrees[j] > self.depth:
                        # monomials are degree sorted: the rest of this row is too deep
                        break
                    ii.append(i)
                    jj.append(j)
                    kk.append(self.index[tuple(ei + self.exps[j])])
            self._mul = (np.array(ii), np.array(jj), np.array(kk))
        return self._mul


@lru_cache(maxsize=None)
def basis(nvars: int, depth: int) -> _Basis:
    return _Basis(nvars, depth)


@lru_cache(maxsize=None)
def _derivative_map(nvars: int, depth: int, counts: tuple[int, ...]):
    """Source indices and factors for the derivative of multi-order ``counts``."""
    order = sum(counts)
    target = basis(nvars, depth - order)
    source = basis(nvars, depth)
    shift = np.array(counts, dtype=np.int64)
    src = np.empty(target.size, dtype=np.int64)
    fac = np.empty(target.size, dtype=float)
    for i, e in enumerate(target.exps):
        raised = e + shift
        src[i] = source.index[tuple(raised)]
        fac[i] = math.prod(math.factorial(a) // math.factorial(b) for a, b in zip(raised, e))
    return src, fac


class Jet:
    """Truncated Taylor expansion in ``z`` and ``zb`` of dimension ``m`` and depth ``d``."""

    __slots__ = ("m", "depth", "coeffs")
    __array_priority__ = 100

    def __init__(self, m: int, depth: int, coeffs=None):
        if depth < 0:
            raise JetError("jet depth exhausted")
        self.m = m
        self.depth = depth
        size = basis(2 * m, depth).size
        if coeffs is None:
            self.coeffs = np.zeros(size, dtype=complex)
        else:
            self.coeffs = np.asarray(coeffs, dtype=complex)
            if self.coeffs.shape != (size,):
                raise JetError(f"expected {size} coefficients, got {self.coeffs.shape}")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, m: int, depth: int, value: complex) -> "Jet":
        j = cls(m, depth)
        j.coeffs[0] = value
        return j

    @classmethod
    def variable(cls, m: int, depth: int, index: int, centre: complex = 0.0) -> "Jet":
        """Jet of coordinate ``index`` (0..m-1 holomorphic, m..2m-1 anti-holomorphic)."""
        j = cls.constant(m, depth, centre)
        if depth >= 1:
            e = [0] * (2 * m)
            e[index] = 1
            j.coeffs[basis(2 * m, depth).index[tuple(e)]] = 1.0
        return j

    @classmethod
    def from_terms(cls, m: int, depth: int, terms: dict) -> "Jet":
        """Build from ``{(hol_exponents, antihol_exponents): coefficient}``."""
        j = cls(m, depth)
        b = basis(2 * m, depth)
        for (alpha, beta), c in terms.items():
            key = tuple(alpha) + tuple(beta)
            if sum(key) <= depth:
                j.coeffs[b.index[key]] += c
        return j

    # -- inspection -------------------------------------------------------------

    def coefficient(self, alpha, beta) -> complex:
        key = tuple(alpha) + tuple(beta)
        if sum(key) > self.depth:
            raise JetError("coefficient beyond jet depth")
        return complex(self.coeffs[basis(2 * self.m, self.depth).index[key]])

    def terms(self, tol: float = 0.0) -> dict:
        b = basis(2 * self.m, self.depth)
        out = {}
        for i, c in enumerate(self.coeffs):
            if abs(c) > tol:
                e = tuple(int(x) for x in b.exps[i])
                out[(e[:self.m], e[self.m:])] = complex(c)
        return out

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def max_abs(self) -> float:
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0

    def truncate(self, depth: int) -> "Jet":
        if depth > self.depth:
            raise JetError(f"cannot raise jet depth from {self.depth} to {depth}")
        if depth == self.depth:
            return self
        return Jet(self.m, depth, self.coeffs[: basis(2 * self.m, depth).size].copy())

    def __repr__(self) -> str:
        return f"Jet(m={self.m}, depth={self.depth}, terms={self.terms(1e-15)})"

    # -- arithmetic -------------------------------------------------------------

    def _check(self, other: "Jet") -> None:
        if self.m != other.m:
            raise JetError(f"dimension mismatch: {self.m} vs {other.m}")
        if self.depth != other.depth:
            raise JetError(f"depth mismatch: {self.depth} vs {other.depth}")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.m, self.depth, self.coeffs + other.coeffs)
        out = Jet(self.m, self.depth, self.coeffs.copy())
        out.coeffs[0] += other
        return out

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.m, self.depth, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            if self.depth == 0:
                return Jet(self.m, 0, self.coeffs * other.coeffs)
            ii, jj, kk = basis(2 * self.m, self.depth).mul_table
            prod = self.coeffs[ii] * other.coeffs[jj]
            size = self.coeffs.size
            out = np.bincount(kk, weights=prod.real, minlength=size) \
                + 1j * np.bincount(kk, weights=prod.imag, minlength=size)
            return Jet(self.m, self.depth, out)
        return Jet(self.m, self.depth, self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.m, self.depth, self.coeffs / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)):
            raise JetError("only integer powers of jets are supported")
        if n < 0:
            return self.reciprocal() ** (-n)
        result = Jet.constant(self.m, self.depth, 1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def compose(self, taylor: list[complex]) -> "Jet":
        """``f(self)`` where ``taylor[k] = f^(k)(value) / k!``.

        The non-constant part is nilpotent of order ``depth + 1``, so the series
        is exact after ``depth + 1`` terms.
        """
        nil = Jet(self.m, self.depth, self.coeffs.copy())
        nil.coeffs[0] = 0.0
        result = Jet.constant(self.m, self.depth, taylor[self.depth])
        for k in range(self.depth - 1, -1, -1):
            result = result * nil + taylor[k]
        return result

    def reciprocal(self) -> "Jet":
        a0 = self.value
        if a0 == 0:
            raise JetError("division by a jet vanishing at the centre")
        return self.compose([(-1) ** k / a0 ** (k + 1) for k in range(self.depth + 1)])

    def log(self) -> "Jet":
        a0 = self.value
        if a0 == 0:
            raise JetError("logarithm of a jet vanishing at the centre")
        taylor = [complex(np.log(a0))]
        taylor += [(-1) ** (k + 1) / (k * a0 ** k) for k in range(1, self.depth + 1)]
        return self.compose(taylor)

    def exp(self) -> "Jet":
        e0 = complex(np.exp(self.value))
        return self.compose([e0 / math.factorial(k) for k in range(self.depth + 1)])

    # -- calculus -------------------------------------------------------------

    def derive(self, hol: tuple[int, ...] | None = None,
               antihol: tuple[int, ...] | None = None) -> "Jet":
        """Partial derivative of multi-order ``hol`` in z and ``antihol`` in zb."""
        hol = tuple(hol) if hol is not None else (0,) * self.m
        antihol = tuple(antihol) if antihol is not None else (0,) * self.m
        counts = hol + antihol
        order = sum(counts)
        if order == 0:
            return self
        if order > self.depth:
            raise JetError(f"derivative of order {order} exceeds jet depth {self.depth}")
        src, fac = _derivative_map(2 * self.m, self.depth, counts)
        return Jet(self.m, self.depth - order, self.coeffs[src] * fac)

    def d(self, index: int, holomorphic: bool = True) -> "Jet":
        """First derivative along ``z_index`` (or ``zb_index``), 0-based index."""
        counts = [0] * self.m
        counts[index] = 1
        if holomorphic:
            return self.derive(tuple(counts), None)
        return self.derive(None, tuple(counts))


def jet_add(a: Jet, b: Jet) -> Jet:
    return a + b


def jet_mul(a: Jet, b: Jet) -> Jet:
    return a * b


def jet_scale(a: Jet, c: complex) -> Jet:
    return a * c


def jet_derive(a: Jet, index: int, holomorphic: bool = True) -> Jet:
    return a.d(index, holomorphic)


def _counts(indices, m: int) -> tuple[int, ...]:
    c = [0] * m
    for i in indices:
        c[i] += 1
    return tuple(c)


def derive_indices(a: Jet, hol_indices, antihol_indices) -> Jet:
    """Derivative by a list of 0-based holomorphic and anti-holomorphic indices."""
    return a.derive(_counts(hol_indices, a.m), _counts(antihol_indices, a.m))


class JetMatrix:
    """Square matrix of jets sharing dimension and depth."""

    def __init__(self, entries: list[list[Jet]]):
        self.entries = entries
        self.n = len(entries)
        first = entries[0][0]
        self.m = first.m
        self.depth = first.depth

    def __getitem__(self, ij) -> Jet:
        i, j = ij
        return self.entries[i][j]

    @classmethod
    def identity(cls, n: int, m: int, depth: int) -> "JetMatrix":
        return cls([[Jet.constant(m, depth, 1.0 if i == j else 0.0) for j in range(n)]
                    for i in range(n)])

    def constant_term(self) -> np.ndarray:
        return np.array([[e.value for e in row] for row in self.entries])

    def __matmul__(self, other: "JetMatrix") -> "JetMatrix":
        out = []
        for i in range(self.n):
            row = []
            for j in range(other.n):
                acc = Jet(self.m, self.depth)
                for k in range(self.n):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return JetMatrix(out)

    def truncate(self, depth: int) -> "JetMatrix":
        return JetMatrix([[e.truncate(depth) for e in row] for row in self.entries])

    def max_abs_difference(self, other: "JetMatrix") -> float:
        return max(float(np.abs(a.coeffs - b.coeffs).max())
                   for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb))

    def inverse(self, where: str = "point") -> "JetMatrix":
        return jet_matrix_inverse(self, where)


def jet_matrix_inverse(g: JetMatrix, where: str = "point") -> JetMatrix:
    """Inverse of a jet matrix, solved degree by degree.

    Writing ``g = g0 + g>`` with ``g0`` the constant term, the inverse
    ``X`` satisfies ``g0 X_d = -sum_{j>=1} g_j X_{d-j}`` on homogeneous parts.
    """
    n, m, depth = g.n, g.m, g.depth
    g0 = g.constant_term()
    if np.linalg.matrix_rank(g0) < n:
        raise JetError(f"metric is singular at {where}")
    b = basis(2 * m, depth)
    # stack coefficients: G[c, i, j]
    G = np.stack([np.array([[g.entries[i][j].coeffs[c] for j in range(n)] for i in range(n)])
                  for c in range(b.size)])
    g0inv = np.linalg.inv(g0)
    X = np.zeros_like(G)
    X[0] = g0inv
    ii, jj, kk = b.mul_table
    # contributions to monomial kk from G[ii] @ X[jj]; process by target degree
    for deg in range(1, depth + 1):
        targets = np.nonzero(b.degrees == deg)[0]
        acc = np.zeros((b.size, n, n), dtype=complex)
        sel = (b.degrees[kk] == deg) & (b.degrees[ii] >= 1)
        for i, j, k in zip(ii[sel], jj[sel], kk[sel]):
            acc[k] += G[i] @ X[j]
        for k in targets:
            X[k] = -g0inv @ acc[k]
    entries = [[Jet(m, depth, X[:, i, j].copy()) for j in range(n)] for i in range(n)]
    return JetMatrix(entries)
