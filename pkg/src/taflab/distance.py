"""Distance to staircase modules: single-entry Parrott steps, inductive
completion of partially known matrices, and the rectangle distance formula.

Index conventions are 1-based in patterns and rectangles, 0-based in arrays.
All norms are spectral norms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .fdcore import DigraphAlgebra, DomainError, Ideal, MatrixUnit, ShapeError, largest_ideal_excluding, top_ideal

PINV_CUTOFF = 1e-10
FEAS_TOL = 1e-9
ACCEPT_TOL = 1e-6


class FeasibilityError(ValueError):
    def __init__(self, message, norm=None, where=None):
        super().__init__(message)
        self.norm = norm
        self.where = where


def norm(M) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def clamp_h(a: float, b: complex) -> complex:
    if a < 0:
        raise DomainError(f"clamp radius must be non-negative, got {a}")
    r = abs(b)
    if r == 0:
        return 0j
    if r <= a:
        return complex(b)
    return b / r * a


def _inv_sqrt_psd(M: np.ndarray) -> np.ndarray:
    """Pseudo-inverse of the square root of a Hermitian PSD matrix."""
    if M.size == 0:
        return M.copy()
    # M = I - X*X with ||X|| <= 1, so its spectrum lies in [0, 1] and the
    # cutoff is taken against 1; a purely relative cut keeps roundoff when M ~ 0
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    top = max(float(w.max()), 1.0)
    inv = np.array([1 / np.sqrt(x) if x > PINV_CUTOFF * top else 0.0 for x in w])
    return (V * inv) @ V.conj().T


@dataclass(frozen=True)
class DiskStep:
    s: complex
    t: float
    K: np.ndarray = field(repr=False, compare=False)
    L: np.ndarray = field(repr=False, compare=False)


def parrott_step(A, B, C, tol: float = FEAS_TOL) -> DiskStep:
    """Center and radius of the w making [[B, w], [A, C]] a contraction.

    A is m x p, B is 1 x p and C is m x 1; m or p may be zero.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex).reshape(1, -1)
    C = np.asarray(C, dtype=complex).reshape(-1, 1)
    m, p = C.shape[0], B.shape[1]
    A = A.reshape(m, p)
    left = norm(np.vstack([B, A])) if p else 0.0
    right = norm(np.hstack([A, C])) if m else 0.0
    for name, val in (("[B; A]", left), ("[A C]", right)):
        if val > 1 + tol:
            raise FeasibilityError(f"known block {name} has norm {val:.12g} > 1", val, name)
    Ah = A.conj().T
    K = B @ _inv_sqrt_psd(np.eye(p) - Ah @ A) if p else np.zeros((1, 0), complex)
    L = _inv_sqrt_psd(np.eye(m) - A @ Ah) @ C if m else np.zeros((0, 1), complex)
    s = complex(-(K @ Ah @ L)[0, 0]) if m and p else 0j
    t = np.sqrt(max(0.0, 1 - norm(K) ** 2)) * np.sqrt(max(0.0, 1 - norm(L) ** 2))
    return DiskStep(s, float(t), K, L)


# -- patterns --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModulePattern:
    """sigma = {(i, j) : j >= c(i)} over the full n x n grid, c nondecreasing in 1..n+1."""
    thresholds: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(x) for x in self.thresholds)
        object.__setattr__(self, "thresholds", c)
        n = len(c)
        if any(not 1 <= x <= n + 1 for x in c) or any(a > b for a, b in zip(c, c[1:])):
            raise ShapeError(f"thresholds {c} do not describe a module pattern")

    @property
    def n(self):
        return len(self.thresholds)

    def __contains__(self, ij):
        i, j = ij
        return j >= self.thresholds[i - 1]

    def mask(self) -> np.ndarray:
        n = self.n
        return np.array([[(i, j) in self for j in range(1, n + 1)] for i in range(1, n + 1)], dtype=bool)

    @classmethod
    def from_mask(cls, mask) -> "ModulePattern":
        mask = np.asarray(mask, dtype=bool)
        n = mask.shape[0]
        c = []
        for i in range(n):
            cols = np.nonzero(mask[i])[0]
            c.append(int(cols[0]) + 1 if cols.size else n + 1)
        pat = cls(tuple(c))
        if not np.array_equal(pat.mask(), mask):
            raise ShapeError("mask is not a module pattern")
        return pat

    @classmethod
    def from_ideal(cls, I: Ideal) -> list["ModulePattern"]:
        return [cls(tuple(c)) for c in I.thresholds]


def maximal_rectangles(sigma: ModulePattern) -> list[tuple[int, int]]:
    """Maximal (i0, j0) with [i0, n] x [1, j0] disjoint from sigma."""
    c = sigma.thresholds
    return [(i, c[i - 1] - 1) for i in range(1, sigma.n + 1)
            if c[i - 1] >= 2 and (i == 1 or c[i - 2] < c[i - 1])]


def _summands(T, sigma):
    if isinstance(sigma, ModulePattern):
        sigma = [sigma]
        T = [T]
    T = [np.asarray(t, dtype=complex) for t in T]
    if len(T) != len(sigma) or any(t.shape != (p.n, p.n) for t, p in zip(T, sigma)):
        raise ShapeError("matrix and pattern shapes differ")
    return T, list(sigma)


def rectangle_distance(T, sigma) -> float:
    T, sigma = _summands(T, sigma)
    best = 0.0
    for t, pat in zip(T, sigma):
        for i0, j0 in maximal_rectangles(pat):
            best = max(best, norm(t[i0 - 1:, :j0]))
    return best


# -- completion ---------------------------------------------------------------------------

@dataclass
class PatternedGrid:
    values: np.ndarray          # shape (points, n, n)
    known: np.ndarray           # shape (n, n) bool, shared by every point

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 2:
            v = v[None]
        self.values = v
        self.known = np.asarray(self.known, dtype=bool)
        if self.known.shape != v.shape[1:] or v.shape[1] != v.shape[2]:
            raise ShapeError("grid values and known mask disagree")

    @property
    def n(self):
        return self.values.shape[1]


def fill_order(n: int) -> list[tuple[int, int]]:
    cells = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    return sorted(cells, key=lambda ij: (ij[1] + n - ij[0], -ij[0]))


def check_star(grid: PatternedGrid, tol: float = FEAS_TOL):
    unknown = ModulePattern.from_mask(~grid.known)
    for x, M in enumerate(grid.values):
        for i0, j0 in maximal_rectangles(unknown):
            val = norm(M[i0 - 1:, :j0])
            if val > 1 + tol:
                raise FeasibilityError(f"point {x}: rectangle rows {i0}..{grid.n}, cols 1..{j0} has norm {val:.12g}",
                                       val, (x, i0, j0))


def _settle(block: np.ndarray, s: complex, w: complex, slack: float = 1e-12) -> complex:
    """Move w the least amount along the segment to a feasible anchor so that
    the block it completes is a contraction.

    Clamping onto the disk boundary saturates the block, and near saturation
    the closed form for s and t loses digits that then compound over later
    cells.  The anchor is s when s is feasible, otherwise a numerical minimiser
    of w -> ||block(w)||, whose minimum is at most 1 whenever the known parts
    are contractions.  In exact arithmetic w is returned unchanged.
    """
    work = block.copy()

    def f(z):
        work[0, -1] = z
        return norm(work)

    if f(w) <= 1 + slack:
        return w
    anchor = s
    if f(s) > 1 + slack:
        res = minimize(lambda v: f(complex(v[0], v[1])), [s.real, s.imag], method="Nelder-Mead",
                       options={"xatol": 1e-15, "fatol": 1e-16, "maxiter": 600})
        if res.fun < f(s):
            anchor = complex(res.x[0], res.x[1])
    level = max(1 + slack, f(anchor))
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        if f(anchor + mid * (w - anchor)) > level:
            hi = mid
        else:
            lo = mid
    return anchor + lo * (w - anchor)


def complete_grid(g0: PatternedGrid, tol: float = FEAS_TOL) -> PatternedGrid:
    """Fill the unknown cells one at a time, keeping every partial block a contraction."""
    check_star(g0, tol)
    n = g0.n
    out = g0.values.copy()
    order = [(p, q) for p, q in fill_order(n) if not g0.known[p - 1, q - 1]]
    for M in out:
        for p, q in order:
            A = M[p:, : q - 1]
            B = M[p - 1, : q - 1]
            C = M[p:, q - 1]
            step = parrott_step(A, B, C, tol)
            w = step.s + clamp_h(step.t, M[p - 1, q - 1] - step.s)
            M[p - 1, q - 1] = _settle(M[p - 1:, :q], step.s, w)
    out[:, g0.known] = g0.values[:, g0.known]
    return PatternedGrid(out, g0.known.copy())


@dataclass
class Nearest:
    S: list
    achieved: float
    distance: float


def nearest_element(T, sigma, tol: float = ACCEPT_TOL) -> Nearest:
    # cells clamped onto the disk boundary leave saturated blocks behind, and
    # the roundoff they carry compounds over later steps; 1e-9 is too tight here
    T, sigma = _summands(T, sigma)
    d = rectangle_distance(T, sigma)
    S = []
    for t, pat in zip(T, sigma):
        m = pat.mask()
        if d == 0:
            S.append(np.where(m, t, 0))
            continue
        g = complete_grid(PatternedGrid(t / d, ~m), tol)
        s = t - d * g.values[0]
        s[~m] = 0
        S.append(s)
    achieved = max(norm(t - s) for t, s in zip(T, S))
    return Nearest(S, achieved, d)


# -- meet irreducible supremum ------------------------------------------------------------------

@dataclass
class IdealDistanceReport:
    direct: float
    mi_sup: float
    rectangle_witnesses: list
    brute_sup: float
    equal: bool

    def to_json(self):
        return {"direct": self.direct, "mi_sup": self.mi_sup, "brute_sup": self.brute_sup,
                "equal": self.equal,
                "witnesses": [{"summand": s, "rectangle": [i, j], "ideal": I.to_json(), "norm": v}
                              for s, i, j, I, v in self.rectangle_witnesses]}


def cor_6_3_check(alg: DigraphAlgebra, T, J: Ideal, tol: float = 1e-6) -> IdealDistanceReport:
    """dist(T, J) against the supremum over meet irreducible ideals containing J.

    Each maximal rectangle [i0, n] x [1, j0] outside J is matched with the
    largest ideal missing e_{i0 j0} when i0 <= j0 (the interval from i0 to
    j0), and with A itself when the rectangle sits below the diagonal.
    """
    T = [np.asarray(t, dtype=complex) for t in (T if isinstance(T, (list, tuple)) else [T])]
    pats = ModulePattern.from_ideal(J)
    direct = rectangle_distance(T, pats)
    witnesses = []
    for s, pat in enumerate(pats, 1):
        for i0, j0 in maximal_rectangles(pat):
            if i0 <= j0:
                I = largest_ideal_excluding(alg, MatrixUnit(s, i0, j0))
            else:
                I = top_ideal(alg)
            ipat = ModulePattern.from_ideal(I)[s - 1]
            assert not any((i, j) in ipat for i in range(i0, pat.n + 1) for j in range(1, j0 + 1))
            assert all(a <= b for a, b in zip(ipat.thresholds, pat.thresholds))
            witnesses.append((s, i0, j0, I, rectangle_distance(T, ModulePattern.from_ideal(I))))
    mi_sup = max([v for *_, v in witnesses], default=0.0)
    candidates = [top_ideal(alg)] + [largest_ideal_excluding(alg, e) for e in alg.units() if e not in J]
    brute = max(rectangle_distance(T, ModulePattern.from_ideal(I)) for I in candidates)
    if not witnesses:
        mi_sup = brute
    ok = abs(direct - mi_sup) <= tol * max(1.0, direct) and abs(direct - brute) <= tol * max(1.0, direct)
    return IdealDistanceReport(direct, mi_sup, witnesses, brute, ok)


# -- wire format --------------------------------------------------------------------------------

def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ShapeError("matrices are arrays of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]
