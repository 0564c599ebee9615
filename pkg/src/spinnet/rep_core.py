"""SU(2) representation theory kernel.

Irreps are labeled by a nonnegative integer ``twice_j`` (dimension
``twice_j + 1``).  Group elements are unit quaternions, mapped to 2x2
matrices by

    U(w, x, y, z) = w*I + i*(x*sigma_x + y*sigma_y + z*sigma_z)

and higher-spin matrices are the orthonormalized symmetric tensor powers
of U, which makes multiplicativity and unitarity exact up to rounding.
Basis index ``k`` of a spin-j axis corresponds to weight m = j - k
(m descending), and all coupling coefficients use the Condon-Shortley
phase convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

__all__ = [
    "MAX_TWICE_J",
    "Spin",
    "GroupElement",
    "WignerMatrix",
    "Intertwiner",
    "multiply",
    "inverse",
    "haar_sample",
    "haar_quaternions",
    "wigner_matrix",
    "wigner_entries",
    "clebsch_gordan",
    "epsilon",
    "invariant_vectors",
    "intertwiner_basis",
    "transform_intertwiner",
]

# Largest twice_j accepted by the representation builders.  Kept as a
# module-level knob; everything downstream stays desk-scale under it.
MAX_TWICE_J = 12


def _check_spin_cap(twice_j: int) -> None:
    if not isinstance(twice_j, (int, np.integer)) or twice_j < 0:
        raise ValueError(f"twice_j must be a nonnegative integer, got {twice_j!r}")
    if twice_j > MAX_TWICE_J:
        raise ValueError(
            f"twice_j={twice_j} exceeds the configured cap MAX_TWICE_J={MAX_TWICE_J}"
        )


@dataclass(frozen=True, order=True)
class Spin:
    """Half-integer irrep label, stored doubled: j = twice_j / 2."""

    twice_j: int

    def __post_init__(self) -> None:
        if not isinstance(self.twice_j, (int, np.integer)) or self.twice_j < 0:
            raise ValueError(f"twice_j must be a nonnegative integer, got {self.twice_j!r}")
        object.__setattr__(self, "twice_j", int(self.twice_j))

    @property
    def j(self) -> float:
        return self.twice_j / 2.0

    @property
    def dim(self) -> int:
        return self.twice_j + 1

    @property
    def nontrivial(self) -> bool:
        return self.twice_j > 0


@dataclass(frozen=True)
class GroupElement:
    """SU(2) element as a unit quaternion (w, x, y, z)."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        norm2 = self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
        if abs(norm2 - 1.0) > 1e-12:
            raise ValueError(f"quaternion norm^2 = {norm2!r} is not 1 within 1e-12")

    @staticmethod
    def identity() -> "GroupElement":
        return GroupElement(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_array(q: Sequence[float], normalize: bool = False) -> "GroupElement":
        w, x, y, z = (float(v) for v in q)
        if normalize:
            n = math.sqrt(w * w + x * x + y * y + z * z)
            w, x, y, z = w / n, x / n, y / n, z / n
        return GroupElement(w, x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=float)


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    """Group product, with the convention matrix(a*b) = matrix(a) @ matrix(b)."""
    w = a.w * b.w - (a.x * b.x + a.y * b.y + a.z * b.z)
    # Note the sign of the cross term: it is fixed by requiring that the
    # 2x2 matrix map above is a homomorphism, not by quaternion tradition.
    x = a.w * b.x + b.w * a.x - (a.y * b.z - a.z * b.y)
    y = a.w * b.y + b.w * a.y - (a.z * b.x - a.x * b.z)
    z = a.w * b.z + b.w * a.z - (a.x * b.y - a.y * b.x)
    return GroupElement.from_array((w, x, y, z), normalize=True)


def inverse(a: GroupElement) -> GroupElement:
    return GroupElement(a.w, -a.x, -a.y, -a.z)


def haar_sample(rng: np.random.Generator) -> GroupElement:
    """One Haar-uniform element: a normalized 4-dimensional Gaussian draw."""
    q = rng.standard_normal(4)
    return GroupElement.from_array(q, normalize=True)


def haar_quaternions(rng: np.random.Generator, shape) -> np.ndarray:
    """Batch of Haar-uniform unit quaternions, shape ``shape + (4,)``."""
    q = rng.standard_normal(tuple(shape) + (4,))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    return q


@dataclass(frozen=True)
class WignerMatrix:
    spin: Spin
    entries: np.ndarray = field(repr=False)


@lru_cache(maxsize=None)
def _wigner_terms(twice_j: int):
    """Monomial expansion of the symmetric-power matrix elements.

    With U = [[a, b], [c, d]], entry (kp, k) of the spin-j matrix is

        sqrt(C(n,k)/C(n,kp)) * sum_i C(n-k,i) C(k,kp-i)
                               * a^(n-k-i) c^i b^(k-kp+i) d^(kp-i)

    where n = twice_j.  The normalization makes the monomial basis
    orthonormal, hence the matrix exactly unitary for unit quaternions.
    """
    n = twice_j
    terms = []
    for kp in range(n + 1):
        for k in range(n + 1):
            norm = math.sqrt(math.comb(n, k) / math.comb(n, kp))
            tl = []
            for i in range(kp + 1):
                ea, eb, ec, ed = n - k - i, k - kp + i, i, kp - i
                if min(ea, eb, ec, ed) < 0:
                    continue
                tl.append((math.comb(n - k, i) * math.comb(k, kp - i) * norm, ea, eb, ec, ed))
            terms.append((kp, k, tuple(tl)))
    return tuple(terms)


def wigner_entries(twice_j: int, quats: np.ndarray) -> np.ndarray:
    """Spin-j matrices for a batch of quaternions.

    Parameters
    ----------
    twice_j : int
    quats : array with shape (..., 4)

    Returns
    -------
    array with shape (..., twice_j + 1, twice_j + 1), complex
    """
    _check_spin_cap(twice_j)
    quats = np.asarray(quats, dtype=float)
    w, x, y, z = np.moveaxis(quats, -1, 0)
    a = w + 1j * z
    b = y + 1j * x
    c = -y + 1j * x
    d = w - 1j * z
    n = twice_j
    pows = {}
    for name, base in (("a", a), ("b", b), ("c", c), ("d", d)):
        p = [np.ones_like(base)]
        for _ in range(n):
            p.append(p[-1] * base)
        pows[name] = p
    out = np.zeros(quats.shape[:-1] + (n + 1, n + 1), dtype=complex)
    pa, pb, pc, pd = pows["a"], pows["b"], pows["c"], pows["d"]
    for kp, k, tl in _wigner_terms(n):
        acc = 0.0
        for coeff, ea, eb, ec, ed in tl:
            acc = acc + coeff * (pa[ea] * pb[eb] * pc[ec] * pd[ed])
        out[..., kp, k] = acc
    return out


def wigner_matrix(spin: Spin, g: GroupElement) -> WignerMatrix:
    """The spin-j representation matrix of g."""
    return WignerMatrix(spin, wigner_entries(spin.twice_j, g.as_array()))


def _cg_coefficient(tj1: int, tm1: int, tj2: int, tm2: int, tJ: int, tM: int) -> float:
    """Single Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>, doubled args.

    Exact rational arithmetic inside; one square root at the end.
    """
    if tm1 + tm2 != tM:
        return 0.0
    f = math.factorial

    def g(t: int) -> int:
        return f(t // 2)

    pre = Fraction(
        (tJ + 1) * g(tj1 + tj2 - tJ) * g(tj1 - tj2 + tJ) * g(-tj1 + tj2 + tJ),
        g(tj1 + tj2 + tJ + 2),
    ) * Fraction(
        g(tJ + tM) * g(tJ - tM) * g(tj1 - tm1) * g(tj1 + tm1) * g(tj2 - tm2) * g(tj2 + tm2)
    )
    kmin = max(0, (tj2 - tJ - tm1) // 2, (tj1 - tJ + tm2) // 2)
    kmax = min((tj1 + tj2 - tJ) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (
            f(k)
            * g(tj1 + tj2 - tJ - 2 * k)
            * g(tj1 - tm1 - 2 * k)
            * g(tj2 + tm2 - 2 * k)
            * g(tJ - tj2 + tm1 + 2 * k)
            * g(tJ - tj1 - tm2 + 2 * k)
        )
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    return sign * math.sqrt(float(pre * total * total))


def _admissible(tj1: int, tj2: int, tJ: int) -> bool:
    return (tj1 + tj2 + tJ) % 2 == 0 and abs(tj1 - tj2) <= tJ <= tj1 + tj2


@lru_cache(maxsize=None)
def _cg_tensor(tj1: int, tj2: int, tJ: int) -> np.ndarray:
    d1, d2, dJ = tj1 + 1, tj2 + 1, tJ + 1
    out = np.zeros((d1, d2, dJ))
    for k1 in range(d1):
        tm1 = tj1 - 2 * k1
        for k2 in range(d2):
            tm2 = tj2 - 2 * k2
            tM = tm1 + tm2
            K = (tJ - tM) // 2
            if 0 <= K < dJ and (tJ - tM) % 2 == 0:
                out[k1, k2, K] = _cg_coefficient(tj1, tm1, tj2, tm2, tJ, tM)
    out.setflags(write=False)
    return out


def clebsch_gordan(j1: Spin, j2: Spin, J: Spin) -> np.ndarray:
    """Coupling isometry j1 (x) j2 -> J as a (d1, d2, dJ) tensor.

    Flattening the first two axes gives a matrix with orthonormal columns;
    it intertwines D(j1) (x) D(j2) with D(J).

    Raises
    ------
    ValueError
        If (j1, j2, J) violates the triangle inequality or parity.
    """
    for s in (j1, j2, J):
        _check_spin_cap(s.twice_j)
    if not _admissible(j1.twice_j, j2.twice_j, J.twice_j):
        raise ValueError(f"inadmissible coupling ({j1.twice_j}, {j2.twice_j}, {J.twice_j})/2")
    return _cg_tensor(j1.twice_j, j2.twice_j, J.twice_j).astype(complex)


@lru_cache(maxsize=None)
def _epsilon(twice_j: int) -> np.ndarray:
    d = twice_j + 1
    e = np.zeros((d, d))
    for k in range(d):
        e[twice_j - k, k] = (-1.0) ** (twice_j - k)
    e.setflags(write=False)
    return e


def epsilon(spin: Spin) -> np.ndarray:
    """Dual-representation conjugator C with conj(D(g)) = C D(g) C^{-1}.

    Real signed antidiagonal; unitary; C conj(C) = (-1)^(2j) I.  For spin
    1/2 it is [[0, 1], [-1, 0]].
    """
    _check_spin_cap(spin.twice_j)
    return _epsilon(spin.twice_j).astype(complex)


def invariant_vectors(twice_js: Sequence[int]) -> list[np.ndarray]:
    """Orthonormal basis of the invariant subspace of a ket tensor product.

    Built by left-comb binary coupling: legs are coupled in order through
    all admissible intermediate spins, keeping the branches that end at
    total spin zero.  Returns a list of arrays with one axis per leg.
    """
    tjs = tuple(int(t) for t in twice_js)
    for t in tjs:
        _check_spin_cap(t)
    if len(tjs) == 0:
        return [np.ones((), dtype=complex)]
    vecs: list[np.ndarray] = []
    start = np.eye(tjs[0] + 1, dtype=complex)

    def couple(k: int, tja: int, partial: np.ndarray) -> None:
        if k == len(tjs) - 1:
            if tja == 0:
                vecs.append(np.ascontiguousarray(partial[..., 0]))
            return
        tjb = tjs[k + 1]
        for tjc in range(abs(tja - tjb), tja + tjb + 1, 2):
            cg = _cg_tensor(tja, tjb, tjc)
            couple(k + 1, tjc, np.einsum("...a,abc->...bc", partial, cg))

    couple(0, tjs[0], start)
    return vecs


@dataclass(frozen=True, eq=False)
class Intertwiner:
    """Invariant element of a mixed tensor product of irreps.

    ``leg_spins`` pairs each leg with a direction: "out" legs transform in
    the representation, "in" legs in its dual.  ``components`` has one axis
    per leg, axis k of dimension leg_spins[k][0].dim.
    """

    leg_spins: tuple[tuple[Spin, str], ...]
    components: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "leg_spins", tuple((s, d) for s, d in self.leg_spins))
        object.__setattr__(self, "components", np.asarray(self.components, dtype=complex))
        expected = tuple(s.dim for s, _ in self.leg_spins)
        if tuple(np.shape(self.components)) != expected:
            raise ValueError(
                f"component shape {np.shape(self.components)} does not match legs {expected}"
            )
        for _, d in self.leg_spins:
            if d not in ("in", "out"):
                raise ValueError(f"leg direction must be 'in' or 'out', got {d!r}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Intertwiner):
            return NotImplemented
        return self.leg_spins == other.leg_spins and np.array_equal(
            self.components, other.components
        )

    def __hash__(self) -> int:
        return hash(self.leg_spins)


def _apply_on_axis(tensor: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    """Left-multiply ``matrix`` onto one axis: out[..a'..] = sum_a M[a',a] T[..a..]."""
    moved = np.moveaxis(tensor, axis, 0)
    return np.moveaxis(np.tensordot(matrix, moved, axes=(1, 0)), 0, axis)


def intertwiner_basis(legs: Sequence[tuple[Spin, str]]) -> list[Intertwiner]:
    """Orthonormal basis (Hilbert-Schmidt) of the intertwiner space.

    Empty list when the space is zero-dimensional.  In-legs are obtained
    from the all-ket invariant basis by applying epsilon on the dualized
    axes, which preserves orthonormality.
    """
    legs = tuple((s, d) for s, d in legs)
    kets = invariant_vectors([s.twice_j for s, _ in legs])
    out = []
    for v in kets:
        comp = v
        for axis, (s, d) in enumerate(legs):
            if d == "in":
                comp = _apply_on_axis(comp, epsilon(s), axis)
        out.append(Intertwiner(legs, comp))
    return out


def transform_intertwiner(iv: Intertwiner, g: GroupElement) -> np.ndarray:
    """Group action on an intertwiner's components.

    Out-legs are contracted with D(g) on the right of the axis,
    in-legs with D(g)^{-1} on the left; an intertwiner is a fixed point
    of this action for every g.
    """
    comp = iv.components
    for axis, (s, d) in enumerate(iv.leg_spins):
        dmat = wigner_entries(s.twice_j, g.as_array())
        if d == "out":
            moved = np.moveaxis(comp, axis, -1)
            comp = np.moveaxis(moved @ dmat, -1, axis)
        else:
            comp = _apply_on_axis(comp, dmat.conj().T, axis)
    return comp
