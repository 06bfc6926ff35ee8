"""Zero and pole catalogues of the scalar kernels.

For the symmetric duct (gap length ``l`` on both sides, screen length
``l0``) the two kernels are

.. math::

    K_0(x) = \\frac{V_{l-2}(z)}{V_{l-1}(z)}, \\qquad
    K_1(x) = \\frac{V_{l_0-2}(z)}{1 - V_{l_0-1}(z)},

with ``z = -Lambda(x) / 2``.  Every Chebyshev root ``z_j`` maps to a
reciprocal pair ``x_in * x_out = 1`` solving ``x^2 + (2 z_j + Omega^2 - 4) x + 1 = 0``,
so both kernels are rational in ``x``:

.. math::

    K_0 = -x \\frac{P_0(x)}{Q_0(x)}, \\qquad K_1 = x \\frac{P_1(x)}{Q_1(x)}.

All roots come from closed-form cosines; nothing here calls a polynomial
root finder.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .kernels import pair_product
from .lattice_core import (AdmissibilityError, DegenerateConfigurationError,
                           LatticeFrequency, WaveguideGeometry, chebyshev_V,
                           select_inside_root)

logger = logging.getLogger(__name__)

#: Two Chebyshev-plane roots closer than this are treated as the same root.
COINCIDENCE_TOL = 1e-10


@dataclass(frozen=True)
class ReciprocalPair:
    """Pair of x-plane roots generated by one Chebyshev-plane root ``z``."""

    z: float
    x_in: complex
    x_out: complex
    confluent: bool = False


def roots_of_V(J: int) -> np.ndarray:
    """Roots of ``V_J``: ``cos(pi j / (J + 1))`` for ``j = 1..J`` (decreasing)."""
    if J < 0:
        raise AdmissibilityError("J must be >= 0")
    j = np.arange(1, J + 1)
    return np.cos(np.pi * j / (J + 1))


def roots_of_one_minus_V(J: int) -> tuple[np.ndarray, np.ndarray]:
    """Roots of ``1 - V_J`` split into the two closed-form families.

    Returns
    -------
    family1 : ndarray
        ``cos(2 pi j / J)`` for integer ``j`` in ``[1, J/2)``; these are
        shared with ``V_{J-1}``.
    family2 : ndarray
        ``cos(pi (2j + 1) / (J + 2))`` for integer ``j`` in ``[0, (J+1)/2)``.
    """
    if J < 1:
        raise AdmissibilityError("J must be >= 1")
    j1 = np.array([j for j in range(1, J + 1) if j < J / 2], dtype=float)
    j2 = np.array([j for j in range(0, J + 1) if j < (J + 1) / 2], dtype=float)
    fam1 = np.cos(2.0 * np.pi * j1 / J) if j1.size else np.zeros(0)
    fam2 = np.cos(np.pi * (2.0 * j2 + 1.0) / (J + 2))
    return fam1, fam2


def x_pair_from_z(z: float, f: LatticeFrequency) -> ReciprocalPair:
    """Map a Chebyshev-plane root to its reciprocal x-plane pair.

    ``gamma = 2 z + Omega^2 - 4``; the pair solves ``x^2 + gamma x + 1 = 0``.
    """
    z = float(np.real(z))

    def gamma_of(w: complex) -> complex:
        return 2.0 * z + w * w - 4.0

    x_in, x_out, confluent = select_inside_root(gamma_of, f)
    return ReciprocalPair(z=z, x_in=x_in, x_out=x_out, confluent=confluent)


def _remove_coincident(values: np.ndarray, drop: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``values`` into survivors and members within tolerance of ``drop``."""
    keep, gone = [], []
    for v in values:
        if drop.size and np.min(np.abs(drop - v)) <= COINCIDENCE_TOL:
            gone.append(v)
        else:
            keep.append(v)
    return np.array(keep, dtype=float), np.array(gone, dtype=float)


def pair_values(pairs: list[ReciprocalPair]) -> tuple[np.ndarray, np.ndarray]:
    return (np.array([pr.x_in for pr in pairs], dtype=complex),
            np.array([pr.x_out for pr in pairs], dtype=complex))


def _pair_product(x, pairs: list[ReciprocalPair]):
    x = np.asarray(x, dtype=complex)
    out = pair_product(x.reshape(-1), *pair_values(pairs)).reshape(x.shape)
    return complex(out) if out.ndim == 0 else out


@dataclass
class RationalKernelData:
    """Rational representation of ``K0`` or ``K1``.

    Attributes
    ----------
    kind : {"K0", "K1"}
    zeros, poles : list of ReciprocalPair
        ``mu`` and ``lambda`` pairs.
    b_in, b_out : ndarray
        Residue weights so that ``Res[K, lambda] = b * lambda``.
    cancelled : ndarray
        Chebyshev-plane roots removed by numerator/denominator cancellation.
    """

    kind: str
    l: int
    zeros: list
    poles: list
    b_in: np.ndarray
    b_out: np.ndarray
    cancelled: np.ndarray = field(default_factory=lambda: np.zeros(0))
    frequency: LatticeFrequency = None

    @property
    def J(self) -> int:
        return len(self.poles)

    @property
    def sign(self) -> float:
        return -1.0 if self.kind == "K0" else 1.0

    @property
    def lam_in(self) -> np.ndarray:
        return np.array([p.x_in for p in self.poles], dtype=complex)

    @property
    def lam_out(self) -> np.ndarray:
        return np.array([p.x_out for p in self.poles], dtype=complex)

    @property
    def mu_in(self) -> np.ndarray:
        return np.array([p.x_in for p in self.zeros], dtype=complex)

    @property
    def mu_out(self) -> np.ndarray:
        return np.array([p.x_out for p in self.zeros], dtype=complex)

    def P(self, x):
        return _pair_product(x, self.zeros)

    def Q(self, x):
        return _pair_product(x, self.poles)

    def evaluate(self, x):
        """Rational form ``sign * x * P(x) / Q(x)``."""
        x = np.asarray(x, dtype=complex)
        out = self.sign * x * self.P(x) / self.Q(x)
        return complex(out) if out.ndim == 0 else out

    def evaluate_chebyshev(self, x):
        """Direct Chebyshev-ratio evaluation (independent of the catalogue)."""
        x = np.asarray(x, dtype=complex)
        f = self.frequency
        z = -(f.omega_sq - 4.0 + x + 1.0 / x) / 2.0
        if self.kind == "K0":
            out = chebyshev_V(self.l - 2, z) / chebyshev_V(self.l - 1, z)
        else:
            out = chebyshev_V(self.l - 2, z) / (1.0 - chebyshev_V(self.l - 1, z))
        return complex(out) if np.ndim(out) == 0 else out

    def inside_part(self, x):
        """Sum of the principal parts at the inside poles, ``sum b_in lam_in / (x - lam_in)``."""
        x = np.asarray(x, dtype=complex)
        li = self.lam_in
        out = np.sum(self.b_in * li / (x[..., None] - li), axis=-1)
        return complex(out) if out.ndim == 0 else out

    def outside_part(self, x):
        x = np.asarray(x, dtype=complex)
        lo = self.lam_out
        out = np.sum(self.b_out * lo / (x[..., None] - lo), axis=-1)
        return complex(out) if out.ndim == 0 else out


def _residue_weights(poles: list[ReciprocalPair], zeros: list[ReciprocalPair],
                     sign: float) -> tuple[np.ndarray, np.ndarray]:
    """``b = sign * P(lam) / Q_j(lam)`` with ``Q_j`` the deflated pole product."""
    roots = [(j, side, pr.x_in if side == 0 else pr.x_out)
             for j, pr in enumerate(poles) for side in (0, 1)]
    b = np.zeros((len(poles), 2), dtype=complex)
    for j, side, lam in roots:
        qj = 1.0 + 0j
        for jj, ss, other in roots:
            if (jj, ss) != (j, side):
                qj *= lam - other
        b[j, side] = sign * _pair_product(lam, zeros) / qj
    return b[:, 0].copy(), b[:, 1].copy()


def _require_symmetric(g: WaveguideGeometry) -> tuple[int, int]:
    if not g.symmetric:
        raise AdmissibilityError("kernel catalogues need a symmetric geometry (l1 == l2)")
    if g.l0 < 2:
        raise AdmissibilityError("kernel catalogues need a screen of length >= 2")
    return g.l1, g.l0


def _pairs(zs: np.ndarray, f: LatticeFrequency, label: str, strict: bool) -> list[ReciprocalPair]:
    out = []
    for z in zs:
        pr = x_pair_from_z(z, f)
        if pr.confluent and strict:
            raise DegenerateConfigurationError(
                f"confluent {label} pair at z={z:.15g} (gamma = +-2) for omega={f.omega}")
        out.append(pr)
    return out


def kernel_data(kind: str, g: WaveguideGeometry, f: LatticeFrequency) -> RationalKernelData:
    """Zero/pole catalogue and residue weights of ``K0`` or ``K1``."""
    l, l0 = _require_symmetric(g)
    if kind == "K0":
        zero_z = roots_of_V(l - 2)
        pole_z = roots_of_V(l - 1)
        cancelled = np.zeros(0)
        order = l
    elif kind == "K1":
        fam1, fam2 = roots_of_one_minus_V(l0 - 1)
        zero_z, cancelled = _remove_coincident(roots_of_V(l0 - 2), fam1)
        if cancelled.size != fam1.size:
            raise DegenerateConfigurationError("K1 cancellation count mismatch")
        pole_z = fam2
        order = l0
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    zeros = _pairs(zero_z, f, f"{kind} zero", strict=True)
    poles = _pairs(pole_z, f, f"{kind} pole", strict=True)
    sign = -1.0 if kind == "K0" else 1.0
    b_in, b_out = _residue_weights(poles, zeros, sign)
    return RationalKernelData(kind=kind, l=order, zeros=zeros, poles=poles,
                              b_in=b_in, b_out=b_out, cancelled=cancelled, frequency=f)


def denominator_z_roots(l: int, l0: int) -> np.ndarray:
    """Chebyshev-plane roots of ``(1 - V_{l0-1}) V_{l-1} + V_{l0-2} V_{l-2}`` left after cancellation.

    These are ``cos(pi (2j+1) / (2l + l0 - 1))`` for ``0 <= j < l0/2 + l - 1``.
    The companion family ``cos(2 pi j / (l0 - 1))`` is a common factor of the
    kernel numerator and denominator and is never part of the list; when one
    of its members coincides with a listed root, the listed root stays (the
    uncancelled product has a double root there).
    """
    N = 2 * l + l0 - 1
    js = np.array([j for j in range(0, N) if j < l0 / 2 + l - 1], dtype=float)
    return np.cos(np.pi * (2.0 * js + 1.0) / N)


def denominator_roots(g: WaveguideGeometry, f: LatticeFrequency) -> list[ReciprocalPair]:
    """Reciprocal pairs ``nu`` of ``1 + K0 K1 = 0``; their count is the system size J."""
    l, l0 = _require_symmetric(g)
    z4 = denominator_z_roots(l, l0)
    z3 = roots_of_one_minus_V(l0 - 1)[0]
    for z in z4:
        if z3.size and np.min(np.abs(z3 - z)) <= COINCIDENCE_TOL:
            logger.info("denominator root z=%.12g is double before cancellation; kept once", z)
    return _pairs(z4, f, "denominator", strict=True)
