"""Four-angle parametrization of U(2) and small 2x2 helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CoinAngles:
    """Angles ``(alpha, xi, zeta, theta)`` naming one element of U(2).

    Angles are stored exactly as given; no reduction modulo 2*pi.
    """

    alpha: float = 0.0
    xi: float = 0.0
    zeta: float = 0.0
    theta: float = 0.0

    def matrix(self) -> np.ndarray:
        return u2_from_angles(self)

    def inverse(self) -> "CoinAngles":
        """Angles of the inverse element, valid whenever ``alpha == 0`` and ``zeta == 0``."""
        if self.alpha != 0.0 or self.zeta != 0.0:
            raise ValueError("closed-form inverse only for alpha = zeta = 0")
        return CoinAngles(0.0, -self.xi, 0.0, -self.theta)


def u2_from_angles(angles: CoinAngles) -> np.ndarray:
    r"""Return the 2x2 unitary

    .. math::
        e^{i\alpha} \begin{pmatrix} e^{i\xi}\cos\theta & e^{i\zeta}\sin\theta \\
        -e^{-i\zeta}\sin\theta & e^{-i\xi}\cos\theta \end{pmatrix}
    """
    a, x, z, t = angles.alpha, angles.xi, angles.zeta, angles.theta
    c, s = np.cos(t), np.sin(t)
    return np.exp(1j * a) * np.array(
        [
            [np.exp(1j * x) * c, np.exp(1j * z) * s],
            [-np.exp(-1j * z) * s, np.exp(-1j * x) * c],
        ],
        dtype=np.complex128,
    )


def u2_batch(alpha, xi, zeta, theta) -> np.ndarray:
    """Vectorized :func:`u2_from_angles`; returns an array of shape ``(..., 2, 2)``."""
    alpha, xi, zeta, theta = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (alpha, xi, zeta, theta))
    )
    out = np.empty(alpha.shape + (2, 2), dtype=np.complex128)
    g = np.exp(1j * alpha)
    c, s = np.cos(theta), np.sin(theta)
    out[..., 0, 0] = g * np.exp(1j * xi) * c
    out[..., 0, 1] = g * np.exp(1j * zeta) * s
    out[..., 1, 0] = -g * np.exp(-1j * zeta) * s
    out[..., 1, 1] = g * np.exp(-1j * xi) * c
    return out


def unitarity_defect(m: np.ndarray) -> float:
    """Max absolute entry of ``U^dagger U - I`` (works on stacks of matrices)."""
    m = np.asarray(m)
    prod = np.conj(np.swapaxes(m, -1, -2)) @ m
    return float(np.max(np.abs(prod - np.eye(2))))


IDENTITY = np.eye(2, dtype=np.complex128)
