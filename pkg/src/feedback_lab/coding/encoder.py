"""Message-carrying source (A, C) driven by the initial condition W."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DimensionMismatch, NotObservable
from ..utils.linalg import as_matrix, as_vector, observability_matrix

logger = logging.getLogger(__name__)

OBSERVABILITY_RTOL = 1e-9
UNIT_CIRCLE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class EncoderSpec:
    """x_{t+1} = A x_t, r_t = C' x_t, x_0 = W of dimension n+1."""

    A: np.ndarray
    C: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.A.shape[0])

    @property
    def n(self) -> int:
        return self.dim - 1

    @classmethod
    def from_matrices(cls, A, C) -> "EncoderSpec":
        """Validate shapes and observability of (A, C')."""
        A_arr = as_matrix(A, "A")
        C_arr = as_vector(C, "C")
        if A_arr.shape[0] != A_arr.shape[1]:
            raise DimensionMismatch(f"A must be square, got shape {A_arr.shape}")
        if C_arr.size != A_arr.shape[0]:
            raise DimensionMismatch(
                f"C has {C_arr.size} entries but A is {A_arr.shape[0]}x{A_arr.shape[0]}")
        obs = observability_matrix(A_arr, C_arr, A_arr.shape[0])
        s = np.linalg.svd(obs, compute_uv=False)
        if s[0] == 0.0 or s[-1] <= OBSERVABILITY_RTOL * s[0]:
            raise NotObservable(float(s[-1]), float(s[0]))
        A_arr.setflags(write=False)
        C_arr.setflags(write=False)
        return cls(A=A_arr, C=C_arr)

    @classmethod
    def scalar(cls, a: float, c: float = 1.0) -> "EncoderSpec":
        return cls.from_matrices([[a]], [c])

    def gamma(self, T: int) -> np.ndarray:
        """Observability matrix Gamma_T with rows C' A^t, t = 0..T."""
        return observability_matrix(self.A, self.C, T + 1)

    def K_r(self, T: int) -> np.ndarray:
        G = self.gamma(T)
        return G @ G.T

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.A)

    def unstable_eigenvalues(self) -> np.ndarray:
        lam = self.eigenvalues()
        return lam[np.abs(lam) > 1.0]

    def degree_of_instability(self) -> float:
        """Product of the moduli of the unstable eigenvalues (1 if none)."""
        return float(np.prod(np.abs(self.unstable_eigenvalues()))) if self.dim else 1.0

    def as_dict(self) -> dict:
        return {"A": self.A.tolist(), "C": self.C.tolist(), "n": self.n}


def message_direction(encoder: EncoderSpec) -> np.ndarray:
    """Unit vector along the eigenvector of the largest-modulus eigenvalue.

    Vector messages (n > 0) are framed on this coordinate of W; for complex
    eigenvalues the real part of the eigenvector is used.
    """
    if encoder.dim == 1:
        return np.ones(1)
    lam, V = np.linalg.eig(encoder.A)
    v = np.real(V[:, int(np.argmax(np.abs(lam)))])
    norm = np.linalg.norm(v)
    if norm == 0.0:
        v = np.real(V[:, int(np.argmax(np.abs(lam)))] * 1j)
        norm = np.linalg.norm(v)
    return v / norm


def embed_message(encoder: EncoderSpec, value: float,
                  rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """W carrying ``value`` along ``message_direction`` and N(0,1) elsewhere."""
    d = message_direction(encoder)
    if encoder.dim == 1:
        return np.array([value])
    # orthonormal basis whose first column is d
    basis, _ = np.linalg.qr(np.column_stack([d, np.eye(encoder.dim)]))
    if basis[:, 0] @ d < 0:
        basis[:, 0] = -basis[:, 0]
    rng = rng or np.random.default_rng(0)
    coords = np.concatenate(([value], rng.standard_normal(encoder.dim - 1)))
    return basis @ coords
