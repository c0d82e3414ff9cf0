"""Exact disorder-averaged Green's functions from one deterministic evaluation.

Averaging the resolvent over independent Cauchy noise on the marked diagonal
entries is exactly equivalent to deleting the noise and subtracting i*gamma
from those same entries.  The whole ensemble therefore collapses to a single
complex matrix, evaluated by either of two routes:

* ``averaged_greens`` -- one real-symmetric eigendecomposition of h0, then
  G(w) = U diag(1/(w + i(eta+gamma) - eps_m)) U^T per frequency.  Valid only
  when every site is disordered, because only then is the shift a multiple of
  the identity.
* ``solve_greens`` -- a direct complex linear solve of
  (w + i*eta)I - h0 + i*gamma*D per frequency, where D is the disorder mask.
  Works for any mask (the cavity state carries no -i*gamma).

Densities of states are the usual -Im/pi of the diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConvergenceFailure, NonMonotonicGrid, SingularMatrix,
                     SingularResolvent)
from .lattice import HamiltonianSpec

PARTIAL_MASK_ETA_FACTOR = 1e-3


@dataclass(frozen=True)
class SpectralGrid:
    """Strictly increasing real frequencies plus the probe regularizer eta >= 0."""

    omegas: np.ndarray
    eta: float = 0.0

    def __post_init__(self):
        omegas = np.atleast_1d(np.asarray(self.omegas, dtype=float))
        if omegas.size < 1:
            raise NonMonotonicGrid("grid needs at least one frequency")
        if omegas.size > 1 and not np.all(np.diff(omegas) > 0):
            raise NonMonotonicGrid("frequencies must be strictly increasing")
        if not np.all(np.isfinite(omegas)):
            raise NonMonotonicGrid("frequencies must be finite")
        if self.eta < 0:
            raise ValueError(f"eta must be non-negative, got {self.eta}")
        omegas = omegas.copy()
        omegas.setflags(write=False)
        object.__setattr__(self, "omegas", omegas)

    @classmethod
    def from_window(cls, window, eta: float = 0.0) -> "SpectralGrid":
        return cls(window.omegas(), eta)


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and the orthogonal matrix of column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def diagonalize(spec: HamiltonianSpec) -> EigenSystem:
    """Full spectrum of the clean h0 via the dense symmetric eigensolver."""
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(spec.h0)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}") from exc
    return EigenSystem(eigenvalues, eigenvectors)


def default_eta(spec: HamiltonianSpec) -> float:
    """0 when every site is disordered (gamma already regularizes); else 1e-3*gamma."""
    return 0.0 if spec.disordered.all() else PARTIAL_MASK_ETA_FACTOR * spec.gamma


@dataclass(frozen=True)
class GreensEvaluation:
    """Averaged Green's function at one frequency.

    Either the full complex-symmetric ``matrix`` is present, or ``values``
    holds just the requested ``elements`` (index pairs).  ``gamma`` records
    the Cauchy half-width the average was taken at.
    """

    omega: float
    gamma: float
    n_sites: int
    matrix: np.ndarray | None = None
    elements: tuple[tuple[int, int], ...] | None = None
    values: np.ndarray | None = None

    def entry(self, i: int, j: int) -> complex:
        if self.matrix is not None:
            return complex(self.matrix[i, j])
        for (a, b), v in zip(self.elements, self.values):
            if (a, b) == (i, j) or (a, b) == (j, i):  # G is complex symmetric
                return complex(v)
        raise KeyError(f"element ({i}, {j}) was not evaluated")

    def diagonal(self) -> np.ndarray:
        if self.matrix is not None:
            return np.diagonal(self.matrix).copy()
        diag = np.full(self.n_sites, np.nan + 0j)
        for (a, b), v in zip(self.elements, self.values):
            if a == b:
                diag[a] = v
        if np.isnan(diag.real).any():
            raise KeyError("full diagonal was not evaluated")
        return diag


def _normalized_elements(elements, n):
    pairs = []
    for i, j in elements:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"element ({i}, {j}) outside 0..{n - 1}")
        pairs.append((i, j))
    return tuple(pairs)


def averaged_greens(eig: EigenSystem, spec: HamiltonianSpec, grid: SpectralGrid,
                    elements=None) -> list[GreensEvaluation]:
    """Eigenmode route: G(w) = U diag(1/(w + i(eta+gamma) - eps_m)) U^T.

    Requires the uniform disorder mask; a partial mask (cavity) must go
    through solve_greens because the -i*gamma shift there is not a multiple
    of the identity.  When ``elements`` is given, only those entries are
    materialized: G_ij = sum_m U_im U_jm / (w + i(eta+gamma) - eps_m).
    """
    if not spec.disordered.all():
        raise ValueError("eigenmode route needs every site disordered; use solve_greens")
    n = spec.n_sites
    shift = grid.eta + spec.gamma
    eps = eig.eigenvalues
    u = eig.eigenvectors
    if elements is not None:
        elements = _normalized_elements(elements, n)
        weights = np.array([u[i, :] * u[j, :] for i, j in elements])  # (k, n)
    out = []
    for omega in grid.omegas:
        denom = omega + 1j * shift - eps
        if np.any(denom == 0):
            raise SingularResolvent(f"resolvent pole hit exactly at omega = {omega}")
        modes = 1.0 / denom
        if elements is None:
            g = (u * modes) @ u.T
            out.append(GreensEvaluation(float(omega), spec.gamma, n, matrix=g))
        else:
            out.append(GreensEvaluation(float(omega), spec.gamma, n, elements=elements,
                                        values=weights @ modes))
    return out


def solve_greens(spec: HamiltonianSpec, grid: SpectralGrid,
                 elements=None) -> list[GreensEvaluation]:
    """Direct route: solve ((w + i*eta)I - h0 + i*gamma*D) G = I columnwise.

    D is the diagonal disorder mask, so partial masks are handled exactly;
    this is the reference the eigenmode shortcut is checked against.
    """
    n = spec.n_sites
    shift = np.where(spec.disordered, spec.gamma, 0.0)
    base = -spec.h0 + 1j * np.diag(shift)
    if elements is not None:
        elements = _normalized_elements(elements, n)
        columns = sorted({j for _, j in elements})
        rhs = np.eye(n, dtype=complex)[:, columns]
    out = []
    for omega in grid.omegas:
        m = base + (omega + 1j * grid.eta) * np.eye(n)
        try:
            if elements is None:
                g = np.linalg.solve(m, np.eye(n, dtype=complex))
                evaluation = GreensEvaluation(float(omega), spec.gamma, n, matrix=g)
            else:
                cols = np.linalg.solve(m, rhs)
                lookup = {j: k for k, j in enumerate(columns)}
                values = np.array([cols[i, lookup[j]] for i, j in elements])
                evaluation = GreensEvaluation(float(omega), spec.gamma, n,
                                              elements=elements, values=values)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrix(f"shifted matrix singular at omega = {omega}") from exc
        out.append(evaluation)
    return out


def site_dos(evaluations) -> np.ndarray:
    """Per-site densities of states, shape (n_omega, n_sites).

    rho_i(w) = -Im G_ii(w + i*eta)/pi; column i is the curve for site i.
    """
    return np.array([-ev.diagonal().imag / np.pi for ev in evaluations])


def total_dos(evaluations) -> np.ndarray:
    """Trace version: rho_T(w) = -Im Tr G/pi, shape (n_omega,)."""
    return site_dos(evaluations).sum(axis=1)
