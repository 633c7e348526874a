"""Physics on top of the solvers: analytic oracles, defects, scans, resonances.

Energies are in the units of the regularized problem (the He⁺ ground
state sits at -8, helium's ground state near -11.9).
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .assembly import ProblemMatrices, combine_problem
from .basis import SINGLET, TRIPLET
from .eigensolver import ConvergenceError, SolveRequest, SpectrumResult, solve

log = logging.getLogger(__name__)

HELIUM_THRESHOLD = -8.0


def hydrogen2d_energy(N: int, Q: float) -> float:
    """-Q² / (2 (N - 1/2)²), the 2D hydrogenic level with principal number N."""
    if N < 1:
        raise ValueError("principal quantum number must be >= 1")
    return -Q * Q / (2.0 * (N - 0.5) ** 2)


def thresholds(N_max: int, Q: float = 2.0) -> List[float]:
    """Single-ionization thresholds I_1 .. I_{N_max}."""
    return [hydrogen2d_energy(N, Q) for N in range(1, N_max + 1)]


@dataclass(frozen=True)
class LevelLabel:
    N: int
    M: int
    n: int
    m: int
    M_L: int
    symmetry: str

    def __post_init__(self):
        if self.N < 1 or abs(self.M) > self.N - 1 or self.n < 1 or abs(self.m) > self.n - 1:
            raise ValueError(f"invalid quantum numbers {self}")

    def __str__(self):
        return f"{self.N},{self.M},{self.n},{self.m}"


def independent_electron_levels(M_L: int, symmetry: str, E_cutoff: float,
                                Q: float = 2.0, N_max: int = 30) -> List[Tuple[float, int]]:
    """Levels of two non-interacting electrons below ``E_cutoff``.

    Each unordered pair of distinct orbitals (N, M) gives one singlet and one
    triplet; a doubly occupied orbital gives a singlet only.  With
    ``symmetry='none'`` the electrons are distinguishable and ordered pairs
    are counted.  ``N_max`` bounds the orbital principal number, which
    matters when the cutoff lies above the first threshold.
    """
    if E_cutoff >= 0:
        raise ValueError("energy cutoff must be negative")
    orbitals = [(N, M) for N in range(1, N_max + 1) for M in range(-(N - 1), N)]
    levels: Dict[float, int] = {}
    for i, (N1, M1) in enumerate(orbitals):
        for j, (N2, M2) in enumerate(orbitals):
            if M1 + M2 != M_L:
                continue
            E = hydrogen2d_energy(N1, Q) + hydrogen2d_energy(N2, Q)
            if E >= E_cutoff:
                continue
            if symmetry == "none":
                count = 1
            elif j < i:
                continue
            elif symmetry == SINGLET:
                count = 1
            elif symmetry == TRIPLET:
                count = 0 if i == j else 1
            else:
                raise ValueError(f"unknown symmetry {symmetry!r}")
            if count:
                key = round(E, 12)
                levels[key] = levels.get(key, 0) + count
    return sorted(levels.items())


def quantum_defect(E: float, n: int, threshold: float = HELIUM_THRESHOLD) -> float:
    """δ from E = threshold - 1/(2 (n - 1/2 - δ)²)."""
    if E >= threshold:
        raise ValueError(f"energy {E} is not below the threshold {threshold}")
    if n < 1:
        raise ValueError("n must be >= 1")
    return n - 0.5 - 1.0 / math.sqrt(2.0 * (threshold - E))


def defect_energy(delta: float, n: int, threshold: float = HELIUM_THRESHOLD) -> float:
    return threshold - 1.0 / (2.0 * (n - 0.5 - delta) ** 2)


def b_norm(c: np.ndarray, Bmat) -> float:
    """Physical squared norm cᵀ B c / 16 (bilinear, no conjugation)."""
    c = np.asarray(c)
    if Bmat.shape[0] != c.shape[0]:
        raise ValueError(f"vector of length {c.shape[0]} does not match metric {Bmat.shape}")
    return (c @ (Bmat @ c)) / 16.0


def rotated_alpha(modulus: float, theta: float = 0.0) -> complex:
    """Scale parameter for a physical complex rotation r → r e^{iθ}.

    Lengths scale as α⁴, so the phase of α is θ/4.
    """
    if modulus <= 0:
        raise ValueError("alpha modulus must be positive")
    if theta == 0:
        return float(modulus)
    return modulus * cmath.exp(0.25j * theta)


def spectrum(P: ProblemMatrices, alpha: float, req: SolveRequest, theta: float = 0.0,
             epsilon: float = 1.0, F: float = 0.0) -> SpectrumResult:
    """Solve one pencil and attach the physical parameters to the result."""
    A, M = combine_problem(P, rotated_alpha(alpha, theta), epsilon, F)
    meta = dict(P.metadata)
    meta.update(alpha=alpha, theta=theta, epsilon=epsilon, F=F)
    return solve(A, M, req, metadata=meta)


def ground_energy(P: ProblemMatrices, alpha: float, shift: float, epsilon: float = 1.0,
                  tol: float = 1e-10, seed: int = 20240531) -> float:
    """Lowest eigenvalue near ``shift``."""
    r = spectrum(P, alpha, SolveRequest(shift=shift, k=1, tol=tol, seed=seed), epsilon=epsilon)
    return float(r.eigenvalues[0].real)


def optimize_alpha(P: ProblemMatrices, shift: float, epsilon: float = 1.0,
                   bounds: Tuple[float, float] = (0.2, 0.8), xtol: float = 1e-3,
                   tol: float = 1e-10) -> Tuple[float, float]:
    """Variationally best α for the ground state; returns (α, E₀).

    Bounded Brent search (golden-section steps with parabolic acceleration).
    """
    res = minimize_scalar(lambda a: ground_energy(P, a, shift, epsilon, tol), bounds=bounds,
                          method="bounded", options={"xatol": xtol})
    return float(res.x), float(res.fun)


def epsilon_scan(P: ProblemMatrices, alpha: float, eps_points: Sequence[float], shift: float,
                 tol: float = 1e-10) -> np.ndarray:
    return np.array([ground_energy(P, alpha, shift, e, tol) for e in eps_points])


def epsilon_scan_slope(P: ProblemMatrices, alpha: float, eps_points: Sequence[float],
                       shift: float = -16.5) -> Tuple[float, float]:
    """Least-squares (slope, intercept) of E₀(ε) for the scaled repulsion ε/r12."""
    eps = np.asarray(eps_points, dtype=float)
    if len(eps) < 2:
        raise ValueError("need at least two epsilon points")
    E = epsilon_scan(P, alpha, eps, shift)
    slope, intercept = np.polyfit(eps, E, 1)
    return float(slope), float(intercept)


@dataclass
class ResonanceCandidate:
    energy: complex
    drift: float
    metadata: Dict = field(default_factory=dict)

    @property
    def width(self) -> float:
        return -2.0 * self.energy.imag


def resonance_filter(spec1: SpectrumResult, spec2: SpectrumResult, tol: float = 1e-6) -> List[ResonanceCandidate]:
    """Eigenvalues that stay put between two rotation angles.

    Greedy nearest-neighbour matching: the globally closest pair is matched
    first, both partners are removed, and so on.
    """
    t1 = spec1.metadata.get("theta")
    t2 = spec2.metadata.get("theta")
    if t1 is not None and t1 == t2:
        raise ValueError("the two spectra must use different rotation angles")
    e1 = np.asarray(spec1.eigenvalues, dtype=complex)[spec1.converged]
    e2 = np.asarray(spec2.eigenvalues, dtype=complex)[spec2.converged]
    if not len(e1) or not len(e2):
        return []
    d = np.abs(e1[:, None] - e2[None, :])
    out = []
    used1, used2 = set(), set()
    for flat in np.argsort(d, axis=None):
        i, j = np.unravel_index(flat, d.shape)
        if i in used1 or j in used2:
            continue
        used1.add(i)
        used2.add(j)
        if d[i, j] < tol:
            meta = {k: v for k, v in spec2.metadata.items() if k != "theta"}
            meta["thetas"] = [t1, t2]
            out.append(ResonanceCandidate(complex(e2[j]), float(d[i, j]), meta))
    out.sort(key=lambda c: c.energy.real)
    return out


def find_resonances(P: ProblemMatrices, alpha: float, thetas: Tuple[float, float], shift: complex,
                    k: int = 10, tol: float = 1e-6, solver_tol: float = 1e-10,
                    seed: int = 20240531) -> List[ResonanceCandidate]:
    req = SolveRequest(shift=complex(shift), k=k, tol=solver_tol, seed=seed)
    s1 = spectrum(P, alpha, req, theta=thetas[0])
    s2 = spectrum(P, alpha, req, theta=thetas[1])
    return resonance_filter(s1, s2, tol)


@dataclass
class RydbergLevel:
    energy: float
    label: LevelLabel
    defect: Optional[float]
    residual: float


def series_start(M_L: int, symmetry: str) -> int:
    """Lowest outer principal number in a (M_L, symmetry) series."""
    n0 = abs(M_L) + 1
    if symmetry == TRIPLET and M_L == 0:
        n0 = 2
    return n0


def rydberg_table(P: ProblemMatrices, alpha: float, count: int, shift: Optional[float] = None,
                  tol: float = 1e-10, seed: int = 20240531) -> List[RydbergLevel]:
    """Lowest ``count`` bound levels below I₁ with labels and quantum defects.

    The outer-electron number is assigned by position within the series;
    the inner electron is in (N, M) = (1, 0) for every level below I₁.
    Unconverged pairs are dropped with a warning.
    """
    M_L = P.basis.M_L
    if M_L is None:
        raise ValueError("rydberg_table needs a basis with definite M_L")
    symmetry = P.basis.symmetry
    if shift is None:
        shift = HELIUM_THRESHOLD - 4.5
    req = SolveRequest(shift=shift, k=count + 2, tol=tol, seed=seed)
    try:
        res = spectrum(P, alpha, req)
        ok = np.ones(len(res), dtype=bool)
    except ConvergenceError as exc:
        if exc.partial is None:
            raise
        res = exc.partial
        ok = res.converged
        log.warning("dropping %d unconverged pairs", int((~ok).sum()))
    E = np.real(res.eigenvalues)
    keep = ok & (E < HELIUM_THRESHOLD)
    E, resid = E[keep], res.residuals[keep]
    order = np.argsort(E)[:count]
    n0 = series_start(M_L, symmetry)
    out = []
    for pos, i in enumerate(order):
        n = n0 + pos
        label = LevelLabel(1, 0, n, M_L, M_L, symmetry)
        out.append(RydbergLevel(float(E[i]), label, quantum_defect(float(E[i]), n), float(resid[i])))
    return out
