"""Brute-force validation path: truncated Fock basis, full Lindblad integration.

Everything here deliberately avoids the label-space machinery: states are
embedded as dense density matrices on a product Fock basis, the master
equation

    d rho / dt = i [rho, H] + sum_mn (gamma_mn / 2) ([a_n rho, a_m+] + h.c.)

is applied with explicitly constructed mode operators, and time stepping is
plain fixed-step fourth-order Runge-Kutta with re-hermitisation after every
step.  Agreement with the analytic trajectory is then measured in trace
distance.  Slow but independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ModelError, NumericalError
from .evolve import Trajectory
from .network import NetworkSpec, validate_network
from .states import SuperpositionState

__all__ = [
    "FockBasisSpec",
    "FockDensityMatrix",
    "LindbladGenerator",
    "ComparisonReport",
    "mode_lowering_ops",
    "poisson_tail",
    "minimum_cutoff",
    "suggest_cutoff",
    "max_tail_mass",
    "coherent_vector",
    "embed_state",
    "embed_labels",
    "build_generator",
    "dissipator_matrix",
    "step_size",
    "integrate",
    "mode_occupations",
    "mean_amplitudes",
    "compare",
]

_DIM_GUARD = 65536
_TAIL_LIMIT = 1e-10
_TRACE_ABORT = 1e-6


@dataclass(frozen=True)
class FockBasisSpec:
    """Product Fock basis: n modes, each truncated at `cutoff` excitations."""

    n: int
    cutoff: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ModelError("basis needs at least one mode")
        if self.cutoff < 1:
            raise ModelError("cutoff must be at least 1")
        if self.dim > _DIM_GUARD:
            raise ModelError(
                f"basis dimension {(self.cutoff + 1)}^{self.n} exceeds the {_DIM_GUARD} guard"
            )

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** self.n


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    """Dense density matrix on a truncated basis."""

    matrix: np.ndarray

    def validate(self, check_positivity: bool = False) -> None:
        rho = self.matrix
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > 1e-10:
            raise NumericalError(f"density matrix not Hermitian (deviation {herm:.3e})")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > _TRACE_ABORT:
            raise NumericalError(f"density matrix trace {tr!r} off unity")
        if check_positivity:
            lo = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
            if lo < -1e-8:
                raise NumericalError(f"density matrix has eigenvalue {lo:.3e}")


def mode_lowering_ops(basis: FockBasisSpec) -> list[sp.csr_array]:
    """Sparse lowering operator for each mode (mode 0 is the outermost factor)."""
    c = basis.cutoff
    single = sp.diags_array(np.sqrt(np.arange(1.0, c + 1.0)), offsets=1).astype(complex)
    eye = sp.eye_array(c + 1, dtype=complex)
    ops = []
    for m in range(basis.n):
        factors = [single if k == m else eye for k in range(basis.n)]
        ops.append(sp.csr_array(reduce(lambda x, y: sp.kron(x, y, format="csr"), factors)))
    return ops


# ---------------------------------------------------------------------------
# embedding


def poisson_tail(mean: float, cutoff: int) -> float:
    """P(K > cutoff) for a Poisson variable with the given mean."""
    if mean < 0.0:
        raise ModelError("Poisson mean must be nonnegative")
    if mean == 0.0:
        return 0.0
    term = math.exp(-mean)
    total = term
    for k in range(1, cutoff + 1):
        term *= mean / k
        total += term
    return max(0.0, 1.0 - total)


def minimum_cutoff(amplitude: float) -> int:
    """Smallest per-mode cutoff keeping the Poisson tail below 1e-10."""
    mean = amplitude * amplitude
    c = 1
    while poisson_tail(mean, c) >= _TAIL_LIMIT:
        c += 1
        if c > 10_000:
            raise ModelError("amplitude too large for any reasonable truncation")
    return c


def suggest_cutoff(state: SuperpositionState) -> int:
    """Cutoff rule ceil(|b|^2 + 6 |b| + 8) on the largest label amplitude."""
    amax = float(np.max(np.abs(state.labels), initial=0.0))
    return int(math.ceil(amax * amax + 6.0 * amax + 8.0))


def max_tail_mass(labels: np.ndarray, cutoff: int) -> float:
    """Largest per-mode Poisson tail among all label amplitudes."""
    amps = np.abs(np.asarray(labels, dtype=complex)).ravel()
    if amps.size == 0:
        return 0.0
    return max(poisson_tail(float(a) ** 2, cutoff) for a in amps)


def _check_tails(labels: np.ndarray, basis: FockBasisSpec) -> None:
    worst = 0.0
    worst_amp = 0.0
    for a in np.abs(np.asarray(labels, dtype=complex)).ravel():
        t = poisson_tail(float(a) ** 2, basis.cutoff)
        if t > worst:
            worst, worst_amp = t, float(a)
    if worst >= _TAIL_LIMIT:
        raise ModelError(
            f"inadequate cutoff {basis.cutoff}: truncated mass {worst:.3e} for amplitude "
            f"{worst_amp:g}; required minimum cutoff is {minimum_cutoff(worst_amp)}"
        )


def coherent_vector(label, basis: FockBasisSpec) -> np.ndarray:
    """Truncated Fock expansion of the coherent product state with the given label."""
    label = np.atleast_1d(np.asarray(label, dtype=complex))
    if label.shape != (basis.n,):
        raise ModelError(f"label must have {basis.n} components")
    parts = []
    for beta in label:
        v = np.empty(basis.cutoff + 1, dtype=complex)
        v[0] = math.exp(-0.5 * abs(beta) ** 2)
        for k in range(1, basis.cutoff + 1):
            v[k] = v[k - 1] * beta / math.sqrt(k)
        parts.append(v)
    return reduce(np.kron, parts)


def embed_state(state: SuperpositionState, basis: FockBasisSpec) -> FockDensityMatrix:
    """Project a label-form state onto the truncated basis as a density matrix.

    Rejects cutoffs whose per-mode truncated mass reaches 1e-10 (the error
    names the required minimum); the embedded matrix is renormalised to unit
    trace.
    """
    if state.n != basis.n:
        raise ModelError(f"state has {state.n} modes, basis {basis.n}")
    _check_tails(state.labels, basis)
    psi = np.zeros(basis.dim, dtype=complex)
    for w, label in zip(state.weights, state.labels):
        psi += w * coherent_vector(label, basis)
    psi *= state.norm_factor
    rho = np.outer(psi, psi.conj())
    tr = np.trace(rho).real
    if tr <= 0.0:
        raise NumericalError("embedded state has vanishing trace")
    return FockDensityMatrix(rho / tr)


def embed_labels(labels: np.ndarray, coeffs: np.ndarray, basis: FockBasisSpec) -> np.ndarray:
    """Dense matrix sum_rs coeffs[r, s] |labels_r><labels_s| on the truncated basis."""
    labels = np.atleast_2d(np.asarray(labels, dtype=complex))
    _check_tails(labels, basis)
    v = np.column_stack([coherent_vector(lab, basis) for lab in labels])
    return v @ np.asarray(coeffs, dtype=complex) @ v.conj().T


# ---------------------------------------------------------------------------
# generator and integration


class LindbladGenerator:
    """The master-equation right-hand side on a truncated basis.

    Internally the double sum is grouped as B rho + rho B+ + sum_n a_n rho J_n+
    with B = -i H - (1/2) sum_mn gamma_mn a_m+ a_n and J_n = sum_m gamma_mn a_m,
    which is algebraically identical to the defining form.
    """

    def __init__(self, basis: FockBasisSpec, w: np.ndarray, gamma: np.ndarray) -> None:
        n = basis.n
        w = np.asarray(w, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        if w.shape != (n, n) or gamma.shape != (n, n):
            raise ModelError("network and decay matrices must match the basis size")
        self.basis = basis
        self.w = w
        self.gamma = gamma
        lower = mode_lowering_ops(basis)
        raise_ops = [op.conj().T.tocsr() for op in lower]
        ham = None
        anti = None
        for m in range(n):
            for k in range(n):
                if w[m, k] != 0.0:
                    t = w[m, k] * (raise_ops[m] @ lower[k])
                    ham = t if ham is None else ham + t
                if gamma[m, k] != 0.0:
                    t = gamma[m, k] * (raise_ops[m] @ lower[k])
                    anti = t if anti is None else anti + t
        dim = basis.dim
        zero = sp.csr_array((dim, dim), dtype=complex)
        ham = zero if ham is None else ham
        anti = zero if anti is None else anti
        self._b = (-1j * ham - 0.5 * anti).tocsr()
        # conjugate copy so rho @ B+ can run sparse-on-the-left and stay
        # linear in rho (dyad columns of the superoperator need linearity)
        self._bc = self._b.conj().tocsr()
        self._lower = lower
        # transposed right factors so every product is sparse-on-the-left
        self._jump_t = []
        for k in range(n):
            j = None
            for m in range(n):
                if gamma[m, k] != 0.0:
                    t = gamma[m, k] * lower[m]
                    j = t if j is None else j + t
            self._jump_t.append(None if j is None else j.conj().tocsr())
        self.rate_scale = max(
            float(np.max(np.sum(np.abs(w), axis=1), initial=0.0)),
            float(n * np.max(np.abs(gamma), initial=0.0)),
        )

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = self._b @ rho + (self._bc @ rho.T).T
        for k, jt in enumerate(self._jump_t):
            if jt is None:
                continue
            x = self._lower[k] @ rho
            out = out + (jt @ x.T).T
        return out

    def matrix(self) -> np.ndarray:
        """Dense superoperator matrix (row-major vec convention)."""
        d = self.basis.dim
        if d * d > _DIM_GUARD:
            raise ModelError(f"superoperator matrix would exceed the {_DIM_GUARD} guard")
        out = np.empty((d * d, d * d), dtype=complex)
        e = np.zeros((d, d), dtype=complex)
        for a in range(d):
            for b in range(d):
                e[a, b] = 1.0
                out[:, a * d + b] = self.apply(e).ravel()
                e[a, b] = 0.0
        return out


def build_generator(spec: NetworkSpec, gamma, basis: FockBasisSpec) -> LindbladGenerator:
    """Generator for a validated network and decay matrix on the given basis."""
    validate_network(spec)
    g = np.asarray(getattr(gamma, "matrix", gamma), dtype=float)
    return LindbladGenerator(basis, spec.w_matrix(), g)


def dissipator_matrix(gamma, basis: FockBasisSpec) -> np.ndarray:
    """Superoperator matrix of the dissipator alone (no Hamiltonian)."""
    g = np.asarray(getattr(gamma, "matrix", gamma), dtype=float)
    n = basis.n
    return LindbladGenerator(basis, np.zeros((n, n)), g).matrix()


def step_size(gen: LindbladGenerator, times) -> float:
    """Fixed RK4 step: min(0.01 / rate scale, smallest grid spacing)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size < 2:
        raise ModelError("integration needs at least two grid times")
    spacing = float(np.min(np.diff(times)))
    if spacing <= 0.0:
        raise ModelError("time grid must be strictly increasing")
    if gen.rate_scale <= 0.0:
        return spacing
    return min(0.01 / gen.rate_scale, spacing)


def integrate(rho0, gen: LindbladGenerator, times) -> list[FockDensityMatrix]:
    """Integrate the master equation over the grid with fixed-step RK4.

    The state is re-hermitised after every step; trace drift beyond 1e-6
    aborts with NumericalError.  Returns one density matrix per grid time,
    the first being rho0 itself.
    """
    rho = np.array(getattr(rho0, "matrix", rho0), dtype=complex, copy=True)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    h_target = step_size(gen, times)
    out = [FockDensityMatrix(rho.copy())]
    for i in range(times.size - 1):
        dt = float(times[i + 1] - times[i])
        nsub = max(1, int(math.ceil(dt / h_target - 1e-12)))
        h = dt / nsub
        for _ in range(nsub):
            k1 = gen.apply(rho)
            k2 = gen.apply(rho + 0.5 * h * k1)
            k3 = gen.apply(rho + 0.5 * h * k2)
            k4 = gen.apply(rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            rho = 0.5 * (rho + rho.conj().T)
            tr = np.trace(rho).real
            if not math.isfinite(tr) or abs(tr - 1.0) > _TRACE_ABORT:
                raise NumericalError(
                    f"trace drifted to {tr!r} near t = {times[i + 1]:g} (step {h:g}); "
                    "integration aborted"
                )
        out.append(FockDensityMatrix(rho.copy()))
    return out


# ---------------------------------------------------------------------------
# measurements and comparison


def _occupation_digits(basis: FockBasisSpec) -> np.ndarray:
    idx = np.arange(basis.dim)
    digits = np.empty((basis.dim, basis.n), dtype=float)
    for m in range(basis.n - 1, -1, -1):
        digits[:, m] = idx % (basis.cutoff + 1)
        idx = idx // (basis.cutoff + 1)
    return digits


def mode_occupations(rho, basis: FockBasisSpec) -> np.ndarray:
    """<a_m+ a_m> for each mode from a Fock-basis density matrix."""
    mat = np.asarray(getattr(rho, "matrix", rho))
    pops = np.real(np.diagonal(mat))
    return _occupation_digits(basis).T @ pops


def mean_amplitudes(rho, basis: FockBasisSpec) -> np.ndarray:
    """<a_m> for each mode from a Fock-basis density matrix."""
    mat = np.asarray(getattr(rho, "matrix", rho))
    return np.array([np.trace(op @ mat) for op in mode_lowering_ops(basis)])


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """Trace distances between analytic and integrated states, per grid time."""

    times: np.ndarray
    distances: np.ndarray
    max_distance: float


def compare(traj: Trajectory, rhos: Sequence[FockDensityMatrix], basis: FockBasisSpec) -> ComparisonReport:
    """Trace distance between a label trajectory and integrated Fock states.

    The analytic state is embedded on the same truncated basis at every grid
    time; distances are 0.5 * sum |eigenvalues| of the Hermitian difference.
    """
    if len(rhos) != traj.times.size:
        raise ModelError("trajectory and integrated states cover different grids")
    dists = np.empty(traj.times.size)
    for i in range(traj.times.size):
        analytic = embed_labels(traj.labels[i], traj.coeffs[i], basis)
        delta = analytic - np.asarray(rhos[i].matrix)
        delta = 0.5 * (delta + delta.conj().T)
        dists[i] = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(delta))))
    return ComparisonReport(times=np.array(traj.times), distances=dists, max_distance=float(np.max(dists)))
