"""Time evolution.

Master equation convention:

    dρ/dt = −i[H(t), ρ] + Σ_C (2CρC† − C†Cρ − ρC†C) − (Γρ + ρΓ)

where Γ is an optional Hermitian rate operator for population that leaves the
simulated subspace for good (the 87Rb |u⟩ channels once |u⟩ is projected out).

Three engines share the `Propagation` interface:

* `SpectralPropagation`: closed systems that become time independent in a
  photon-number rotating frame; one eigendecomposition, exact at every t.
* `LiouvillePropagation`: open systems with such a frame; exponential of the
  (small) Liouvillian.
* `IntegratedPropagation`: everything else; adaptive Runge–Kutta on the
  Schrödinger or master equation with cached checkpoints.

"""

from __future__ import annotations

import bisect
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass as std_dataclass
from dataclasses import field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from typing_extensions import Literal

from cavityms.common import constant as C
from cavityms.common.model import dataclass
from cavityms.common.util.log import log_func
from cavityms.lib import qops
from cavityms.lib.common.exception import (
    ContractViolationError,
    IntegrationError,
    InvalidConfigurationError,
    InvalidDimensionError,
    PositivityError,
)
from cavityms.lib.hamiltonians import TimeDependentHamiltonian, build_rb87_effective
from cavityms.lib.params import (
    DecayBranch,
    RamanConfig,
    Rb87Config,
    raman_branches,
    rb87_branches,
)

logger = logging.getLogger(__name__)

LIOUVILLE_LIMIT = 1024
Kind = Literal["ket", "rho"]


@dataclass
class IntegratorConfig:
    """Runge–Kutta settings.

    Args:
        rel_tol (float): relative tolerance
        abs_tol (float): absolute tolerance
        max_step (float | None): largest step; unbounded when None
        method (str): `scipy.integrate.solve_ivp` method
        output_times (List[float] | None): default output grid

    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: Optional[float] = None
    method: str = "DOP853"
    output_times: Optional[List[float]] = None

    def __post_init__(self) -> None:
        """Validate tolerances and the output grid."""
        for key in ("rel_tol", "abs_tol"):
            if not getattr(self, key) > 0:
                raise InvalidConfigurationError("must be positive", key=key)
        if self.max_step is not None and not self.max_step > 0:
            raise InvalidConfigurationError("must be positive", key="max_step")
        if self.method not in ("RK45", "DOP853", "RK23"):
            raise InvalidConfigurationError(
                f"unsupported method {self.method!r}", key="method"
            )
        if self.output_times is not None and np.any(np.diff(self.output_times) < 0):
            raise InvalidConfigurationError("must be nondecreasing", key="output_times")

    @classmethod
    def for_density(cls, **kwargs) -> IntegratorConfig:
        """Density-matrix defaults (1e−7 / 1e−9)."""
        kwargs.setdefault("rel_tol", 1e-7)
        kwargs.setdefault("abs_tol", 1e-9)
        return cls(**kwargs)

    def solver_options(self) -> dict:
        """Keyword arguments for `solve_ivp`."""
        options = dict(method=self.method, rtol=self.rel_tol, atol=self.abs_tol)
        if self.max_step is not None:
            options["max_step"] = self.max_step
        return options


###############
# Open models #
###############
@std_dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian, collapse operators and an optional leakage rate operator."""

    hamiltonian: TimeDependentHamiltonian
    collapse_ops: Tuple[np.ndarray, ...] = ()
    leakage: Optional[np.ndarray] = None
    decay: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        """Check shapes and cache Γ_total = Σ C†C + leakage."""
        layout = self.hamiltonian.layout
        ops = tuple(qops.check_operator(c, layout) for c in self.collapse_ops)
        ops = tuple(c for c in ops if np.any(c))
        decay = np.zeros((layout.dim, layout.dim), dtype=complex)
        for c in ops:
            decay += c.conj().T @ c
        if self.leakage is not None:
            leak = qops.check_operator(self.leakage, layout)
            if not qops.is_hermitian(leak):
                raise ContractViolationError("leakage operator must be Hermitian")
            decay += leak
        object.__setattr__(self, "collapse_ops", ops)
        object.__setattr__(self, "decay", decay)

    @property
    def layout(self) -> qops.HilbertLayout:
        """Shared layout."""
        return self.hamiltonian.layout

    @property
    def is_closed(self) -> bool:
        """No collapse operators and no leakage."""
        return not self.collapse_ops and self.leakage is None

    def with_ops(self, *ops: np.ndarray) -> LindbladModel:
        """Copy with extra collapse operators."""
        return LindbladModel(self.hamiltonian, self.collapse_ops + ops, self.leakage)


def restrict(model: LindbladModel, levels: Sequence[int]) -> LindbladModel:
    """Project a model onto the given atomic levels.

    Exact for the kept block when nothing couples back into it: H has no
    matrix elements between kept and dropped states, no collapse operator
    starts on a dropped state and jumps into it, and the dropped part never
    interferes with the kept part through C†C. Population jumping out becomes
    the leakage rate Σ P C†(1 − P) C P.
    """
    small, keep = model.layout.restrict(levels)
    drop = np.setdiff1d(np.arange(model.layout.dim), keep)

    def _block(op: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        return op[np.ix_(rows, cols)]

    h = model.hamiltonian
    for op in (h.static,) + tuple(op for op, _ in h.terms):
        if np.any(_block(op, keep, drop)) or np.any(_block(op, drop, keep)):
            raise ContractViolationError("Hamiltonian couples kept and dropped levels")

    ops, leak = [], np.zeros((len(keep), len(keep)), dtype=complex)
    for c in model.collapse_ops:
        if np.any(_block(c, keep, drop)):
            raise ContractViolationError("a collapse operator feeds the kept levels")
        out = _block(c, drop, keep)
        if np.any(out.conj().T @ _block(c, drop, drop)):
            raise ContractViolationError("dropped levels interfere with kept ones")
        inside = _block(c, keep, keep)
        if np.any(inside):
            ops.append(inside)
        leak += out.conj().T @ out
    if model.leakage is not None:
        leak += _block(model.leakage, keep, keep)

    hamiltonian = TimeDependentHamiltonian(
        small,
        _block(h.static, keep, keep),
        tuple((_block(op, keep, keep), omega) for op, omega in h.terms),
    )
    return LindbladModel(hamiltonian, tuple(ops), leak if np.any(leak) else None)


###################
# Collapse builders #
###################
def cavity_decay_ops(kappa: float, layout: qops.HilbertLayout) -> List[np.ndarray]:
    """[√κ a]; empty when κ = 0."""
    if kappa < 0:
        raise InvalidConfigurationError("must be >= 0", key="kappa")
    if kappa == 0:
        return []
    return [np.sqrt(kappa) * qops.annihilate(layout)]


def branch_ops(
    branches: Sequence[DecayBranch], layout: qops.HilbertLayout
) -> List[np.ndarray]:
    """One collapse operator per branch and atom."""
    a = qops.annihilate(layout)
    ops = []
    for b in branches:
        for site in range(layout.n_atoms):
            photon = qops.transition(layout, site, b.to, b.photon_from) @ a
            drive = qops.transition(layout, site, b.to, b.drive_from)
            ops.append(np.sqrt(b.rate) * (b.photon_coeff * photon + b.drive_coeff * drive))
    return ops


def effective_atomic_ops(cfg: RamanConfig, layout: qops.HilbertLayout) -> List[np.ndarray]:
    """C_1g, C_1e, C_2g, C_2e on every atom (zero-rate channels dropped)."""
    return branch_ops(raman_branches(cfg), layout)


def raman_decay_ops(cfg: RamanConfig, layout: qops.HilbertLayout) -> List[np.ndarray]:
    """√γ_jξ |ξ⟩⟨r_j| on every atom of the four-level model."""
    if min(layout.atom_levels) < 4:
        raise InvalidDimensionError("four-level decay needs (g, e, r1, r2) atoms")
    lv = C.Level
    channels = (
        (cfg.gamma_1g, lv.G, lv.R1),
        (cfg.gamma_1e, lv.E, lv.R1),
        (cfg.gamma_2g, lv.G, lv.R2),
        (cfg.gamma_2e, lv.E, lv.R2),
    )
    return [
        np.sqrt(rate) * qops.transition(layout, site, to, frm)
        for rate, to, frm in channels
        if rate > 0
        for site in range(layout.n_atoms)
    ]


def rb87_ops(cfg: Rb87Config, layout: qops.HilbertLayout) -> List[np.ndarray]:
    """The nine 87Rb channels per atom on a (g, e, u) layout."""
    if min(layout.atom_levels) < 3:
        raise InvalidDimensionError("87Rb collapse operators need (g, e, u) atoms")
    return branch_ops(rb87_branches(cfg), layout)


def rb87_model(cfg: Rb87Config, n_max: int = 4, reduce: bool = True) -> LindbladModel:
    """Full 87Rb model; with `reduce` the |u⟩ level is folded into leakage."""
    layout = qops.HilbertLayout.uniform(2, 3, n_max)
    model = LindbladModel(
        build_rb87_effective(cfg, layout),
        tuple(cavity_decay_ops(cfg.kappa, layout) + rb87_ops(cfg, layout)),
    )
    if reduce:
        return restrict(model, (C.Level.G, C.Level.E))
    return model


##################
# Rotating frame #
##################
def _photon_shift(op: np.ndarray, n: np.ndarray) -> Optional[int]:
    """Fixed change in photon number produced by `op`, None if mixed."""
    rows, cols = np.nonzero(op)
    if rows.size == 0:
        return 0
    shifts = np.unique(n[rows] - n[cols])
    return int(shifts[0]) if shifts.size == 1 else None


def photon_frame(model: LindbladModel) -> Optional[np.ndarray]:
    """Diagonal D making the model stationary in the frame ψ = e^{−iDt}φ.

    D = 0 for static models and D = −ω·n when every oscillating term lowers
    the photon number by one at a common ω. Collapse operators must shift the
    photon number by a fixed amount and Γ must conserve it. None otherwise.
    """
    layout = model.layout
    n = layout.photon_numbers().astype(float)
    h = model.hamiltonian
    if h.is_static:
        return np.zeros(layout.dim)
    freqs = set(h.frequencies)
    if len(freqs) != 1:
        return None
    if _photon_shift(h.static, n) != 0:
        return None
    if any(_photon_shift(op, n) != -1 for op, _ in h.terms):
        return None
    if any(_photon_shift(c, n) is None for c in model.collapse_ops):
        return None
    if model.leakage is not None and _photon_shift(model.leakage, n) != 0:
        return None
    return -freqs.pop() * n


def frame_generator(model: LindbladModel, shift: np.ndarray) -> np.ndarray:
    """Time-independent K̃ = H̃ − iΓ in the frame given by `shift`."""
    h = model.hamiltonian
    hermitian = h.static - np.diag(shift)
    for op, _ in h.terms:
        hermitian = hermitian + op + op.conj().T
    return hermitian - 1j * model.decay


################
# Propagations #
################
class Propagation(ABC):
    """Evolution of a batch of initial states (shape (B, d) or (B, d, d))."""

    kind: Kind

    def __init__(self, model: LindbladModel, initial: np.ndarray) -> None:
        """Initialize."""
        self.model = model
        self.initial = np.asarray(initial, dtype=complex)
        expected = 2 if self.kind == "ket" else 3
        if self.initial.ndim != expected or self.initial.shape[-1] != model.layout.dim:
            raise InvalidDimensionError(
                f"{self.kind} batch of shape {self.initial.shape} for dim {model.layout.dim}"
            )

    @property
    def layout(self) -> qops.HilbertLayout:
        """Layout of the evolved states."""
        return self.model.layout

    @abstractmethod
    def at(self, t: float) -> np.ndarray:
        """States at time t."""

    def sweep(self, times: Sequence[float]) -> Iterator[Tuple[float, np.ndarray]]:
        """(t, states) for every t in a nondecreasing grid."""
        for t in times:
            yield float(t), self.at(float(t))


class SpectralPropagation(Propagation):
    """Closed system, stationary in a photon frame: ψ(t) = e^{−iDt} W e^{−iwt} W† ψ0."""

    kind = "ket"

    def __init__(self, model: LindbladModel, initial: np.ndarray, shift: np.ndarray) -> None:
        """Diagonalize the frame Hamiltonian once."""
        super().__init__(model, initial)
        generator = frame_generator(model, shift)
        self.shift = shift
        self.energies, self.vectors = np.linalg.eigh(0.5 * (generator + generator.conj().T))
        self._coeffs = self.initial @ self.vectors.conj()

    def at(self, t: float) -> np.ndarray:
        """Exact states at t."""
        evolved = (self._coeffs * np.exp(-1j * self.energies * t)) @ self.vectors.T
        return evolved * np.exp(-1j * self.shift * t)


class LiouvillePropagation(Propagation):
    """Open system, stationary in a photon frame; exact exponential of the Liouvillian.

    Row-major vectorization: vec(AρB) = (A ⊗ Bᵀ) vec(ρ).
    """

    kind = "rho"

    def __init__(self, model: LindbladModel, initial: np.ndarray, shift: np.ndarray) -> None:
        """Build the Liouvillian."""
        super().__init__(model, initial)
        d = model.layout.dim
        k = frame_generator(model, shift)
        eye = np.eye(d)
        liouvillian = -1j * np.kron(k, eye) + 1j * np.kron(eye, k.conj())
        for c in model.collapse_ops:
            liouvillian += 2 * np.kron(c, c.conj())
        self.liouvillian = liouvillian
        self.shift = shift
        self._vec0 = self.initial.reshape(self.initial.shape[0], d * d).T
        self._phase = shift[:, None] - shift[None, :]

    def _states(self, vec: np.ndarray, t: float) -> np.ndarray:
        d = self.layout.dim
        rho = vec.T.reshape(-1, d, d)
        return rho * np.exp(-1j * self._phase * t)

    def at(self, t: float) -> np.ndarray:
        """States at t from one matrix exponential."""
        return self._states(expm(self.liouvillian * t) @ self._vec0, t)

    def sweep(self, times: Sequence[float]) -> Iterator[Tuple[float, np.ndarray]]:
        """Step a uniform grid with a single propagator; fall back to `at`."""
        times = np.asarray(times, dtype=float)
        steps = np.diff(times)
        if times.size < 3 or not np.allclose(steps, steps[0], rtol=1e-10, atol=0):
            yield from super().sweep(times)
            return
        step = expm(self.liouvillian * steps[0])
        vec = expm(self.liouvillian * times[0]) @ self._vec0
        for i, t in enumerate(times):
            if i:
                vec = step @ vec
            yield float(t), self._states(vec, float(t))


class IntegratedPropagation(Propagation):
    """Adaptive Runge–Kutta for models without a stationary frame.

    Every evaluated time becomes a checkpoint; `at` re-integrates from the
    nearest earlier checkpoint.
    """

    def __init__(
        self,
        model: LindbladModel,
        initial: np.ndarray,
        cfg: IntegratorConfig,
        kind: Kind,
    ) -> None:
        """Initialize."""
        self.kind = kind
        super().__init__(model, initial)
        self.cfg = cfg
        self._times: List[float] = [0.0]
        self._states = {0.0: self.initial.copy()}
        self._hermitian = kind == "rho" and all(
            qops.is_hermitian(rho) for rho in self.initial
        )

    def _rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        h = self.model.hamiltonian(t)
        shape = self.initial.shape
        if self.kind == "ket":
            psi = y.reshape(shape)
            return (-1j * psi @ h.T).ravel()
        k = h - 1j * self.model.decay
        rho = y.reshape(shape)
        drho = -1j * (k @ rho - rho @ k.conj().T)
        for c in self.model.collapse_ops:
            drho += 2 * c @ rho @ c.conj().T
        if self._hermitian:
            drho = 0.5 * (drho + qops.dagger(drho))
        return drho.ravel()

    def _integrate(self, start: float, times: np.ndarray) -> np.ndarray:
        y0 = self._states[start].ravel()
        if times[-1] == start:
            return np.repeat(self._states[start][None], len(times), axis=0)
        sol = solve_ivp(
            self._rhs,
            (start, float(times[-1])),
            y0,
            t_eval=times,
            **self.cfg.solver_options(),
        )
        if not sol.success:
            reached = sol.t[-1] if sol.t.size else start
            raise IntegrationError(f"solve_ivp stopped at t={reached}: {sol.message}")
        return sol.y.T.reshape((len(times),) + self.initial.shape)

    def _store(self, t: float, states: np.ndarray) -> None:
        if t not in self._states:
            bisect.insort(self._times, t)
            self._states[t] = states

    def at(self, t: float) -> np.ndarray:
        """States at t, integrating from the closest earlier checkpoint."""
        if t < 0:
            raise ContractViolationError(f"negative time {t}")
        if t in self._states:
            return self._states[t]
        start = self._times[bisect.bisect_right(self._times, t) - 1]
        states = self._integrate(start, np.array([t]))[0]
        self._store(t, states)
        return states

    @log_func(logger_=logger, func_input=False, func_output=False)
    def sweep(self, times: Sequence[float]) -> Iterator[Tuple[float, np.ndarray]]:
        """Integrate once through the grid, checkpointing every output."""
        times = np.asarray(times, dtype=float)
        if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
            raise ContractViolationError("times must be nonnegative and nondecreasing")
        if not times.size:
            return iter(())
        start = self._times[bisect.bisect_right(self._times, times[0]) - 1]
        pending = times[times > start]
        if pending.size:
            for t, states in zip(pending, self._integrate(start, pending)):
                self._store(float(t), states)
        return iter([(float(t), self.at(float(t))) for t in times])


def propagate(
    model: LindbladModel,
    initial: np.ndarray,
    cfg: Optional[IntegratorConfig] = None,
) -> Propagation:
    """Pick the cheapest exact engine for a model and a batch of initial states.

    Kets are promoted to density operators for open models.
    """
    initial = np.asarray(initial, dtype=complex)
    if initial.ndim == 1:
        initial = initial[None]
    kind: Kind = "ket" if initial.ndim == 2 else "rho"
    if kind == "ket" and not model.is_closed:
        initial = np.einsum("bi,bj->bij", initial, initial.conj())
        kind = "rho"

    shift = photon_frame(model)
    if kind == "ket" and shift is not None:
        return SpectralPropagation(model, initial, shift)
    if kind == "rho" and shift is not None and model.layout.dim**2 <= LIOUVILLE_LIMIT:
        return LiouvillePropagation(model, initial, shift)
    if cfg is None:
        cfg = IntegratorConfig() if kind == "ket" else IntegratorConfig.for_density()
    logger.debug("no stationary frame; integrating %s batch of %d", kind, initial.shape[0])
    return IntegratedPropagation(model, initial, cfg, kind)


###############
# Entry points #
###############
def _output_times(times: Optional[Sequence[float]], cfg: Optional[IntegratorConfig]) -> np.ndarray:
    if times is None:
        times = cfg.output_times if cfg is not None else None
    if times is None:
        raise ContractViolationError("no output times given")
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ContractViolationError("output times must be nondecreasing")
    return times


def evolve_ket(
    hamiltonian: TimeDependentHamiltonian,
    psi0: np.ndarray,
    cfg: Optional[IntegratorConfig] = None,
    times: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Schrödinger evolution; returns kets of shape (len(times), d)."""
    psi0 = np.asarray(psi0, dtype=complex)
    norm = np.linalg.norm(psi0)
    if abs(norm - 1) > C.Tolerance.NORM_DRIFT:
        raise ContractViolationError(f"initial ket is not normalized (|ψ| = {norm})")
    grid = _output_times(times, cfg)
    prop = propagate(LindbladModel(hamiltonian), psi0[None], cfg)
    out = np.array([states[0] for _, states in prop.sweep(grid)])
    drift = float(np.max(np.abs(np.linalg.norm(out, axis=1) - 1), initial=0.0))
    if drift > C.Tolerance.NORM_DRIFT:
        logger.warning("norm drift %.2e exceeds %.0e", drift, C.Tolerance.NORM_DRIFT)
    return out


def check_positivity(rho: np.ndarray, t: float, tol: float = C.Tolerance.POSITIVITY) -> None:
    """Raise if the smallest eigenvalue of ρ is below −tol."""
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if min_eig < -tol:
        raise PositivityError(t, min_eig)


def evolve_rho(
    model: LindbladModel,
    rho0: np.ndarray,
    cfg: Optional[IntegratorConfig] = None,
    times: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Master-equation evolution; returns (len(times), d, d)."""
    rho0 = qops.as_density(rho0)
    qops.check_operator(rho0, model.layout)
    if not qops.is_hermitian(rho0):
        raise ContractViolationError("initial density operator is not Hermitian")
    grid = _output_times(times, cfg)
    if cfg is None:
        cfg = IntegratorConfig.for_density()
    prop = propagate(model, rho0[None], cfg)
    out = []
    for t, states in prop.sweep(grid):
        check_positivity(states[0], t)
        out.append(states[0])
    out = np.array(out)
    if model.leakage is None:
        drift = float(np.max(np.abs(np.trace(out, axis1=1, axis2=2) - np.trace(rho0))))
        if drift > C.Tolerance.NORM_DRIFT:
            logger.warning("trace drift %.2e exceeds %.0e", drift, C.Tolerance.NORM_DRIFT)
    return out
