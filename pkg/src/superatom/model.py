"""Physical configuration and operator builders for the driven ensemble.

Units: angular frequencies in rad/us, times in us, hbar = 1. Values
quoted in the literature as "2 pi x X MHz" convert to 2*pi*X rad/us.
Defaults reproduce the cold-Rb parameter set: peak Rabi frequency
2 pi x 3 rad/us, 30 us pulse sequence, intermediate-state decay
38 rad/us, Rydberg decay 1e-3 rad/us, and a uniform interaction shift
ten times the single-atom excitation linewidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import analysis
from .algebra import (
    E,
    G,
    N_ATOMS_MAX,
    R,
    DimensionError,
    atom_levels,
    ket_bra,
    kron_embed,
    rydberg_counts,
)

TWO_PI = 2.0 * math.pi

DEFAULT_OMEGA0 = TWO_PI * 3.0     # rad/us
DEFAULT_T_END = 30.0              # us
DEFAULT_GAMMA_EG = 38.0           # rad/us
DEFAULT_GAMMA_RE = 1e-3           # rad/us
DEFAULT_GAMMA_R_DEPH = TWO_PI * 0.1  # rad/us, the nonzero-dephasing runs

#: Minimum interaction/linewidth ratio for the blockade to be considered safe.
BLOCKADE_RATIO = 10.0

#: Default uniform shift in units of the peak linewidth. Stronger than the
#: minimum blockade bound: at the bound itself, double excitations of the
#: larger ensembles (N >= 5) creep above the 1e-3 level this package
#: guarantees, while physical van-der-Waals shifts of close pairs far
#: exceed the bound anyway.
DEFAULT_SHIFT_RATIO = 20.0


@dataclass(frozen=True)
class RateSet:
    """Population decay and dephasing rates, all in rad/us."""

    gamma_eg: float = DEFAULT_GAMMA_EG
    gamma_re: float = DEFAULT_GAMMA_RE
    gamma_r_deph: float = 0.0

    def __post_init__(self):
        for name in ("gamma_eg", "gamma_re", "gamma_r_deph"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class PulseParams:
    """Delayed drive pulses on the g-e and e-r transitions.

    shape = 'gaussian' gives the delayed pair
    Omega(t) = omega0 * exp(-(t - t_end/2 -+ sigma_t)^2 / (2 sigma_t^2)),
    with the g-e pulse centered late (t_end/2 + sigma_t) and the e-r
    pulse early (t_end/2 - sigma_t): the counterintuitive order.
    shape = 'constant' holds both envelopes flat at omega0 (useful for
    Rabi-oscillation checks). scale_ge / scale_er multiply the two legs
    independently.
    """

    omega0: float = DEFAULT_OMEGA0
    sigma_t: float = DEFAULT_T_END / 8.0
    t_end: float = DEFAULT_T_END
    shape: str = "gaussian"
    scale_ge: float = 1.0
    scale_er: float = 1.0

    def __post_init__(self):
        if self.omega0 <= 0 or self.sigma_t <= 0 or self.t_end <= 0:
            raise ValueError("omega0, sigma_t, t_end must all be > 0")
        if self.shape not in ("gaussian", "constant"):
            raise ValueError(f"unknown pulse shape {self.shape!r}")

    @classmethod
    def standard(cls, omega0: float = DEFAULT_OMEGA0, t_end: float = DEFAULT_T_END,
                 **kwargs) -> "PulseParams":
        """Construct with the standard width relation 2*sigma_t = t_end/4."""
        return cls(omega0=omega0, sigma_t=t_end / 8.0, t_end=t_end, **kwargs)


def pulse_envelope(t, which: str, p: PulseParams):
    """Evaluate the drive envelope at time(s) t for leg 'ge' or 'er'.

    Mirror symmetry holds by construction for the gaussian shape:
    Omega_ge(t) == Omega_er(t_end - t).
    """
    if which == "ge":
        scale, sign = p.scale_ge, +1.0
    elif which == "er":
        scale, sign = p.scale_er, -1.0
    else:
        raise ValueError(f"which must be 'ge' or 'er', got {which!r}")
    amp = p.omega0 * scale
    if p.shape == "constant":
        return amp * np.ones_like(np.asarray(t, dtype=float))
    x = np.asarray(t, dtype=float) - (0.5 * p.t_end + sign * p.sigma_t)
    return amp * np.exp(-(x * x) / (2.0 * p.sigma_t**2))


@dataclass(frozen=True)
class InteractionSpec:
    """Pairwise Rydberg level shifts, either uniform or from geometry.

    In geometry mode the shift between atoms i, j is c_p / d_ij^p with
    d_ij the Euclidean distance in um and p = 3 (dipole-dipole) or
    p = 6 (van der Waals).
    """

    uniform_shift: float | None = None
    positions: tuple[tuple[float, float, float], ...] | None = None
    c_p: float | None = None
    p: int | None = None

    def __post_init__(self):
        geom = self.positions is not None
        if geom == (self.uniform_shift is not None):
            raise ValueError("specify exactly one of uniform_shift or positions")
        if self.uniform_shift is not None and self.uniform_shift < 0:
            raise ValueError("uniform_shift must be >= 0")
        if geom:
            if self.c_p is None or self.p not in (3, 6):
                raise ValueError("geometry mode needs c_p and p in {3, 6}")

    @classmethod
    def uniform(cls, shift: float) -> "InteractionSpec":
        return cls(uniform_shift=shift)

    @classmethod
    def geometry(cls, positions, c_p: float, p: int) -> "InteractionSpec":
        pos = tuple(tuple(float(x) for x in row) for row in positions)
        return cls(positions=pos, c_p=float(c_p), p=int(p))


def default_uniform_shift(rates: RateSet | None = None,
                          pulses: PulseParams | None = None) -> float:
    """Interaction default: DEFAULT_SHIFT_RATIO times the peak linewidth."""
    rates = rates or RateSet()
    pulses = pulses or PulseParams()
    w0 = analysis.excitation_linewidth(pulses.omega0, pulses.omega0, rates.gamma_eg)
    return DEFAULT_SHIFT_RATIO * w0


def interaction_matrix(spec: InteractionSpec, n_atoms: int) -> np.ndarray:
    """Symmetric matrix of pairwise level shifts, zero on the diagonal."""
    out = np.zeros((n_atoms, n_atoms))
    if spec.uniform_shift is not None:
        out[:] = spec.uniform_shift
        np.fill_diagonal(out, 0.0)
        return out
    pos = np.asarray(spec.positions, dtype=float)
    if pos.shape != (n_atoms, 3):
        raise ValueError(f"need {n_atoms} positions, got shape {pos.shape}")
    for i in range(n_atoms):
        for j in range(i + 1, n_atoms):
            d = float(np.linalg.norm(pos[i] - pos[j]))
            if d == 0.0:
                raise ValueError(f"atoms {i} and {j} are coincident")
            out[i, j] = out[j, i] = spec.c_p / d**spec.p
    return out


@dataclass(frozen=True)
class ModelConfig:
    """Single source of physical truth for one simulation."""

    n_atoms: int
    rates: RateSet = field(default_factory=RateSet)
    pulses: PulseParams = field(default_factory=PulseParams)
    interaction: InteractionSpec | None = None  # None -> default uniform shift

    def __post_init__(self):
        if not 1 <= self.n_atoms <= N_ATOMS_MAX:
            raise DimensionError(
                f"n_atoms = {self.n_atoms} outside supported range 1..{N_ATOMS_MAX}"
            )
        if self.interaction is None:
            shift = default_uniform_shift(self.rates, self.pulses)
            object.__setattr__(self, "interaction", InteractionSpec.uniform(shift))

    @property
    def dim(self) -> int:
        return 3**self.n_atoms

    def shifts(self) -> np.ndarray:
        return interaction_matrix(self.interaction, self.n_atoms)

    def blockade_report(self) -> tuple[bool, float, float]:
        """(satisfied, min pairwise shift, peak linewidth w0).

        The blockade is flagged satisfied when every pairwise shift is at
        least BLOCKADE_RATIO times w0. For a single atom there is no pair
        to check and the flag is trivially True.
        """
        w0 = analysis.excitation_linewidth(
            self.pulses.omega0, self.pulses.omega0, self.rates.gamma_eg
        )
        if self.n_atoms == 1:
            return True, math.inf, w0
        d = self.shifts()
        mind = float(d[~np.eye(self.n_atoms, dtype=bool)].min())
        return mind >= BLOCKADE_RATIO * w0 - 1e-12, mind, w0


@dataclass(frozen=True)
class JumpChannel:
    """One collapse operator, already scaled by the square root of its rate."""

    operator: sp.csr_matrix
    label: str          # 'eg', 're' or 'deph'
    atom_index: int

    @property
    def name(self) -> str:
        return f"{self.label}[{self.atom_index}]"


def build_jump_channels(cfg: ModelConfig) -> list[JumpChannel]:
    """Collapse operators for the three dissipation mechanisms.

    Per atom j: sqrt(gamma_eg) |g><e|_j, sqrt(gamma_re) |e><r|_j, and
    sqrt(gamma_r_deph/2) (sigma_rr - sigma_ee - sigma_gg)_j. The dephasing
    operator A satisfies A^2 = 1, so the standard dissipator with this
    collapse operator reproduces (gamma/2)(A rho A - rho) exactly.
    Zero-rate channels are omitted.
    """
    chans: list[JumpChannel] = []
    n = cfg.n_atoms
    r = cfg.rates
    deph_local = np.diag([-1.0, -1.0, 1.0])  # sigma_rr - sigma_ee - sigma_gg
    for j in range(n):
        if r.gamma_eg > 0:
            op = math.sqrt(r.gamma_eg) * kron_embed(ket_bra(G, E), j, n)
            chans.append(JumpChannel(op.tocsr(), "eg", j))
        if r.gamma_re > 0:
            op = math.sqrt(r.gamma_re) * kron_embed(ket_bra(E, R), j, n)
            chans.append(JumpChannel(op.tocsr(), "re", j))
        if r.gamma_r_deph > 0:
            op = math.sqrt(r.gamma_r_deph / 2.0) * kron_embed(deph_local, j, n)
            chans.append(JumpChannel(op.tocsr(), "deph", j))
    return chans


def hamiltonian_parts(cfg: ModelConfig) -> tuple[sp.csr_matrix, sp.csr_matrix, sp.csr_matrix]:
    """Time-independent pieces of H(t) = om_ge(t) X_ge + om_er(t) X_er + V.

    X_ge = sum_j (|e><g|_j + |g><e|_j), X_er analogous on e-r, and V is
    the diagonal pairwise interaction sum_{i<j} shift_ij |r r><r r|_{ij}.
    """
    n = cfg.n_atoms
    x_ge = sum(kron_embed(ket_bra(E, G) + ket_bra(G, E), j, n) for j in range(n))
    x_er = sum(kron_embed(ket_bra(R, E) + ket_bra(E, R), j, n) for j in range(n))
    shifts = cfg.shifts()
    levels = atom_levels(n)
    vdiag = np.zeros(cfg.dim)
    for i in range(n):
        for j in range(i + 1, n):
            vdiag += shifts[i, j] * ((levels[i] == R) & (levels[j] == R))
    v = sp.diags(vdiag.astype(np.complex128), format="csr")
    return x_ge.tocsr(), x_er.tocsr(), v


def build_hamiltonian(t: float, cfg: ModelConfig) -> sp.csr_matrix:
    """Full sparse Hamiltonian at time t (Hermitian, rad/us)."""
    x_ge, x_er, v = hamiltonian_parts(cfg)
    og = float(pulse_envelope(t, "ge", cfg.pulses))
    oe = float(pulse_envelope(t, "er", cfg.pulses))
    h = (og * x_ge + oe * x_er + v).tocsr()
    h.sum_duplicates()
    h.sort_indices()
    return h


def _align_to_pattern(pattern: sp.csr_matrix, mat: sp.csr_matrix) -> np.ndarray:
    """Data array of ``mat`` expressed on the (superset) pattern of ``pattern``."""
    out = np.zeros_like(pattern.data)
    m = mat.tocoo()
    for row, col, val in zip(m.row, m.col, m.data):
        lo, hi = pattern.indptr[row], pattern.indptr[row + 1]
        k = lo + np.searchsorted(pattern.indices[lo:hi], col)
        if k >= hi or pattern.indices[k] != col:
            raise ValueError("pattern does not cover matrix entry")
        out[k] += val
    return out


class SuperatomModel:
    """Immutable, precomputed operator set for one ModelConfig.

    Holds the union-pattern CSR Hamiltonian with per-part data arrays
    (so H(t) is a cheap data update), the collapse-operator list, and the
    diagonal bookkeeping used by the integrators and observable
    extraction. Safe to share across threads.
    """

    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg
        self.dim = cfg.dim
        self.n_atoms = cfg.n_atoms

        x_ge, x_er, v = hamiltonian_parts(cfg)
        pattern = (x_ge + x_er + v + sp.identity(self.dim)).tocsr()
        pattern.sum_duplicates()
        pattern.sort_indices()
        pattern.data[:] = 0.0
        self.h_pattern = pattern
        self.h_data_v = _align_to_pattern(pattern, v)
        self.h_data_ge = _align_to_pattern(pattern, x_ge)
        self.h_data_er = _align_to_pattern(pattern, x_er)
        self.x_ge, self.x_er, self.v_aa = x_ge, x_er, v

        self.channels = build_jump_channels(cfg)
        # All collapse operators here have diagonal c^dag c.
        self.decay_diag = np.zeros(self.dim)
        for ch in self.channels:
            cdc = (ch.operator.conj().T @ ch.operator).diagonal().real
            self.decay_diag += cdc

        # Elementwise dissipator piece: diagonal-channel sandwiches minus
        # the anticommutator. Off-diagonal (transition) channels are kept
        # separately for their sandwich terms.
        self.elementwise = -0.5 * (self.decay_diag[:, None] + self.decay_diag[None, :])
        self.transition_channels: list[JumpChannel] = []
        for ch in self.channels:
            op = ch.operator
            if (op - sp.diags(op.diagonal())).nnz == 0:
                s = op.diagonal()
                self.elementwise = self.elementwise + np.outer(s, s.conj()).real
            else:
                self.transition_channels.append(ch)

        # Diagonal observable masks.
        levels = atom_levels(self.n_atoms)
        nr = rydberg_counts(self.n_atoms)
        self.r_counts = nr
        self.e_counts = np.count_nonzero(levels == E, axis=0)
        self.rr_masks = [(levels[j] == R) for j in range(self.n_atoms)]
        self.pr_masks = [nr == 0, nr == 1, nr == 2, nr >= 3]

    def envelopes(self, t):
        """(om_ge(t), om_er(t)) for scalar or array t."""
        return (
            pulse_envelope(t, "ge", self.cfg.pulses),
            pulse_envelope(t, "er", self.cfg.pulses),
        )

    def hamiltonian(self, t: float) -> sp.csr_matrix:
        """Sparse H(t) on the precomputed union pattern."""
        og, oe = self.envelopes(t)
        h = self.h_pattern.copy()
        h.data = self.h_data_v + float(og) * self.h_data_ge + float(oe) * self.h_data_er
        return h
