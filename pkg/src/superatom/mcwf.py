"""Quantum-jump (Monte Carlo wavefunction) unraveling of the master equation.

Pure states evolve under the non-Hermitian drift H(t) - (i/2) sum c^dag c;
the squared norm decays monotonically and a collapse is applied whenever
it crosses a pre-drawn uniform threshold (the exact waiting-time scheme,
with the crossing instant refined by bisection). Averaging trajectories
reproduces the density-matrix solution; individual trajectories exhibit
the repeated scattering of the blocked atoms.

Randomness is counter-based: trajectory k of a run seeded with s draws
its uniforms from Philox keyed by (s, k), so ensembles are reproducible
bit-for-bit regardless of execution order or worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .algebra import ground_product_state
from .mesolve import IntegratorSettings, ObservableSeries
from .model import SuperatomModel

_POOL_START = 8192


@dataclass(frozen=True)
class JumpEvent:
    time: float
    channel_label: str   # 'eg', 're' or 'deph'
    atom_index: int


@dataclass
class TrajectoryRecord:
    seed: int
    jumps: list[JumpEvent]
    series: ObservableSeries
    final_state: np.ndarray
    state_snapshots: list[tuple[float, np.ndarray]] = field(default_factory=list)
    stats: dict = field(default_factory=dict)


def effective_hamiltonian(t: float, model: SuperatomModel) -> sp.csr_matrix:
    """Non-Hermitian drift H(t) - (i/2) sum_k c_k^dag c_k."""
    h = model.hamiltonian(t)
    return (h - 0.5j * sp.diags(model.decay_diag.astype(np.complex128))).tocsr()


class _TrajectorySetup:
    """Arrays shared by every trajectory of one model/settings pair."""

    def __init__(self, model: SuperatomModel, settings: IntegratorSettings):
        cfg = model.cfg
        dim = model.dim
        pattern = model.h_pattern
        # Position of each diagonal entry inside the union CSR data array.
        diag_pos = np.empty(dim, dtype=np.int64)
        for i in range(dim):
            lo, hi = pattern.indptr[i], pattern.indptr[i + 1]
            k = lo + np.searchsorted(pattern.indices[lo:hi], i)
            diag_pos[i] = k
        d_const = model.h_data_v.astype(np.complex128).copy()
        d_const[diag_pos] += -0.5j * model.decay_diag

        self.indptr = pattern.indptr
        self.indices = pattern.indices
        self.d_const = d_const
        self.d_ge = model.h_data_ge.astype(np.complex128)
        self.d_er = model.h_data_er.astype(np.complex128)

        p = cfg.pulses
        self.pulse_args = (
            p.omega0 * p.scale_ge, 0.5 * p.t_end + p.sigma_t,
            p.omega0 * p.scale_er, 0.5 * p.t_end - p.sigma_t,
            p.sigma_t, 1 if p.shape == "constant" else 0,
        )

        n_ch = len(model.channels)
        self.ch_src = np.full((max(n_ch, 1), dim), -1, dtype=np.int64)
        self.ch_val = np.zeros((max(n_ch, 1), dim), dtype=np.complex128)
        for c, ch in enumerate(model.channels):
            op = ch.operator.tocsr()
            for i in range(dim):
                lo, hi = op.indptr[i], op.indptr[i + 1]
                if hi > lo:
                    self.ch_src[c, i] = op.indices[lo]
                    self.ch_val[c, i] = op.data[lo]
        self.channel_meta = [(ch.label, ch.atom_index) for ch in model.channels]

        self.t_grid = np.linspace(0.0, p.t_end, settings.sample_count)
        n = cfg.n_atoms
        w = np.zeros((5 + n, dim))
        for k, mask in enumerate(model.pr_masks):
            w[k, mask] = 1.0
        w[4] = model.e_counts
        for j in range(n):
            w[5 + j, model.rr_masks[j]] = 1.0
        self.obs_weights = w
        self.settings = settings
        self.model = model


def evolve_trajectory(
    model: SuperatomModel,
    seed_base: int,
    trajectory_index: int = 0,
    settings: IntegratorSettings | None = None,
    psi0: np.ndarray | None = None,
    snapshot_times=None,
    _setup: _TrajectorySetup | None = None,
) -> TrajectoryRecord:
    """Run one trajectory, deterministic in (seed_base, trajectory_index)."""
    settings = settings or IntegratorSettings()
    setup = _setup or _TrajectorySetup(model, settings)
    return _run_one(setup, seed_base, trajectory_index, psi0, snapshot_times)


def _run_one(setup, seed_base, trajectory_index, psi0=None, snapshot_times=None):
    model = setup.model
    settings = setup.settings
    dim = model.dim
    if psi0 is None:
        psi0 = ground_product_state(model.n_atoms)
    psi0 = np.asarray(psi0, dtype=np.complex128)
    nrm = np.sqrt(np.vdot(psi0, psi0).real)
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError("psi0 must be normalized")
    snap_t = np.asarray(snapshot_times if snapshot_times is not None else [],
                        dtype=float)

    key = np.array([np.uint64(seed_base % 2**64), np.uint64(trajectory_index)],
                   dtype=np.uint64)
    pool_size = _POOL_START
    while True:
        rng = np.random.Generator(np.random.Philox(key=key))
        uniforms = rng.random(pool_size)
        obs_out = np.zeros((setup.t_grid.size, setup.obs_weights.shape[0]))
        snaps_out = np.zeros((snap_t.size, dim), dtype=np.complex128)
        jump_times = np.zeros(pool_size // 2, dtype=np.float64)
        jump_chan = np.zeros(pool_size // 2, dtype=np.int64)
        status, n_jumps, n_steps, n_fev, psi_final = _kernels.trajectory(
            setup.indptr, setup.indices, setup.d_const, setup.d_ge, setup.d_er,
            *setup.pulse_args,
            setup.ch_src, setup.ch_val,
            psi0, model.cfg.pulses.t_end, settings.rtol, settings.atol,
            setup.t_grid, setup.obs_weights, snap_t, uniforms,
            obs_out, snaps_out, jump_times, jump_chan,
        )
        if status == _kernels.STATUS_POOL_EXHAUSTED:
            pool_size *= 4
            continue
        if status == _kernels.STATUS_STEP_UNDERFLOW:
            raise RuntimeError(
                f"trajectory step size underflow (seed {seed_base}, "
                f"index {trajectory_index})"
            )
        break

    n = model.n_atoms
    series = ObservableSeries(
        times=setup.t_grid.copy(),
        pr_n=obs_out[:, 0:4].copy(),
        pop_e_total=obs_out[:, 4].copy(),
        per_atom_rr=obs_out[:, 5:5 + n].copy(),
        purity=np.ones(setup.t_grid.size),
        trace_error=np.zeros(setup.t_grid.size),
    )
    jumps = [
        JumpEvent(float(jump_times[k]), *setup.channel_meta[jump_chan[k]])
        for k in range(n_jumps)
    ]
    snaps = [(float(snap_t[k]), snaps_out[k].copy()) for k in range(snap_t.size)]
    return TrajectoryRecord(
        seed=seed_base,
        jumps=jumps,
        series=series,
        final_state=psi_final,
        state_snapshots=snaps,
        stats={"n_steps": n_steps, "n_rhs_evals": n_fev,
               "trajectory_index": trajectory_index},
    )


@dataclass
class EnsembleResult:
    series: ObservableSeries          # trajectory means, stderr_pr1 filled
    stderr_pr_n: np.ndarray           # (n_samples, 4)
    records: list[TrajectoryRecord] | None
    stats: dict


def average_trajectories(
    model: SuperatomModel,
    n_traj: int,
    seed_base: int,
    settings: IntegratorSettings | None = None,
    snapshot_times=None,
    keep_records: bool = False,
    n_workers: int = 1,
) -> EnsembleResult:
    """Mean observables over n_traj trajectories with standard errors.

    Trajectory k uses the counter-based stream (seed_base, k); the
    reduction runs in fixed index order, so results are identical for
    any worker count.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    settings = settings or IntegratorSettings()
    setup = _TrajectorySetup(model, settings)

    records: list[TrajectoryRecord | None] = [None] * n_traj

    def work(k):
        records[k] = _run_one(setup, seed_base, k, None, snapshot_times)

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(work, range(n_traj)))
    else:
        for k in range(n_traj):
            work(k)

    stack_pr = np.stack([r.series.pr_n for r in records])            # (M, n, 4)
    stack_pop_e = np.stack([r.series.pop_e_total for r in records])  # (M, n)
    stack_rr = np.stack([r.series.per_atom_rr for r in records])     # (M, n, N)

    mean_pr = stack_pr.mean(axis=0)
    if n_traj > 1:
        stderr_pr = stack_pr.std(axis=0, ddof=1) / np.sqrt(n_traj)
    else:
        stderr_pr = np.zeros_like(mean_pr)

    n_samp = setup.t_grid.size
    series = ObservableSeries(
        times=setup.t_grid.copy(),
        pr_n=mean_pr,
        pop_e_total=stack_pop_e.mean(axis=0),
        per_atom_rr=stack_rr.mean(axis=0),
        purity=np.ones(n_samp),
        trace_error=np.zeros(n_samp),
        stderr_pr1=stderr_pr[:, 1].copy(),
    )
    total_jumps = sum(len(r.jumps) for r in records)
    stats = {
        "n_traj": n_traj,
        "seed_base": seed_base,
        "mean_jumps": total_jumps / n_traj,
    }
    return EnsembleResult(
        series=series,
        stderr_pr_n=stderr_pr,
        records=records if keep_records else None,
        stats=stats,
    )
