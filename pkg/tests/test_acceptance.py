"""Acceptance suite: the eight release criteria, one test each.

Every test prints a single ``A<k>: PASS/FAIL`` line (run with ``-s`` to
see them stream). The heavyweight master-equation sweeps are shared
through session fixtures, so the suite costs one pass over each
parameter set; expect roughly 15 minutes on two cores.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats as scipy_stats

from superatom.algebra import R, atom_levels, ground_product_state
from superatom.analysis import (
    collective_coherent_evolve,
    count_parity_alternations,
    dark_state_decomposition,
    drive_coupling_matrix,
    excitation_linewidth,
    superatom_excitation_estimate,
)
from superatom.mcwf import average_trajectories, evolve_trajectory
from superatom.mesolve import (
    IntegratorSettings,
    integrate,
    single_excitation_mixture_overlap,
)
from superatom.model import (
    DEFAULT_GAMMA_R_DEPH,
    InteractionSpec,
    ModelConfig,
    PulseParams,
    RateSet,
    SuperatomModel,
)

TWO_PI = 2 * math.pi
ALL_N = (1, 2, 3, 4, 5, 6)


def criterion(name: str, ok: bool, detail: str = "") -> None:
    line = f"{name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def snapshot_times():
    return np.linspace(3.0, 30.0, 10)


@pytest.fixture(scope="session")
def a1_runs():
    """Dissipative reference runs, N = 1..6, default parameters."""
    out = {}
    for n in ALL_N:
        t0 = time.perf_counter()
        res = integrate(ModelConfig(n_atoms=n), settings=IntegratorSettings(),
                        snapshot_times=snapshot_times())
        res.stats["suite_wall_s"] = time.perf_counter() - t0
        out[n] = res
    return out


@pytest.fixture(scope="session")
def a2_runs():
    """Fully coherent runs (zero rates), N = 2..4.

    Coherent evolution keeps the state pure, so its spectrum sits at
    +-(global integration error); honoring the -1e-7 positivity bound
    therefore needs tighter tolerances than the dissipative default.
    The physics observables are insensitive to this choice.
    """
    out = {}
    st = IntegratorSettings(rtol=1e-8, atol=1e-11)
    for n in (2, 3, 4):
        out[n] = integrate(
            ModelConfig(n_atoms=n, rates=RateSet(0.0, 0.0, 0.0)),
            settings=st,
            snapshot_times=snapshot_times(),
        )
    return out


@pytest.fixture(scope="session")
def a4_runs():
    """Runs with Rydberg dephasing, N = 1..6."""
    out = {}
    for n in ALL_N:
        out[n] = integrate(
            ModelConfig(n_atoms=n, rates=RateSet(gamma_r_deph=DEFAULT_GAMMA_R_DEPH)),
            settings=IntegratorSettings(),
            snapshot_times=snapshot_times(),
        )
    return out


@pytest.fixture(scope="session")
def a5_ensemble():
    model = SuperatomModel(ModelConfig(n_atoms=2))
    st = IntegratorSettings()
    me = integrate(model.cfg, settings=st)
    ens = average_trajectories(model, n_traj=1000, seed_base=20240521,
                               settings=st, n_workers=2)
    return me, ens


def test_a1_dissipative_single_excitation(a1_runs):
    details = []
    ok = True
    for n in ALL_N:
        s = a1_runs[n].series
        max_p1 = float(s.pr_n[:, 1].max())
        end_p1 = float(s.pr_n[-1, 1])
        multi = float(s.pr_n[:, 2:].sum(axis=1).max())
        ok &= max_p1 >= 0.98 and end_p1 >= 0.96 and multi <= 1e-3
        details.append(f"N={n}: max={max_p1:.4f} end={end_p1:.4f} multi={multi:.1e}")
    wall6 = a1_runs[6].stats["suite_wall_s"]
    details.append(f"N=6 wall {wall6:.0f}s (target 600s)")
    criterion("A1", ok, "; ".join(details))


def test_a2_coherent_parity_effect(a2_runs):
    p = PulseParams()
    s2 = a2_runs[2].series
    s3 = a2_runs[3].series
    ok = s2.pr_n[-1, 1] <= 0.05 and s2.pr_n[-1, 0] >= 0.95
    ok &= s3.pr_n[-1, 1] >= 0.9
    counts = {}
    for n in (2, 3, 4):
        s = a2_runs[n].series
        counts[n] = count_parity_alternations(
            s.times, s.pr_n[:, 0], s.pr_n[:, 1], p)
        ok &= counts[n] == n - 1
    criterion(
        "A2", ok,
        f"N=2 end P1={s2.pr_n[-1, 1]:.3f} P0={s2.pr_n[-1, 0]:.3f}; "
        f"N=3 end P1={s3.pr_n[-1, 1]:.3f}; alternations={counts}",
    )


def test_a3_unit_convention_anchor():
    w0 = excitation_linewidth(TWO_PI * 3.0, TWO_PI * 3.0, 38.0)
    ok = TWO_PI * 3.3 <= w0 <= TWO_PI * 3.6
    criterion("A3", ok, f"w0 = 2pi x {w0 / TWO_PI:.4f} rad/us")


def test_a4_dephasing_robustness(a4_runs):
    finals = {n: float(a4_runs[n].series.pr_n[-1, 1]) for n in ALL_N}
    x1 = finals[1]
    ok = abs(x1 - 0.90) <= 0.03
    ok &= finals[6] >= 0.96
    worst = 0.0
    for n in range(2, 7):
        err = abs(superatom_excitation_estimate(n, x1) - finals[n])
        worst = max(worst, err)
    ok &= worst <= 0.02
    criterion(
        "A4", ok,
        f"N=1 sigma_rr={x1:.4f}; N=6 P1={finals[6]:.4f}; "
        f"worst estimate error={worst:.4f}",
    )


def test_a5_unraveling_equivalence(a5_ensemble):
    me, ens = a5_ensemble
    diff = np.abs(ens.series.pr_n[:, 1] - me.series.pr_n[:, 1])
    stderr = ens.stderr_pr_n[:, 1]
    bound = np.maximum(0.02, 3 * stderr)
    ok = bool(np.all(diff <= bound))
    criterion(
        "A5", ok,
        f"max|P1_MC - P1_ME| = {diff.max():.4f}, "
        f"max stderr = {stderr.max():.4f}, n_traj = 1000",
    )


def test_a6_state_invariants(a1_runs, a2_runs, a4_runs):
    ok = True
    details = []
    all_runs = (
        [("A1", r) for r in a1_runs.values()]
        + [("A2", r) for r in a2_runs.values()]
        + [("A4", r) for r in a4_runs.values()]
    )
    worst_trace = worst_sum = worst_eig = worst_herm = 0.0
    for _, res in all_runs:
        s = res.series
        worst_trace = max(worst_trace, float(s.trace_error.max()))
        worst_sum = max(worst_sum, float(np.abs(s.pr_n.sum(axis=1) - 1).max()))
        for _, rho in res.snapshots:
            worst_herm = max(worst_herm, float(np.max(np.abs(rho - rho.conj().T))))
            worst_eig = min(worst_eig, float(np.linalg.eigvalsh(rho)[0]))
    ok &= worst_trace <= 1e-7 and worst_sum <= 1e-6
    ok &= worst_herm <= 1e-10 and worst_eig >= -1e-7
    details.append(f"trace drift {worst_trace:.1e}, sum err {worst_sum:.1e}")
    details.append(f"herm {worst_herm:.1e}, min eig {worst_eig:.1e}")
    purity_err = max(
        float(np.abs(a2_runs[n].series.purity - 1).max()) for n in (2, 3, 4)
    )
    ok &= purity_err <= 1e-6
    details.append(f"coherent purity err {purity_err:.1e}")
    criterion("A6", ok, "; ".join(details))


def test_a7_analytic_oracles():
    details = []
    # two-level Rabi
    om = TWO_PI * 0.5
    cfg = ModelConfig(
        n_atoms=1, rates=RateSet(0, 0, 0),
        pulses=PulseParams(omega0=om, sigma_t=0.5, t_end=4.0,
                           shape="constant", scale_er=0.0),
    )
    res = integrate(cfg, settings=IntegratorSettings(
        sample_count=201, rtol=1e-9, atol=1e-12))
    rabi_err = float(np.max(np.abs(
        res.series.pop_e_total - np.sin(om * res.series.times) ** 2)))
    ok = rabi_err < 1e-6
    details.append(f"Rabi err {rabi_err:.1e}")

    # exponential jump-time law, 1e4 seeds
    decay = SuperatomModel(ModelConfig(
        n_atoms=1, rates=RateSet(38.0, 0.0, 0.0),
        pulses=PulseParams(omega0=1.0, scale_ge=0.0, scale_er=0.0,
                           sigma_t=0.5, t_end=2.0)))
    psi_e = np.array([0, 1, 0], dtype=complex)
    st = IntegratorSettings(sample_count=11)
    jump_times = np.array([
        evolve_trajectory(decay, seed_base=99, trajectory_index=k,
                          settings=st, psi0=psi_e).jumps[0].time
        for k in range(10_000)
    ])
    pval = float(scipy_stats.kstest(jump_times, "expon", args=(0, 1 / 38.0)).pvalue)
    ok &= pval > 0.01
    details.append(f"KS p {pval:.3f}")

    # dark state annihilated by the drive coupling
    worst_dark = 0.0
    for og, oe in [(3.0, 4.0), (1.0, 1.0), (0.2, 11.0)]:
        d = dark_state_decomposition(og, oe)
        worst_dark = max(worst_dark, float(np.max(np.abs(
            drive_coupling_matrix(og, oe) @ d.dark))))
    ok &= worst_dark < 1e-12
    details.append(f"dark residual {worst_dark:.1e}")

    # collective symmetric model vs full coherent evolution: the reduced
    # hard-core model is the infinite-blockade limit, so the full-space
    # oracle uses a shift deep in that regime
    p6 = PulseParams.standard(t_end=6.0)
    grid = np.linspace(0, p6.t_end, 121)
    _, p_r1, _ = collective_coherent_evolve(2, p6, grid)
    cfg2 = ModelConfig(n_atoms=2, rates=RateSet(0, 0, 0), pulses=p6,
                       interaction=InteractionSpec.uniform(2e4))
    full = integrate(cfg2, settings=IntegratorSettings(
        sample_count=121, rtol=1e-9, atol=1e-12))
    coll_err = float(np.max(np.abs(p_r1 - full.series.pr_n[:, 1])))
    ok &= coll_err < 1e-6
    details.append(f"collective vs full {coll_err:.1e}")

    criterion("A7", ok, "; ".join(details))


def test_a8_final_state_structure():
    # full-space backend so the per-atom comparison is a genuine check
    res = integrate(ModelConfig(n_atoms=3),
                    settings=IntegratorSettings(backend="full"))
    overlap, fid = single_excitation_mixture_overlap(res.final_rho, 3)
    rr = res.series.per_atom_rr
    spread = float(np.max(rr.max(axis=1) - rr.min(axis=1)))
    ok = overlap >= 0.9 and fid >= 0.9 and spread <= 1e-6
    criterion(
        "A8", ok,
        f"normalized overlap {overlap:.4f}, fidelity {fid:.4f}, "
        f"per-atom spread {spread:.1e}",
    )
