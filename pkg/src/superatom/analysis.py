"""Closed-form quantities and reduced models for the driven ensemble.

Contains the single-atom dressed-state decomposition, the two-level
steady-state and linewidth formulas, the number-resolved Rydberg
projectors, the symmetric-subspace coherent model, and the collective
excitation estimate used for the dephasing study.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .algebra import R, rydberg_counts


def rydberg_projector(n: int, n_atoms: int) -> sp.csr_matrix:
    """Projector onto basis states with exactly n atoms in |r>.

    Diagonal 0/1 matrix; its trace is C(N, n) * 2^(N - n).
    """
    if not 0 <= n <= n_atoms:
        raise ValueError(f"n = {n} out of range 0..{n_atoms}")
    mask = (rydberg_counts(n_atoms) == n).astype(np.complex128)
    return sp.diags(mask, format="csr")


def steady_state_ground_population(omega_ge: float, gamma_eg: float) -> float:
    """Steady-state |g> population of a resonantly driven two-level atom.

    (omega^2 + gamma^2/4) / (2 omega^2 + gamma^2/4); lies in (1/2, 1].
    """
    num = omega_ge**2 + gamma_eg**2 / 4.0
    den = 2.0 * omega_ge**2 + gamma_eg**2 / 4.0
    if den == 0.0:
        raise ValueError("omega_ge and gamma_eg cannot both be zero")
    return num / den


def excitation_linewidth(omega_ge: float, omega_er: float, gamma_eg: float) -> float:
    """Two-photon excitation linewidth of a single driven three-level atom.

    w = (omega_ge^2 + omega_er^2) / sqrt(2 omega_ge^2 + gamma_eg^2/4).
    Homogeneous of degree one in its arguments.
    """
    if gamma_eg < 0:
        raise ValueError("gamma_eg must be >= 0")
    den = math.sqrt(2.0 * omega_ge**2 + gamma_eg**2 / 4.0)
    if den == 0.0:
        raise ValueError("all-zero inputs leave the linewidth undefined")
    return (omega_ge**2 + omega_er**2) / den


@dataclass(frozen=True)
class DarkStateDecomposition:
    """Instantaneous eigenbasis of the single-atom drive coupling."""

    theta: float               # mixing angle, tan(theta) = omega_ge / omega_er
    dark: np.ndarray           # zero-energy eigenvector, no |e> component
    bright_plus: np.ndarray    # eigenvalue +gap
    bright_minus: np.ndarray   # eigenvalue -gap
    gap: float                 # sqrt(omega_ge^2 + omega_er^2)


def dark_state_decomposition(omega_ge: float, omega_er: float) -> DarkStateDecomposition:
    """Dark/bright decomposition of the 3-level drive coupling.

    dark   = cos(theta)|g> - sin(theta)|r>
    bright = (sin(theta)|g> +- |e> + cos(theta)|r>) / sqrt(2)
    with energies 0 and +-sqrt(omega_ge^2 + omega_er^2).
    """
    gap = math.hypot(omega_ge, omega_er)
    if gap == 0.0:
        raise ValueError("degenerate zero-field input")
    theta = math.atan2(omega_ge, omega_er)
    c, s = math.cos(theta), math.sin(theta)
    dark = np.array([c, 0.0, -s], dtype=np.complex128)
    bp = np.array([s, 1.0, c], dtype=np.complex128) / math.sqrt(2.0)
    bm = np.array([s, -1.0, c], dtype=np.complex128) / math.sqrt(2.0)
    return DarkStateDecomposition(theta, dark, bp, bm, gap)


def drive_coupling_matrix(omega_ge: float, omega_er: float) -> np.ndarray:
    """Single-atom coupling matrix in the (g, e, r) basis."""
    return np.array(
        [
            [0.0, omega_ge, 0.0],
            [omega_ge, 0.0, omega_er],
            [0.0, omega_er, 0.0],
        ],
        dtype=np.complex128,
    )


def mixing_angle(t, pulses) -> np.ndarray:
    """theta(t) = atan2(om_ge(t), om_er(t)) on scalar or array t."""
    from .model import pulse_envelope

    og = pulse_envelope(t, "ge", pulses)
    oe = pulse_envelope(t, "er", pulses)
    return np.arctan2(og, oe)


def adiabaticity_margin(pulses, t_grid: np.ndarray,
                        gap_floor_frac: float = 1e-3) -> np.ndarray:
    """|d theta/dt| / gap on the grid, with theta' by central differences.

    Points where the gap falls below gap_floor_frac * omega0 are returned
    as 0 (the dressed basis is undefined there and the transfer argument
    does not apply).
    """
    from .model import pulse_envelope

    t_grid = np.asarray(t_grid, dtype=float)
    theta = mixing_angle(t_grid, pulses)
    dtheta = np.gradient(theta, t_grid)
    og = pulse_envelope(t_grid, "ge", pulses)
    oe = pulse_envelope(t_grid, "er", pulses)
    gap = np.hypot(og, oe)
    out = np.zeros_like(t_grid)
    ok = gap > gap_floor_frac * pulses.omega0
    out[ok] = np.abs(dtheta[ok]) / gap[ok]
    return out


def collective_basis(n_atoms: int) -> list[tuple[int, int, int]]:
    """Symmetric-subspace labels (n_g, n_e, n_r) with n_r in {0, 1}.

    Ordered with the n_r = 0 block first, ascending n_e within each
    block; dimension is exactly 2 N + 1.
    """
    states = []
    for n_r in (0, 1):
        for n_e in range(n_atoms - n_r + 1):
            states.append((n_atoms - n_r - n_e, n_e, n_r))
    return states


def collective_hamiltonian(n_atoms: int, omega_ge: float, omega_er: float) -> np.ndarray:
    """Drive Hamiltonian in the symmetric basis with bosonic matrix elements.

    The g and e modes carry standard sqrt(n) bosonic factors; the shared
    Rydberg excitation is capped at one (creation on an occupied mode
    vanishes), which encodes the fully blockaded regime.
    """
    states = collective_basis(n_atoms)
    index = {s: k for k, s in enumerate(states)}
    dim = len(states)
    h = np.zeros((dim, dim), dtype=np.complex128)
    for k, (ng, ne, nr) in enumerate(states):
        # e^dag g : move one atom g -> e
        if ng > 0:
            amp = omega_ge * math.sqrt(ng * (ne + 1))
            k2 = index[(ng - 1, ne + 1, nr)]
            h[k2, k] += amp
            h[k, k2] += amp
        # r^dag e : move one atom e -> r (blocked when n_r = 1)
        if ne > 0 and nr == 0:
            amp = omega_er * math.sqrt(ne)
            k2 = index[(ng, ne - 1, 1)]
            h[k2, k] += amp
            h[k, k2] += amp
    return h


def collective_coherent_evolve(n_atoms: int, pulses, t_grid: np.ndarray,
                               rtol: float = 1e-10, atol: float = 1e-12):
    """Coherent symmetric-subspace evolution from the collective ground state.

    Returns (times, p_r1, amplitudes) where p_r1[k] is the total
    population of the n_r = 1 block at t_grid[k] and amplitudes[k] is the
    full state in the collective basis ordering.
    """
    if n_atoms > 30:
        raise ValueError("collective model capped at 30 atoms")
    from scipy.integrate import solve_ivp

    states = collective_basis(n_atoms)
    dim = len(states)
    nr_mask = np.array([s[2] == 1 for s in states])

    def rhs(t, y):
        og = float(_env(t, "ge", pulses))
        oe = float(_env(t, "er", pulses))
        h = collective_hamiltonian(n_atoms, og, oe)
        return -1j * (h @ y)

    psi0 = np.zeros(dim, dtype=np.complex128)
    psi0[0] = 1.0  # (N, 0, 0)
    t_grid = np.asarray(t_grid, dtype=float)
    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), psi0, t_eval=t_grid,
                    method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"collective evolution failed: {sol.message}")
    amps = sol.y.T
    p_r1 = (np.abs(amps) ** 2)[:, nr_mask].sum(axis=1)
    return t_grid, p_r1, amps


def _env(t, which, pulses):
    from .model import pulse_envelope

    return pulse_envelope(t, which, pulses)


def jx_matrix(n_atoms_in_sector: int) -> np.ndarray:
    """(e^dag g + g^dag e)/2 restricted to the g-e symmetric sector.

    Basis ordering: n_e = 0 .. M with M atoms distributed over g and e.
    This is the spin-x matrix for total spin M/2.
    """
    m = n_atoms_in_sector
    h = np.zeros((m + 1, m + 1))
    for ne in range(m):
        amp = 0.5 * math.sqrt((m - ne) * (ne + 1))
        h[ne + 1, ne] += amp
        h[ne, ne + 1] += amp
    return h


def jx_zero_overlap(amplitudes: np.ndarray, n_atoms: int, n_r_sector: int) -> float:
    """Squared overlap of a collective state with the zero eigenspace of J_x.

    ``amplitudes`` is a state in the collective_basis ordering. The zero
    eigenvector of J_x exists only when the sector holds an even number
    of atoms (odd sector dimension); otherwise a ValueError is raised
    rather than returning 0.
    """
    states = collective_basis(n_atoms)
    sector = [k for k, s in enumerate(states) if s[2] == n_r_sector]
    m = n_atoms - n_r_sector
    if m % 2 != 0:
        raise ValueError(f"no zero eigenvalue of J_x for {m} atoms in the sector")
    evals, evecs = np.linalg.eigh(jx_matrix(m))
    null = evecs[:, np.abs(evals) < 1e-9]
    if null.shape[1] == 0:
        raise ValueError("no zero eigenvalue found")
    sub = np.asarray(amplitudes)[sector]
    return float(np.sum(np.abs(null.conj().T @ sub) ** 2))


def count_parity_alternations(times, pr0, pr1, pulses,
                              threshold_frac: float = 0.1) -> int:
    """Number of times P_r(1) overtakes P_r(0) in the pulse-overlap window.

    The window is where both drive envelopes exceed threshold_frac times
    the peak amplitude. Upward zero crossings of P_r(1) - P_r(0) count
    one alternation each; for ideal adiabatic dynamics the count is N - 1
    (even N ends with the zero-excitation state back on top).
    """
    from .model import pulse_envelope

    times = np.asarray(times, dtype=float)
    og = pulse_envelope(times, "ge", pulses)
    oe = pulse_envelope(times, "er", pulses)
    window = (og > threshold_frac * pulses.omega0) & (oe > threshold_frac * pulses.omega0)
    diff = (np.asarray(pr1) - np.asarray(pr0))[window]
    signs = np.sign(diff)
    signs = signs[signs != 0]
    return int(np.sum((signs[1:] > 0) & (signs[:-1] < 0)))


def superatom_excitation_estimate(n_atoms: int, sigma_rr_single: float) -> float:
    """Collective single-excitation probability from the one-atom value.

    N x / ((N - 1) x + 1), monotone in both arguments; equals x at N = 1
    and saturates at 1.
    """
    if not 0.0 <= sigma_rr_single <= 1.0:
        raise ValueError("sigma_rr_single must lie in [0, 1]")
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    x = sigma_rr_single
    return n_atoms * x / ((n_atoms - 1) * x + 1.0)
