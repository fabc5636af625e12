"""Complex linear algebra for N-atom operators on the 3^N product space.

Conventions used throughout the package:

* Single-atom basis ordering: index 0 = |g>, 1 = |e>, 2 = |r>.
* Composite basis index: atom 0 is the slowest-varying trit, i.e. the
  basis state with index ``a`` assigns level ``(a // 3**(N-1-j)) % 3``
  to atom ``j``.
* Operators are scipy CSR matrices (canonical: sorted indices, summed
  duplicates); density matrices and state vectors are dense complex
  numpy arrays. Densification happens only for the density matrix.

Everything here is a pure function of its inputs; built operators are
never mutated and can be shared freely across threads.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

# Single-atom level indices.
G, E, R = 0, 1, 2

#: Hard cap on atom number: 3^12 is the practical memory wall for the
#: operators built here, and far beyond it for dense density matrices.
N_ATOMS_MAX = 12


class DimensionError(ValueError):
    """Operator/state dimension mismatch or out-of-range atom index."""


def ket_bra(mu: int, nu: int) -> np.ndarray:
    """Single-atom transition operator |mu><nu| as a dense 3x3 matrix."""
    m = np.zeros((3, 3), dtype=np.complex128)
    m[mu, nu] = 1.0
    return m


def n_atoms_for_dim(dim: int) -> int:
    """Invert dim = 3^N, raising if dim is not a power of three."""
    n = round(np.log(dim) / np.log(3))
    if 3**n != dim:
        raise DimensionError(f"dimension {dim} is not a power of 3")
    return n


def kron_embed(local_op, atom_index: int, n_atoms: int) -> sp.csr_matrix:
    """Embed a single-atom operator into the N-atom product space.

    Returns I (x) ... (x) local_op (x) ... (x) I with ``local_op`` at
    position ``atom_index`` (atom 0 = slowest-varying index), as a
    canonical sparse CSR matrix.
    """
    if not 1 <= n_atoms <= N_ATOMS_MAX:
        raise DimensionError(
            f"n_atoms = {n_atoms} outside supported range 1..{N_ATOMS_MAX}"
        )
    if not 0 <= atom_index < n_atoms:
        raise DimensionError(
            f"atom_index = {atom_index} out of range for {n_atoms} atoms"
        )
    local = sp.csr_matrix(local_op)
    if local.shape != (3, 3):
        raise DimensionError(f"local operator must be 3x3, got {local.shape}")
    left = sp.identity(3**atom_index, format="csr")
    right = sp.identity(3 ** (n_atoms - 1 - atom_index), format="csr")
    out = sp.kron(sp.kron(left, local, format="csr"), right, format="csr")
    out = out.astype(np.complex128)
    out.sum_duplicates()
    out.sort_indices()
    return out


def op_apply(op, rho: np.ndarray, side: str = "left") -> np.ndarray:
    """Apply a (sparse) operator to a dense matrix.

    side = 'left'     -> op @ rho
    side = 'right'    -> rho @ op
    side = 'sandwich' -> op @ rho @ op^dagger
    """
    op = sp.csr_matrix(op)
    if op.shape[0] != op.shape[1] or op.shape[0] != rho.shape[0] or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"shape mismatch: op {op.shape}, rho {rho.shape}")
    if side == "left":
        return np.asarray(op @ rho)
    if side == "right":
        return np.asarray((op.T @ rho.T).T)
    if side == "sandwich":
        left = np.asarray(op @ rho)
        return np.asarray((op.conj() @ left.T).T)
    raise ValueError(f"unknown side {side!r}")


def is_hermitian(op, tol: float = 1e-10) -> bool:
    """Max-norm Hermiticity check for sparse or dense operators."""
    if sp.issparse(op):
        d = op - op.conj().T
        return d.nnz == 0 or np.max(np.abs(d.data)) <= tol
    return np.max(np.abs(op - np.conj(op.T))) <= tol


def expectation(op, state: np.ndarray) -> float:
    """Real expectation value of a Hermitian operator.

    ``state`` is either a state vector (1-d, normalized internally) or a
    density matrix (2-d); returns trace(op rho) or <psi|op|psi>/<psi|psi>.
    Raises if ``op`` is not Hermitian or the imaginary residue exceeds
    1e-9.
    """
    if not is_hermitian(op):
        raise ValueError("expectation requires a Hermitian operator")
    state = np.asarray(state)
    op = sp.csr_matrix(op)
    if state.ndim == 1:
        if op.shape[0] != state.shape[0]:
            raise DimensionError(f"op dim {op.shape[0]} vs state dim {state.shape[0]}")
        val = np.vdot(state, op @ state) / np.vdot(state, state)
    elif state.ndim == 2:
        if op.shape[0] != state.shape[0]:
            raise DimensionError(f"op dim {op.shape[0]} vs rho dim {state.shape[0]}")
        # trace(op @ rho) without forming the product
        val = (op.multiply(np.asarray(state).T)).sum()
    else:
        raise DimensionError("state must be a vector or a square matrix")
    if abs(val.imag) > 1e-9:
        raise ValueError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def atom_levels(n_atoms: int) -> np.ndarray:
    """(n_atoms, 3^N) array: level of atom j in each composite basis state."""
    dim = 3**n_atoms
    idx = np.arange(dim)
    return np.array([(idx // 3 ** (n_atoms - 1 - j)) % 3 for j in range(n_atoms)])


def rydberg_counts(n_atoms: int) -> np.ndarray:
    """Number of atoms in |r> for each composite basis state."""
    return np.count_nonzero(atom_levels(n_atoms) == R, axis=0)


def ground_product_state(n_atoms: int) -> np.ndarray:
    """|g g ... g> as a dense state vector."""
    psi = np.zeros(3**n_atoms, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def check_state_vector(psi: np.ndarray, tol: float = 1e-10) -> None:
    """Assert finiteness and normalization of a state vector."""
    if not np.all(np.isfinite(psi)):
        raise ValueError("state vector contains NaN/Inf")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"state vector norm^2 = {norm2} deviates from 1 by > {tol}")


def check_density_matrix(
    rho: np.ndarray,
    trace_tol: float = 1e-8,
    herm_tol: float = 1e-10,
    eig_tol: float = 1e-8,
) -> None:
    """Assert the density-matrix invariants: trace 1, Hermitian, PSD."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix contains NaN/Inf")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"trace(rho) = {tr} deviates from 1 by > {trace_tol}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise ValueError(f"rho deviates from Hermitian by {herm:.3e}")
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig < -eig_tol:
        raise ValueError(f"rho has negative eigenvalue {min_eig:.3e}")


def purity(rho: np.ndarray) -> float:
    """trace(rho^2), computed as sum_ij rho_ij rho_ji (exact, no matmul)."""
    return float(np.einsum("ij,ji->", rho, rho).real)
