"""Compiled inner loops for the quantum-jump trajectory engine.

One call integrates a full trajectory: adaptive Dormand-Prince 4(5)
steps on the non-Hermitian Schroedinger equation, norm-threshold jump
detection with bisection on the quartic dense-output interpolant, and
observable sampling on the output grid. Everything is deterministic
given the pre-drawn uniform pool.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Dormand-Prince 4(5) tableau (the standard embedded pair).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = np.zeros((6, 6))
_A[1, 0] = 1 / 5
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200,
               22 / 525, -1 / 40])
# Quartic dense-output weights: y(theta) = y0 + h * K^T (P @ [theta..theta^4]).
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_POOL_EXHAUSTED = 2


@njit(cache=True, nogil=True)
def csr_matvec(indptr, indices, data, x, out):
    """out = A x for a complex CSR matrix."""
    for i in range(indptr.size - 1):
        acc = 0.0 + 0.0j
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * x[indices[k]]
        out[i] = acc


@njit(cache=True, nogil=True)
def three_part_update(d_const, d_ge, d_er, og, oe, out):
    """out = d_const + og * d_ge + oe * d_er without temporaries."""
    for k in range(out.size):
        out[k] = d_const[k] + og * d_ge[k] + oe * d_er[k]

MIN_STEP = 1e-12
JUMP_TIME_TOL = 1e-6  # us, bisection refinement of the jump instant


@njit(cache=True, nogil=True)
def _envelope(t, amp, center, sigma, shape_flag):
    if shape_flag == 1:
        return amp
    x = t - center
    return amp * np.exp(-x * x / (2.0 * sigma * sigma))


@njit(cache=True, nogil=True)
def _rhs(t, psi, out, indptr, indices, d_const, d_ge, d_er,
         ge_amp, ge_center, er_amp, er_center, sigma, shape_flag):
    og = _envelope(t, ge_amp, ge_center, sigma, shape_flag)
    oe = _envelope(t, er_amp, er_center, sigma, shape_flag)
    n = psi.size
    for i in range(n):
        acc = 0.0 + 0.0j
        for k in range(indptr[i], indptr[i + 1]):
            acc += (d_const[k] + og * d_ge[k] + oe * d_er[k]) * psi[indices[k]]
        out[i] = -1j * acc


@njit(cache=True, nogil=True)
def _dense_eval(theta, h, psi, kmat, out):
    # q_i = sum_j P[i, j] theta^(j+1)
    n = psi.size
    for i in range(n):
        out[i] = psi[i]
    tp = theta
    for j in range(4):
        for s in range(7):
            w = _P[s, j] * tp * h
            if w != 0.0:
                for i in range(n):
                    out[i] += w * kmat[s, i]
        tp *= theta
    return out


@njit(cache=True, nogil=True)
def _norm2(psi):
    acc = 0.0
    for i in range(psi.size):
        acc += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
    return acc


@njit(cache=True, nogil=True)
def _record_obs(psi, obs_weights, obs_out, row):
    nrm = _norm2(psi)
    for o in range(obs_weights.shape[0]):
        acc = 0.0
        for i in range(psi.size):
            p = psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
            acc += obs_weights[o, i] * p
        obs_out[row, o] = acc / nrm


@njit(cache=True, nogil=True)
def linear_ode(indptr, indices, d_const, d_ge, d_er,
               ge_amp, ge_center, er_amp, er_center, sigma, shape_flag,
               x0, t_end, rtol, atol, t_grid, snap_times,
               x_samples, x_snaps):
    """Adaptive DP45 for dx/dt = (A_const + og A_ge + oe A_er) x.

    States at the grid and snapshot times are written via the quartic
    dense-output interpolant. Returns (status, n_steps, n_fev, x_final).
    """
    dim = x0.size
    x = x0.copy()
    kmat = np.empty((7, dim), dtype=np.complex128)
    y_tmp = np.empty(dim, dtype=np.complex128)
    y_new = np.empty(dim, dtype=np.complex128)
    y_dense = np.empty(dim, dtype=np.complex128)
    data = np.empty_like(d_const)

    def eval_rhs(t, v, out):
        og = _envelope(t, ge_amp, ge_center, sigma, shape_flag)
        oe = _envelope(t, er_amp, er_center, sigma, shape_flag)
        for k in range(data.size):
            data[k] = d_const[k] + og * d_ge[k] + oe * d_er[k]
        for i in range(dim):
            acc = 0.0 + 0.0j
            for k in range(indptr[i], indptr[i + 1]):
                acc += data[k] * v[indices[k]]
            out[i] = acc

    t = 0.0
    h = min(1e-4, t_end)
    n_steps = 0
    n_fev = 0
    sample_idx = 0
    snap_idx = 0
    while sample_idx < t_grid.size and t_grid[sample_idx] <= 0.0:
        for i in range(dim):
            x_samples[sample_idx, i] = x[i]
        sample_idx += 1
    while snap_idx < snap_times.size and snap_times[snap_idx] <= 0.0:
        for i in range(dim):
            x_snaps[snap_idx, i] = x[i]
        snap_idx += 1

    eval_rhs(t, x, kmat[0])
    n_fev += 1
    while t < t_end:
        if h < MIN_STEP:
            return STATUS_STEP_UNDERFLOW, n_steps, n_fev, x
        if t + h > t_end:
            h = t_end - t
        # Land on snapshot times: states kept for spectral checks should
        # carry step-endpoint accuracy, not interpolant accuracy. Gaps at
        # rounding level are left to the interpolant instead of forcing a
        # degenerate step.
        if (snap_idx < snap_times.size and t + h > snap_times[snap_idx]
                and snap_times[snap_idx] - t > 1e-9):
            h = snap_times[snap_idx] - t
        for s in range(1, 6):
            for i in range(dim):
                acc = 0.0 + 0.0j
                for q in range(s):
                    a = _A[s, q]
                    if a != 0.0:
                        acc += a * kmat[q, i]
                y_tmp[i] = x[i] + h * acc
            eval_rhs(t + _C[s] * h, y_tmp, kmat[s])
            n_fev += 1
        for i in range(dim):
            acc = 0.0 + 0.0j
            for q in range(6):
                if _B[q] != 0.0:
                    acc += _B[q] * kmat[q, i]
            y_new[i] = x[i] + h * acc
        eval_rhs(t + h, y_new, kmat[6])
        n_fev += 1

        err_acc = 0.0
        for i in range(dim):
            e = 0.0 + 0.0j
            for q in range(7):
                if _E[q] != 0.0:
                    e += _E[q] * kmat[q, i]
            e *= h
            ya = abs(x[i])
            yb = abs(y_new[i])
            scale = atol + rtol * (ya if ya > yb else yb)
            err_acc += (e.real * e.real + e.imag * e.imag) / (scale * scale)
        err_norm = np.sqrt(err_acc / dim)

        if err_norm > 1.0:
            factor = 0.9 * err_norm ** -0.2
            if factor < 0.2:
                factor = 0.2
            h *= factor
            n_steps += 1
            continue

        t_new = t + h
        while sample_idx < t_grid.size and t_grid[sample_idx] <= t_new:
            th = (t_grid[sample_idx] - t) / h
            _dense_eval(th, h, x, kmat, y_dense)
            for i in range(dim):
                x_samples[sample_idx, i] = y_dense[i]
            sample_idx += 1
        while snap_idx < snap_times.size and snap_times[snap_idx] <= t_new:
            th = (snap_times[snap_idx] - t) / h
            _dense_eval(th, h, x, kmat, y_dense)
            for i in range(dim):
                x_snaps[snap_idx, i] = y_dense[i]
            snap_idx += 1
        for i in range(dim):
            x[i] = y_new[i]
            kmat[0, i] = kmat[6, i]
        t = t_new
        n_steps += 1
        if err_norm == 0.0:
            factor = 10.0
        else:
            factor = 0.9 * err_norm ** -0.2
            if factor > 10.0:
                factor = 10.0
            if factor < 0.2:
                factor = 0.2
        h *= factor
    return STATUS_OK, n_steps, n_fev, x


@njit(cache=True, nogil=True)
def trajectory(indptr, indices, d_const, d_ge, d_er,
               ge_amp, ge_center, er_amp, er_center, sigma, shape_flag,
               ch_src, ch_val,
               psi0, t_end, rtol, atol,
               t_grid, obs_weights, snapshot_times, uniforms,
               obs_out, snaps_out, jump_times, jump_chan):
    """Integrate one quantum-jump trajectory on [0, t_end].

    Returns (status, n_jumps, n_steps, n_fev, psi_final). Outputs are
    written into the preallocated obs_out (n_samples, n_obs), snaps_out
    (n_snapshots, dim) and jump arrays.
    """
    dim = psi0.size
    n_ch = ch_src.shape[0]
    psi = psi0.copy()
    kmat = np.empty((7, dim), dtype=np.complex128)
    y_tmp = np.empty(dim, dtype=np.complex128)
    y_new = np.empty(dim, dtype=np.complex128)
    y_dense = np.empty(dim, dtype=np.complex128)
    w_ch = np.empty(n_ch, dtype=np.float64)

    t = 0.0
    h = min(1e-4, t_end)
    u_idx = 0
    n_jumps = 0
    n_steps = 0
    n_fev = 0
    sample_idx = 0
    snap_idx = 0

    # Leading samples at t = 0.
    while sample_idx < t_grid.size and t_grid[sample_idx] <= 0.0:
        _record_obs(psi, obs_weights, obs_out, sample_idx)
        sample_idx += 1
    while snap_idx < snapshot_times.size and snapshot_times[snap_idx] <= 0.0:
        nrm = np.sqrt(_norm2(psi))
        for i in range(dim):
            snaps_out[snap_idx, i] = psi[i] / nrm
        snap_idx += 1

    if u_idx >= uniforms.size:
        return STATUS_POOL_EXHAUSTED, n_jumps, n_steps, n_fev, psi
    u = uniforms[u_idx]
    u_idx += 1

    _rhs(t, psi, kmat[0], indptr, indices, d_const, d_ge, d_er,
         ge_amp, ge_center, er_amp, er_center, sigma, shape_flag)
    n_fev += 1

    while t < t_end:
        if h < MIN_STEP:
            return STATUS_STEP_UNDERFLOW, n_jumps, n_steps, n_fev, psi
        if t + h > t_end:
            h = t_end - t

        # Stages 2..6 (stage 1 is the stored derivative: first-same-as-last).
        for s in range(1, 6):
            for i in range(dim):
                acc = 0.0 + 0.0j
                for q in range(s):
                    a = _A[s, q]
                    if a != 0.0:
                        acc += a * kmat[q, i]
                y_tmp[i] = psi[i] + h * acc
            _rhs(t + _C[s] * h, y_tmp, kmat[s], indptr, indices,
                 d_const, d_ge, d_er,
                 ge_amp, ge_center, er_amp, er_center, sigma, shape_flag)
            n_fev += 1
        for i in range(dim):
            acc = 0.0 + 0.0j
            for q in range(6):
                if _B[q] != 0.0:
                    acc += _B[q] * kmat[q, i]
            y_new[i] = psi[i] + h * acc
        _rhs(t + h, y_new, kmat[6], indptr, indices, d_const, d_ge, d_er,
             ge_amp, ge_center, er_amp, er_center, sigma, shape_flag)
        n_fev += 1

        # Embedded error estimate, RMS of err / (atol + rtol max(|y|, |y_new|)).
        err_acc = 0.0
        for i in range(dim):
            e = 0.0 + 0.0j
            for q in range(7):
                if _E[q] != 0.0:
                    e += _E[q] * kmat[q, i]
            e *= h
            ya = abs(psi[i])
            yb = abs(y_new[i])
            scale = atol + rtol * (ya if ya > yb else yb)
            err_acc += (e.real * e.real + e.imag * e.imag) / (scale * scale)
        err_norm = np.sqrt(err_acc / dim)

        if err_norm > 1.0:
            factor = 0.9 * err_norm ** -0.2
            if factor < 0.2:
                factor = 0.2
            h *= factor
            n_steps += 1
            continue

        t_new = t + h
        jumped = False
        if _norm2(y_new) <= u:
            # Bisect the norm-threshold crossing on the dense interpolant.
            th_lo = 0.0
            th_hi = 1.0
            while (th_hi - th_lo) * h > JUMP_TIME_TOL:
                th_mid = 0.5 * (th_lo + th_hi)
                _dense_eval(th_mid, h, psi, kmat, y_dense)
                if _norm2(y_dense) <= u:
                    th_hi = th_mid
                else:
                    th_lo = th_mid
            t_jump = t + th_hi * h
            # Samples strictly before the jump come from the interpolant.
            while sample_idx < t_grid.size and t_grid[sample_idx] <= t_jump:
                th = (t_grid[sample_idx] - t) / h
                _dense_eval(th, h, psi, kmat, y_dense)
                _record_obs(y_dense, obs_weights, obs_out, sample_idx)
                sample_idx += 1
            while snap_idx < snapshot_times.size and snapshot_times[snap_idx] <= t_jump:
                th = (snapshot_times[snap_idx] - t) / h
                _dense_eval(th, h, psi, kmat, y_dense)
                nrm = np.sqrt(_norm2(y_dense))
                for i in range(dim):
                    snaps_out[snap_idx, i] = y_dense[i] / nrm
                snap_idx += 1

            _dense_eval(th_hi, h, psi, kmat, y_dense)
            # Channel weights <psi|c^dag c|psi> via the applied states.
            total = 0.0
            for c in range(n_ch):
                acc = 0.0
                for i in range(dim):
                    s = ch_src[c, i]
                    if s >= 0:
                        v = ch_val[c, i] * y_dense[s]
                        acc += v.real * v.real + v.imag * v.imag
                w_ch[c] = acc
                total += acc
            if u_idx + 1 >= uniforms.size or n_jumps >= jump_times.size:
                return STATUS_POOL_EXHAUSTED, n_jumps, n_steps, n_fev, psi
            r = uniforms[u_idx] * total
            u_idx += 1
            chosen = n_ch - 1
            acc = 0.0
            for c in range(n_ch):
                acc += w_ch[c]
                if r < acc:
                    chosen = c
                    break
            # Apply the collapse operator and renormalize.
            for i in range(dim):
                s = ch_src[chosen, i]
                y_tmp[i] = ch_val[chosen, i] * y_dense[s] if s >= 0 else 0.0
            nrm = np.sqrt(_norm2(y_tmp))
            for i in range(dim):
                psi[i] = y_tmp[i] / nrm
            jump_times[n_jumps] = t_jump
            jump_chan[n_jumps] = chosen
            n_jumps += 1
            u = uniforms[u_idx]
            u_idx += 1
            t = t_jump
            _rhs(t, psi, kmat[0], indptr, indices, d_const, d_ge, d_er,
                 ge_amp, ge_center, er_amp, er_center, sigma, shape_flag)
            n_fev += 1
            jumped = True
        else:
            while sample_idx < t_grid.size and t_grid[sample_idx] <= t_new:
                th = (t_grid[sample_idx] - t) / h
                _dense_eval(th, h, psi, kmat, y_dense)
                _record_obs(y_dense, obs_weights, obs_out, sample_idx)
                sample_idx += 1
            while snap_idx < snapshot_times.size and snapshot_times[snap_idx] <= t_new:
                th = (snapshot_times[snap_idx] - t) / h
                _dense_eval(th, h, psi, kmat, y_dense)
                nrm = np.sqrt(_norm2(y_dense))
                for i in range(dim):
                    snaps_out[snap_idx, i] = y_dense[i] / nrm
                snap_idx += 1
            for i in range(dim):
                psi[i] = y_new[i]
            for i in range(dim):
                kmat[0, i] = kmat[6, i]
            t = t_new

        n_steps += 1
        if not jumped:
            if err_norm == 0.0:
                factor = 10.0
            else:
                factor = 0.9 * err_norm ** -0.2
                if factor > 10.0:
                    factor = 10.0
                if factor < 0.2:
                    factor = 0.2
            h *= factor

    nrm = np.sqrt(_norm2(psi))
    for i in range(dim):
        psi[i] /= nrm
    return STATUS_OK, n_jumps, n_steps, n_fev, psi
