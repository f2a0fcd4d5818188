"""Compiled inner loops for the iterative engine.

The sweep is strictly sequential (each projector update consumes the previous
one), so the only way to make reconstruction cost track the d^3 arithmetic is
to keep the whole restart/sweep loop out of the interpreter. The matvecs are
hand-rolled: for d <= 64 the BLAS call overhead would dominate the actual
work.

`sweep_kernel` runs up to `max_sweeps` sweeps from a given start and is the
compiled twin of the numpy reference in `pie.pie_sweep` (tested against it).
`reconstruct_kernel` adds restarting with Haar-random starts drawn from the
in-kernel MT19937 stream seeded once per call.
"""

import numpy as np
from numba import njit

ZERO_PHASE_EPS = 1e-14


@njit(cache=True, nogil=True)
def seed_rng(seed):
    """Seed this thread's MT19937 stream (setup, kept outside timed regions)."""
    np.random.seed(seed)


@njit(cache=True, nogil=True)
def _sweep_core(phi, amps, masks, F, Fh, beta, tol, max_sweeps, pl, Phi, psip, before):
    n, d = amps.shape
    D = np.inf
    sweeps = 0
    for s in range(max_sweeps):
        for k in range(d):
            before[k] = phi[k]
        for ell in range(n):
            for k in range(d):
                pl[k] = phi[k] if masks[ell, k] else 0.0 + 0.0j
            for j in range(d):
                acc = 0.0 + 0.0j
                for k in range(d):
                    acc += Fh[j, k] * pl[k]
                Phi[j] = acc
            for k in range(d):
                m = abs(Phi[k])
                if m < ZERO_PHASE_EPS:
                    Phi[k] = amps[ell, k]
                else:
                    Phi[k] = amps[ell, k] * Phi[k] / m
            for j in range(d):
                acc = 0.0 + 0.0j
                for k in range(d):
                    acc += F[j, k] * Phi[k]
                psip[j] = acc
            for k in range(d):
                if masks[ell, k]:
                    phi[k] = phi[k] + beta * (psip[k] - pl[k])
        num = 0.0
        den = 0.0
        for k in range(d):
            dr = phi[k].real - before[k].real
            di = phi[k].imag - before[k].imag
            num += dr * dr + di * di
            den += before[k].real ** 2 + before[k].imag ** 2
        D = num / den
        sweeps = s + 1
        if D < tol:
            break
    return D, sweeps


@njit(cache=True, nogil=True)
def sweep_kernel(phi, amps, masks, F, Fh, beta, tol, max_sweeps):
    """Run sweeps in place until the relative-distance metric drops below tol.

    Returns (D, sweeps_used); phi is updated in place.
    """
    d = amps.shape[1]
    pl = np.empty(d, np.complex128)
    Phi = np.empty(d, np.complex128)
    psip = np.empty(d, np.complex128)
    before = np.empty(d, np.complex128)
    return _sweep_core(phi, amps, masks, F, Fh, beta, tol, max_sweeps, pl, Phi, psip, before)


@njit(cache=True, nogil=True)
def residual_kernel(phi, amps, masks, Fh):
    """Sum of squared amplitude mismatches for the normalized estimate."""
    n, d = amps.shape
    nrm = 0.0
    for k in range(d):
        nrm += phi[k].real ** 2 + phi[k].imag ** 2
    nrm = np.sqrt(nrm)
    res = 0.0
    for ell in range(n):
        for j in range(d):
            acc = 0.0 + 0.0j
            for k in range(d):
                if masks[ell, k]:
                    acc += Fh[j, k] * phi[k]
            diff = abs(acc) / nrm - amps[ell, j]
            res += diff * diff
    return res


@njit(cache=True, nogil=True)
def _normalize_inplace(phi):
    d = phi.shape[0]
    nrm = 0.0
    for k in range(d):
        nrm += phi[k].real ** 2 + phi[k].imag ** 2
    nrm = np.sqrt(nrm)
    for k in range(d):
        phi[k] = phi[k] / nrm


@njit(cache=True, nogil=True)
def reconstruct_kernel(amps, masks, F, Fh, beta, tol, max_sweeps, max_restarts, work):
    """Full restart loop. Returns (phi, converged, sweeps, restarts, D, residual).

    Starts are Haar-random (normalized complex Gaussians) drawn from this
    thread's MT19937 stream, which the caller seeds via `seed_rng` just before
    the call, so the result is a pure function of the arguments and that seed.
    `work` is a caller-allocated (6, d) complex scratch array. On exhaustion
    the lowest-residual candidate is returned, flagged non-converged.
    """
    n, d = amps.shape
    phi = work[0]
    best = work[1]
    best_res = np.inf
    best_D = np.inf
    best_sweeps = 0
    best_restart = 0
    for restart in range(max_restarts + 1):
        nrm = 0.0
        for k in range(d):
            re = np.random.standard_normal()
            im = np.random.standard_normal()
            phi[k] = re + 1j * im
            nrm += re * re + im * im
        nrm = np.sqrt(nrm)
        for k in range(d):
            phi[k] = phi[k] / nrm
        D, sweeps = _sweep_core(
            phi, amps, masks, F, Fh, beta, tol, max_sweeps,
            work[2], work[3], work[4], work[5],
        )
        if D < tol:
            res = residual_kernel(phi, amps, masks, Fh)
            _normalize_inplace(phi)
            return phi, True, sweeps, restart, D, res
        res = residual_kernel(phi, amps, masks, Fh)
        if res < best_res:
            best_res = res
            best_D = D
            best_sweeps = sweeps
            best_restart = restart
            for k in range(d):
                best[k] = phi[k]
    _normalize_inplace(best)
    return best, False, best_sweeps, best_restart, best_D, best_res
