"""Inner loops of the four time steppers.

Two interchangeable backends:

* loop kernels written junction by junction, compiled with ``numba.njit`` when
  numba is importable and ``WARPMESH_NUMBA`` is not ``0``;
* vectorised numpy kernels, used otherwise (or on request).

The per-junction functions are also run uncompiled on object arrays by
:mod:`warpmesh.cost` to count operations, so they must stay plain scalar code
and keep the operation order fixed.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_AVAILABLE = numba is not None
NUMBA_ENABLED = NUMBA_AVAILABLE and os.environ.get("WARPMESH_NUMBA", "1").strip() not in ("0", "false", "no", "off")

THIRD = 1.0 / 3.0


def _jit(fn):
    if not NUMBA_ENABLED:
        return fn
    return numba.njit(cache=True)(fn)


def resolve_backend(use_numba: bool | None) -> bool:
    if use_numba is None:
        return NUMBA_ENABLED
    if use_numba and not NUMBA_ENABLED:
        raise RuntimeError("numba backend requested but numba is disabled or missing")
    return bool(use_numba)


# --- per-junction scalar kernels -------------------------------------------------


def scatter_junction(j, win, out, rim, third):
    """Lossless 6-port scattering at ``j``; returns the junction signal."""
    if rim[j]:
        for d in range(6):
            out[j, d] = -win[j, d]
        return 0.0 * third
    acc = win[j, 0]
    for d in range(1, 6):
        acc = acc + win[j, d]
    v = third * acc
    for d in range(6):
        out[j, d] = v - win[j, d]
    return v


def receive_junction(j, nbr, out, win):
    for d in range(6):
        k = nbr[j, d]
        if k >= 0:
            win[j, d] = out[k, (d + 3) % 6]


def receive_junction_warped(j, nbr, out, win, ap, alpha):
    # edge delay z^-1 A(z): register <- A(x), allpass in canonical one-state form
    for d in range(6):
        k = nbr[j, d]
        if k >= 0:
            x = out[k, (d + 3) % 6]
            u = alpha * x + ap[j, d]
            ap[j, d] = x - alpha * u
            win[j, d] = u


def fds_junction(j, nbr, tap1, tap2, p_next, third):
    """``p_next = (1/3) sum of neighbour taps - own second tap`` for an interior ``j``."""
    acc = tap1[nbr[j, 0]]
    for d in range(1, 6):
        acc = acc + tap1[nbr[j, d]]
    p_next[j] = third * acc - tap2[j]


def wfds_chains_junction(j, p_now, d1, s1, s2, c2, alpha):
    """Advance both warped-delay chains of ``j`` by one sample.

    Chain 1 takes ``p_now`` and leaves ``D p`` for the next step in ``d1``; chain 2
    takes the old ``d1`` (its register value before this step) and leaves
    ``D D p`` in the scratch array ``c2``.
    """
    c1 = d1[j]
    x = p_now[j]
    u = alpha * x + s1[j]
    s1[j] = x - alpha * u
    d1[j] = u
    u2 = alpha * c1 + s2[j]
    s2[j] = c1 - alpha * u2
    c2[j] = u2


_py_scatter_junction = scatter_junction
_py_receive_junction = receive_junction
_py_receive_junction_warped = receive_junction_warped
_py_fds_junction = fds_junction
_py_wfds_chains_junction = wfds_chains_junction

scatter_junction = _jit(scatter_junction)
receive_junction = _jit(receive_junction)
receive_junction_warped = _jit(receive_junction_warped)
fds_junction = _jit(fds_junction)
wfds_chains_junction = _jit(wfds_chains_junction)


# --- compiled whole-run drivers ---------------------------------------------------


@_jit
def _twm_run_loop(nbr, rim, win, ap, alpha, warped, steps, probe, record, third):
    n = nbr.shape[0]
    out = np.zeros_like(win)
    for t in range(steps):
        for j in range(n):
            v = scatter_junction(j, win, out, rim, third)
            if j == probe:
                record[t] = v
        if warped:
            for j in range(n):
                receive_junction_warped(j, nbr, out, win, ap, alpha)
        else:
            for j in range(n):
                receive_junction(j, nbr, out, win)


@_jit
def _fds_run_loop(nbr, interior, p_now, p_prev, steps, probe, record, third):
    p_next = np.zeros_like(p_now)
    for t in range(steps):
        record[t] = p_now[probe]
        for i in range(interior.shape[0]):
            fds_junction(interior[i], nbr, p_now, p_prev, p_next, third)
        # rim entries of p_next stay zero
        for j in range(p_now.shape[0]):
            p_prev[j] = p_now[j]
            p_now[j] = p_next[j]


@_jit
def _wfds_run_loop(nbr, interior, p_now, d1, s1, s2, alpha, steps, probe, record, third):
    n = p_now.shape[0]
    c2 = np.zeros_like(p_now)
    p_next = np.zeros_like(p_now)
    for t in range(steps):
        record[t] = p_now[probe]
        for j in range(n):
            wfds_chains_junction(j, p_now, d1, s1, s2, c2, alpha)
        for i in range(interior.shape[0]):
            fds_junction(interior[i], nbr, d1, c2, p_next, third)
        for j in range(n):
            p_now[j] = p_next[j]


# --- numpy kernels ---------------------------------------------------------------


def _gather_index(nbr):
    opp = (np.arange(6) + 3) % 6
    valid = nbr >= 0
    src = np.where(valid, nbr * 6 + opp[None, :], 0)
    return src, valid


def _twm_scatter_np(win, rim):
    acc = win[:, 0] + win[:, 1] + win[:, 2] + win[:, 3] + win[:, 4] + win[:, 5]
    v = THIRD * acc
    v[rim] = 0.0
    return v, v[:, None] - win


def twm_step_np(nbr, rim, win, ap, alpha, warped, gather=None):
    """One TWM/WTWM step in place; returns the junction signals before the step."""
    src, valid = gather if gather is not None else _gather_index(nbr)
    v, out = _twm_scatter_np(win, rim)
    x = np.where(valid, out.reshape(-1)[src], 0.0)
    if warped:
        u = alpha * x + ap
        ap[...] = x - alpha * u
        win[...] = u
    else:
        win[...] = x
    return v


def _fds_sum_np(nbrI, tap1):
    return (
        tap1[nbrI[:, 0]] + tap1[nbrI[:, 1]] + tap1[nbrI[:, 2]]
        + tap1[nbrI[:, 3]] + tap1[nbrI[:, 4]] + tap1[nbrI[:, 5]]
    )


def fds_step_np(nbr, interior, p_now, p_prev):
    nbrI = nbr[interior]
    p_next = np.zeros_like(p_now)
    p_next[interior] = THIRD * _fds_sum_np(nbrI, p_now) - p_prev[interior]
    p_prev[...] = p_now
    p_now[...] = p_next


def wfds_step_np(nbr, interior, p_now, d1, s1, s2, alpha):
    c1 = d1.copy()
    u = alpha * p_now + s1
    s1[...] = p_now - alpha * u
    d1[...] = u
    u2 = alpha * c1 + s2
    s2[...] = c1 - alpha * u2
    nbrI = nbr[interior]
    p_next = np.zeros_like(p_now)
    p_next[interior] = THIRD * _fds_sum_np(nbrI, d1) - u2[interior]
    p_now[...] = p_next


# --- backend-dispatching runners (mutate the passed arrays) ------------------------


def twm_run(nbr, rim, win, ap, alpha, warped, steps, probe, use_numba=None):
    record = np.zeros(steps)
    if resolve_backend(use_numba):
        _twm_run_loop(nbr, rim, win, ap, float(alpha), bool(warped), steps, probe, record, THIRD)
        return record
    gather = _gather_index(nbr)
    for t in range(steps):
        record[t] = twm_step_np(nbr, rim, win, ap, alpha, warped, gather)[probe]
    return record


def fds_run(nbr, interior, p_now, p_prev, steps, probe, use_numba=None):
    record = np.zeros(steps)
    if resolve_backend(use_numba):
        _fds_run_loop(nbr, interior, p_now, p_prev, steps, probe, record, THIRD)
        return record
    for t in range(steps):
        record[t] = p_now[probe]
        fds_step_np(nbr, interior, p_now, p_prev)
    return record


def wfds_run(nbr, interior, p_now, d1, s1, s2, alpha, steps, probe, use_numba=None):
    record = np.zeros(steps)
    if resolve_backend(use_numba):
        _wfds_run_loop(nbr, interior, p_now, d1, s1, s2, float(alpha), steps, probe, record, THIRD)
        return record
    for t in range(steps):
        record[t] = p_now[probe]
        wfds_step_np(nbr, interior, p_now, d1, s1, s2, alpha)
    return record
