"""Hot numeric kernels with two interchangeable backends.

The LSTM gate math runs once per timestep per layer per direction and the
Adam update runs once per step per parameter tensor, so both are fused into
single kernels. Each kernel has a pure-numpy implementation and a numba
@njit implementation; the active backend is chosen at import time:

  NOMEN_NUMBA=1  force numba (ImportError if unavailable)
  NOMEN_NUMBA=0  force pure numpy
  unset          numba when importable, numpy otherwise

`benchmarks/bench_kernels.py` compares the two backends. Matrix products
stay on numpy/BLAS in both modes; only Python-level per-step loops are
worth compiling.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "BACKEND",
    "lstm_cell_forward",
    "lstm_cell_backward",
    "adam_update",
    "get_backend",
    "available_backends",
]


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _lstm_cell_forward_np(pre, c_prev, h_prev, mask):
    """One masked LSTM step.

    pre    [B,4H] gate preactivations, blocks (i, f, g, o)
    c_prev [B,H], h_prev [B,H]
    mask   [B]    1.0 for real positions, 0.0 for padding (state frozen)

    Returns (h, c, i, f, g, o, tanh_c); i/f/g/o/tanh_c are the values the
    backward pass needs.
    """
    H = c_prev.shape[1]
    i = _sigmoid(pre[:, :H])
    f = _sigmoid(pre[:, H:2 * H])
    g = np.tanh(pre[:, 2 * H:3 * H])
    o = _sigmoid(pre[:, 3 * H:])
    c_new = f * c_prev + i * g
    tanh_c = np.tanh(c_new)
    h_new = o * tanh_c
    m = mask[:, None]
    h = m * h_new + (1.0 - m) * h_prev
    c = m * c_new + (1.0 - m) * c_prev
    return h, c, i, f, g, o, tanh_c


def _lstm_cell_backward_np(dh_in, dc_in, i, f, g, o, tanh_c, c_prev, mask):
    """Backward of one masked LSTM step.

    dh_in [B,H] grad wrt the (masked) output h, dc_in grad wrt carried c.
    Returns (dpre [B,4H], dc_prev [B,H], dh_prev [B,H]); dh_prev is only the
    pass-through part from masking — the recurrent Wh term is applied by the
    caller from dpre.
    """
    m = mask[:, None]
    dh_new = m * dh_in
    dh_prev = (1.0 - m) * dh_in
    dc_new = m * dc_in
    dc_prev_pass = (1.0 - m) * dc_in

    do = dh_new * tanh_c
    dct = dh_new * o * (1.0 - tanh_c * tanh_c) + dc_new
    di = dct * g
    df = dct * c_prev
    dg = dct * i
    dc_prev = dct * f + dc_prev_pass

    dpre = np.concatenate(
        [
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ],
        axis=1,
    )
    return dpre, dc_prev, dh_prev


def _adam_update_np(p, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
    """In-place Adam step on flat views; bc1/bc2 are 1-beta^t corrections."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


# ---------------------------------------------------------------------------
# numba implementations (explicit loops, same math)
# ---------------------------------------------------------------------------

def _build_numba_impls():
    from numba import njit

    @njit(cache=True)
    def lstm_cell_forward_nb(pre, c_prev, h_prev, mask):
        B, H = c_prev.shape
        h = np.empty_like(c_prev)
        c = np.empty_like(c_prev)
        i_g = np.empty_like(c_prev)
        f_g = np.empty_like(c_prev)
        g_g = np.empty_like(c_prev)
        o_g = np.empty_like(c_prev)
        tanh_c = np.empty_like(c_prev)
        for b in range(B):
            mb = mask[b]
            for j in range(H):
                ii = 1.0 / (1.0 + math.exp(-pre[b, j]))
                ff = 1.0 / (1.0 + math.exp(-pre[b, H + j]))
                gg = math.tanh(pre[b, 2 * H + j])
                oo = 1.0 / (1.0 + math.exp(-pre[b, 3 * H + j]))
                cn = ff * c_prev[b, j] + ii * gg
                tc = math.tanh(cn)
                hn = oo * tc
                i_g[b, j] = ii
                f_g[b, j] = ff
                g_g[b, j] = gg
                o_g[b, j] = oo
                tanh_c[b, j] = tc
                h[b, j] = mb * hn + (1.0 - mb) * h_prev[b, j]
                c[b, j] = mb * cn + (1.0 - mb) * c_prev[b, j]
        return h, c, i_g, f_g, g_g, o_g, tanh_c

    @njit(cache=True)
    def lstm_cell_backward_nb(dh_in, dc_in, i, f, g, o, tanh_c, c_prev, mask):
        B, H = c_prev.shape
        dpre = np.empty((B, 4 * H), dtype=c_prev.dtype)
        dc_prev = np.empty_like(c_prev)
        dh_prev = np.empty_like(c_prev)
        for b in range(B):
            mb = mask[b]
            for j in range(H):
                dh_new = mb * dh_in[b, j]
                dh_prev[b, j] = (1.0 - mb) * dh_in[b, j]
                dc_new = mb * dc_in[b, j]
                dc_pass = (1.0 - mb) * dc_in[b, j]
                tc = tanh_c[b, j]
                do = dh_new * tc
                dct = dh_new * o[b, j] * (1.0 - tc * tc) + dc_new
                di = dct * g[b, j]
                df = dct * c_prev[b, j]
                dg = dct * i[b, j]
                dc_prev[b, j] = dct * f[b, j] + dc_pass
                dpre[b, j] = di * i[b, j] * (1.0 - i[b, j])
                dpre[b, H + j] = df * f[b, j] * (1.0 - f[b, j])
                dpre[b, 2 * H + j] = dg * (1.0 - g[b, j] * g[b, j])
                dpre[b, 3 * H + j] = do * o[b, j] * (1.0 - o[b, j])
        return dpre, dc_prev, dh_prev

    @njit(cache=True)
    def adam_update_nb(p, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
        for k in range(p.shape[0]):
            m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k]
            v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k]
            p[k] -= lr * (m[k] / bc1) / (math.sqrt(v[k] / bc2) + eps)

    return {
        "lstm_cell_forward": lstm_cell_forward_nb,
        "lstm_cell_backward": lstm_cell_backward_nb,
        "adam_update": adam_update_nb,
    }


_NUMPY_IMPLS = {
    "lstm_cell_forward": _lstm_cell_forward_np,
    "lstm_cell_backward": _lstm_cell_backward_np,
    "adam_update": _adam_update_np,
}


def _select_backend() -> tuple[str, dict]:
    flag = os.environ.get("NOMEN_NUMBA", "").strip().lower()
    if flag in ("0", "false", "off"):
        return "numpy", _NUMPY_IMPLS
    try:
        impls = _build_numba_impls()
        return "numba", impls
    except ImportError:
        if flag in ("1", "true", "on"):
            raise
        return "numpy", _NUMPY_IMPLS


BACKEND, _ACTIVE = _select_backend()

lstm_cell_forward = _ACTIVE["lstm_cell_forward"]
lstm_cell_backward = _ACTIVE["lstm_cell_backward"]
adam_update = _ACTIVE["adam_update"]


def get_backend() -> str:
    return BACKEND


def available_backends() -> dict:
    """Both implementations keyed by backend name, for tests and benchmarks."""
    out = {"numpy": _NUMPY_IMPLS}
    try:
        out["numba"] = _build_numba_impls()
    except ImportError:
        pass
    return out
