"""Reference implementations of the numeric hot loops.

Everything in this module is written in the restricted numpy/scalar style
that numba's nopython mode accepts, so the exact same source runs either
JIT-compiled (the default, see ``tssid.kernels``) or as plain numpy when
the JIT is disabled.  Rules for code in this file:

* self-contained functions only; no calls into other Python helpers,
* no dicts, kwargs, closures or object-mode constructs,
* float64 in, float64 out; integer metadata as int64 arrays or scalars.

Integration uses classical fixed-step RK4.  Control inputs are sampled
series; stage values use linear interpolation between samples (the value
at the half step is the midpoint average), so one RK4 step spans exactly
one sampling interval.

Neural parameter vectors are flat 1-D float64 arrays.  Layouts:

MLP, layer sizes ``d0, d1, ..., dL`` (ReLU on hidden layers, linear head):
    for each layer l in 1..L: W_l with shape (d_{l-1}, d_l), then b_l (d_l,)

LSTM, ``n_layers`` stacked cells of hidden width H over input width D,
followed by a scalar linear head read out at every time step:
    for each layer l: W_x (in_l, 4H), W_h (H, 4H), b (4H,)
        where in_l = D for the first layer and H above it,
        gate order along the 4H axis is [input, forget, cell, output]
    head: W_y (H,), b_y (one scalar)

The cell is the standard LSTM:
    i = sigmoid(x W_xi + h W_hi + b_i)        f = sigmoid(... + b_f)
    g = tanh(...)                             o = sigmoid(... + b_o)
    c' = f * c + i * g                        h' = o * tanh(c')
with h and c starting at zero for every window.  The training loss is the
mean squared error of the per-step head outputs over every (window, step).
"""

from __future__ import annotations

import numpy as np


def rk4_first_order(a, b, c, u, dt, x0):
    """Integrate dx/dt = -a - b*x + c*u(t) over the samples of ``u``.

    Returns the state series, same length as ``u``, with ``out[0] = x0``.
    """
    n = u.shape[0]
    out = np.empty(n)
    x = x0
    out[0] = x
    for k in range(n - 1):
        u0 = u[k]
        u1 = u[k + 1]
        um = 0.5 * (u0 + u1)
        k1 = -a - b * x + c * u0
        k2 = -a - b * (x + 0.5 * dt * k1) + c * um
        k3 = -a - b * (x + 0.5 * dt * k2) + c * um
        k4 = -a - b * (x + dt * k3) + c * u1
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = x
    return out


def rk4_cascade(mu, tau1, tau2, u, dt, x0, v0):
    """Integrate tau1*tau2*x'' + (tau1+tau2)*x' + x = mu*u(t).

    State is (x, v = dx/dt).  Returns (x_series, v_series).
    """
    n = u.shape[0]
    xs = np.empty(n)
    vs = np.empty(n)
    p = tau1 * tau2
    q = tau1 + tau2
    x = x0
    v = v0
    xs[0] = x
    vs[0] = v
    for k in range(n - 1):
        u0 = u[k]
        u1 = u[k + 1]
        um = 0.5 * (u0 + u1)

        k1x = v
        k1v = (mu * u0 - x - q * v) / p
        x2 = x + 0.5 * dt * k1x
        v2 = v + 0.5 * dt * k1v
        k2x = v2
        k2v = (mu * um - x2 - q * v2) / p
        x3 = x + 0.5 * dt * k2x
        v3 = v + 0.5 * dt * k2v
        k3x = v3
        k3v = (mu * um - x3 - q * v3) / p
        x4 = x + dt * k3x
        v4 = v + dt * k3v
        k4x = v4
        k4v = (mu * u1 - x4 - q * v4) / p

        x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        xs[k + 1] = x
        vs[k + 1] = v
    return xs, vs


def rk4_sparse(xi, expo, trig, u, dt, x_init):
    """Integrate a fitted sparse model dx_s/dt = sum_j xi[s, j] * theta_j(x, u).

    xi     : (n_state, n_terms) coefficient matrix, one row per state equation
    expo   : (n_terms, n_vars) int64 monomial exponent of each variable,
             variables ordered states-then-inputs
    trig   : (n_terms, n_vars) int64 trig factor code per variable:
             0 none, 1 sin(var), 2 cos(var)
    u      : (n_samples, n_inputs) control series
    x_init : (n_state,) initial state

    Returns (states, quad):
      states : (n_samples, n_state)
      quad   : (n_samples, n_state + n_inputs) running RK4 integrals of each
               state and each (interpolated) input, starting at zero.  The
               quadrature states are integrated inside the same RK4 stages,
               so any linear first integral of the model holds to rounding.
    """
    n = u.shape[0]
    n_in = u.shape[1]
    n_state = xi.shape[0]
    n_terms = xi.shape[1]
    n_vars = n_state + n_in

    states = np.empty((n, n_state))
    quad = np.zeros((n, n_state + n_in))

    x = x_init.copy()
    z = np.zeros(n_state + n_in)
    vars_val = np.empty(n_vars)
    ustage = np.empty(n_in)
    kx = np.empty((4, n_state))
    kz = np.empty((4, n_state + n_in))
    xs = np.empty(n_state)

    for s in range(n_state):
        states[0, s] = x[s]

    for k in range(n - 1):
        for stage in range(4):
            # state and input values at this stage
            if stage == 0:
                for j in range(n_in):
                    ustage[j] = u[k, j]
                for s in range(n_state):
                    xs[s] = x[s]
            else:
                if stage == 3:
                    for j in range(n_in):
                        ustage[j] = u[k + 1, j]
                else:
                    for j in range(n_in):
                        ustage[j] = 0.5 * (u[k, j] + u[k + 1, j])
                h = dt if stage == 3 else 0.5 * dt
                prev = stage - 1
                for s in range(n_state):
                    xs[s] = x[s] + h * kx[prev, s]

            for s in range(n_state):
                vars_val[s] = xs[s]
            for j in range(n_in):
                vars_val[n_state + j] = ustage[j]

            # rhs of the model equations
            for s in range(n_state):
                acc = 0.0
                for t in range(n_terms):
                    coef = xi[s, t]
                    if coef != 0.0:
                        v = 1.0
                        for w in range(n_vars):
                            e = expo[t, w]
                            for _ in range(e):
                                v *= vars_val[w]
                            tc = trig[t, w]
                            if tc == 1:
                                v *= np.sin(vars_val[w])
                            elif tc == 2:
                                v *= np.cos(vars_val[w])
                        acc += coef * v
                kx[stage, s] = acc
            # rhs of the quadrature states: the integrands themselves
            for s in range(n_state):
                kz[stage, s] = xs[s]
            for j in range(n_in):
                kz[stage, n_state + j] = ustage[j]

        for s in range(n_state):
            x[s] = x[s] + (dt / 6.0) * (
                kx[0, s] + 2.0 * kx[1, s] + 2.0 * kx[2, s] + kx[3, s]
            )
            states[k + 1, s] = x[s]
        for s in range(n_state + n_in):
            z[s] = z[s] + (dt / 6.0) * (
                kz[0, s] + 2.0 * kz[1, s] + 2.0 * kz[2, s] + kz[3, s]
            )
            quad[k + 1, s] = z[s]

    return states, quad


def mlp_forward(flat, sizes, x):
    """Forward pass of the MLP.  x: (batch, sizes[0]) -> (batch, sizes[-1])."""
    n_layers = sizes.shape[0] - 1
    h = x
    off = 0
    for l in range(n_layers):
        fin = sizes[l]
        fout = sizes[l + 1]
        w = flat[off:off + fin * fout].reshape(fin, fout)
        off += fin * fout
        b = flat[off:off + fout]
        off += fout
        z = np.dot(h, w) + b
        if l < n_layers - 1:
            h = np.maximum(z, 0.0)
        else:
            h = z
    return h


def mlp_value_and_grad(flat, sizes, x, y):
    """MSE loss and gradient of the MLP on one batch.

    x: (batch, sizes[0]); y: (batch, sizes[-1]).
    Loss is mean over batch * output entries.  Returns (loss, grad) with
    grad laid out exactly like ``flat``.
    """
    n_layers = sizes.shape[0] - 1
    batch = x.shape[0]

    offs = np.empty(n_layers + 1, np.int64)
    offs[0] = 0
    for l in range(n_layers):
        offs[l + 1] = offs[l] + sizes[l] * sizes[l + 1] + sizes[l + 1]

    acts = [x]
    pre = []
    h = x
    for l in range(n_layers):
        fin = sizes[l]
        fout = sizes[l + 1]
        o = offs[l]
        w = flat[o:o + fin * fout].reshape(fin, fout)
        b = flat[o + fin * fout:o + fin * fout + fout]
        z = np.dot(h, w) + b
        pre.append(z)
        if l < n_layers - 1:
            h = np.maximum(z, 0.0)
        else:
            h = z
        acts.append(h)

    d = acts[n_layers] - y
    denom = float(batch * sizes[n_layers])
    acc = 0.0
    for i in range(batch):
        for j in range(sizes[n_layers]):
            acc += d[i, j] * d[i, j]
    loss = acc / denom

    grad = np.zeros_like(flat)
    delta = (2.0 / denom) * d
    for l in range(n_layers - 1, -1, -1):
        fin = sizes[l]
        fout = sizes[l + 1]
        o = offs[l]
        w = flat[o:o + fin * fout].reshape(fin, fout)
        gw = grad[o:o + fin * fout].reshape(fin, fout)
        gb = grad[o + fin * fout:o + fin * fout + fout]
        gw += np.dot(acts[l].T, delta)
        for j in range(fout):
            s = 0.0
            for i in range(batch):
                s += delta[i, j]
            gb[j] += s
        if l > 0:
            back = np.dot(delta, w.T)
            zprev = pre[l - 1]
            delta = back * np.where(zprev > 0.0, 1.0, 0.0)
    return loss, grad


def lstm_forward(flat, input_dim, hidden, n_layers, x):
    """Forward pass of the stacked LSTM.  x: (batch, T, input_dim) -> (batch, T)."""
    bsz = x.shape[0]
    T = x.shape[1]
    H = hidden
    off = 0
    cur = x
    for l in range(n_layers):
        fin = input_dim if l == 0 else H
        wx = flat[off:off + fin * 4 * H].reshape(fin, 4 * H)
        off += fin * 4 * H
        wh = flat[off:off + H * 4 * H].reshape(H, 4 * H)
        off += H * 4 * H
        b = flat[off:off + 4 * H]
        off += 4 * H
        hseq = np.empty((bsz, T, H))
        h = np.zeros((bsz, H))
        c = np.zeros((bsz, H))
        for t in range(T):
            xt = np.ascontiguousarray(cur[:, t, :])
            zg = np.dot(xt, wx) + np.dot(h, wh) + b
            gi = 1.0 / (1.0 + np.exp(-zg[:, 0:H]))
            gf = 1.0 / (1.0 + np.exp(-zg[:, H:2 * H]))
            gg = np.tanh(zg[:, 2 * H:3 * H])
            go = 1.0 / (1.0 + np.exp(-zg[:, 3 * H:4 * H]))
            c = gf * c + gi * gg
            h = go * np.tanh(c)
            hseq[:, t, :] = h
        cur = hseq
    wy = flat[off:off + H]
    by = flat[off + H]
    y = np.empty((bsz, T))
    for t in range(T):
        ht = cur[:, t, :]
        for i in range(bsz):
            s = 0.0
            for j in range(H):
                s += ht[i, j] * wy[j]
            y[i, t] = s + by
    return y


def lstm_value_and_grad(flat, input_dim, hidden, n_layers, x, y):
    """MSE loss and full-BPTT gradient of the stacked LSTM on one batch.

    x: (batch, T, input_dim); y: (batch, T) per-step targets.
    Loss is mean over batch * T.  Returns (loss, grad).
    """
    bsz = x.shape[0]
    T = x.shape[1]
    H = hidden
    L = n_layers

    offs = np.empty(L + 1, np.int64)
    offs[0] = 0
    for l in range(L):
        fin = input_dim if l == 0 else H
        offs[l + 1] = offs[l] + fin * 4 * H + H * 4 * H + 4 * H
    head = offs[L]

    # forward, storing gate activations, cell states and hidden states
    gi = np.empty((L, T, bsz, H))
    gf = np.empty((L, T, bsz, H))
    gg = np.empty((L, T, bsz, H))
    go = np.empty((L, T, bsz, H))
    cs = np.empty((L, T, bsz, H))
    tc = np.empty((L, T, bsz, H))
    hs = np.empty((L, T, bsz, H))

    for l in range(L):
        fin = input_dim if l == 0 else H
        o = offs[l]
        wx = flat[o:o + fin * 4 * H].reshape(fin, 4 * H)
        wh = flat[o + fin * 4 * H:o + fin * 4 * H + H * 4 * H].reshape(H, 4 * H)
        b = flat[o + fin * 4 * H + H * 4 * H:o + fin * 4 * H + H * 4 * H + 4 * H]
        h = np.zeros((bsz, H))
        c = np.zeros((bsz, H))
        for t in range(T):
            if l == 0:
                xt = np.ascontiguousarray(x[:, t, :])
            else:
                xt = np.ascontiguousarray(hs[l - 1, t])
            zg = np.dot(xt, wx) + np.dot(h, wh) + b
            i_t = 1.0 / (1.0 + np.exp(-zg[:, 0:H]))
            f_t = 1.0 / (1.0 + np.exp(-zg[:, H:2 * H]))
            g_t = np.tanh(zg[:, 2 * H:3 * H])
            o_t = 1.0 / (1.0 + np.exp(-zg[:, 3 * H:4 * H]))
            c = f_t * c + i_t * g_t
            tch = np.tanh(c)
            h = o_t * tch
            gi[l, t] = i_t
            gf[l, t] = f_t
            gg[l, t] = g_t
            go[l, t] = o_t
            cs[l, t] = c
            tc[l, t] = tch
            hs[l, t] = h

    wy = flat[head:head + H]
    by = flat[head + H]
    yhat = np.empty((bsz, T))
    for t in range(T):
        ht = hs[L - 1, t]
        for i in range(bsz):
            s = 0.0
            for j in range(H):
                s += ht[i, j] * wy[j]
            yhat[i, t] = s + by

    d = yhat - y
    denom = float(bsz * T)
    acc = 0.0
    for i in range(bsz):
        for t in range(T):
            acc += d[i, t] * d[i, t]
    loss = acc / denom
    dy = (2.0 / denom) * d

    grad = np.zeros_like(flat)
    gwy = grad[head:head + H]
    for t in range(T):
        ht = hs[L - 1, t]
        for j in range(H):
            s = 0.0
            for i in range(bsz):
                s += ht[i, j] * dy[i, t]
            gwy[j] += s
    sby = 0.0
    for t in range(T):
        for i in range(bsz):
            sby += dy[i, t]
    grad[head + H] += sby

    # backward through time, top layer down inside each step
    dh_next = np.zeros((L, bsz, H))
    dc_next = np.zeros((L, bsz, H))
    dfromup = np.zeros((bsz, H))
    zeros_bh = np.zeros((bsz, H))
    for t in range(T - 1, -1, -1):
        for l in range(L - 1, -1, -1):
            fin = input_dim if l == 0 else H
            o = offs[l]
            wx = flat[o:o + fin * 4 * H].reshape(fin, 4 * H)
            wh = flat[o + fin * 4 * H:o + fin * 4 * H + H * 4 * H].reshape(H, 4 * H)
            gwx = grad[o:o + fin * 4 * H].reshape(fin, 4 * H)
            gwh = grad[o + fin * 4 * H:o + fin * 4 * H + H * 4 * H].reshape(H, 4 * H)
            gb = grad[o + fin * 4 * H + H * 4 * H:o + fin * 4 * H + H * 4 * H + 4 * H]

            if l == L - 1:
                dh = np.empty((bsz, H))
                for i in range(bsz):
                    for j in range(H):
                        dh[i, j] = dy[i, t] * wy[j] + dh_next[l, i, j]
            else:
                dh = dfromup + dh_next[l]

            i_t = gi[l, t]
            f_t = gf[l, t]
            g_t = gg[l, t]
            o_t = go[l, t]
            tch = tc[l, t]
            c_prev = cs[l, t - 1] if t > 0 else zeros_bh

            dc = dh * o_t * (1.0 - tch * tch) + dc_next[l]
            dzi = (dc * g_t) * i_t * (1.0 - i_t)
            dzf = (dc * c_prev) * f_t * (1.0 - f_t)
            dzg = (dc * i_t) * (1.0 - g_t * g_t)
            dzo = (dh * tch) * o_t * (1.0 - o_t)

            dz = np.empty((bsz, 4 * H))
            dz[:, 0:H] = dzi
            dz[:, H:2 * H] = dzf
            dz[:, 2 * H:3 * H] = dzg
            dz[:, 3 * H:4 * H] = dzo

            if l == 0:
                xin = np.ascontiguousarray(x[:, t, :])
            else:
                xin = np.ascontiguousarray(hs[l - 1, t])
            h_prev = hs[l, t - 1] if t > 0 else zeros_bh

            gwx += np.dot(xin.T, dz)
            gwh += np.dot(h_prev.T, dz)
            for j in range(4 * H):
                s = 0.0
                for i in range(bsz):
                    s += dz[i, j]
                gb[j] += s

            dh_next[l] = np.dot(dz, wh.T)
            dc_next[l] = dc * f_t
            if l > 0:
                dfromup = np.dot(dz, wx.T)
    return loss, grad
