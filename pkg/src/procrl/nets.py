"""Small dense networks with hand-written backprop, Adam, and input scaling.

The policy and value heads are 2-hidden-layer tanh MLPs; at this size
explicit numpy forward/backward passes are faster than a framework and
keep every gradient reachable for the finite-difference checks that gate
the training code.
"""

import math

import numpy as np


def orthogonal(shape, gain: float, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal weight initialization, scaled by gain."""
    rows, cols = shape
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))  # fix the sign ambiguity of QR
    q = q.T if rows < cols else q
    return np.ascontiguousarray(gain * q[:rows, :cols])


class Mlp:
    """Feed-forward tanh network; linear output layer.

    Parameters are a flat list [W0, b0, W1, b1, ...] shared by reference
    with the optimizer.
    """

    def __init__(self, sizes, rng: np.random.Generator, out_scale: float = 1.0):
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.params = []
        last = len(self.sizes) - 2
        for i, (n_in, n_out) in enumerate(zip(self.sizes, self.sizes[1:])):
            gain = out_scale if i == last else math.sqrt(2.0)
            self.params.append(orthogonal((n_out, n_in), gain, rng))
            self.params.append(np.zeros(n_out))

    def forward(self, x: np.ndarray):
        """x is (batch, n_in); returns (output (batch, n_out), cache)."""
        h = x
        activations = [x]
        n_layers = len(self.sizes) - 1
        for i in range(n_layers):
            w, b = self.params[2 * i], self.params[2 * i + 1]
            z = h @ w.T + b
            h = np.tanh(z) if i < n_layers - 1 else z
            activations.append(h)
        return h, activations

    def backward(self, cache, dout: np.ndarray):
        """Gradients for dLoss/doutput `dout`; returns list matching params."""
        activations = cache
        n_layers = len(self.sizes) - 1
        grads = [None] * len(self.params)
        delta = dout
        for i in reversed(range(n_layers)):
            w = self.params[2 * i]
            h_in = activations[i]
            grads[2 * i] = delta.T @ h_in
            grads[2 * i + 1] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ w) * (1.0 - activations[i] ** 2)
        return grads

    def state_dict(self) -> dict:
        return {"sizes": list(self.sizes),
                "params": [p.tolist() for p in self.params]}

    def load_state_dict(self, state: dict) -> None:
        if tuple(state["sizes"]) != self.sizes:
            raise ValueError(f"size mismatch: expected {self.sizes}, "
                             f"got {tuple(state['sizes'])}")
        if len(state["params"]) != len(self.params):
            raise ValueError("parameter count mismatch")
        for i, (current, stored) in enumerate(zip(self.params, state["params"])):
            arr = np.asarray(stored, dtype=np.float64)
            if arr.shape != current.shape:
                raise ValueError(f"shape mismatch in parameter {i}: "
                                 f"expected {current.shape}, got {arr.shape}")
            self.params[i] = arr


class Adam:
    """Adaptive-moment estimation over a list of parameter arrays."""

    def __init__(self, params, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            m_hat = self.m[i] / b1c
            v_hat = self.v[i] / b2c
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def global_grad_norm(grads) -> float:
    return math.sqrt(sum(float(np.sum(g * g)) for g in grads))


def clip_grad_norm(grads, max_norm: float) -> float:
    """Scale gradients in place so the global norm is at most max_norm."""
    norm = global_grad_norm(grads)
    if norm > max_norm and norm > 0:
        scale = max_norm / norm
        for g in grads:
            g *= scale
    return norm


class RunningNorm:
    """Welford running mean/variance used to normalize observations.

    Updated during rollout collection, frozen during evaluation; the state
    is part of every checkpoint so a reloaded policy sees the same inputs.
    """

    def __init__(self, dim: int, eps: float = 1e-8):
        self.dim = dim
        self.eps = eps
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    def update(self, x: np.ndarray) -> None:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        for row in x:
            self.count += 1
            delta = row - self.mean
            self.mean = self.mean + delta / self.count
            self.m2 = self.m2 + delta * (row - self.mean)

    @property
    def var(self) -> np.ndarray:
        if self.count < 2:
            return np.ones(self.dim)
        return self.m2 / self.count

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / np.sqrt(self.var + self.eps)

    def state_dict(self) -> dict:
        return {"dim": self.dim, "count": self.count,
                "mean": self.mean.tolist(), "m2": self.m2.tolist()}

    def load_state_dict(self, state: dict) -> None:
        if int(state["dim"]) != self.dim:
            raise ValueError("normalizer dimension mismatch")
        self.count = int(state["count"])
        self.mean = np.asarray(state["mean"], dtype=np.float64)
        self.m2 = np.asarray(state["m2"], dtype=np.float64)
        if self.mean.shape != (self.dim,) or self.m2.shape != (self.dim,):
            raise ValueError("normalizer state shape mismatch")
