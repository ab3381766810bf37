"""Constraint-aware neural surrogate for the interface solver.

A small fully-connected network maps Riemann initial data
(rho_l, T_l, rho_v, v_v, T_v) to an intermediate vector z; a fixed,
parameter-free output map ``psi_constraint`` turns z into the physical
outputs (rho_l*, m_l*, T_l*, rho_v*, m_v*, T_v*, s).  By construction the
outputs have non-negative densities and temperatures and satisfy the
interfacial mass balance m_v* = m_l* - s (rho_l* - rho_v*) exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

INPUT_DIM = 5
INTERMEDIATE_DIM = 6
OUTPUT_DIM = 7
DEFAULT_DIMS = (5, 50, 50, 50, 50, 50, 6)


class ModelFormatError(ValueError):
    """Raised when a model file cannot be parsed."""


@dataclass
class Mlp:
    """Plain multilayer perceptron: tanh hidden layers, linear output.

    ``weights[l]`` has shape (n_out, n_in) (row-major), ``biases[l]``
    shape (n_out,).
    """

    weights: list
    biases: list

    @property
    def layer_dims(self) -> tuple:
        return tuple([self.weights[0].shape[1]] + [w.shape[0] for w in self.weights])

    @classmethod
    def init(cls, dims=DEFAULT_DIMS, rng: np.random.Generator | int | None = None) -> "Mlp":
        """Glorot-uniform weight initialization, zero biases."""
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        weights, biases = [], []
        for n_in, n_out in zip(dims[:-1], dims[1:]):
            bound = np.sqrt(6.0 / (n_in + n_out))
            weights.append(gen.uniform(-bound, bound, size=(n_out, n_in)))
            biases.append(np.zeros(n_out))
        return cls(weights, biases)

    @classmethod
    def zeros(cls, dims=DEFAULT_DIMS) -> "Mlp":
        weights = [np.zeros((o, i)) for i, o in zip(dims[:-1], dims[1:])]
        biases = [np.zeros(o) for o in dims[1:]]
        return cls(weights, biases)

    def forward(self, x: np.ndarray) -> np.ndarray:
        z, _ = self.forward_cached(x)
        return z

    def forward_cached(self, x: np.ndarray):
        """Forward pass keeping per-layer activations for backprop."""
        a = np.atleast_2d(np.asarray(x, dtype=float))
        cache = [a]
        last = len(self.weights) - 1
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w.T + b
            if l != last:
                a = np.tanh(a)
            cache.append(a)
        return a, cache

    def backward(self, cache, dz: np.ndarray):
        """Gradients of a scalar loss w.r.t. weights and biases.

        ``dz`` is dLoss/d(output), shape (batch, n_out).  Returns
        (dweights, dbiases) matching the parameter lists.
        """
        dws = [None] * len(self.weights)
        dbs = [None] * len(self.biases)
        grad = dz
        for l in range(len(self.weights) - 1, -1, -1):
            a_prev = cache[l]
            if l != len(self.weights) - 1:
                grad = grad * (1.0 - cache[l + 1] ** 2)  # tanh'
            dws[l] = grad.T @ a_prev
            dbs[l] = grad.sum(axis=0)
            grad = grad @ self.weights[l]
        return dws, dbs


def psi_constraint(z: np.ndarray) -> np.ndarray:
    """Constraint-resolving output map.

    z = (rho_l~, v_l*, T_l~, rho_v~, T_v~, s) ->
    y = (|rho_l~|, |rho_l~| v_l*, |T_l~|, |rho_v~|,
         |rho_l~| v_l* - s (|rho_l~| - |rho_v~|), |T_v~|, s)

    The fifth component enforces the interfacial mass balance exactly;
    absolute values keep densities and temperatures non-negative.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    rho_l = np.abs(z[:, 0])
    rho_v = np.abs(z[:, 3])
    m_l = rho_l * z[:, 1]
    s = z[:, 5]
    y = np.column_stack(
        [
            rho_l,
            m_l,
            np.abs(z[:, 2]),
            rho_v,
            m_l - s * (rho_l - rho_v),
            np.abs(z[:, 4]),
            s,
        ]
    )
    return y


def psi_backward(z: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Pull a gradient dLoss/dy back through psi_constraint.

    The subgradient of |.| at the origin is taken as zero.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    dy = np.atleast_2d(np.asarray(dy, dtype=float))
    s0 = np.sign(z[:, 0])
    abs0 = np.abs(z[:, 0])
    abs3 = np.abs(z[:, 3])
    dz = np.empty_like(z)
    dz[:, 0] = s0 * dy[:, 0] + s0 * z[:, 1] * (dy[:, 1] + dy[:, 4]) - s0 * z[:, 5] * dy[:, 4]
    dz[:, 1] = abs0 * (dy[:, 1] + dy[:, 4])
    dz[:, 2] = np.sign(z[:, 2]) * dy[:, 2]
    dz[:, 3] = np.sign(z[:, 3]) * dy[:, 3] + z[:, 5] * np.sign(z[:, 3]) * dy[:, 4]
    dz[:, 4] = np.sign(z[:, 4]) * dy[:, 5]
    dz[:, 5] = dy[:, 6] - (abs0 - abs3) * dy[:, 4]
    return dz


@dataclass
class CResNet:
    """MLP plus constraint layer plus stored input/target normalization."""

    net: Mlp
    x_mean: np.ndarray = field(default_factory=lambda: np.zeros(INPUT_DIM))
    x_std: np.ndarray = field(default_factory=lambda: np.ones(INPUT_DIM))
    y_scale: np.ndarray = field(default_factory=lambda: np.ones(OUTPUT_DIM))

    @classmethod
    def init(cls, dims=DEFAULT_DIMS, rng=None) -> "CResNet":
        if dims[-1] != INTERMEDIATE_DIM:
            raise ValueError(f"final layer must have {INTERMEDIATE_DIM} nodes, got {dims[-1]}")
        return cls(
            net=Mlp.init(dims, rng),
            x_mean=np.zeros(dims[0]),
            x_std=np.ones(dims[0]),
            y_scale=np.ones(OUTPUT_DIM),
        )

    def standardize(self, x: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(np.asarray(x, dtype=float)) - self.x_mean) / self.x_std

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Map raw inputs (batch, 5) to physical outputs (batch, 7)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        z = self.net.forward(self.standardize(x))
        y = psi_constraint(z)
        return y[0] if single else y

    def loss_and_gradients(self, x: np.ndarray, y_true: np.ndarray):
        """Scale-weighted MSE and its gradients w.r.t. the net parameters.

        The squared residuals are weighted by 1/y_scale^2 per target, so
        the loss is an MSE on standardized targets.
        """
        xs = self.standardize(x)
        z, cache = self.net.forward_cached(xs)
        y = psi_constraint(z)
        resid = (y - np.atleast_2d(y_true)) / self.y_scale
        n = resid.size
        loss = float(np.sum(resid**2) / n)
        dy = 2.0 * resid / (self.y_scale * n)
        dz = psi_backward(z, dy)
        dws, dbs = self.net.backward(cache, dz)
        return loss, dws, dbs


def save_model(model: CResNet, path) -> None:
    """Write a CResNet to a plain-text file (17 significant digits)."""

    def fmt(vec):
        return " ".join(f"{v:.17g}" for v in np.asarray(vec).ravel())

    dims = model.net.layer_dims
    lines = ["cresnet v1", "dims: " + " ".join(str(d) for d in dims)]
    lines.append("x_mean: " + fmt(model.x_mean))
    lines.append("x_std: " + fmt(model.x_std))
    lines.append("y_scale: " + fmt(model.y_scale))
    for w, b in zip(model.net.weights, model.net.biases):
        for row in w:
            lines.append(fmt(row))
        lines.append(fmt(b))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> CResNet:
    """Read a CResNet written by :func:`save_model`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]

    def parse_vector(idx, what, expected_len):
        if idx >= len(lines):
            raise ModelFormatError(f"line {idx + 1}: missing {what}")
        parts = lines[idx].split()
        if parts and parts[0].endswith(":"):
            parts = parts[1:]
        try:
            vec = np.array([float(p) for p in parts])
        except ValueError as exc:
            raise ModelFormatError(f"line {idx + 1}: bad number in {what}: {exc}") from None
        if vec.shape[0] != expected_len:
            raise ModelFormatError(
                f"line {idx + 1}: {what} has {vec.shape[0]} entries, expected {expected_len}"
            )
        return vec

    if not lines or lines[0].strip() != "cresnet v1":
        raise ModelFormatError("line 1: missing 'cresnet v1' header")
    if len(lines) < 2 or not lines[1].startswith("dims:"):
        raise ModelFormatError("line 2: missing 'dims:' line")
    try:
        dims = tuple(int(t) for t in lines[1].split(":", 1)[1].split())
    except ValueError:
        raise ModelFormatError("line 2: dims must be integers") from None
    if len(dims) < 2:
        raise ModelFormatError("line 2: need at least two layer dims")

    x_mean = parse_vector(2, "x_mean", dims[0])
    x_std = parse_vector(3, "x_std", dims[0])
    y_scale = parse_vector(4, "y_scale", OUTPUT_DIM)

    idx = 5
    weights, biases = [], []
    for n_in, n_out_l in zip(dims[:-1], dims[1:]):
        w = np.empty((n_out_l, n_in))
        for r in range(n_out_l):
            w[r] = parse_vector(idx, f"weight row {r} of layer {len(weights)}", n_in)
            idx += 1
        b = parse_vector(idx, f"bias of layer {len(weights)}", n_out_l)
        idx += 1
        weights.append(w)
        biases.append(b)
    if any(line.strip() for line in lines[idx:]):
        raise ModelFormatError(f"line {idx + 1}: unexpected trailing content")
    return CResNet(net=Mlp(weights, biases), x_mean=x_mean, x_std=x_std, y_scale=y_scale)
