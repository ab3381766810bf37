"""Training loop for the surrogate network: Adam with decoupled weight
decay and global gradient-norm clipping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import CResNet


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    lr: float = 1e-3
    weight_decay: float = 1e-3
    grad_clip_norm: float = 1e3
    epochs: int = 2000
    batch_size: int = 256
    val_fraction: float = 1.0 / 6.0
    seed: int = 0

    def __post_init__(self):
        if min(self.lr, self.grad_clip_norm, self.epochs, self.batch_size) <= 0:
            raise ValueError("hyperparameters must be positive")
        if self.weight_decay < 0 or not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("invalid weight_decay or val_fraction")


@dataclass
class TrainResult:
    model: CResNet
    train_losses: list
    val_losses: list


class _Adam:
    """Adam with decoupled weight decay applied at the update step."""

    def __init__(self, params, lr, weight_decay, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.wd = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g**2
            p -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)
            p -= self.lr * self.wd * p


def clip_gradients(grads, max_norm: float) -> float:
    """Scale gradients in place so the global L2 norm is at most max_norm."""
    total = np.sqrt(sum(float(np.sum(g**2)) for g in grads))
    if total > max_norm:
        scale = max_norm / total
        for g in grads:
            g *= scale
    return total

def split_by_group(groups: np.ndarray, val_fraction: float, rng: np.random.Generator):
    """Assign whole repetition groups to train or validation.

    Groups are shuffled and moved to the validation set until it holds at
    least ``val_fraction`` of the records, so repetitions of one
    microscale run never straddle the split.
    """
    groups = np.asarray(groups)
    n = groups.shape[0]
    unique = np.unique(groups)
    if val_fraction == 0.0 or unique.shape[0] < 2:
        return np.arange(n), np.arange(0)
    order = rng.permutation(unique)
    target = val_fraction * n
    val_groups = []
    count = 0
    for g in order:
        if count >= target or len(val_groups) == unique.shape[0] - 1:
            break
        val_groups.append(g)
        count += int(np.sum(groups == g))
    val_mask = np.isin(groups, val_groups)
    return np.where(~val_mask)[0], np.where(val_mask)[0]


def train(model: CResNet, x: np.ndarray, y: np.ndarray, groups, cfg: TrainConfig) -> TrainResult:
    """Fit the surrogate to (x, y) pairs.

    x: (N, 5) raw inputs, y: (N, 7) raw targets, groups: (N,) repetition
    group ids.  Normalization statistics are computed from the training
    split and stored on the model.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[0] == 0:
        raise TrainingError("empty dataset")
    rng = np.random.default_rng(cfg.seed)
    train_idx, val_idx = split_by_group(np.asarray(groups), cfg.val_fraction, rng)
    x_train, y_train = x[train_idx], y[train_idx]
    x_val, y_val = x[val_idx], y[val_idx]

    model.x_mean = x_train.mean(axis=0)
    model.x_std = _guarded_std(x_train)
    model.y_scale = _guarded_std(y_train)

    params = model.net.weights + model.net.biases
    opt = _Adam(params, cfg.lr, cfg.weight_decay)
    n_train = x_train.shape[0]
    train_losses, val_losses = [], []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n_train)
        epoch_loss = 0.0
        for start in range(0, n_train, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            loss, dws, dbs = model.loss_and_gradients(x_train[batch], y_train[batch])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch {start // cfg.batch_size}")
            grads = dws + dbs
            clip_gradients(grads, cfg.grad_clip_norm)
            opt.step(grads)
            epoch_loss += loss * batch.shape[0]
        train_losses.append(epoch_loss / n_train)
        if val_idx.shape[0]:
            val_losses.append(evaluate_loss(model, x_val, y_val))
    return TrainResult(model=model, train_losses=train_losses, val_losses=val_losses)


def evaluate_loss(model: CResNet, x: np.ndarray, y: np.ndarray) -> float:
    resid = (model.forward(np.atleast_2d(x)) - np.atleast_2d(y)) / model.y_scale
    return float(np.mean(resid**2))


def _guarded_std(arr: np.ndarray) -> np.ndarray:
    std = arr.std(axis=0)
    std[std == 0.0] = 1.0
    return std
