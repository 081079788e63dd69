"""Dense tanh networks with hand-written backprop, a tanh-squashed Gaussian
policy, and Adam."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


class DenseNet:
    """``sizes = [in, h1, ..., out]``; tanh on hidden layers, linear output.

    Inputs are multiplied by ``input_scale`` before the first layer.
    """

    def __init__(self, sizes, rng: np.random.Generator, out_gain: float = 1.0, input_scale=None):
        self.sizes = [int(s) for s in sizes]
        if len(self.sizes) < 2 or min(self.sizes) < 1:
            raise ValueError(f"bad layer sizes {sizes}")
        self.input_scale = (np.ones(self.sizes[0]) if input_scale is None
                            else np.asarray(input_scale, dtype=np.float64).reshape(self.sizes[0]))
        self.params = []
        n_layers = len(self.sizes) - 1
        for i in range(n_layers):
            fan_in, fan_out = self.sizes[i], self.sizes[i + 1]
            gain = out_gain if i == n_layers - 1 else 1.0
            W = rng.normal(0.0, gain / math.sqrt(fan_in), (fan_in, fan_out))
            self.params += [W, np.zeros(fan_out)]

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def forward(self, x, keep: bool = False):
        """Returns the output, plus the per-layer activations when ``keep``."""
        h = np.asarray(x, dtype=np.float64) * self.input_scale
        acts = [h]
        n_layers = len(self.params) // 2
        for i in range(n_layers):
            W, b = self.params[2 * i], self.params[2 * i + 1]
            h = h @ W + b
            if i < n_layers - 1:
                h = np.tanh(h)
            acts.append(h)
        return (h, acts) if keep else h

    def backward(self, acts, grad_out) -> list:
        """Parameter gradients given d(loss)/d(output) for a batch."""
        grads = [None] * len(self.params)
        g = grad_out
        n_layers = len(self.params) // 2
        for i in reversed(range(n_layers)):
            if i < n_layers - 1:
                g = g * (1.0 - acts[i + 1] ** 2)
            grads[2 * i] = acts[i].T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            if i > 0:
                g = g @ self.params[2 * i].T
        return grads


def squash_log_det(z: np.ndarray, half: np.ndarray) -> np.ndarray:
    """``sum(log(half * (1 - tanh(z)^2)))`` per row, computed without cancellation."""
    # log(1 - tanh^2 z) = 2 (log 2 - z - softplus(-2z))
    t = 2.0 * (math.log(2.0) - z - np.logaddexp(0.0, -2.0 * z))
    return (t + np.log(half)).sum(axis=-1)


class GaussianPolicy:
    """Diagonal Gaussian over a pre-squash variable ``z``; the action is
    ``mid + half * tanh(z)`` so it always lies in the control box."""

    def __init__(self, mean_net: DenseNet, low, high, init_log_std: float = 0.0):
        self.mean_net = mean_net
        self.low = np.asarray(low, dtype=np.float64)
        self.high = np.asarray(high, dtype=np.float64)
        self.mid = 0.5 * (self.low + self.high)
        self.half = 0.5 * (self.high - self.low)
        self.log_std = np.full(self.low.shape[0], float(init_log_std))

    @property
    def params(self) -> list:
        return self.mean_net.params + [self.log_std]

    def squash(self, z) -> np.ndarray:
        return self.mid + self.half * np.tanh(z)

    def log_prob(self, mean, z) -> np.ndarray:
        """Log-density of the squashed action, per row."""
        std = np.exp(self.log_std)
        e = (z - mean) / std
        gauss = (-0.5 * e * e - self.log_std - 0.5 * LOG_2PI).sum(axis=-1)
        return gauss - squash_log_det(z, self.half)

    def entropy(self) -> float:
        """Entropy of the pre-squash Gaussian."""
        return float(np.sum(self.log_std + 0.5 * (LOG_2PI + 1.0)))

    def act(self, obs, rng: np.random.Generator):
        """Sample; returns ``(action, z, log_prob)``."""
        mean = self.mean_net.forward(obs)
        z = mean + np.exp(self.log_std) * rng.standard_normal(mean.shape)
        return self.squash(z), z, float(self.log_prob(mean, z))

    def act_deterministic(self, obs) -> np.ndarray:
        return self.squash(self.mean_net.forward(obs))


class Adam:
    def __init__(self, params: list, lr: float, betas=(0.9, 0.999), eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list) -> None:
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def clip_grad_norm(grads: list, max_norm: float) -> float:
    """Scale ``grads`` in place to a global L2 norm of at most ``max_norm``."""
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if max_norm > 0 and total > max_norm:
        s = max_norm / (total + 1e-12)
        for g in grads:
            g *= s
    return total


@dataclass
class ActorCritic:
    policy: GaussianPolicy
    value_net: DenseNet

    @property
    def params(self) -> list:
        return self.policy.params + self.value_net.params

    def value(self, obs) -> np.ndarray:
        return self.value_net.forward(obs)[..., 0]


def build_actor_critic(obs_dim: int, act_dim: int, hidden, low, high, rng: np.random.Generator,
                       init_log_std: float = 0.0, input_scale=None) -> ActorCritic:
    mean_net = DenseNet([obs_dim, *hidden, act_dim], rng, out_gain=0.01, input_scale=input_scale)
    value_net = DenseNet([obs_dim, *hidden, 1], rng, out_gain=1.0, input_scale=input_scale)
    return ActorCritic(GaussianPolicy(mean_net, low, high, init_log_std), value_net)
