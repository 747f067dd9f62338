"""Parameter-free linear prediction over a norm ball of every radius.

The statistic is (sum delta_t*y_hat_t, sum delta_t*x_t); the potential is a
horizon-indexed exponential of the squared norm whose time index trades the
per-round smoothness cost against a harmonic tail. At the horizon it matches
the comparator-uniform bound evaluator exactly.
"""

import math

import numpy as np

from ..errors import ConfigError, DomainError, NumericError
from ..potential import Potential
from ..statistics import ScalarVec

MAX_EXPONENT = 700.0


def harmonic_prefix(n):
    """H_0..H_n with H_t = sum_{s<=t} 1/s."""
    out = np.zeros(n + 1)
    out[1:] = np.cumsum(1.0 / np.arange(1, n + 1))
    return out


class ParamFreePotential(Potential):
    """Norm: l2 by default, or an lp norm with p >= 2 (smoothness beta = p - 1).

    gamma defaults to c * exp(-H_n / 2), the largest value for which the
    potential starts at exactly zero; larger gamma violates the start
    condition and is rejected when strict.
    """

    convex_in_delta = True
    linearizable = True
    time_varying = True

    def __init__(self, n, d, p=None, beta=None, gamma=None, c=1.0, B=1.0, strict=True):
        if n < 1:
            raise ConfigError("n >= 1")
        if p is not None and p < 2:
            raise ConfigError("p >= 2")
        self.n = int(n)
        self.d = int(d)
        self.p = p
        self.beta = float(beta) if beta is not None else (1.0 if p is None else p - 1.0)
        if self.beta <= 0:
            raise ConfigError("beta > 0")
        self.c = float(c)
        if self.c <= 0:
            raise ConfigError("c > 0")
        self._H = harmonic_prefix(self.n)
        self.gamma = float(gamma) if gamma is not None else self.c * math.exp(-0.5 * self._H[self.n])
        if self.gamma <= 0:
            raise ConfigError("gamma > 0")
        if strict and self.gamma * math.exp(0.5 * self._H[self.n]) > self.c * (1 + 1e-9):
            raise ConfigError("gamma * exp(H_n / 2) <= c")
        self.B = float(B)
        self.L = 1.0

    def norm(self, x):
        if self.p is None:
            return float(np.linalg.norm(x))
        return float(np.sum(np.abs(x) ** self.p) ** (1.0 / self.p))

    def dual_norm(self, w):
        if self.p is None:
            return float(np.linalg.norm(w))
        q = self.p / (self.p - 1.0)
        return float(np.sum(np.abs(w) ** q) ** (1.0 / q))

    def tail(self, t):
        # (1/2) * sum_{s=t+1}^{n} 1/s
        return 0.5 * (self._H[self.n] - self._H[t])

    def zero(self):
        return ScalarVec.zero(self.d)

    def anchor(self):
        return np.zeros(self.d), 0.0

    def stat_map(self, x, y_hat, delta):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise DomainError(f"instance shape {x.shape} != ({self.d},)")
        return ScalarVec(delta * y_hat, delta * x)

    def _exp_term(self, sq_norm, t):
        exponent = sq_norm / (2.0 * self.beta * t) + self.tail(t)
        if exponent > MAX_EXPONENT:
            raise NumericError("potential exponent overflow", {"exponent": exponent})
        return self.gamma * math.exp(exponent)

    def eval(self, stat, t=None):
        if t is None:
            raise DomainError("time-varying potential needs the round index t")
        t = int(t)
        if not 0 <= t <= self.n:
            raise DomainError(f"t = {t} outside 0..{self.n}")
        if t == 0:
            return stat.b + self.gamma * math.exp(self.tail(0)) - self.c
        return stat.b + self._exp_term(self.norm(stat.x) ** 2, t) - self.c

    def bound(self, stat):
        """V(b, x) = b + gamma * exp(||x||^2 / (2 beta n)) - c; equals U at t = n."""
        return self.eval(stat, t=self.n)

    def residual(self, zeta, x, delta, t=None):
        if t is None:
            raise DomainError("time-varying residual needs the round index t")
        x = np.asarray(x, dtype=float)
        moved = zeta.x + delta * x
        return zeta.b + self._exp_term(self.norm(moved) ** 2, int(t)) - self.c

    def predict(self, zeta, t, x):
        """clamp(-(gamma/2) [E(+1) - E(-1)], [-B, B]) with E(s) the moved exponential."""
        x = np.asarray(x, dtype=float)
        if self.norm(x) > 1.0 + 1e-9:
            raise DomainError("instance norm must be <= 1")
        e_plus = self._exp_term(self.norm(zeta.x + x) ** 2, t)
        e_minus = self._exp_term(self.norm(zeta.x - x) ** 2, t)
        raw = -0.5 * (e_plus - e_minus)
        return min(self.B, max(-self.B, raw))

    def comparator_bound(self, w):
        """A(w) = ||w||_* sqrt(2 beta n log(sqrt(beta n) ||w||_* / gamma + 1)) + c."""
        wn = self.dual_norm(np.asarray(w, dtype=float))
        bn = self.beta * self.n
        return wn * math.sqrt(2.0 * bn * math.log(math.sqrt(bn) * wn / self.gamma + 1.0)) + self.c

    def regret_bound(self, stat, comparator=None):
        """Comparator-dependent bound; the statistic does not enter."""
        if comparator is None:
            raise DomainError("regret bound needs a comparator")
        return self.comparator_bound(comparator)

    def sample_instance(self, rng):
        v = rng.normal(size=self.d)
        nv = self.norm(v)
        if nv == 0:
            return v
        return v / nv * rng.uniform(0.0, 1.0)
