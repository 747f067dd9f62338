"""Gradient-norm adaptive potentials built from the square-root function.

usq is the exact zero-debt certificate for y >= ||x||: it is nonpositive
there, upper-bounds ||x|| - 2y everywhere, and satisfies the one-step
restricted concavity that turns the pair (sum delta*x, sum ||x||^2) into a
supermartingale under the adaptive y-slot update.
"""

import numpy as np

from ..errors import ConfigError, DomainError
from ..potential import Potential
from ..statistics import ScalarVecScalar

VARIANTS = ("l2", "linf")


def usq(x, y):
    """-sqrt(2 y^2 - ||x||^2) where y >= ||x||, and ||x|| - 2 y elsewhere.

    x may be a vector (l2 norm) or a scalar. Continuous across the seam
    (both branches give -||x|| at y = ||x||).
    """
    nx = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float))))
    y = float(y)
    if y >= nx:
        return -np.sqrt(2.0 * y * y - nx * nx)
    return nx - 2.0 * y


def _usq_coordwise(x, ys):
    x = np.asarray(x, dtype=float)
    ys = np.asarray(ys, dtype=float)
    out = np.where(ys >= np.abs(x),
                   -np.sqrt(np.maximum(2.0 * ys * ys - x * x, 0.0)),
                   np.abs(x) - 2.0 * ys)
    return float(np.sum(out))


class AdaGradPotential(Potential):
    """Variants: "l2" (whole-norm accumulator) or "linf" (per-coordinate sums).

    The delta-convexity of the residual, which the closed-form prediction
    relies on, is verified numerically on sampled inputs at construction.
    """

    convex_in_delta = True
    linearizable = True

    def __init__(self, d, variant="l2", L=1.0, B=1.0, check_convexity=True):
        if variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        if d < 1:
            raise ConfigError("d >= 1")
        if L <= 0:
            raise ConfigError("L > 0")
        self.d = int(d)
        self.variant = variant
        self.L = float(L)
        self.B = float(B)
        if check_convexity:
            self._verify_delta_convexity()

    def zero(self):
        return ScalarVecScalar.zero(self.d, coordinatewise=self.variant == "linf")

    def anchor(self):
        return np.zeros(self.d), 0.0

    def stat_map(self, x, y_hat, delta):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise DomainError(f"instance shape {x.shape} != ({self.d},)")
        if self.variant == "l2":
            s = float(np.dot(x, x))
        else:
            s = x * x
        return ScalarVecScalar(delta * y_hat, delta * x, s)

    def _certificate(self, xsum, s):
        if self.variant == "l2":
            return usq(xsum, self.L * np.sqrt(max(float(s), 0.0)))
        return _usq_coordwise(xsum, self.L * np.sqrt(np.maximum(s, 0.0)))

    def eval(self, stat, t=None):
        return stat.b + self._certificate(stat.x, stat.s)

    def bound(self, stat):
        """V = b + ||x||_2 - 2 L sqrt(s), coordinatewise summed for linf."""
        if self.variant == "l2":
            return stat.b + float(np.linalg.norm(stat.x)) - 2.0 * self.L * np.sqrt(max(float(stat.s), 0.0))
        return stat.b + float(np.sum(np.abs(stat.x))) - 2.0 * self.L * float(np.sum(np.sqrt(np.maximum(stat.s, 0.0))))

    def residual(self, zeta, x, delta, t=None):
        x = np.asarray(x, dtype=float)
        moved = zeta.x + delta * x
        if self.variant == "l2":
            s_new = float(zeta.s) + float(np.dot(x, x))
        else:
            s_new = zeta.s + x * x
        return zeta.b + self._certificate(moved, s_new)

    def predict(self, zeta, x):
        f_plus = self.residual(zeta, x, +self.L)
        f_minus = self.residual(zeta, x, -self.L)
        raw = -(f_plus - f_minus) / (2.0 * self.L)
        return min(self.B, max(-self.B, raw))

    def regret_bound(self, stat, comparator=None):
        """2 L sqrt(s) against unit-ball comparators (euclidean ball for l2,
        box for linf), plus the excess-norm charge when the comparator leaves
        the unit ball. Valid along trajectories run with a descent strategy,
        where the potential stays nonpositive."""
        if self.variant == "l2":
            base = 2.0 * self.L * float(np.sqrt(max(float(stat.s), 0.0)))
            xnorm = float(np.linalg.norm(stat.x))
        else:
            base = 2.0 * self.L * float(np.sum(np.sqrt(np.maximum(stat.s, 0.0))))
            xnorm = float(np.sum(np.abs(stat.x)))
        excess = 0.0
        if comparator is not None:
            w = np.asarray(comparator, dtype=float)
            wn = float(np.linalg.norm(w)) if self.variant == "l2" else float(np.max(np.abs(w)))
            excess = max(wn - 1.0, 0.0) * xnorm
        return base + excess

    def sample_instance(self, rng):
        v = rng.normal(size=self.d)
        nv = np.linalg.norm(v)
        return v / max(nv, 1.0)

    def increment_bound(self):
        # usq is 1-Lipschitz in x and 2-Lipschitz in its y slot; a round moves
        # x by at most L and the y slot by at most L for unit-norm instances
        step = self.L * self.B + 3.0 * self.L
        return step ** 2

    def _verify_delta_convexity(self, trials=200, tol=1e-9):
        rng = np.random.default_rng(20240901)
        for _ in range(trials):
            zeta = self.sample_statistic(rng, max_rounds=4)
            x = self.sample_instance(rng)
            d0, d1 = np.sort(rng.uniform(-self.L, self.L, size=2))
            mid = 0.5 * (d0 + d1)
            lhs = self.residual(zeta, x, mid)
            rhs = 0.5 * (self.residual(zeta, x, d0) + self.residual(zeta, x, d1))
            if lhs > rhs + tol:
                raise ConfigError(
                    f"residual is not convex in delta (gap {lhs - rhs:.3e})")
