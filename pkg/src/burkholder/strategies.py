"""Generic prediction strategies driven by a potential.

Three routes to a prediction whose worst-case one-round value does not
increase the potential: a closed form for linearizable families, a grid
minimax for families convex in the prediction, and a randomized grid
strategy with a multiplicative-weights inner solver whose slack is
controlled by (eps1, eps2).
"""

import math
from collections import namedtuple

import numpy as np

from .errors import DomainError, NumericError
from .potential import Potential, Round, Trajectory, accumulate

GridDistribution = namedtuple("GridDistribution", ["points", "probs"])


def _clamp(v, b):
    return min(b, max(-b, v))


def predict_linearized(P, zeta, x, B, t=None, residual=None):
    """Closed-form prediction clamp(-(F(+L) - F(-L)) / (2L), [-B, B]).

    F is the potential's residual; a different residual can be passed
    explicitly. Requires the residual to be convex in delta.
    """
    F = residual if residual is not None else (
        lambda d: P.residual(zeta, x, d, t=t))
    f_plus = F(+P.L)
    f_minus = F(-P.L)
    if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
        raise NumericError("non-finite residual evaluation",
                           {"f_plus": f_plus, "f_minus": f_minus})
    return _clamp(-(f_plus - f_minus) / (2.0 * P.L), B)


def _y_grid(B, size):
    g = np.linspace(-B, B, int(size))
    return np.unique(np.concatenate([g, [-B, B]]))


def predict_convex(P, zeta, x, B, loss, t=None, tol=1e-4,
                   pred_grid=129, y_grid=129, max_stages=60):
    """Grid minimax: leftmost minimizer over y_hat of the sup over y.

    The outer search runs on a uniform y_hat grid; when the potential
    declares convexity in the prediction the bracket around the leftmost
    grid minimizer is refined until its spacing is at most tol.
    """
    ys = _y_grid(B, y_grid)
    lo, hi = -B, B
    best = None
    for _ in range(int(max_stages)):
        pts = np.linspace(lo, hi, int(pred_grid))
        table = P.round_values(zeta, x, pts, ys, loss, t=t)
        sup = table.max(axis=1)
        i = int(np.argmin(sup))  # argmin takes the leftmost among ties
        best = float(pts[i])
        if not P.convex_in_prediction:
            return best
        spacing = pts[1] - pts[0] if pts.size > 1 else 0.0
        if spacing <= tol:
            return best
        lo = float(pts[max(i - 1, 0)])
        hi = float(pts[min(i + 1, pts.size - 1)])
    raise NumericError("prediction search did not converge",
                       {"bracket": (lo, hi), "last": best})


def predict_randomized(P, zeta, x, B, eps1, eps2, rng, loss, t=None, y_grid=129):
    """Randomized strategy on an eps1-grid with a multiplicative-weights solver.

    Builds N = ceil(2B/eps1) + 1 control points z_i = -B + eps1*i (the top
    point clipped to B), precomputes the round's value table, and runs
    ceil(H^2 log N / eps2^2) mirror-descent iterations at step
    sqrt(2 log N / iters) / H, H being the recentered value bound. Returns
    (distribution over the control points, sampled prediction).
    """
    if eps1 <= 0 or eps2 <= 0:
        raise DomainError("eps1 and eps2 must be positive")
    n_pts = math.ceil(2.0 * B / eps1) + 1
    pts = np.minimum(-B + eps1 * np.arange(n_pts), B)
    ys = _y_grid(B, y_grid)
    table = P.round_values(zeta, x, pts, ys, loss, t=t)
    if not np.all(np.isfinite(table)):
        raise NumericError("non-finite round value table",
                           {"max": np.max(table), "min": np.min(table)})
    mid = 0.5 * (table.max() + table.min())
    half_range = 0.5 * (table.max() - table.min())
    mu = np.full(n_pts, 1.0 / n_pts)
    if half_range <= 1e-12:
        dist = GridDistribution(pts, mu)
        return dist, float(rng.choice(pts, p=mu))
    table = table - mid  # shifting the payoff is neutral after normalization
    iters = math.ceil(half_range ** 2 * math.log(n_pts) / eps2 ** 2)
    step = math.sqrt(2.0 * math.log(n_pts) / iters) / half_range
    avg = np.zeros(n_pts)
    for _ in range(iters):
        j = int(np.argmax(mu @ table))
        mu = mu * np.exp(-step * table[:, j])
        mu /= mu.sum()
        avg += mu
    avg /= iters
    dist = GridDistribution(pts, avg)
    return dist, float(rng.choice(pts, p=avg))


def realized_game_value(P, zeta, x, dist, loss, B, t=None, y_grid=129):
    """sup_y sum_i mu_i U(zeta + T(x, z_i, dloss(z_i, y))) for a grid strategy."""
    ys = _y_grid(B, y_grid)
    table = P.round_values(zeta, x, dist.points, ys, loss, t=t)
    return float(np.max(dist.probs @ table))


STRATEGIES = ("linearized", "convex", "randomized")


def run_online(P, strategy, sequence, loss, B, rng=None, options=None):
    """Play the full protocol and record the trajectory.

    sequence is an iterable of (x, y) pairs. potential_values[t] records
    U(zeta_t) (with the round index for time-varying families), so the
    per-round descent and the final certificate can be read off directly.
    """
    if strategy not in STRATEGIES:
        raise DomainError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    opts = dict(options or {})
    if strategy == "randomized" and rng is None:
        rng = np.random.default_rng(0)
    traj = Trajectory()
    zeta = P.zero()
    traj.zetas.append(zeta)
    traj.potential_values.append(P.eval(zeta, t=0))
    for t, (x, y) in enumerate(sequence, start=1):
        if strategy == "linearized":
            y_hat = predict_linearized(P, zeta, x, B, t=t)
        elif strategy == "convex":
            y_hat = predict_convex(P, zeta, x, B, loss, t=t, **opts)
        else:
            _, y_hat = predict_randomized(
                P, zeta, x, B, opts.get("eps1", 0.1), opts.get("eps2", 0.1),
                rng, loss, t=t, y_grid=opts.get("y_grid", 129))
        delta = float(loss.subgradient(y_hat, y))
        zeta = accumulate(zeta, x, y_hat, delta, P)
        traj.rounds.append(Round(t=t, x=x, y_hat=float(y_hat), y=float(y),
                                 delta=delta, loss=float(loss.value(y_hat, y))))
        traj.zetas.append(zeta)
        traj.potential_values.append(P.eval(zeta, t=t))
    return traj


def run_randomized_expected(P, sequence, loss, B, eps1, eps2, rng, y_grid=129):
    """run_online for the randomized strategy, additionally recording the
    expected loss of each round's distribution (not just the sampled draw).

    The statistic still advances with the sampled prediction; the expected
    losses are what the approximation guarantee controls.
    """
    traj = Trajectory()
    expected = []
    zeta = P.zero()
    traj.zetas.append(zeta)
    traj.potential_values.append(P.eval(zeta, t=0))
    for t, (x, y) in enumerate(sequence, start=1):
        dist, y_hat = predict_randomized(P, zeta, x, B, eps1, eps2, rng, loss,
                                         t=t, y_grid=y_grid)
        expected.append(float(dist.probs @ np.asarray(
            loss.value(dist.points, float(y)), dtype=float)))
        delta = float(loss.subgradient(y_hat, y))
        zeta = accumulate(zeta, x, y_hat, delta, P)
        traj.rounds.append(Round(t=t, x=x, y_hat=float(y_hat), y=float(y),
                                 delta=delta, loss=float(loss.value(y_hat, y))))
        traj.zetas.append(zeta)
        traj.potential_values.append(P.eval(zeta, t=t))
    return traj, np.array(expected)
