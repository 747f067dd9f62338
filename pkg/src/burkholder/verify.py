"""Numerical certification of potential properties and martingale inequalities.

Deterministic properties are checked by exhaustive enumeration over sign
paths of predictable trees (exact expectations, depth <= 14); distributional
properties are sampled with seeded generators. Every check returns a
CheckReport carrying the worst violation and a witness that replays to the
same value. A sampled or searched check certifies violations only: a sup
below tolerance does not prove none exists.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .potential import Potential
from .statistics import ScalarVecScalar

MAX_DEPTH = 14


@dataclass
class CheckReport:
    name: str
    checks: int
    max_violation: float
    tol: float
    passed: bool
    witness: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    seed: object = None

    def line(self):
        status = "pass" if self.passed else "FAIL"
        return (f"{status} {self.name}: checks={self.checks} "
                f"max_violation={self.max_violation:.3e} tol={self.tol:.1e}")


@dataclass(frozen=True)
class TwoPointDist:
    """Support {a, -b} with weights (b, a) / (a + b); an exact mean-zero law.

    Two-point laws are the extreme points of the mean-zero distributions on
    [-L, L], so sweeping them covers the full restricted-concavity property
    for potentials convex in the increment.
    """
    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise DomainError("a > 0 and b > 0")

    def support(self):
        s = self.a + self.b
        return [(self.a, self.b / s), (-self.b, self.a / s)]

    def mean(self):
        # common-numerator form: exactly zero in floating point
        return (self.a * self.b - self.b * self.a) / (self.a + self.b)


# --- potential properties ----------------------------------------------------

def _eval_t(P, stat, t):
    return P.eval(stat, t=t) if P.time_varying else P.eval(stat)


def check_p1(P, tol=1e-8):
    """U at the zero statistic must be <= 0 (up to tol)."""
    u0 = P.eval(P.zero(), t=0) if P.time_varying else P.eval(P.zero())
    return CheckReport(name="p1_start", checks=1, max_violation=float(u0),
                       tol=tol, passed=u0 <= tol, witness={"value": float(u0)})


def check_p2(P, trials=1000, tol=1e-8, rng=None, bound_fn=None):
    """V <= U on statistics reachable by statistic-map sums."""
    rng = rng if rng is not None else np.random.default_rng(0)
    bound_fn = bound_fn if bound_fn is not None else P.bound
    horizon = getattr(P, "n", None)
    worst, witness = -math.inf, {}
    for i in range(int(trials)):
        stat = P.sample_statistic(rng)
        u = P.eval(stat, t=horizon) if P.time_varying else P.eval(stat)
        v = bound_fn(stat)
        viol = v - u
        if viol > worst:
            worst, witness = viol, {"trial": i, "stat": stat, "U": u, "V": v}
    return CheckReport(name="p2_dominates_bound", checks=int(trials),
                       max_violation=float(worst), tol=tol,
                       passed=worst <= tol, witness=witness)


def _draw_distribution(mode, L, rng):
    if mode == "rademacher":
        return [(+L, 0.5), (-L, 0.5)], {"mode": mode}
    if mode == "two_point":
        d = TwoPointDist(float(rng.uniform(1e-3, L)), float(rng.uniform(1e-3, L)))
        return d.support(), {"mode": mode, "a": d.a, "b": d.b}
    raise DomainError(f"unknown p3 mode {mode!r}")


def _p3_violation(P, tau, x, y_hat, support, t):
    before = _eval_t(P, tau, t - 1 if P.time_varying else None)
    after = 0.0
    for alpha, p in support:
        after += p * _eval_t(P, tau + P.stat_map(x, y_hat, alpha),
                             t if P.time_varying else None)
    return after - before


def check_p3(P, mode="two_point", trials=10000, tol=1e-8, rng=None):
    """Restricted concavity: E U(tau + T(z, alpha)) <= U(tau) for mean-zero alpha.

    two_point sweeps the extreme mean-zero laws on [-L, L]; rademacher is the
    sign law alone, sufficient when the potential is convex in the increment.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    horizon = getattr(P, "n", 8)
    worst, witness = -math.inf, {}
    for i in range(int(trials)):
        t = int(rng.integers(1, horizon + 1)) if P.time_varying else 1
        max_rounds = min(t - 1, 6) if P.time_varying else 6
        tau = P.sample_statistic(rng, max_rounds=max_rounds)
        x = P.sample_instance(rng)
        y_hat = float(rng.uniform(-P.B, P.B))
        support, dist_info = _draw_distribution(mode, P.L, rng)
        viol = _p3_violation(P, tau, x, y_hat, support, t)
        if viol > worst:
            worst = viol
            witness = {"trial": i, "tau": tau, "x": x, "y_hat": y_hat,
                       "support": support, "t": t, **dist_info}
    return CheckReport(name=f"p3_supermartingale_{mode}", checks=int(trials),
                       max_violation=float(worst), tol=tol,
                       passed=worst <= tol, witness=witness)


def replay_p3(P, witness):
    """Recompute the violation stored in a p3 witness."""
    return _p3_violation(P, witness["tau"], witness["x"], witness["y_hat"],
                         witness["support"], witness["t"])


# --- predictable trees -------------------------------------------------------

class PredictableTree:
    """Depth-n binary tree of instance values.

    levels[t-1] has one value per sign prefix of length t-1 (2^(t-1) nodes),
    so the value revealed at round t depends only on the first t-1 signs.
    Prefix index convention: bit s-1 of the index is (eps_s + 1) / 2.
    """

    def __init__(self, levels):
        self.levels = [np.asarray(lv, dtype=float) for lv in levels]
        for t, lv in enumerate(self.levels, start=1):
            if lv.shape[0] != 2 ** (t - 1):
                raise DomainError(
                    f"level {t} has {lv.shape[0]} nodes, expected {2 ** (t - 1)}")

    @property
    def depth(self):
        return len(self.levels)

    def node(self, t, prefix_index):
        return self.levels[t - 1][prefix_index]

    @classmethod
    def constant(cls, values):
        """A fixed sequence: every node at level t holds values[t-1]."""
        return cls([np.broadcast_to(np.asarray(v, dtype=float),
                                    (2 ** t,) + np.shape(v)).copy()
                    for t, v in enumerate(values)])

    @classmethod
    def random(cls, depth, sampler, rng):
        if depth > MAX_DEPTH:
            raise DomainError(f"depth {depth} exceeds the exhaustive limit {MAX_DEPTH}")
        return cls([np.stack([np.asarray(sampler(rng), dtype=float)
                              for _ in range(2 ** (t - 1))])
                    for t in range(1, depth + 1)])

    def perturbed(self, level, index, value):
        levels = [lv.copy() for lv in self.levels]
        levels[level - 1][index] = value
        return PredictableTree(levels)


def sign_paths(n):
    """(2^n, n) array of sign paths; bit s-1 of the row index gives eps_s."""
    if n > MAX_DEPTH:
        raise DomainError(f"n = {n} exceeds the exhaustive limit {MAX_DEPTH}")
    p = np.arange(2 ** n)[:, None]
    bits = (p >> np.arange(n)[None, :]) & 1
    return 2.0 * bits - 1.0


def prefix_codes(n):
    """(2^n, n) int array: node index at each level along every path."""
    p = np.arange(2 ** n)[:, None]
    masks = (1 << np.arange(n)[None, :]) - 1
    return p & masks


def gather_tree(tree, codes):
    """Per-path node values, shape (paths, depth, *value_shape)."""
    return np.stack([tree.levels[t][codes[:, t]] for t in range(tree.depth)], axis=1)


def tree_expectation(P, tree, value_fn, L=None, y_hat=0.0):
    """Exact E over sign paths of value_fn(sum_t T(x_t(eps), y_hat, eps_t L))."""
    L = P.L if L is None else L
    n = tree.depth
    if n > MAX_DEPTH:
        raise DomainError(f"depth {n} exceeds the exhaustive limit {MAX_DEPTH}")
    total = 0.0

    def walk(t, idx, tau):
        nonlocal total
        if t > n:
            total += value_fn(tau)
            return
        z = tree.node(t, idx)
        for sign, bit in ((+1.0, 1), (-1.0, 0)):
            walk(t + 1, idx + bit * (1 << (t - 1)),
                 tau + P.stat_map(z, y_hat, sign * L))

    walk(1, 0, P.zero())
    return total / 2 ** n


def brute_force_sup_ev(P, n, rng=None, bound_fn=None, search="random",
                       k=20, ascent_steps=200, L=None):
    """Search trees for large E[V(sum T)]; approximates the game start value
    from below. Returns (best value, best tree, values per candidate).

    search: "random" tries k independent trees; "coordinate_ascent" additionally
    hill-climbs single-node perturbations from the best random start.
    """
    if n > MAX_DEPTH:
        raise DomainError(f"n = {n} exceeds the exhaustive limit {MAX_DEPTH}")
    rng = rng if rng is not None else np.random.default_rng(0)
    bound_fn = bound_fn if bound_fn is not None else P.bound
    vals = []
    best_tree, best = None, -math.inf
    for _ in range(int(k)):
        tree = PredictableTree.random(n, P.sample_instance, rng)
        v = tree_expectation(P, tree, bound_fn, L=L)
        vals.append(v)
        if v > best:
            best, best_tree = v, tree
    if search == "coordinate_ascent":
        for _ in range(int(ascent_steps)):
            level = int(rng.integers(1, n + 1))
            idx = int(rng.integers(0, 2 ** (level - 1)))
            cand = best_tree.perturbed(level, idx, P.sample_instance(rng))
            v = tree_expectation(P, cand, bound_fn, L=L)
            if v > best:
                best, best_tree = v, cand
    elif search != "random":
        raise DomainError(f"unknown search {search!r}")
    return best, best_tree, vals


class SmoothnessPair(Potential):
    """Statistic (sum delta x, sum ||x||^2) with V = ||x_slot||^2 - C * s.

    The exact-enumeration oracle for the squared-norm martingale inequality;
    for the euclidean norm and C = 1 the expectation is zero on every tree
    by orthogonality of martingale increments.
    """

    def __init__(self, d, C=1.0, L=1.0):
        self.d = int(d)
        self.C = float(C)
        self.L = float(L)

    def zero(self):
        return ScalarVecScalar.zero(self.d)

    def stat_map(self, x, y_hat, delta):
        x = np.asarray(x, dtype=float)
        return ScalarVecScalar(delta * y_hat, delta * x, float(np.dot(x, x)))

    def bound(self, stat):
        return float(np.dot(stat.x, stat.x)) - self.C * float(stat.s)

    def eval(self, stat, t=None):
        return self.bound(stat)

    def sample_instance(self, rng):
        v = rng.normal(size=self.d)
        return v / max(np.linalg.norm(v), 1.0)


# --- exhaustive martingale inequalities --------------------------------------

def _tree_sign_sums(tree, values=None):
    n = tree.depth
    eps = sign_paths(n)
    codes = prefix_codes(n)
    g = gather_tree(tree, codes) if values is None else values
    return eps, g


def check_matrix_khintchine(n=10, d1=3, d2=2, n_trees=100, rng=None, trees=None,
                            tol=1e-9):
    """E ||sum eps_t X_t||_sigma <= sqrt(2 E max(||sum XX^T||, ||sum X^T X||) log(d1+d2)).

    Exact over all 2^n sign paths for each tree; node spectral norms are
    held at <= 1 by the random generator. Reports the worst ratio.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if trees is None:
        def sampler(r):
            x = r.normal(size=(d1, d2))
            s = np.linalg.svd(x, compute_uv=False)[0]
            return x / max(s, 1.0)
        trees = [PredictableTree.random(n, sampler, rng) for _ in range(n_trees)]
    worst_ratio, worst_idx = -math.inf, -1
    ratios = []
    for i, tree in enumerate(trees):
        eps, g = _tree_sign_sums(tree)
        s = np.einsum("pt,ptij->pij", eps, g)
        lhs = float(np.mean(np.linalg.svd(s, compute_uv=False)[:, 0]))
        row = np.einsum("ptij,ptkj->pik", g, g)
        col = np.einsum("ptij,ptik->pjk", g, g)
        row_n = np.linalg.eigvalsh(row)[:, -1]
        col_n = np.linalg.eigvalsh(col)[:, -1]
        rhs = math.sqrt(2.0 * float(np.mean(np.maximum(row_n, col_n)))
                        * math.log(g.shape[2] + g.shape[3]))
        ratio = lhs / rhs if rhs > 0 else 0.0
        ratios.append(ratio)
        if ratio > worst_ratio:
            worst_ratio, worst_idx = ratio, i
    viol = worst_ratio - 1.0
    return CheckReport(name="matrix_khintchine", checks=len(trees),
                       max_violation=float(viol), tol=tol,
                       passed=viol <= tol,
                       witness={"tree_index": worst_idx, "ratio": worst_ratio},
                       extras={"ratios": ratios})


def check_mgf_bound(n, d=4, beta=1.0, n_trees=50, rng=None, tol=1e-9):
    """E exp(||sum eps_t x_t||^2 / (2 beta n)) <= sqrt(n), exact per tree.

    Asserted only for n >= 4; for smaller n the report carries the observed
    ratios without a pass verdict on them (the bound is then informational:
    a single unit vector at n = 1 already gives e^{1/(2 beta)} > 1).
    """
    rng = rng if rng is not None else np.random.default_rng(0)

    def sampler(r):
        v = r.normal(size=d)
        return v / max(np.linalg.norm(v), 1.0)

    worst_ratio, worst_idx = -math.inf, -1
    ratios = []
    for i in range(int(n_trees)):
        tree = PredictableTree.random(n, sampler, rng)
        eps, g = _tree_sign_sums(tree)
        s = np.einsum("pt,ptj->pj", eps, g)
        val = float(np.mean(np.exp(np.sum(s * s, axis=1) / (2.0 * beta * n))))
        ratio = val / math.sqrt(n)
        ratios.append(ratio)
        if ratio > worst_ratio:
            worst_ratio, worst_idx = ratio, i
    viol = worst_ratio - 1.0
    asserted = n >= 4
    return CheckReport(name=f"mgf_bound_n{n}", checks=int(n_trees),
                       max_violation=float(viol), tol=tol,
                       passed=(viol <= tol) if asserted else True,
                       witness={"tree_index": worst_idx, "ratio": worst_ratio},
                       extras={"asserted": asserted, "ratios": ratios})


def check_supermartingale(P, tree, tol=1e-8, L=None):
    """At every internal node: the exact mean of U over the two children is
    at most U at the node. Walks the full tree (exact, no sampling)."""
    L = P.L if L is None else L
    n = tree.depth
    worst, witness = [-math.inf], [{}]
    checks = [0]

    def walk(t, idx, tau):
        if t > n:
            return
        z = tree.node(t, idx)
        before = _eval_t(P, tau, t - 1 if P.time_varying else None)
        children = {}
        for sign, bit in ((+1.0, 1), (-1.0, 0)):
            children[sign] = tau + P.stat_map(z, 0.0, sign * L)
        after = 0.5 * sum(_eval_t(P, c, t if P.time_varying else None)
                          for c in children.values())
        checks[0] += 1
        viol = after - before
        if viol > worst[0]:
            worst[0] = viol
            witness[0] = {"t": t, "prefix_index": idx, "violation": viol}
        for sign, bit in ((+1.0, 1), (-1.0, 0)):
            walk(t + 1, idx + bit * (1 << (t - 1)), children[sign])

    walk(1, 0, P.zero())
    return CheckReport(name="supermartingale_tree", checks=checks[0],
                       max_violation=float(worst[0]), tol=tol,
                       passed=worst[0] <= tol, witness=witness[0])


# --- per-round descent and randomized value dominance ------------------------

def round_descent(P, zeta_prev, x, y_hat, loss, B, t=None, grid=101):
    """max over a y grid (plus endpoints) of U(zeta + T(x, y_hat, dloss)) - U(zeta)."""
    ys = np.unique(np.concatenate([np.linspace(-B, B, int(grid)), [-B, B]]))
    table = P.round_values(zeta_prev, x, np.array([y_hat]), ys, loss, t=t)
    before = _eval_t(P, zeta_prev, t - 1 if P.time_varying else None)
    return float(np.max(table)) - before


# --- lower-bound construction -------------------------------------------------

def check_necessity(P, tree, learner=None, tol=1e-8, clairvoyant=False):
    """Exact lower-bound comparison for the matrix family on a sign adversary.

    The adversary draws y_t = eps_t and reveals x_t from the tree; over all
    2^n paths we compare E[sup-regret - A] against E[V_lin(sum T(x_t, 0, eps_t))]
    where V_lin(a, u, s) = a + r ||u||_sigma - A(s) is the linear-class bound
    function. Requires r * max ||X||_sigma <= 1 so the absolute loss of any
    comparator is exactly linear in its prediction. Also certifies
    E[V_lin] <= 0, the achievability side.

    clairvoyant=True replaces the learner's prediction with the label itself,
    violating predictability; the lower bound must then fail, which makes it
    the negative control for this check.
    """
    n = tree.depth
    if n > MAX_DEPTH:
        raise DomainError(f"depth {n} exceeds the exhaustive limit {MAX_DEPTH}")
    max_node = max(float(np.linalg.svd(lv, compute_uv=False).max())
                   for lv in tree.levels)
    if P.r * max_node > 1.0 + 1e-9:
        raise DomainError("necessity adversary needs r * max ||X||_sigma <= 1")
    if learner is None:
        learner = lambda pot, zeta, x, t: pot.predict(zeta, x)
    from .losses import make_loss
    loss = make_loss("absolute", B=max(P.B, 2.0))

    paths = []

    def walk(t, idx, zeta, eps_sum, cum_loss):
        if t > n:
            m_norm = float(np.linalg.eigvalsh(zeta.M)[-1]) if zeta.M.size else 0.0
            a_bound = 0.5 * P.eta * P.L ** 2 * P.r * max(m_norm, 0.0) + P.c / P.eta
            u_norm = float(np.linalg.svd(eps_sum, compute_uv=False).max())
            comp = n - P.r * u_norm
            lhs = cum_loss - comp - a_bound
            rhs = P.r * u_norm - a_bound
            paths.append((lhs, rhs))
            return
        x = tree.node(t, idx)
        y_base = float(learner(P, zeta, x, t))
        for eps, bit in ((+1.0, 1), (-1.0, 0)):
            y_hat = eps if clairvoyant else y_base
            delta = float(loss.subgradient(y_hat, eps))
            walk(t + 1, idx + bit * (1 << (t - 1)),
                 zeta + P.stat_map(x, y_hat, delta),
                 eps_sum + eps * x,
                 cum_loss + float(loss.value(y_hat, eps)))

    walk(1, 0, P.zero(), np.zeros_like(tree.levels[0][0]), 0.0)
    arr = np.array(paths)
    e_lhs, e_rhs = float(arr[:, 0].mean()), float(arr[:, 1].mean())
    gap = e_lhs - e_rhs
    # lower bound: E[sup-regret - A] >= E[V_lin]; achievability: E[V_lin] <= 0
    viol = max(e_rhs - e_lhs, e_rhs)
    return CheckReport(name="necessity_lower_bound", checks=arr.shape[0],
                       max_violation=float(viol),
                       tol=tol, passed=viol <= tol,
                       witness={"E_gap": gap, "E_lhs": e_lhs, "E_rhs": e_rhs},
                       extras={"max_path_excess": float(arr[:, 0].max()),
                               "E_regret_gap": gap})
