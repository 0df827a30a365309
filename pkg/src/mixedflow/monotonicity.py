"""Exhaustive and sampled certificates of game monotonicity.

Every check reports the most negative margin seen and the pair that
produced it. A ``certified-sampled`` verdict is evidence, not a proof.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .game import TensorGame, all_gradients
from .meanfield import MeanFieldCost

DEFAULT_CAP = 10**6
DEFAULT_SAMPLES = 10**4
DEFAULT_TOL = 1e-9
_CHUNK = 1 << 16


@dataclass(frozen=True)
class MonotonicityReport:
    verdict: str
    worst_margin: float
    witness: Any
    pairs_tested: int
    seed: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.verdict != "violated"

    def summary(self) -> str:
        text = (f"{self.verdict}: worst margin {self.worst_margin:.6g} over "
                f"{self.pairs_tested} pairs (tol {self.tol:g}, seed {self.seed})")
        if self.verdict == "certified-sampled":
            text += " [sampled: evidence, not proof]"
        return text


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _pure_margins(game: TensorGame, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Margins for rows of joint pure actions ``s`` and ``t`` (shape ``(k, N)``)."""
    shape = game.action_counts
    flat = game.flat_costs()
    si = np.ravel_multi_index(s.T, shape)
    ti = np.ravel_multi_index(t.T, shape)
    out = np.zeros(s.shape[0])
    for j in range(game.num_players):
        sj_t = t.copy()
        sj_t[:, j] = s[:, j]
        tj_s = s.copy()
        tj_s[:, j] = t[:, j]
        out += flat[j, si] + flat[j, ti]
        out -= flat[j, np.ravel_multi_index(sj_t.T, shape)]
        out -= flat[j, np.ravel_multi_index(tj_s.T, shape)]
    return out


def pure_margin(game: TensorGame, s, t) -> float:
    """Margin of the pure-action inequality for one pair of joint actions."""
    return float(_pure_margins(game, np.atleast_2d(s), np.atleast_2d(t))[0])


def pure_monotonicity_check(game: TensorGame, cap: int = DEFAULT_CAP, tol: float = DEFAULT_TOL,
                            seed: int = 0) -> MonotonicityReport:
    """Check ``sum_j f_j(s) + f_j(t) >= sum_j f_j(s_j, t_-j) + f_j(t_j, s_-j)``.

    All pairs of joint actions are tested when there are at most ``cap`` of
    them; otherwise ``cap`` uniformly drawn pairs are.
    """
    shape = game.action_counts
    total = int(np.prod(shape))
    worst, witness = np.inf, None
    if total * total <= cap:
        verdict = "certified-exhaustive"
        joint = np.array(np.unravel_index(np.arange(total), shape)).T
        rows_per_chunk = max(1, _CHUNK // total)
        for start in range(0, total, rows_per_chunk):
            a = np.arange(start, min(total, start + rows_per_chunk))
            si = np.repeat(a, total)
            ti = np.tile(np.arange(total), a.size)
            margins = _pure_margins(game, joint[si], joint[ti])
            k = int(np.argmin(margins))
            if margins[k] < worst:
                worst = float(margins[k])
                witness = (tuple(int(v) for v in joint[si[k]]), tuple(int(v) for v in joint[ti[k]]))
        tested = total * total
    else:
        verdict = "certified-sampled"
        rng = _rng(seed)
        tested = int(cap)
        for start in range(0, tested, _CHUNK):
            n = min(_CHUNK, tested - start)
            s = np.stack([rng.integers(0, m, size=n) for m in shape], axis=1)
            t = np.stack([rng.integers(0, m, size=n) for m in shape], axis=1)
            margins = _pure_margins(game, s, t)
            k = int(np.argmin(margins))
            if margins[k] < worst:
                worst = float(margins[k])
                witness = (tuple(int(v) for v in s[k]), tuple(int(v) for v in t[k]))
    if worst < -tol:
        verdict = "violated"
    return MonotonicityReport(verdict, worst, witness, tested, seed, tol)


def variational_margin(game: TensorGame, x, y) -> float:
    """``sum_j (x_j - y_j) . (G_j(x) - G_j(y))`` for profiles given as array lists."""
    gx = all_gradients(game.costs, x)
    gy = all_gradients(game.costs, y)
    return float(sum((a - b) @ (ga - gb) for a, b, ga, gb in zip(x, y, gx, gy)))


def variational_monotonicity_check(game: TensorGame, n_samples: int = DEFAULT_SAMPLES,
                                   tol: float = DEFAULT_TOL, seed: int = 0) -> MonotonicityReport:
    """Sample profile pairs uniformly from the simplices and test the gradient inequality."""
    rng = _rng(seed)
    xs = [rng.dirichlet(np.ones(m), size=n_samples) for m in game.action_counts]
    ys = [rng.dirichlet(np.ones(m), size=n_samples) for m in game.action_counts]
    worst, witness = np.inf, None
    for k in range(n_samples):
        x = [a[k] for a in xs]
        y = [b[k] for b in ys]
        margin = variational_margin(game, x, y)
        if margin < worst:
            worst, witness = margin, (x, y)
    verdict = "violated" if worst < -tol else "certified-sampled"
    return MonotonicityReport(verdict, worst, witness, n_samples, seed, tol)


def mf_monotonicity_check(cost: MeanFieldCost, n_samples: int = DEFAULT_SAMPLES,
                          tol: float = DEFAULT_TOL, seed: int = 0) -> MonotonicityReport:
    """Sample ``(mu, nu)`` and test ``(g(mu) - g(nu)) . (mu - nu) >= -tol``."""
    rng = _rng(seed)
    mus = rng.dirichlet(np.ones(cost.m), size=n_samples)
    nus = rng.dirichlet(np.ones(cost.m), size=n_samples)
    g_mu = cost.phi + mus @ cost.kernel.T + cost.congestion(mus)
    g_nu = cost.phi + nus @ cost.kernel.T + cost.congestion(nus)
    margins = np.einsum("ij,ij->i", g_mu - g_nu, mus - nus)
    k = int(np.argmin(margins))
    worst = float(margins[k])
    verdict = "violated" if worst < -tol else "certified-sampled"
    return MonotonicityReport(verdict, worst, (mus[k], nus[k]), n_samples, seed, tol)
