"""Control-gain construction and conversion.

A depth-N control is described interchangeably by the closed-loop weights
a_1..a_N (summing to 1) or the feedback strengths eps_1..eps_{N-1}; the two
are linked by the bijection

    a_1 = 1 - eps_1,   a_j = eps_{j-1} - eps_j,   a_N = eps_{N-1},

equivalently eps_j = a_{j+1} + ... + a_N.  The optimal weights come from
the extremal Fejer kernel: a_j = (2(N-j)+1)/N^2, giving eps_j = ((N-j)/N)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

__all__ = [
    "ControlGains",
    "HorizonPlan",
    "optimal_gains",
    "eps_to_a",
    "a_to_eps",
    "min_horizon",
    "a_to_gamma",
]

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ControlGains:
    """Closed-loop weights ``a`` and feedback strengths ``eps``.

    Both representations are stored; construction validates that they are
    consistent under the bijection and that the weights are normalized.
    Inadmissible strengths (some |eps_j| >= 1) are flagged, not rejected:
    stability analysis of such gains is still meaningful.
    """

    a: tuple[float, ...]
    eps: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        eps = tuple(float(v) for v in self.eps)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "eps", eps)
        if len(a) < 1:
            raise ValueError("need at least one closed-loop weight")
        if len(eps) != len(a) - 1:
            raise ValueError(f"expected {len(a) - 1} strengths for N={len(a)}, got {len(eps)}")
        total = math.fsum(a)
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {total!r}")
        recon = _a_from_eps(eps)
        worst = max(abs(x - y) for x, y in zip(a, recon))
        if worst > _SUM_TOL:
            raise ValueError(f"weights and strengths disagree (max deviation {worst:.3e})")

    @property
    def N(self) -> int:
        return len(self.a)

    @property
    def admissible(self) -> bool:
        return all(abs(e) < 1.0 for e in self.eps)

    @property
    def prehistory_depth(self) -> int:
        """Number of past states consumed beyond the current one: 2(N-1)."""
        return 2 * (self.N - 1)


@dataclass(frozen=True)
class HorizonPlan:
    """Minimal-depth plan for a target critical multiplier magnitude."""

    mu_star_abs: float
    N0: int
    N_star: int
    control_required: bool = True


def _a_from_eps(eps: Sequence[float]) -> tuple[float, ...]:
    n = len(eps) + 1
    if n == 1:
        return (1.0,)
    a = [1.0 - eps[0]]
    for j in range(1, n - 1):
        a.append(eps[j - 1] - eps[j])
    a.append(eps[-1])
    return tuple(a)


def optimal_gains(N: int) -> ControlGains:
    """Optimal weights and strengths for prehistory depth 2(N-1).

    Every value is an exact integer ratio rounded once to float:
    a_j = (2(N-j)+1)/N^2 and eps_j = (N-j)^2/N^2.
    """
    if N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    den = N * N
    a = tuple((2 * (N - j) + 1) / den for j in range(1, N + 1))
    eps = tuple((N - j) * (N - j) / den for j in range(1, N))
    return ControlGains(a=a, eps=eps)


def eps_to_a(eps: Sequence[float]) -> ControlGains:
    """Build gains from feedback strengths via the bijection."""
    eps = tuple(float(e) for e in eps)
    return ControlGains(a=_a_from_eps(eps), eps=eps)


def a_to_eps(a: Sequence[float]) -> ControlGains:
    """Build gains from normalized weights; eps_j is the tail sum of a.

    Rejects inputs whose sum strays from 1 by more than 1e-9.
    """
    a = tuple(float(v) for v in a)
    total = math.fsum(a)
    if abs(total - 1.0) > _SUM_TOL:
        raise ValueError(f"weights must sum to 1 within {_SUM_TOL:g}, got {total!r}")
    eps = []
    acc = 0.0
    for v in reversed(a[1:]):
        acc = acc + v
        eps.append(acc)
    eps.reverse()
    return ControlGains(a=a, eps=tuple(eps))


def min_horizon(mu_star_abs: float) -> HorizonPlan:
    """Smallest N0 with sqrt(mu_star_abs) < N0, and depth N* = 2(N0 - 1).

    For target magnitudes at or below 1 no control is needed; the returned
    plan has N0 = 1, N* = 0 and ``control_required`` False.  The inequality
    is strict, so a perfect square lands on the next integer up.
    """
    mu_star_abs = float(mu_star_abs)
    if not math.isfinite(mu_star_abs) or mu_star_abs <= 0:
        raise ValueError(f"target multiplier magnitude must be positive, got {mu_star_abs!r}")
    if mu_star_abs <= 1.0:
        return HorizonPlan(mu_star_abs=mu_star_abs, N0=1, N_star=0, control_required=False)
    n0 = int(math.floor(math.sqrt(mu_star_abs))) + 1
    # guard against sqrt rounding near perfect squares
    while n0 > 1 and (n0 - 1) * (n0 - 1) > mu_star_abs:
        n0 -= 1
    while n0 * n0 <= mu_star_abs:
        n0 += 1
    return HorizonPlan(mu_star_abs=mu_star_abs, N0=n0, N_star=2 * (n0 - 1))


def a_to_gamma(a: Sequence[float]) -> tuple[float, ...]:
    """Alternating tail sums gamma_s = sum_{j>=s} (-1)^{s+j} a_j.

    Computed by the backward recurrence gamma_s = a_s - gamma_{s+1}.  The
    identity gamma_1 + 2*(gamma_2 + ... + gamma_N) = sum(a) holds, and
    gamma_1 equals the alternating sum a_1 - a_2 + a_3 - ...
    """
    a = [float(v) for v in a]
    if not a:
        raise ValueError("need at least one weight")
    g = [0.0] * len(a)
    g[-1] = a[-1]
    for s in range(len(a) - 2, -1, -1):
        g[s] = a[s] - g[s + 1]
    return tuple(g)
