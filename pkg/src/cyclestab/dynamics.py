"""Open- and closed-loop simulation of scalar maps with 2-cycle control.

The closed loop applies the delayed-feedback correction

    u_n = -sum_{j=1}^{N-1} eps_j * (f(x_{n-2j+2}) - f(x_{n-2j})),
    x_{n+1} = f(x_n) + u_n,

which consumes the last 2(N-1) states beyond the current one.  The update
is kept in this difference form rather than the algebraically equivalent
weighted sum so that exact synchronization x_n == x_{n-2} == ... makes
every difference, and hence the control, exactly zero in floating point:
a synchronized trajectory follows the uncontrolled map bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .gains import ControlGains

__all__ = [
    "MapModel",
    "Trajectory",
    "CycleEstimate",
    "logistic",
    "multiplier",
    "simulate_open",
    "simulate_closed",
    "detect_cycle2",
    "linearized_growth",
]


@dataclass(frozen=True)
class MapModel:
    """A parameterized scalar map with derivative and domain."""

    id: str
    h: float
    f: Callable[[float], float]
    df: Callable[[float], float]
    domain: tuple[float, float]
    analytic_cycle: Optional[tuple[float, float]] = None

    def in_domain(self, x: float) -> bool:
        return self.domain[0] <= x <= self.domain[1]


@dataclass
class Trajectory:
    """States plus the control applied at each step.

    ``controls[n]`` is the correction added while producing ``states[n+1]``;
    entries covering the seed (and the final state, which has no successor)
    are zero.  ``escaped`` marks a run that left the map domain; iteration
    stops at the first offending state, which is kept in ``states``.
    """

    states: np.ndarray
    controls: np.ndarray
    map_id: str
    h: float
    gains: Optional[ControlGains]
    seed_len: int
    escaped: bool = False

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class CycleEstimate:
    """2-cycle estimate from a trajectory tail, with quality measures."""

    eta1: float
    eta2: float
    residual: float
    multiplier: float
    converged: bool


def logistic(h: float) -> MapModel:
    """Logistic map f(x) = h*x*(1-x) on [0, 1].

    The 2-cycle (eta1, eta2) = ((1+h -/+ sqrt(h^2-2h-3))/(2h)) exists and is
    attached for h > 3; at h = 3 it degenerates to the fixed point 2/3.
    """
    h = float(h)
    if not (0.0 <= h <= 4.0):
        raise ValueError(f"logistic parameter must lie in [0, 4], got {h!r}")

    def f(x: float) -> float:
        return h * x * (1.0 - x)

    def df(x: float) -> float:
        return h * (1.0 - 2.0 * x)

    cycle = None
    disc = h * h - 2.0 * h - 3.0
    if h > 3.0 and disc > 0.0:
        root = math.sqrt(disc)
        cycle = ((1.0 + h - root) / (2.0 * h), (1.0 + h + root) / (2.0 * h))
    return MapModel(id="logistic", h=h, f=f, df=df, domain=(0.0, 1.0),
                    analytic_cycle=cycle)


_MAP_BUILDERS = {"logistic": logistic}


def _rebuild_map(map_id: str, h: float) -> MapModel:
    try:
        return _MAP_BUILDERS[map_id](h)
    except KeyError:
        raise ValueError(f"unknown map id {map_id!r}; pass the model explicitly") from None


def multiplier(model: MapModel, cycle: tuple[float, float]) -> float:
    """Cycle multiplier f'(eta1) * f'(eta2).

    For the logistic map at its analytic cycle this equals 4 + 2h - h^2.
    """
    e1, e2 = cycle
    if not (model.in_domain(e1) and model.in_domain(e2)):
        raise ValueError("cycle points must lie in the map domain")
    return model.df(e1) * model.df(e2)


def simulate_open(model: MapModel, x0: float, steps: int) -> Trajectory:
    """Plain iteration x_{n+1} = f(x_n); all controls zero."""
    x0 = float(x0)
    if not model.in_domain(x0):
        raise ValueError(f"x0={x0!r} outside domain {model.domain}")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    states = [x0]
    escaped = False
    for _ in range(steps):
        x = model.f(states[-1])
        states.append(x)
        if not model.in_domain(x):
            escaped = True
            break
    arr = np.asarray(states)
    return Trajectory(states=arr, controls=np.zeros_like(arr), map_id=model.id,
                      h=model.h, gains=None, seed_len=1, escaped=escaped)


def simulate_closed(model: MapModel, gains: ControlGains,
                    seed: Sequence[float], steps: int) -> Trajectory:
    """Closed-loop run from a prehistory of exactly 2N-1 states.

    The control is evaluated in difference form (see module docstring), so
    exactly synchronized histories produce controls that are exactly 0.0.
    A state leaving the domain flags the trajectory as escaped and stops
    the run; no clamping is applied.
    """
    n_weights = gains.N
    need = 2 * (n_weights - 1) + 1
    seed = [float(v) for v in seed]
    if len(seed) != need:
        raise ValueError(f"seed must contain exactly {need} states for N={n_weights}, "
                         f"got {len(seed)}")
    for v in seed:
        if not model.in_domain(v):
            raise ValueError(f"seed value {v!r} outside domain {model.domain}")
    if steps < 1:
        raise ValueError("steps must be at least 1")

    eps = gains.eps
    states = list(seed)
    fvals = [model.f(x) for x in states]
    controls = [0.0] * len(states)
    escaped = False
    for _ in range(steps):
        n = len(states) - 1
        u = 0.0
        for j in range(1, n_weights):
            u -= eps[j - 1] * (fvals[n - 2 * j + 2] - fvals[n - 2 * j])
        x_next = fvals[n] + u
        controls[n] = u
        states.append(x_next)
        controls.append(0.0)
        if not model.in_domain(x_next):
            escaped = True
            break
        fvals.append(model.f(x_next))
    return Trajectory(states=np.asarray(states), controls=np.asarray(controls),
                      map_id=model.id, h=model.h, gains=gains, seed_len=need,
                      escaped=escaped)


def detect_cycle2(traj: Trajectory, tail: int, tol: float,
                  model: Optional[MapModel] = None) -> CycleEstimate:
    """Estimate a 2-cycle from the last ``tail`` states.

    States are split by the parity of their global index; the run counts as
    converged when both parity classes have spread below ``tol`` and the two
    class means are separated by more than ``tol`` (a constant trajectory is
    a fixed point, not a 2-cycle).  The map is rebuilt from the trajectory
    metadata unless ``model`` is supplied.
    """
    if tail < 4:
        raise ValueError("tail must be at least 4")
    if tail > len(traj.states):
        raise ValueError(f"tail {tail} exceeds trajectory length {len(traj.states)}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if model is None:
        model = _rebuild_map(traj.map_id, traj.h)

    start = len(traj.states) - tail
    idx = np.arange(start, len(traj.states))
    vals = traj.states[start:]
    even = vals[idx % 2 == 0]
    odd = vals[idx % 2 == 1]
    spread = max(float(even.max() - even.min()), float(odd.max() - odd.min()))
    m_even, m_odd = float(even.mean()), float(odd.mean())
    eta1, eta2 = sorted((m_even, m_odd))
    converged = spread < tol and (eta2 - eta1) > tol
    residual = max(abs(model.f(eta1) - eta2), abs(model.f(eta2) - eta1))
    mult = model.df(eta1) * model.df(eta2)
    return CycleEstimate(eta1=eta1, eta2=eta2, residual=residual,
                         multiplier=mult, converged=converged)


def linearized_growth(model: MapModel, gains: ControlGains, mu: float,
                      steps: int) -> float:
    """Dominant growth per double-step of the linearized closed loop.

    Iterates the coupled increment recurrence around the cycle with the
    derivative product split as (mu, 1); only the product enters the
    spectrum, so the split is a bookkeeping convention.  The returned value
    estimates the dominant |lambda| and matches the squared maximal root
    modulus of ``char_poly`` for the same inputs.  A collapsed recurrence
    (state identically zero, e.g. mu = 0) reports growth 0; a run that
    stops being finite reports +inf.
    """
    mu = float(mu)
    if steps < 100:
        raise ValueError("steps must be at least 100")
    n = gains.N
    a = np.asarray(gains.a)
    u_hist = np.zeros(n)
    v_hist = np.zeros(n)
    u_hist[0] = 1.0

    logs = []
    for _ in range(steps):
        v_new = mu * float(a @ u_hist)
        v_hist = np.roll(v_hist, 1)
        v_hist[0] = v_new
        u_new = float(a @ v_hist)
        u_hist = np.roll(u_hist, 1)
        u_hist[0] = u_new
        norm = math.hypot(float(np.linalg.norm(u_hist)), float(np.linalg.norm(v_hist)))
        if norm == 0.0:
            return 0.0
        if not math.isfinite(norm):
            return math.inf
        logs.append(math.log(norm))
        u_hist /= norm
        v_hist /= norm
    window = logs[steps // 2:]
    return math.exp(math.fsum(window) / len(window))
