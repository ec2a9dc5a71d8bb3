"""Critical-multiplier analysis for delayed-feedback cycle control.

For weights a_1..a_N and a negative cycle multiplier mu, closed-loop
stability is decided by the monic degree-(2N-1) polynomial

    nu^(2N-1) + k * (a_1 nu^(2N-2) + a_2 nu^(2N-4) + ... + a_N),
    k = i*sqrt(|mu|),

all of whose roots must lie in the open unit disk.  The largest usable
|mu| -- the critical magnitude mu* -- is computed here by two independent
routes: a direct root sweep over |mu|, and a boundary (hodograph) analysis
of the curve t -> (sum_j a_j e^{-i(2j-1)t})^2, whose transversal crossings
of the negative real axis mark root exits through the unit circle.

The extremal quantities are exposed as well: j_value is the largest |S| at
the sign-change zeros of C (with C, S the conjugate trigonometric pair of
the weights), whose infimum over normalized weights is 1/N, attained by
the Fejer-kernel weights of ``optimal_gains``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .gains import ControlGains, optimal_gains
from .polyroots import ComplexPolynomial, find_roots

__all__ = [
    "TrigPair",
    "HodographCurve",
    "StabilityReport",
    "InternalConsistencyError",
    "char_poly",
    "mu_star_by_sweep",
    "mu_star_by_hodograph",
    "j_value",
    "brute_force_j_min",
    "fejer_identity_residual",
    "hodograph_curve",
]

_T_BISECT_TOL = 1e-12
_TANGENCY_IM_TOL = 1e-10


class InternalConsistencyError(RuntimeError):
    """The boundary analysis found no negative real crossing.

    The minimum of the boundary set is provably negative for normalized
    weights, so hitting this indicates a bug or a corrupted input.
    """


def _thread_count() -> int:
    raw = os.environ.get("CYCLESTAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(4, os.cpu_count() or 1)
    return n


@dataclass(frozen=True)
class TrigPair:
    """Conjugate trigonometric pair of a gain vector.

    C(t) = sum_j a_j cos((2j-1) t) and S(t) = sum_j a_j sin((2j-1) t).
    C(0) = 1 by normalization and C(pi/2) = 0 identically.
    """

    gains: ControlGains

    @property
    def _odd(self) -> np.ndarray:
        return 2.0 * np.arange(1, self.gains.N + 1) - 1.0

    def c(self, t):
        t = np.asarray(t, dtype=float)
        vals = np.cos(np.multiply.outer(t, self._odd)) @ np.asarray(self.gains.a)
        return float(vals) if vals.ndim == 0 else vals

    def s(self, t):
        t = np.asarray(t, dtype=float)
        vals = np.sin(np.multiply.outer(t, self._odd)) @ np.asarray(self.gains.a)
        return float(vals) if vals.ndim == 0 else vals

    def symbol(self, t):
        """sum_j a_j e^{-i(2j-1)t}, equal to C(t) - i S(t)."""
        t = np.asarray(t, dtype=float)
        vals = np.exp(-1j * np.multiply.outer(t, self._odd)) @ np.asarray(self.gains.a)
        return complex(vals) if vals.ndim == 0 else vals

    def squared_symbol(self, t):
        v = self.symbol(t)
        return v * v


@dataclass(frozen=True)
class HodographCurve:
    """Uniform samples of the squared symbol over t in [0, 2*pi]."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    resolution: int

    def rows(self):
        for ti, xi, yi in zip(self.t, self.x, self.y):
            yield float(ti), float(xi), float(yi)


@dataclass(frozen=True)
class StabilityReport:
    """Critical multiplier magnitude with the evidence that produced it.

    ``witness`` holds the critical roots (RootSweep) or the minimizing
    (t, omega) pair (Hodograph).  ``tangencies`` lists parameters where the
    hodograph touches the real axis without crossing; such contacts graze
    the unit circle without letting roots escape, so they do not contribute
    to mu*.  ``censored`` marks a sweep that hit its search bound without
    finding an exit.
    """

    mu_star_abs: float
    method: Literal["RootSweep", "Hodograph"]
    witness: tuple
    gains: ControlGains
    censored: bool = False
    tangencies: tuple = ()


def char_poly(gains: ControlGains, mu: float) -> ComplexPolynomial:
    """Characteristic polynomial of the controlled cycle at multiplier mu < 0.

    Monic of degree 2N-1; the coefficient of nu^(2(N-j)) is k*a_j with
    k = +i*sqrt(|mu|) and every other non-leading coefficient is zero.
    The -i branch yields the conjugate root set, so moduli are unaffected.
    """
    mu = float(mu)
    if not mu < 0:
        raise ValueError(f"multiplier must be negative, got {mu!r}")
    n = gains.N
    k = 1j * math.sqrt(-mu)
    coeffs = [0j] * (2 * n)
    coeffs[2 * n - 1] = 1.0 + 0j
    for j in range(1, n + 1):
        coeffs[2 * (n - j)] = k * gains.a[j - 1]
    return ComplexPolynomial(tuple(coeffs))


def _max_root_modulus(gains: ControlGains, m: float) -> float:
    return find_roots(char_poly(gains, -m)).max_modulus


def mu_star_by_sweep(gains: ControlGains, mu_max: float | None = None,
                     tol: float = 1e-9) -> StabilityReport:
    """First |mu| at which a characteristic root reaches the unit circle.

    Coarse increasing sweep in steps of mu_max/1000, then bisection of the
    bracketing step to width ``tol``.  The exit predicate requires the max
    root modulus to exceed 1 by a tiny margin so that grazing contacts
    (root modulus touching 1 and retreating) are not mistaken for exits.
    If no exit occurs by ``mu_max`` the result is flagged censored.
    """
    if mu_max is None:
        mu_max = 4.0 * gains.N ** 2
    mu_max = float(mu_max)
    if mu_max <= 0:
        raise ValueError("mu_max must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")

    margin = 1e-9

    def exits(m: float) -> bool:
        return _max_root_modulus(gains, m) >= 1.0 + margin

    step = mu_max / 1000.0
    lo = 0.0
    hi = None
    for i in range(1, 1001):
        m = i * step
        if exits(m):
            hi = m
            break
        lo = m
    if hi is None:
        return StabilityReport(mu_star_abs=mu_max, method="RootSweep", witness=(),
                               gains=gains, censored=True)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if exits(mid):
            hi = mid
        else:
            lo = mid
    m_star = 0.5 * (lo + hi)
    roots = find_roots(char_poly(gains, -m_star))
    crit = tuple(r for r in roots.roots
                 if abs(abs(r) - roots.max_modulus) <= 1e-6 * (1.0 + roots.max_modulus))
    return StabilityReport(mu_star_abs=m_star, method="RootSweep", witness=crit,
                           gains=gains)


def _bisect_sign_change(g, lo: float, hi: float, g_lo: float) -> float:
    """Bisect a bracketed sign change of g to interval width _T_BISECT_TOL."""
    while hi - lo > _T_BISECT_TOL:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if (g_lo < 0) != (g_mid < 0):
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    return 0.5 * (lo + hi)


def _genuine_sign_change(fun, t_hat: float, noise_floor: float) -> bool:
    """Distinguish a transversal zero of ``fun`` at ``t_hat`` from a graze.

    Where the function merely touches zero, rounding noise (~1e-16) can
    flip the computed sign on grid points inside the touch, producing
    spurious brackets; those zeros must not count.  Probing symmetrically
    at a scale well above the noise floor classifies the two cases: a
    genuine zero of odd multiplicity changes sign between the probes, a
    graze does not.  Unclassifiable (both probes inside the noise floor at
    every scale) is treated as a sign change, which errs toward reporting
    a crossing.
    """
    for delta in (1e-6, 1e-4):
        lo, hi = fun(t_hat - delta), fun(t_hat + delta)
        if abs(lo) <= noise_floor or abs(hi) <= noise_floor:
            continue
        return (lo < 0) != (hi < 0)
    return True


def _minimize_scalar(fun, lo: float, hi: float, iters: int = 80) -> float:
    """Golden-section minimizer, enough to pin a smooth valley to ~1e-12."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
        if b - a < _T_BISECT_TOL:
            break
    return 0.5 * (a + b)


def mu_star_by_hodograph(gains: ControlGains, resolution: int = 100_000) -> StabilityReport:
    """Critical multiplier magnitude from the boundary curve.

    Samples t in [0, pi] (the curve for t in [pi, 2*pi] is the mirror
    image), locates sign changes of Im((symbol)^2), polishes each by
    bisection, and reads off the most negative Re value omega_min among
    the crossings; then mu* = -1/omega_min.  Tangential contacts -- local
    valleys where |Im| dips below 1e-10 without a sign change -- are
    reported separately and excluded from the minimum, since the curve
    only grazes the real axis there.
    """
    if resolution < 1000:
        raise ValueError("resolution must be at least 1000")
    pair = TrigPair(gains)
    t = np.linspace(0.0, np.pi, resolution + 1)
    w = pair.squared_symbol(t)
    g = w.imag

    def g_scalar(x: float) -> float:
        return float(pair.squared_symbol(x).imag)

    noise_floor = 1e-13 * max(1.0, sum(abs(v) for v in gains.a)) ** 2
    crossings: list[float] = []
    for ti in t[g == 0.0]:
        if _genuine_sign_change(g_scalar, float(ti), noise_floor):
            crossings.append(float(ti))
    sign = np.sign(g)
    flips = np.nonzero((sign[:-1] * sign[1:]) < 0)[0]
    for i in flips:
        t_hat = _bisect_sign_change(g_scalar, float(t[i]), float(t[i + 1]), float(g[i]))
        if _genuine_sign_change(g_scalar, t_hat, noise_floor):
            crossings.append(t_hat)

    tangencies: list[tuple[float, float]] = []
    absg = np.abs(g)
    interior = np.arange(1, len(t) - 1)
    valley = interior[(absg[interior] <= absg[interior - 1]) &
                      (absg[interior] <= absg[interior + 1]) &
                      (sign[interior - 1] == sign[interior + 1]) &
                      (sign[interior - 1] != 0) &
                      (absg[interior] < 1e-3)]
    for i in valley:
        t_min = _minimize_scalar(lambda x: abs(g_scalar(x)), float(t[i - 1]), float(t[i + 1]))
        if abs(g_scalar(t_min)) < _TANGENCY_IM_TOL:
            if all(abs(t_min - tc) > 1e-8 for tc in crossings):
                tangencies.append((t_min, float(pair.squared_symbol(t_min).real)))

    if not crossings:
        raise InternalConsistencyError("no real-axis crossings found on [0, pi]")
    re_vals = [float(pair.squared_symbol(tc).real) for tc in crossings]
    omega_min = min(re_vals)
    t_at_min = crossings[re_vals.index(omega_min)]
    if omega_min >= 0:
        raise InternalConsistencyError(
            f"minimum boundary value {omega_min!r} is not negative; "
            "normalized weights always admit a negative crossing")
    return StabilityReport(mu_star_abs=-1.0 / omega_min, method="Hodograph",
                           witness=(t_at_min, omega_min), gains=gains,
                           tangencies=tuple(tangencies))


def _c_sign_zeros(pair: TrigPair, resolution: int) -> list[float]:
    """Sign-change zeros of C on (0, pi/2), polished, plus pi/2 itself.

    Grazing zeros (C touching without a sign flip) are filtered out; see
    ``_genuine_sign_change``.
    """
    t = np.linspace(0.0, np.pi / 2.0, resolution + 1)
    cv = pair.c(t)

    def c_scalar(x: float) -> float:
        return float(pair.c(x))

    noise_floor = 1e-13 * max(1.0, sum(abs(v) for v in pair.gains.a))
    zeros: list[float] = []
    sign = np.sign(cv)
    half_pi = np.pi / 2.0
    candidates = [float(t[i]) for i in np.nonzero(sign[1:-1] == 0)[0] + 1]
    flips = np.nonzero((sign[:-1] * sign[1:]) < 0)[0]
    for i in flips:
        candidates.append(
            _bisect_sign_change(c_scalar, float(t[i]), float(t[i + 1]), float(cv[i])))
    for z in candidates:
        if 0.0 < z < half_pi - 1e-9 and _genuine_sign_change(c_scalar, z, noise_floor):
            zeros.append(z)
    zeros.append(half_pi)
    return zeros


def j_value(gains: ControlGains, resolution: int = 100_000) -> float:
    """Largest |S| over the sign-change zeros of C in (0, pi/2].

    The zero at pi/2 is structural (every cos((2j-1)pi/2) vanishes) and is
    always included; there |S| equals |gamma_1|, the alternating sum of the
    weights.  Zeros where C only touches without changing sign are grazing
    contacts and are deliberately not counted.
    """
    if resolution < 1000:
        raise ValueError("resolution must be at least 1000")
    pair = TrigPair(gains)
    zeros = _c_sign_zeros(pair, resolution)
    return max(abs(float(pair.s(z))) for z in zeros)


def _j_on_grid(a_matrix: np.ndarray, t: np.ndarray,
               cos_tab: np.ndarray, sin_tab: np.ndarray) -> np.ndarray:
    """j_value estimates for many weight vectors at once.

    ``a_matrix`` has one weight vector per column.  Zeros of C are refined
    by one secant step from the bracketing grid points, which is accurate
    to O(grid spacing squared) -- plenty for a search oracle.
    """
    cv = cos_tab @ a_matrix            # (T, G)
    sv = sin_tab @ a_matrix
    best = np.abs(sv[-1, :]).copy()    # forced zero at pi/2
    sign = np.sign(cv)
    flip_rows, flip_cols = np.nonzero((sign[:-1, :] * sign[1:, :]) < 0)
    if flip_rows.size:
        c0 = cv[flip_rows, flip_cols]
        c1 = cv[flip_rows + 1, flip_cols]
        t0 = t[flip_rows]
        t1 = t[flip_rows + 1]
        tz = t0 - c0 * (t1 - t0) / (c1 - c0)
        odd = 2.0 * np.arange(1, a_matrix.shape[0] + 1) - 1.0
        s_at = np.abs(np.einsum("ij,ji->i", np.sin(np.multiply.outer(tz, odd)),
                                a_matrix[:, flip_cols]))
        np.maximum.at(best, flip_cols, s_at)
    return best


def brute_force_j_min(N: int, grid_density: int) -> tuple[float, tuple[float, ...]]:
    """Exhaustive grid search for the smallest j_value over normalized weights.

    Independent empirical check of the closed-form optimum: weights range
    over the slice of [-1, 2]^N with sum 1, scanned at ``grid_density``
    points per free axis, followed by two refinement rounds that shrink the
    box tenfold around the incumbent.  Ties break toward lexicographically
    smaller weights, so the result is deterministic regardless of how the
    grid is chunked across threads.
    """
    if N not in (1, 2, 3, 4):
        raise ValueError("brute force supports N in 1..4")
    if grid_density < 2:
        raise ValueError("grid_density must be at least 2")
    if N == 1:
        return 1.0, (1.0,)

    t = np.linspace(0.0, np.pi / 2.0, 4097)
    odd = 2.0 * np.arange(1, N + 1) - 1.0
    cos_tab = np.cos(np.multiply.outer(t, odd))
    sin_tab = np.sin(np.multiply.outer(t, odd))

    def candidates(center: np.ndarray, half_width: float) -> np.ndarray:
        axes = [np.linspace(max(-1.0, c - half_width), min(2.0, c + half_width),
                            grid_density) for c in center]
        mesh = np.meshgrid(*axes, indexing="ij")
        free = np.stack([m.ravel() for m in mesh])       # (N-1, G)
        last = 1.0 - free.sum(axis=0)
        keep = (last >= -1.0) & (last <= 2.0)
        return np.vstack([free[:, keep], last[keep]])    # (N, G)

    def evaluate(a_matrix: np.ndarray) -> tuple[float, tuple[float, ...]]:
        workers = _thread_count()
        G = a_matrix.shape[1]
        if workers > 1 and G > 4 * workers:
            bounds = np.linspace(0, G, workers + 1, dtype=int)
            chunks = [a_matrix[:, bounds[i]:bounds[i + 1]] for i in range(workers)]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(
                    lambda c: _j_on_grid(c, t, cos_tab, sin_tab), chunks))
            vals = np.concatenate(parts)
        else:
            vals = _j_on_grid(a_matrix, t, cos_tab, sin_tab)
        best_j = float(vals.min())
        tied = np.nonzero(vals == best_j)[0]
        cols = sorted(tuple(float(v) for v in a_matrix[:, i]) for i in tied)
        return best_j, cols[0]

    center = np.full(N - 1, 0.5)
    half_width = 1.5
    best_j, best_a = evaluate(candidates(center, half_width))
    for _ in range(2):
        half_width /= 10.0
        center = np.asarray(best_a[:-1])
        cand = candidates(center, half_width)
        j2, a2 = evaluate(cand)
        if (j2, a2) < (best_j, best_a):
            best_j, best_a = j2, a2
    return best_j, best_a


def fejer_identity_residual(N: int, t: float) -> float:
    """Difference between C of the optimal weights and its kernel form.

    The optimal C equals (sin(N t) / (N sin t))^2 * cos t; the residual is
    the direct cosine-sum evaluation minus that closed form.  Points with
    sin t = 0 are rejected rather than patched by the removable limit.
    """
    t = float(t)
    if not (0.0 < t < math.pi):
        raise ValueError(f"t must lie strictly inside (0, pi), got {t!r}")
    if math.sin(t) == 0.0:
        raise ValueError("sin t vanishes; kernel form is singular here")
    pair = TrigPair(optimal_gains(N))
    kernel = (math.sin(N * t) / (N * math.sin(t))) ** 2 * math.cos(t)
    return float(pair.c(t)) - kernel


def hodograph_curve(gains: ControlGains, resolution: int) -> HodographCurve:
    """Squared-symbol curve sampled at ``resolution`` points over [0, 2*pi]."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    pair = TrigPair(gains)
    t = np.linspace(0.0, 2.0 * np.pi, resolution)
    w = pair.squared_symbol(t)
    return HodographCurve(t=t, x=w.real, y=w.imag, resolution=resolution)
