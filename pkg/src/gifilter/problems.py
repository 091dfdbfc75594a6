"""The two benchmark problems: truth simulation and filter-side models.

Problem 1 is a scalar bistable system with polynomial process and measurement
functions. Problem 2 is bearings-only tracking (BOT) of a constant-velocity
target from a noisy moving platform, with a state-dependent composite
measurement noise and a smooth (non-polynomial) bearing function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache

import numpy as np

from .filters import FilterState, SystemModel, VectorFunction
from .poly import Polynomial, PolyVector
from .taylor import SmoothFn

DEG3_RAD = 3.0 * math.pi / 180.0


@dataclass(frozen=True)
class Problem1Config:
    b: float = 0.5            # process-noise scale; Q = b^2 dt
    d_meas: float = 0.1       # measurement-noise scale; R = d^2 dt
    dt: float = 0.01          # s
    t_end: float = 4.0        # s
    x0_true: float = -0.2
    x_hat0: float = 0.8
    p0: float = 2.0
    e_limit: float = 2.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.p0 <= 0:
            raise ValueError("p0 must be positive")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")

    @property
    def n_step(self) -> int:
        return round(self.t_end / self.dt)

    @property
    def Q(self) -> float:
        return self.b**2 * self.dt

    @property
    def R(self) -> float:
        return self.d_meas**2 * self.dt


@dataclass(frozen=True)
class Problem2Config:
    T: float = 0.2                      # s
    q: float = 0.01                     # m^2/s^4
    n_step: int = 20
    x0_true: tuple = (80.0, 1.0)        # m, m/s
    platform_speed: float = 4.0         # mean platform x = 4 k T
    platform_height: float = 20.0       # mean platform y, m
    platform_var: float = 1.0           # m^2 per axis
    bearing_std: float = DEG3_RAD       # rad, noise floor
    taylor_order: int = 3
    track_loss_threshold: float = 15.0  # m
    x_hat0: tuple = (85.0, 1.5)
    p0_diag: tuple = (25.0, 1.0)
    xi: float = 1.0                     # initial-covariance inflation

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.n_step < 1:
            raise ValueError("n_step must be >= 1")
        if self.xi < 1.0:
            raise ValueError("xi must be >= 1")

    def platform_mean(self, k: int) -> tuple:
        return (self.platform_speed * k * self.T, self.platform_height)


@dataclass
class Trajectory:
    """One simulated run: truth (including the initial state) and measurements."""

    truth: np.ndarray         # (n_step + 1, n)
    measurements: np.ndarray  # (n_step, p)
    aux: dict = field(default_factory=dict)


class Problem1:
    """Scalar bistable benchmark; all model functions are exact polynomials."""

    name = "problem1"
    state_dim = 1
    components = ("state",)

    def __init__(self, cfg: Problem1Config | None = None):
        self.cfg = cfg or Problem1Config()
        c = self.cfg
        # phi(x) = x + 5 dt x (1 - x^2);  gamma(x) = dt (x - 0.05)^2
        x = Polynomial.variable(1, 0)
        phi = x + 5.0 * c.dt * x * (1.0 - x * x)
        gamma = c.dt * (x - 0.05) ** 2
        self._model = SystemModel(
            process=VectorFunction(polys=PolyVector([phi])),
            measurement=VectorFunction(polys=PolyVector([gamma])),
            Q=np.array([[c.Q]]),
            R=np.array([[c.R]]),
        )

    @property
    def n_step(self) -> int:
        return self.cfg.n_step

    def step_time(self, k: int) -> float:
        return k * self.cfg.dt

    def simulate(self, rng: np.random.Generator) -> Trajectory:
        c = self.cfg
        phi = self._model.process.polys[0]
        gamma = self._model.measurement.polys[0]
        truth = np.empty((c.n_step + 1, 1))
        meas = np.empty((c.n_step, 1))
        truth[0, 0] = c.x0_true
        sq = math.sqrt(c.Q)
        sr = math.sqrt(c.R)
        for k in range(1, c.n_step + 1):
            truth[k, 0] = phi.eval(truth[k - 1]) + sq * rng.standard_normal()
            meas[k - 1, 0] = gamma.eval(truth[k]) + sr * rng.standard_normal()
        return Trajectory(truth=truth, measurements=meas)

    def model_for_step(self, k: int) -> SystemModel:
        return self._model

    def init_state(self, xi: float = 1.0) -> FilterState:
        c = self.cfg
        return FilterState(np.array([c.x_hat0]), np.array([[xi * c.p0]]))


def _bearing_fn(platform_x: float, platform_y: float) -> SmoothFn:
    """atan(platform_y / (x1 - platform_x)) with closed-form partials in x1."""
    a, c = platform_x, platform_y

    def ev(x):
        return math.atan2(c, x[0] - a)

    def partials(alpha, x):
        if alpha[1] > 0:
            return 0.0
        u = x[0] - a
        r2 = u * u + c * c
        k = alpha[0]
        if k == 0:
            return math.atan2(c, u)
        if k == 1:
            return -c / r2
        if k == 2:
            return 2.0 * c * u / r2**2
        if k == 3:
            return 2.0 * c * (c * c - 3.0 * u * u) / r2**3
        raise ValueError(f"bearing partials available up to order 3, got {alpha}")

    return SmoothFn(dim_in=2, eval=ev, partials=partials, max_order=3)


class Problem2:
    """Bearings-only tracking with platform position noise folded into R."""

    name = "bot"
    state_dim = 2
    components = ("position", "velocity")

    def __init__(self, cfg: Problem2Config | None = None):
        self.cfg = cfg or Problem2Config()
        c = self.cfg
        T = c.T
        x1 = Polynomial.variable(2, 0)
        x2 = Polynomial.variable(2, 1)
        self._phi = PolyVector([x1 + T * x2, x2])
        beta = np.array([[T * T / 2.0], [T]])
        self._Q = beta @ beta.T * c.q
        self._process = VectorFunction(polys=self._phi)

    @property
    def n_step(self) -> int:
        return self.cfg.n_step

    def step_time(self, k: int) -> float:
        return k * self.cfg.T

    def composite_R(self, x1: float, k: int) -> float:
        """Platform-noise term propagated through the bearing, plus the floor."""
        c = self.cfg
        xd, yd = c.platform_mean(k)
        r2 = (x1 - xd) ** 2 + yd**2
        return c.platform_var * (yd**2 + (x1 - xd) ** 2) / r2**2 + c.bearing_std**2

    def simulate(self, rng: np.random.Generator) -> Trajectory:
        c = self.cfg
        F = np.array([[1.0, c.T], [0.0, 1.0]])
        beta = np.array([c.T**2 / 2.0, c.T])
        sq = math.sqrt(c.q)
        sp = math.sqrt(c.platform_var)
        truth = np.empty((c.n_step + 1, 2))
        meas = np.empty((c.n_step, 1))
        platform_mean = np.empty((c.n_step, 2))
        platform_actual = np.empty((c.n_step, 2))
        truth[0] = c.x0_true
        for k in range(1, c.n_step + 1):
            truth[k] = F @ truth[k - 1] + beta * (sq * rng.standard_normal())
            xd_bar, yd_bar = c.platform_mean(k)
            xd = xd_bar + sp * rng.standard_normal()
            yd = yd_bar + sp * rng.standard_normal()
            # bearing undefined when the platform sits exactly under the target
            while truth[k, 0] == xd:
                xd = xd_bar + sp * rng.standard_normal()
            platform_mean[k - 1] = (xd_bar, yd_bar)
            platform_actual[k - 1] = (xd, yd)
            bearing = math.atan2(yd, truth[k, 0] - xd)
            meas[k - 1, 0] = bearing + c.bearing_std * rng.standard_normal()
        return Trajectory(
            truth=truth,
            measurements=meas,
            aux={"platform_mean": platform_mean, "platform_actual": platform_actual},
        )

    @lru_cache(maxsize=None)
    def _measurement_fn(self, k: int) -> VectorFunction:
        xd_bar, yd_bar = self.cfg.platform_mean(k)
        return VectorFunction(
            smooth=[_bearing_fn(xd_bar, yd_bar)], taylor_order=self.cfg.taylor_order
        )

    @lru_cache(maxsize=None)
    def model_for_step(self, k: int) -> SystemModel:
        """System model used for the measurement at step k (1-based)."""

        def R(predicted_mean):
            # true x1 is unavailable to the filter; evaluate at the prediction
            return np.array([[self.composite_R(predicted_mean[0], k)]])

        return SystemModel(
            process=self._process,
            measurement=self._measurement_fn(k),
            Q=self._Q,
            R=R,
        )

    def init_state(self, xi: float | None = None) -> FilterState:
        c = self.cfg
        if xi is None:
            xi = c.xi
        return FilterState(np.array(c.x_hat0), xi * np.diag(c.p0_diag))


# -- top-level convenience wrappers ---------------------------------------


def simulate_problem1(cfg: Problem1Config, rng_seed: int) -> Trajectory:
    return Problem1(cfg).simulate(np.random.default_rng(rng_seed))


def simulate_problem2(cfg: Problem2Config, rng_seed: int) -> Trajectory:
    return Problem2(cfg).simulate(np.random.default_rng(rng_seed))


def build_models(cfg) -> Problem1 | Problem2:
    if isinstance(cfg, Problem1Config):
        return Problem1(cfg)
    if isinstance(cfg, Problem2Config):
        return Problem2(cfg)
    raise TypeError(f"unsupported config type {type(cfg)!r}")


# -- config files ----------------------------------------------------------


def load_config_file(path: str) -> dict:
    """Parse a key=value config file ('#' starts a comment)."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def apply_overrides(cfg, overrides: dict):
    """Return a config with string overrides coerced to each field's type."""
    valid = {f.name: f for f in fields(cfg)}
    kwargs = {}
    for key, raw in overrides.items():
        if key not in valid:
            raise ValueError(
                f"unknown config key '{key}' for {type(cfg).__name__} "
                f"(valid: {', '.join(sorted(valid))})"
            )
        current = getattr(cfg, key)
        if isinstance(current, tuple):
            kwargs[key] = tuple(float(v) for v in str(raw).split(","))
        elif isinstance(current, bool):
            kwargs[key] = str(raw).lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            kwargs[key] = int(raw)
        else:
            kwargs[key] = float(raw)
    return replace(cfg, **kwargs)
