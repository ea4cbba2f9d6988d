"""Model parameters, pressure closures and the stability classification.

The hyperbolic-parabolic vasculogenesis system is linearised around the
constant state ``(rho_bar, 0, gamma * rho_bar / nu)``.  After rescaling the
velocity, everything the spectral analysis needs is carried by two numbers,

    a = sqrt(P'(rho_bar)),    b = rho_bar * beta / sqrt(P'(rho_bar)),

and the sign of ``a * nu - b * gamma`` decides between decay and growth.
"""

from __future__ import annotations

import configparser
import enum
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator


class ModelError(ValueError):
    """Invalid model parameters or pressure law."""


class ConfigError(ValueError):
    """Malformed configuration file; ``lineno`` points at the offending line."""

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class Stability(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    BORDERLINE = "Borderline"


@dataclass(frozen=True)
class PressureLaw:
    """Barotropic pressure ``P(rho)``.

    ``power``   P = c * rho**g
    ``affine``  P = c * rho  (plus an irrelevant constant)
    ``table``   monotone cubic (PCHIP) through ``(rho, P)`` samples
    """

    kind: str = "power"
    c: float = 1.0
    g: float = 1.0
    table: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("power", "affine", "table"):
            raise ModelError(f"unknown pressure kind {self.kind!r}")
        if self.kind == "table":
            if self.table is None or len(self.table[0]) < 3:
                raise ModelError("table pressure needs at least 3 samples")
            rho = np.asarray(self.table[0], dtype=float)
            if np.any(np.diff(rho) <= 0):
                raise ModelError("table densities must be strictly increasing")
            return
        if not self.c > 0:
            raise ModelError("pressure coefficient c must be positive")
        if self.kind == "power" and not self.g >= 1:
            raise ModelError("power-law exponent g must be >= 1")

    @classmethod
    def from_table(cls, rho, p):
        return cls(kind="table", c=1.0, g=1.0,
                   table=(tuple(map(float, rho)), tuple(map(float, p))))

    def _interp(self):
        return PchipInterpolator(np.asarray(self.table[0]), np.asarray(self.table[1]),
                                 extrapolate=False)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.kind == "power":
            return self.c * rho ** self.g
        if self.kind == "affine":
            return self.c * rho
        return self._interp()(rho)

    def derivative(self, rho):
        """P'(rho)."""
        rho = np.asarray(rho, dtype=float)
        if self.kind == "power":
            return self.c * self.g * rho ** (self.g - 1.0)
        if self.kind == "affine":
            return np.full_like(rho, self.c)
        return self._interp().derivative()(rho)

    def check_monotone(self, rho_lo, rho_hi, n=257):
        """Raise unless P' > 0 on a sample grid of ``[rho_lo, rho_hi]``."""
        grid = np.linspace(rho_lo, rho_hi, n)
        dp = self.derivative(grid)
        if not np.all(np.isfinite(dp)) or np.any(dp <= 0):
            raise ModelError(f"P' is not positive on [{rho_lo}, {rho_hi}]")

    def describe(self):
        if self.kind == "power":
            return f"power:{self.c!r},{self.g!r}"
        if self.kind == "affine":
            return f"affine:{self.c!r}"
        return f"table:{len(self.table[0])} samples"


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float
    mu: float
    nu: float
    gamma: float
    rho_bar: float
    pressure: PressureLaw = field(default_factory=PressureLaw)

    def __post_init__(self):
        for name in ("alpha", "beta", "mu", "nu", "gamma", "rho_bar"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ModelError(f"{name} must be a positive finite number, got {value!r}")

    def as_dict(self):
        return {
            "alpha": self.alpha, "beta": self.beta, "mu": self.mu, "nu": self.nu,
            "gamma": self.gamma, "rho_bar": self.rho_bar,
            "pressure": self.pressure.describe(),
        }


@dataclass(frozen=True)
class DerivedCoeffs:
    a: float
    b: float
    discriminant: float

    @property
    def sound_speed(self):
        return self.a


def derive_coeffs(params: ModelParams) -> DerivedCoeffs:
    dp = float(params.pressure.derivative(params.rho_bar))
    if not (math.isfinite(dp) and dp > 0):
        raise ModelError(f"invalid pressure: P'(rho_bar) = {dp!r} must be positive")
    a = math.sqrt(dp)
    b = params.rho_bar * params.beta / a
    return DerivedCoeffs(a=a, b=b, discriminant=a * params.nu - b * params.gamma)


def classify_stability(coeffs: DerivedCoeffs, nu: float = 1.0, tol_border=None) -> Stability:
    """Sign of ``a*nu - b*gamma`` with a dead band of width ``tol_border``.

    The default dead band is ``1e-12 * a * nu``; pass ``nu`` so it scales
    with the problem.
    """
    if tol_border is None:
        tol_border = 1e-12 * coeffs.a * nu
    if coeffs.discriminant > tol_border:
        return Stability.STABLE
    if coeffs.discriminant < -tol_border:
        return Stability.UNSTABLE
    return Stability.BORDERLINE


def stability_of(params: ModelParams, tol_border=None) -> Stability:
    return classify_stability(derive_coeffs(params), params.nu, tol_border)


# -- config -----------------------------------------------------------------

_REQUIRED = ("alpha", "beta", "mu", "nu", "gamma", "rho_bar")


def _key_lines(text):
    """Map ``(section, key)`` to the 1-based line where the key is set."""
    lines = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.match(r"\[([^\]]+)\]", stripped)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"([A-Za-z_][\w\-]*)\s*[=:]", stripped)
        if m and section is not None:
            lines[(section, m.group(1).lower())] = lineno
    return lines


def parse_pressure(spec: str) -> PressureLaw:
    """``power:c,g`` | ``affine:c`` | ``table:r1/p1;r2/p2;...``"""
    kind, _, rest = spec.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "power":
        parts = [float(x) for x in rest.split(",")]
        if len(parts) == 1:
            parts.append(1.0)
        if len(parts) != 2:
            raise ValueError("power pressure expects 'power:c,g'")
        return PressureLaw("power", c=parts[0], g=parts[1])
    if kind == "affine":
        return PressureLaw("affine", c=float(rest))
    if kind == "table":
        pairs = [p.split("/") for p in rest.split(";") if p.strip()]
        rho = [float(r) for r, _ in pairs]
        p = [float(v) for _, v in pairs]
        return PressureLaw.from_table(rho, p)
    raise ValueError(f"unknown pressure kind {kind!r}")


def read_config(path) -> configparser.ConfigParser:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=path) from exc
    return parse_config_text(text, path=path)


def parse_config_text(text, path=None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("missing [section] header", lineno=exc.lineno, path=path) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("cannot parse line", lineno=lineno, path=path) from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], lineno=getattr(exc, "lineno", None),
                          path=path) from exc
    cp._vspectra_lines = _key_lines(text)  # noqa: SLF001
    cp._vspectra_path = path  # noqa: SLF001
    return cp


def params_from_config(cp: configparser.ConfigParser) -> ModelParams:
    lines = getattr(cp, "_vspectra_lines", {})
    path = getattr(cp, "_vspectra_path", None)
    if not cp.has_section("model"):
        raise ConfigError("missing [model] section", path=path)
    sec = cp["model"]
    values = {}
    for key in _REQUIRED:
        if key not in sec:
            raise ConfigError(f"[model] is missing '{key}'", path=path)
        try:
            values[key] = float(sec[key])
        except ValueError as exc:
            raise ConfigError(f"'{key}' is not a number: {sec[key]!r}",
                              lineno=lines.get(("model", key)), path=path) from exc
    try:
        pressure = parse_pressure(sec.get("pressure", "power:1,1"))
    except (ValueError, ModelError) as exc:
        raise ConfigError(f"bad pressure: {exc}", lineno=lines.get(("model", "pressure")),
                          path=path) from exc
    try:
        params = ModelParams(pressure=pressure, **values)
        derive_coeffs(params)
    except ModelError as exc:
        raise ConfigError(str(exc), lineno=lines.get(("model", "rho_bar")), path=path) from exc
    return params


def load_params(path) -> ModelParams:
    return params_from_config(read_config(path))


DEFAULT_STABLE = ModelParams(alpha=1.0, beta=1.0, mu=1.0, nu=2.0, gamma=1.0, rho_bar=1.0)
DEFAULT_UNSTABLE = ModelParams(alpha=2.0, beta=3.0, mu=1.0, nu=1.0, gamma=1.0, rho_bar=1.0)
