"""Heavy-tailed synthetic regression data with certified moment bounds.

Designs are i.i.d. per coordinate, which keeps every moment assumption
checkable by one-dimensional quadrature. Labels follow the linear model
``y = <x, w_star> + noise``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import MomentError, ParameterError, ParseError, ShapeError
from .rng import TAG_TAU, stream
from .serialize import csv_text, format_float, parse_float, read_csv_rows, write_text

DESIGN_KINDS = ("gaussian", "student_t", "symmetric_pareto")
NOISE_KINDS = ("gaussian", "student_t")

_MC_CHUNK = 2**20


@dataclass(frozen=True)
class Design:
    """Per-coordinate covariate law. Fields beyond ``kind`` apply as noted."""

    kind: str
    nu: float = 0.0       # student_t degrees of freedom
    alpha: float = 0.0    # symmetric_pareto tail index
    scale: float = 1.0    # symmetric_pareto minimum magnitude


@dataclass(frozen=True)
class Noise:
    kind: str
    sigma: float = 1.0    # gaussian standard deviation
    nu: float = 0.0       # student_t degrees of freedom


def make_design(kind: str, nu: float | None = None, alpha: float | None = None,
                scale: float = 1.0) -> Design:
    if kind not in DESIGN_KINDS:
        raise ParameterError(f"unknown design kind {kind!r}")
    if kind == "student_t":
        if nu is None or nu <= 0:
            raise ParameterError("student_t design requires nu > 0")
        return Design(kind, nu=float(nu))
    if kind == "symmetric_pareto":
        if alpha is None or alpha <= 0:
            raise ParameterError("symmetric_pareto design requires alpha > 0")
        if scale <= 0:
            raise ParameterError("symmetric_pareto design requires scale > 0")
        return Design(kind, alpha=float(alpha), scale=float(scale))
    return Design(kind)


def make_noise(kind: str, sigma: float | None = None, nu: float | None = None) -> Noise:
    if kind not in NOISE_KINDS:
        raise ParameterError(f"unknown noise kind {kind!r}")
    if kind == "gaussian":
        if sigma is None or sigma < 0:
            raise ParameterError("gaussian noise requires sigma >= 0")
        return Noise(kind, sigma=float(sigma))
    if nu is None or nu <= 1:
        # nu <= 1 has no mean; labels would not define a sensible regression
        raise ParameterError("student_t noise requires nu > 1")
    return Noise(kind, nu=float(nu))


@dataclass(frozen=True, eq=False)
class PopulationModel:
    design: Design
    noise: Noise
    w_star: np.ndarray

    @property
    def d(self) -> int:
        return self.w_star.shape[0]


def make_model(design: Design, noise: Noise, w_star) -> PopulationModel:
    w = np.asarray(w_star, dtype=float)
    if w.ndim != 1 or w.shape[0] < 1:
        raise ShapeError("w_star must be a non-empty 1-d vector")
    if not np.all(np.isfinite(w)):
        raise ParameterError("w_star must be finite")
    w = w.copy()
    w.setflags(write=False)
    return PopulationModel(design, noise, w)


@dataclass(frozen=True, eq=False)
class Dataset:
    """An n-by-d design matrix with its n labels. Entries are always finite."""

    xs: np.ndarray
    ys: np.ndarray

    @property
    def n(self) -> int:
        return self.xs.shape[0]

    @property
    def d(self) -> int:
        return self.xs.shape[1]


def make_dataset(xs, ys) -> Dataset:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 2:
        raise ShapeError(f"xs must be 2-d, got shape {xs.shape}")
    if ys.ndim != 1 or ys.shape[0] != xs.shape[0]:
        raise ShapeError(f"ys shape {ys.shape} does not match xs shape {xs.shape}")
    if xs.shape[0] < 1:
        raise ParameterError("dataset must contain at least one record")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ParameterError("dataset entries must be finite")
    xs = xs.copy()
    ys = ys.copy()
    xs.setflags(write=False)
    ys.setflags(write=False)
    return Dataset(xs, ys)


def draw_design(design: Design, shape, rng: np.random.Generator) -> np.ndarray:
    if design.kind == "gaussian":
        return rng.standard_normal(shape)
    if design.kind == "student_t":
        return rng.standard_t(design.nu, size=shape)
    magnitude = design.scale * (1.0 + rng.pareto(design.alpha, size=shape))
    sign = rng.integers(0, 2, size=shape) * 2 - 1
    return sign * magnitude


def draw_noise(noise: Noise, n: int, rng: np.random.Generator) -> np.ndarray:
    if noise.kind == "gaussian":
        if noise.sigma == 0.0:
            return np.zeros(n)
        return noise.sigma * rng.standard_normal(n)
    return rng.standard_t(noise.nu, size=n)


def synth(model: PopulationModel, n: int, rng: np.random.Generator) -> Dataset:
    """Draw ``n`` i.i.d. records from the model.

    Draw order is fixed (covariates first, then noise) so a given stream
    always produces bit-identical datasets.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    xs = draw_design(model.design, (n, model.d), rng)
    ys = xs @ model.w_star + draw_noise(model.noise, n, rng)
    return make_dataset(xs, ys)


def check_moment_exists(design: Design, theta: float) -> None:
    """Raise MomentError when E|x_j|^theta is infinite for the design."""
    _check_moment_exists(design, theta)


def _check_moment_exists(design: Design, theta: float) -> None:
    if design.kind == "student_t" and theta >= design.nu:
        raise MomentError(
            f"E|x|^theta does not exist for student_t(nu={design.nu}) at theta={theta}"
        )
    if design.kind == "symmetric_pareto" and theta >= design.alpha:
        raise MomentError(
            f"E|x|^theta does not exist for symmetric_pareto(alpha={design.alpha})"
            f" at theta={theta}"
        )


def _density(design: Design):
    if design.kind == "gaussian":
        c = 1.0 / math.sqrt(2.0 * math.pi)
        return lambda x: c * math.exp(-0.5 * x * x)
    if design.kind == "student_t":
        nu = design.nu
        c = math.gamma((nu + 1.0) / 2.0) / (math.sqrt(nu * math.pi) * math.gamma(nu / 2.0))
        return lambda x: c * (1.0 + x * x / nu) ** (-(nu + 1.0) / 2.0)
    alpha, scale = design.alpha, design.scale
    return lambda x: 0.0 if abs(x) < scale else 0.5 * alpha * scale**alpha / abs(x) ** (alpha + 1.0)


def coordinate_moment(design: Design, theta: float) -> float:
    """E|x_j|^theta by adaptive quadrature of the design density."""
    _check_moment_exists(design, theta)
    density = _density(design)
    lo = design.scale if design.kind == "symmetric_pareto" else 0.0
    value, err = integrate.quad(
        lambda x: 2.0 * x**theta * density(x), lo, np.inf, limit=500, epsabs=0.0,
        epsrel=1e-9,
    )
    if not (value > 0.0 and err / value < 1e-6):
        raise MomentError(
            f"quadrature failed for {design.kind} at theta={theta}"
            f" (value={value}, err={err})"
        )
    return value


def l2_moment_mc(model: PopulationModel, theta: float, samples: int,
                 rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo estimate of E||x||_2^theta with its standard error.

    Only meaningful when the summand has finite variance; for very heavy
    tails (2*theta >= tail index) the reported standard error is unstable
    and the caller should treat the result as indicative.
    """
    if samples < 1000:
        raise ParameterError("l2 moment estimation needs at least 1000 samples")
    total = 0.0
    total_sq = 0.0
    remaining = samples
    while remaining > 0:
        chunk = min(_MC_CHUNK, remaining)
        xs = draw_design(model.design, (chunk, model.d), rng)
        vals = np.linalg.norm(xs, axis=1) ** theta
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        remaining -= chunk
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return mean, math.sqrt(var / samples)


def certified_tau(model: PopulationModel, theta: float, mode: str,
                  mc_samples: int = 10**7, seed: int = 0) -> float:
    """Moment bound tau such that the chosen assumption holds for the model.

    Args:
        model: population model whose design is being certified.
        theta: moment order in (1, 2].
        mode: "coordinate" certifies max_j E|x_j|^theta <= tau^theta;
            "l2" certifies E||x||_2^theta <= tau^theta.
        mc_samples: sample count for the Monte Carlo fallback (l2 mode when
            the design has no finite second moment).
        seed: root seed for the Monte Carlo fallback only.

    The coordinate path integrates the design density (relative error below
    1e-6). The l2 path uses E||x||^theta <= (d * E x_j^2)^(theta/2) when the
    second moment exists, else Monte Carlo padded by two standard errors.
    """
    if not 1.0 < theta <= 2.0:
        raise ParameterError(f"theta must be in (1, 2], got {theta}")
    if mode == "coordinate":
        return coordinate_moment(model.design, theta) ** (1.0 / theta)
    if mode != "l2":
        raise ParameterError(f"mode must be 'coordinate' or 'l2', got {mode!r}")
    _check_moment_exists(model.design, theta)
    design = model.design
    has_second = (
        design.kind == "gaussian"
        or (design.kind == "student_t" and design.nu > 2.0)
        or (design.kind == "symmetric_pareto" and design.alpha > 2.0)
    )
    if has_second:
        m2 = coordinate_moment(design, 2.0)
        return math.sqrt(model.d * m2)
    estimate, std_error = l2_moment_mc(model, theta, mc_samples, stream(seed, TAG_TAU))
    return (estimate + 2.0 * std_error) ** (1.0 / theta)


def empirical_moment(dataset: Dataset, theta: float, mode: str) -> float:
    """Diagnostic sample analogue of the certified moment."""
    if theta <= 0:
        raise ParameterError(f"theta must be positive, got {theta}")
    if mode == "coordinate":
        return float(np.max(np.mean(np.abs(dataset.xs) ** theta, axis=0)))
    if mode != "l2":
        raise ParameterError(f"mode must be 'coordinate' or 'l2', got {mode!r}")
    return float(np.mean(np.linalg.norm(dataset.xs, axis=1) ** theta))


def dataset_header(d: int) -> list[str]:
    return [f"x{j}" for j in range(d)] + ["y"]


def dataset_csv_text(dataset: Dataset) -> str:
    rows = (
        [format_float(v) for v in dataset.xs[i]] + [format_float(dataset.ys[i])]
        for i in range(dataset.n)
    )
    return csv_text(dataset_header(dataset.d), rows)


def parse_dataset_csv(text: str, path: str | None = None) -> Dataset:
    first = text.splitlines()[0] if text.splitlines() else ""
    d = len(first.split(",")) - 1
    if d < 1:
        raise ParseError("header must be x0,...,y", path=path, line=1)
    xs_rows = []
    ys_rows = []
    for line_no, tokens in read_csv_rows(text, dataset_header(d), path=path):
        values = [parse_float(tok, path, line_no) for tok in tokens]
        xs_rows.append(values[:-1])
        ys_rows.append(values[-1])
    if not xs_rows:
        raise ParameterError("dataset file has a header but no records")
    return make_dataset(np.array(xs_rows), np.array(ys_rows))


def save_csv(dataset: Dataset, path: str) -> None:
    write_text(path, dataset_csv_text(dataset))


def load_csv(path: str) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_dataset_csv(fh.read(), path=path)
