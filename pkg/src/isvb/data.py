"""Datasets, simulation scenarios, random-design generators and CSV ingestion."""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .linalg import as_finite_array

DESIGN_KINDS = ("identity", "equicorrelated", "ar", "fixed")


@dataclass(frozen=True)
class Dataset:
    """A regression dataset, optionally carrying the simulation truth."""

    X: np.ndarray
    Y: np.ndarray
    beta_true: np.ndarray | None = None
    sigma2_true: float | None = None

    def __post_init__(self):
        X = as_finite_array(self.X, "X", ndim=2)
        Y = as_finite_array(self.Y, "Y", ndim=1)
        if X.shape[0] != Y.shape[0]:
            raise DataError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
        if X.shape[0] < 2 or X.shape[1] < 1:
            raise DataError(f"need n >= 2 and p >= 1, got {X.shape}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        if self.beta_true is not None:
            b = as_finite_array(self.beta_true, "beta_true", ndim=1)
            if b.shape[0] != X.shape[1]:
                raise DataError("beta_true length must equal p")
            object.__setattr__(self, "beta_true", b)
        if self.sigma2_true is not None and self.sigma2_true <= 0:
            raise DataError("sigma2_true must be positive")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def support_true(self):
        """Indices of the non-zero true coefficients (None without truth)."""
        if self.beta_true is None:
            return None
        return np.flatnonzero(self.beta_true)


@dataclass(frozen=True)
class ValueSpec:
    """How a coefficient value is produced: a constant or an iid draw."""

    kind: str  # constant | normal | uniform
    value: float = 0.0
    low: float = -1.0
    high: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "normal", "uniform"):
            raise ConfigError(f"unknown value kind {self.kind!r}")
        if self.kind == "uniform" and not self.low < self.high:
            raise ConfigError("uniform spec needs low < high")

    def draw(self, rng, size):
        if self.kind == "constant":
            return np.full(size, float(self.value))
        if self.kind == "normal":
            return rng.standard_normal(size)
        return rng.uniform(self.low, self.high, size)

    def to_json(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "normal":
            return {"kind": "normal"}
        return {"kind": "uniform", "low": self.low, "high": self.high}

    @staticmethod
    def from_json(obj):
        if isinstance(obj, (int, float)):
            return ValueSpec("constant", value=float(obj))
        if not isinstance(obj, dict) or "kind" not in obj:
            raise DataError(f"cannot parse value spec {obj!r}")
        kind = obj["kind"]
        if kind == "constant":
            return ValueSpec("constant", value=float(obj["value"]))
        if kind == "normal":
            return ValueSpec("normal")
        if kind == "uniform":
            return ValueSpec("uniform", low=float(obj["low"]), high=float(obj["high"]))
        raise DataError(f"unknown value kind {kind!r}")


@dataclass(frozen=True)
class CovarianceSpec:
    """Row-covariance family of a Gaussian random design."""

    kind: str
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in DESIGN_KINDS:
            raise ConfigError(f"unknown design kind {self.kind!r}")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigError(f"rho must lie in [0, 1), got {self.rho}")


def build_covariance(spec, p):
    """p x p covariance with unit diagonal: identity, constant off-diagonal
    rho, or autoregressive entries rho^|j-k|."""
    if spec.kind == "identity" or spec.rho == 0.0:
        return np.eye(p)
    if spec.kind == "equicorrelated":
        S = np.full((p, p), spec.rho)
        np.fill_diagonal(S, 1.0)
        return S
    if spec.kind == "ar":
        idx = np.arange(p)
        return spec.rho ** np.abs(idx[:, None] - idx[None, :])
    raise ConfigError(f"cannot build covariance for design kind {spec.kind!r}")


@dataclass(frozen=True)
class Scenario:
    """One simulation setting: problem sizes, signal layout, design family.

    ``target_values`` gives the true values of the k coordinates under
    inference (one spec per coordinate); ``other_values`` the value of the
    remaining non-zero coordinates, placed uniformly at random among the
    nuisance indices. With ``s0_convention="total"`` (default), s0 counts
    all non-zeros of the true coefficient vector including non-zero
    targets; with ``"extra"`` it counts only the non-target ones.
    """

    n: int
    p: int
    s0: int
    k: int
    target_values: tuple
    other_values: ValueSpec
    rho: float
    sigma2: float
    design_kind: str
    design_path: str | None = None
    s0_convention: str = "total"
    id: str = "scenario"

    def __post_init__(self):
        if self.k < 1 or self.k > self.p:
            raise ConfigError("need 1 <= k <= p")
        if self.s0 > self.p:
            raise ConfigError("s0 cannot exceed p")
        if self.sigma2 <= 0:
            raise ConfigError("sigma2 must be positive")
        if self.s0_convention not in ("total", "extra"):
            raise ConfigError(f"unknown s0 convention {self.s0_convention!r}")
        tv = self.target_values
        if isinstance(tv, ValueSpec):
            tv = (tv,) * self.k
        tv = tuple(tv)
        if len(tv) != self.k:
            raise ConfigError(f"need {self.k} target value specs, got {len(tv)}")
        object.__setattr__(self, "target_values", tv)
        CovarianceSpec(self.design_kind, self.rho)  # validates kind and rho range

    @property
    def covariance(self):
        return CovarianceSpec(self.design_kind, self.rho)

    def to_json(self):
        obj = {
            "n": self.n,
            "p": self.p,
            "s0": self.s0,
            "k": self.k,
            "target_values": [v.to_json() for v in self.target_values],
            "other_values": self.other_values.to_json(),
            "rho": self.rho,
            "sigma2": self.sigma2,
            "design_kind": self.design_kind,
        }
        if self.design_path is not None:
            obj["design_path"] = self.design_path
        if self.s0_convention != "total":
            obj["s0_convention"] = self.s0_convention
        if self.id != "scenario":
            obj["id"] = self.id
        return obj


def scenario_from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        tv = obj["target_values"]
        if isinstance(tv, list):
            targets = tuple(ValueSpec.from_json(v) for v in tv)
        else:
            targets = ValueSpec.from_json(tv)
        return Scenario(
            n=int(obj["n"]),
            p=int(obj["p"]),
            s0=int(obj["s0"]),
            k=int(obj["k"]),
            target_values=targets,
            other_values=ValueSpec.from_json(obj["other_values"]),
            rho=float(obj["rho"]),
            sigma2=float(obj["sigma2"]),
            design_kind=str(obj["design_kind"]),
            design_path=obj.get("design_path"),
            s0_convention=obj.get("s0_convention", "total"),
            id=obj.get("id", "scenario"),
        )
    except KeyError as exc:
        raise DataError(f"scenario JSON missing field {exc}") from exc


def load_scenario(path):
    with open(path) as fh:
        return scenario_from_json(json.load(fh))


def _design_matrix(scenario, rng):
    if scenario.design_kind == "fixed":
        if scenario.design_path is None:
            raise ConfigError("design_kind 'fixed' requires design_path")
        X = _read_numeric_csv(scenario.design_path, "X")
        if X.shape != (scenario.n, scenario.p):
            raise DataError(
                f"fixed design has shape {X.shape}, scenario expects {(scenario.n, scenario.p)}"
            )
        return X
    Z = rng.standard_normal((scenario.n, scenario.p))
    if scenario.design_kind == "identity" or scenario.rho == 0.0:
        return Z
    L = np.linalg.cholesky(build_covariance(scenario.covariance, scenario.p))
    return Z @ L.T


def generate_dataset(scenario, rng):
    """Simulate one dataset: Gaussian rows with the scenario covariance,
    sparse truth with targets in the leading k coordinates, Y = X beta + sigma eps.

    Draw order is fixed (design, target values, support, other values,
    noise) so a given (scenario, seed) is bit-reproducible.
    """
    X = _design_matrix(scenario, rng)
    beta = np.zeros(scenario.p)
    for j, spec in enumerate(scenario.target_values):
        beta[j] = spec.draw(rng, 1)[0]
    n_nonzero_targets = int(np.count_nonzero(beta[: scenario.k]))
    if scenario.s0_convention == "total":
        n_other = scenario.s0 - n_nonzero_targets
    else:
        n_other = scenario.s0
    if n_other < 0:
        raise ConfigError("more non-zero targets than s0 allows")
    if n_other > scenario.p - scenario.k:
        raise ConfigError(
            f"cannot place {n_other} non-zero coordinates among {scenario.p - scenario.k} nuisance indices"
        )
    if n_other > 0:
        support = scenario.k + rng.choice(scenario.p - scenario.k, size=n_other, replace=False)
        beta[np.sort(support)] = scenario.other_values.draw(rng, n_other)
    eps = rng.standard_normal(scenario.n)
    Y = X @ beta + np.sqrt(scenario.sigma2) * eps
    return Dataset(X=X, Y=Y, beta_true=beta, sigma2_true=scenario.sigma2)


def _read_numeric_csv(path, name, header=False):
    try:
        rows = []
        with open(path) as fh:
            lines = [ln for ln in (line.strip() for line in fh) if ln]
        if header:
            lines = lines[1:]
        for i, line in enumerate(lines):
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise DataError(f"{name} file {path}: non-numeric cell on data row {i + 1}") from exc
        if not rows:
            raise DataError(f"{name} file {path} is empty")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DataError(f"{name} file {path}: inconsistent row lengths")
        return np.asarray(rows, dtype=float)
    except OSError as exc:
        raise DataError(f"cannot read {name} file {path}: {exc}") from exc


def read_matrix_csv(path, header=False):
    """Read a single numeric CSV file into a 2-d array."""
    return _read_numeric_csv(path, "X", header=header)


def load_csv(x_path, y_path, header=False):
    """Load a dataset from numeric CSV files (no truth fields).

    ``header=True`` skips one header row in each file. Y may be a single
    column or a single row.
    """
    X = _read_numeric_csv(x_path, "X", header=header)
    Y = _read_numeric_csv(y_path, "Y", header=header)
    if Y.ndim == 2 and 1 in Y.shape:
        Y = Y.reshape(-1)
    elif Y.ndim == 2 and Y.shape[1] != 1:
        raise DataError(f"Y file {y_path} must have a single column")
    if Y.shape[0] != X.shape[0]:
        raise DataError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
    return Dataset(X=X, Y=Y)
