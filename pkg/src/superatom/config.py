"""Flat key-value experiment configuration.

One ``key = value`` pair per line, ``#`` starts a comment, no sections.
Unknown keys are hard errors: silently ignored physics parameters are
worse than a refused config. Angular frequencies accept the exact
``2pi*X`` prefix notation for values quoted as 2 pi x X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .model import (
    DEFAULT_GAMMA_R_DEPH,
    InteractionSpec,
    ModelConfig,
    PulseParams,
    RateSet,
)
from .mesolve import IntegratorSettings


class ConfigError(ValueError):
    """Malformed configuration; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def parse_scalar(text: str) -> float:
    """Float with optional exact '2pi*' prefix."""
    text = text.strip()
    if text.lower().startswith("2pi*"):
        return 2.0 * math.pi * float(text[4:])
    return float(text)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(" ", "").split(",") if tok]


def _parse_positions(text: str) -> list[tuple[float, float, float]]:
    rows = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [float(x) for x in chunk.split(",")]
        if len(parts) != 3:
            raise ValueError(f"position needs 3 coordinates: {chunk!r}")
        rows.append(tuple(parts))
    return rows


@dataclass
class ExperimentConfig:
    """Parsed experiment description with defaults resolved lazily."""

    experiment: str = "custom"           # fig1c | fig2 | custom
    n_atoms_list: list[int] = field(default_factory=lambda: [1])
    engine: str = "me"                   # me | mcwf | both
    coherent: bool = False
    n_traj: int = 200
    seed: int = 12345
    output_dir: str = "out"
    write_jump_log: bool = False

    # Physics overrides (None = package default).
    omega0: float | None = None
    sigma_t: float | None = None
    t_end: float | None = None
    gamma_eg: float | None = None
    gamma_re: float | None = None
    gamma_r_deph: float | None = None
    delta_uniform: float | None = None
    pulse_shape: str | None = None       # gaussian | constant
    scale_ge: float | None = None
    scale_er: float | None = None
    positions: list[tuple[float, float, float]] | None = None
    c_p: float | None = None
    p: int | None = None

    # Integrator overrides.
    method: str | None = None            # adaptive | rk4
    rtol: float | None = None
    atol: float | None = None
    fixed_dt: float | None = None
    sample_count: int | None = None
    backend: str | None = None           # auto | full | symmetric

    def rates(self, coherent: bool, dephasing_default: float = 0.0) -> RateSet:
        if coherent:
            return RateSet(0.0, 0.0, 0.0)
        deph = self.gamma_r_deph if self.gamma_r_deph is not None else dephasing_default
        return RateSet(
            gamma_eg=self.gamma_eg if self.gamma_eg is not None else RateSet().gamma_eg,
            gamma_re=self.gamma_re if self.gamma_re is not None else RateSet().gamma_re,
            gamma_r_deph=deph,
        )

    def pulses(self) -> PulseParams:
        defaults = PulseParams()
        t_end = self.t_end if self.t_end is not None else defaults.t_end
        sigma = self.sigma_t if self.sigma_t is not None else t_end / 8.0
        return PulseParams(
            omega0=self.omega0 if self.omega0 is not None else defaults.omega0,
            sigma_t=sigma,
            t_end=t_end,
            shape=self.pulse_shape if self.pulse_shape is not None else "gaussian",
            scale_ge=self.scale_ge if self.scale_ge is not None else 1.0,
            scale_er=self.scale_er if self.scale_er is not None else 1.0,
        )

    def interaction(self) -> InteractionSpec | None:
        if self.positions is not None:
            return InteractionSpec.geometry(self.positions, self.c_p, self.p)
        if self.delta_uniform is not None:
            return InteractionSpec.uniform(self.delta_uniform)
        return None  # package default (10 w0 uniform)

    def model_config(self, n_atoms: int, coherent: bool,
                     dephasing_default: float = 0.0) -> ModelConfig:
        return ModelConfig(
            n_atoms=n_atoms,
            rates=self.rates(coherent, dephasing_default),
            pulses=self.pulses(),
            interaction=self.interaction(),
        )

    def integrator_settings(self) -> IntegratorSettings:
        defaults = IntegratorSettings()
        return IntegratorSettings(
            method=self.method if self.method is not None else defaults.method,
            rtol=self.rtol if self.rtol is not None else defaults.rtol,
            atol=self.atol if self.atol is not None else defaults.atol,
            fixed_dt=self.fixed_dt if self.fixed_dt is not None else defaults.fixed_dt,
            sample_count=(self.sample_count if self.sample_count is not None
                          else defaults.sample_count),
            backend=self.backend if self.backend is not None else defaults.backend,
        )

    def fig2_dephasing(self) -> float:
        return (self.gamma_r_deph if self.gamma_r_deph is not None
                else DEFAULT_GAMMA_R_DEPH)


_PARSERS = {
    "experiment": str,
    "n_atoms_list": _parse_int_list,
    "engine": str,
    "coherent": _parse_bool,
    "n_traj": int,
    "seed": int,
    "output_dir": str,
    "write_jump_log": _parse_bool,
    "omega0": parse_scalar,
    "sigma_t": parse_scalar,
    "t_end": parse_scalar,
    "gamma_eg": parse_scalar,
    "gamma_re": parse_scalar,
    "gamma_r_deph": parse_scalar,
    "delta_uniform": parse_scalar,
    "pulse_shape": str,
    "scale_ge": parse_scalar,
    "scale_er": parse_scalar,
    "positions": _parse_positions,
    "c_p": parse_scalar,
    "p": int,
    "method": str,
    "rtol": parse_scalar,
    "atol": parse_scalar,
    "fixed_dt": parse_scalar,
    "sample_count": int,
    "backend": str,
}

_EXPERIMENT_DEFAULT_ATOMS = {
    "fig1c": [1, 2, 3, 4, 5, 6],
    "fig2": [1, 2, 3, 4, 5, 6],
    "custom": [1],
}


def parse_config_text(text: str) -> ExperimentConfig:
    values: dict = {}
    n_atoms_given = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw!r}", lineno)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = _PARSERS[key](val)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from exc
        if key == "n_atoms_list":
            n_atoms_given = True

    cfg = ExperimentConfig()
    for key, val in values.items():
        setattr(cfg, key, val)

    if cfg.experiment not in ("fig1c", "fig2", "custom"):
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    if not n_atoms_given:
        cfg.n_atoms_list = list(_EXPERIMENT_DEFAULT_ATOMS[cfg.experiment])
    if not cfg.n_atoms_list:
        raise ConfigError("n_atoms_list must not be empty")
    if cfg.engine not in ("me", "mcwf", "both"):
        raise ConfigError(f"unknown engine {cfg.engine!r}")
    if cfg.engine in ("mcwf", "both") and cfg.n_traj < 1:
        raise ConfigError("n_traj must be >= 1 for trajectory engines")
    if (cfg.positions is not None) and (cfg.c_p is None or cfg.p is None):
        raise ConfigError("geometry mode needs positions, c_p and p")
    if cfg.pulse_shape is not None and cfg.pulse_shape not in ("gaussian", "constant"):
        raise ConfigError(f"unknown pulse_shape {cfg.pulse_shape!r}")
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config_text(text)


def effective_parameters(cfg: ExperimentConfig) -> dict:
    """Resolved parameter values for reporting and the manifest."""
    rates_diss = cfg.rates(False, cfg.fig2_dephasing() if cfg.experiment == "fig2" else 0.0)
    pulses = cfg.pulses()
    settings = cfg.integrator_settings()
    model0 = cfg.model_config(
        max(cfg.n_atoms_list), coherent=False,
        dephasing_default=cfg.fig2_dephasing() if cfg.experiment == "fig2" else 0.0,
    )
    ok, min_shift, w0 = model0.blockade_report()
    out = {
        "experiment": cfg.experiment,
        "n_atoms_list": cfg.n_atoms_list,
        "engine": cfg.engine,
        "coherent": cfg.coherent,
        "n_traj": cfg.n_traj,
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
        "omega0": pulses.omega0,
        "sigma_t": pulses.sigma_t,
        "t_end": pulses.t_end,
        "pulse_shape": pulses.shape,
        "scale_ge": pulses.scale_ge,
        "scale_er": pulses.scale_er,
        "gamma_eg": rates_diss.gamma_eg,
        "gamma_re": rates_diss.gamma_re,
        "gamma_r_deph": rates_diss.gamma_r_deph,
        "linewidth_w0": w0,
        "min_pairwise_shift": None if min_shift == math.inf else min_shift,
        "blockade_satisfied": ok,
        "method": settings.method,
        "rtol": settings.rtol,
        "atol": settings.atol,
        "fixed_dt": settings.fixed_dt,
        "sample_count": settings.sample_count,
        "backend": settings.backend,
    }
    return out


def blockade_line(cfg: ExperimentConfig) -> str:
    eff = effective_parameters(cfg)
    w0 = eff["linewidth_w0"]
    shift = eff["min_pairwise_shift"]
    if shift is None:
        return "blockade check: single atom, no pairs"
    ratio = shift / w0
    if eff["blockade_satisfied"]:
        return f"blockade satisfied: Δ = {ratio:.1f}·w_0"
    return f"blockade marginal: Δ = {ratio:.1f}·w_0 (below 10·w_0)"
