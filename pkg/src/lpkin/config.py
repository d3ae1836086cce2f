"""Flat ``key = value`` run configuration.

The format is line oriented: one assignment per line, ``#`` starts a
comment, blank lines are ignored, unknown keys are rejected.  A parsed
configuration round-trips losslessly through ``to_text``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import ConfigError
from .grid import CollisionModel, VelocityGrid
from .steppers import StepperConfig

__all__ = ["RunConfig", "parse_config", "parse_config_file"]

_SCHEMES = ("forward_euler", "relaxed_euler", "backward_euler_lp", "greens_lp", "toy_loss")


@dataclass
class RunConfig:
    model: str = "boltzmann_vhs"
    gamma: float = 0.0
    epsilon: float = 1.0
    dim: int = 3
    L: float = 6.0
    n: int = 24
    centering: str = "cell"
    scheme: str = "relaxed_euler"
    dt: float = 0.1
    steps: int = 5
    n_theta: int = 8
    n_phi: int = 16
    m_circle: int = 32
    l_max: int = 14
    k_max: int = 64
    initial: str = "maxwellian"
    ic_mass: float | None = None
    pair_cutoff: float = 1e-14
    strict_paper_kernel: bool = False
    output_dir: str = "out"
    figures: bool = True
    # order-study extras
    T: float = 0.5
    dts: tuple[float, ...] = ()
    reference: str = "finest"

    def validate(self) -> None:
        def check(cond, msg):
            if not cond:
                raise ConfigError(msg)

        check(self.model in ("boltzmann_vhs", "landau"), f"model: unknown value {self.model!r}")
        check(-3.0 <= self.gamma <= 2.0, f"gamma: {self.gamma} outside [-3, 2]")
        check(self.epsilon > 0.0, f"epsilon: must be positive, got {self.epsilon}")
        check(self.dim in (2, 3), f"dim: must be 2 or 3, got {self.dim}")
        check(self.L > 0.0, f"L: must be positive, got {self.L}")
        check(self.n >= 2, f"n: must be >= 2, got {self.n}")
        check(self.centering in ("cell", "node"), f"centering: unknown value {self.centering!r}")
        check(self.scheme in _SCHEMES, f"scheme: unknown value {self.scheme!r}")
        check(self.dt > 0.0, f"dt: must be positive, got {self.dt}")
        check(self.steps >= 1, f"steps: must be >= 1, got {self.steps}")
        check(self.n_theta >= 2, f"n_theta: must be >= 2, got {self.n_theta}")
        check(self.n_phi >= 4 and self.n_phi % 2 == 0,
              f"n_phi: must be even and >= 4, got {self.n_phi}")
        check(self.m_circle >= 2 and self.m_circle % 2 == 0,
              f"m_circle: must be even and >= 2, got {self.m_circle}")
        check(self.l_max >= 1, f"l_max: must be >= 1, got {self.l_max}")
        check(self.k_max >= 1, f"k_max: must be >= 1, got {self.k_max}")
        check(
            self.initial in ("maxwellian", "two_gaussian") or self.initial.startswith("file:"),
            f"initial: unknown value {self.initial!r}",
        )
        check(self.ic_mass is None or self.ic_mass > 0.0,
              f"ic_mass: must be positive, got {self.ic_mass}")
        check(self.pair_cutoff >= 0.0, f"pair_cutoff: must be >= 0, got {self.pair_cutoff}")
        check(self.T > 0.0, f"T: must be positive, got {self.T}")
        check(self.reference in ("finest", "richardson", "exact"),
              f"reference: unknown value {self.reference!r}")
        if self.scheme == "greens_lp":
            check(self.model == "landau", "scheme: greens_lp requires model = landau")
        if self.scheme in ("forward_euler", "relaxed_euler", "backward_euler_lp"):
            check(self.model == "boltzmann_vhs",
                  f"scheme: {self.scheme} requires model = boltzmann_vhs")

    def grid(self) -> VelocityGrid:
        return VelocityGrid(dim=self.dim, extent=self.L, n=self.n, centering=self.centering)

    def collision_model(self) -> CollisionModel:
        return CollisionModel(kind=self.model, gamma=self.gamma, epsilon=self.epsilon)

    def stepper(self) -> StepperConfig:
        return StepperConfig(
            scheme=self.scheme,
            dt=self.dt,
            model=self.collision_model(),
            n_theta=self.n_theta,
            n_phi=self.n_phi,
            m_circle=self.m_circle,
            l_max=self.l_max,
            k_max=self.k_max,
            prod_cutoff=self.pair_cutoff,
            strict_paper_kernel=self.strict_paper_kernel,
        )

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "dts":
                v = ",".join(repr(x) for x in v)
            elif v is None:
                v = "none"
            elif isinstance(v, bool):
                v = "true" if v else "false"
            else:
                v = repr(v) if isinstance(v, float) else str(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str, line_no: int):
    if key in ("gamma", "epsilon", "L", "dt", "pair_cutoff", "T"):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw!r}", line_no) from None
    if key in ("dim", "n", "steps", "n_theta", "n_phi", "m_circle", "l_max", "k_max"):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}", line_no) from None
    if key in ("strict_paper_kernel", "figures"):
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConfigError(f"{key}: expected true/false, got {raw!r}", line_no)
    if key == "ic_mass":
        if raw.lower() in ("none", ""):
            return None
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number or none, got {raw!r}", line_no) from None
    if key == "dts":
        if not raw:
            return ()
        try:
            return tuple(float(x) for x in raw.split(","))
        except ValueError:
            raise ConfigError(f"{key}: expected comma-separated numbers, got {raw!r}", line_no) from None
    return raw


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    key_lines: dict[str, int] = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", line_no)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}", line_no)
        key_lines[key] = line_no
        setattr(cfg, key, _convert(key, raw, line_no))
    try:
        cfg.validate()
    except ConfigError as err:
        # attach the line of the offending key when it was set explicitly
        field_name = str(err).split(":", 1)[0].split()[-1]
        if err.line is None and field_name in key_lines:
            raise ConfigError(str(err), key_lines[field_name]) from None
        raise
    return cfg


def parse_config_file(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
