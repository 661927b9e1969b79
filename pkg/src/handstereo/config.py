"""Matcher configuration and the plain-text ``key = value`` config format."""
from dataclasses import asdict, dataclass, fields, replace

from .errors import ParameterError


@dataclass(frozen=True)
class MatchConfig:
    dmax: int = 64
    cost: str = "census"
    census_w: int = 7
    census_h: int = 9
    ad_truncation: float = 30.0
    grad_truncation: float = 8.0
    blend_weight: float = 0.5
    radius: int = 9
    eps: float = 1e-4
    lr_tol: float = 1.0
    tau_conf: float = 0.04
    # Cost added per disparity level is alpha / dmax (occluded) and beta / dmax (unstable).
    alpha: float = 2.0
    beta: float = 0.5

    def __post_init__(self):
        if self.dmax < 1:
            raise ParameterError("dmax must be >= 1")
        if not self.alpha > self.beta >= 0:
            raise ParameterError("need alpha > beta >= 0")
        if self.tau_conf <= 0:
            raise ParameterError("tau_conf must be > 0")
        if self.eps <= 0:
            raise ParameterError("eps must be > 0")
        if self.radius < 0:
            raise ParameterError("radius must be >= 0")

    @property
    def census_window(self):
        return (self.census_w, self.census_h)

    def with_overrides(self, **overrides):
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self):
        return asdict(self)


def parse_keyvalue(text):
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value.strip("\"'")
    return out


def config_from_mapping(values, base=None):
    """Build a MatchConfig from string values, coercing to each field's type."""
    base = base or MatchConfig()
    types = {f.name: type(getattr(base, f.name)) for f in fields(MatchConfig)}
    kwargs = {}
    for key, value in values.items():
        if key not in types:
            raise ValueError(f"unknown config key {key!r}")
        kwargs[key] = types[key](value)
    return replace(base, **kwargs)


def load_config(path=None, **overrides):
    cfg = MatchConfig()
    if path is not None:
        with open(path) as f:
            cfg = config_from_mapping(parse_keyvalue(f.read()), cfg)
    return cfg.with_overrides(**overrides)
