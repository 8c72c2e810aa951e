"""Experiment configuration: YAML files and the bundled presets."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .errors import InvalidArgument
from .extrema import MAX, MIN
from .fitting import SIDES
from .gp import QmfParams
from .processes import INCREMENT_KINDS, IncrementSpec
from .profiles import NORMALIZATIONS, PLACEMENTS, QUANTITIES

MODELS = ("random-walk", "gbm", "qmf")
KINDS = {"max": MAX, "min": MIN}
FORMS = ("power_law", "finite_singularity")
DEFAULT_PLACEMENT = {"volatility": "mid", "volume": "mid", "intertrade": "end"}
PRESETS = ("fig1", "fig2a", "fig2b", "fig2c", "fig2d", "fig3")


@dataclass
class ProcessConfig:
    model: str = "random-walk"
    increments: dict = field(default_factory=lambda: {"kind": "gaussian-unit"})
    drift: float = 0.0
    vol: float = 1.0
    phi: float = 0.1
    sigma2: float = 5.0
    # volume: {target_corr, n_cal} or {sigma_mu}; intertrade: {p0, rate}
    volume: dict | None = None
    intertrade: dict | None = None

    def increment_spec(self) -> IncrementSpec:
        return IncrementSpec(**self.increments)

    def qmf_params(self) -> QmfParams:
        return QmfParams(self.phi, self.sigma2)


@dataclass
class FitSpec:
    quantity: str
    side: str
    range: list
    kind: str = "max"
    form: str = "power_law"
    weighted: bool = False

    @property
    def label(self) -> str:
        return f"{self.form}_{self.quantity}_{self.kind}_{self.side}"


@dataclass
class ConditionalSpec:
    order: int = 10
    offsets: list = field(default_factory=lambda: [-5, -2, -1, 0, 1, 2, 5])
    edges: list = field(default_factory=lambda: [-5.0, 5.0, 100])  # lo, hi, bins


@dataclass
class ExperimentConfig:
    name: str = "custom"
    process: ProcessConfig = field(default_factory=ProcessConfig)
    n: int = 100_001
    realizations: int = 1
    seed: int = 0
    orders: list = field(default_factory=lambda: [10, 20, 50, 100])
    grid: int = 100
    normalization: str = "per-window"
    min_duration: int = 5
    kinds: list = field(default_factory=lambda: ["max", "min"])
    quantities: list = field(default_factory=lambda: ["volatility"])
    placement: dict = field(default_factory=dict)
    fits: list = field(default_factory=list)
    conditional: ConditionalSpec | None = None

    def __post_init__(self):
        if isinstance(self.process, dict):
            self.process = ProcessConfig(**self.process)
        self.fits = [f if isinstance(f, FitSpec) else FitSpec(**f) for f in self.fits]
        if isinstance(self.conditional, dict):
            self.conditional = ConditionalSpec(**self.conditional)
        self.placement = {**{q: DEFAULT_PLACEMENT[q] for q in self.quantities}, **self.placement}
        self.validate()

    def validate(self):
        p = self.process
        if p.model not in MODELS:
            raise InvalidArgument(f"unknown process model {p.model!r}; expected one of {MODELS}")
        if p.model == "random-walk":
            if p.increments.get("kind") not in INCREMENT_KINDS:
                raise InvalidArgument(f"unknown increment kind {p.increments.get('kind')!r}")
            p.increment_spec()
        elif p.model == "qmf":
            p.qmf_params()
        elif not p.vol > 0:
            raise InvalidArgument("gbm vol must be > 0")
        if p.volume is not None and not ({"target_corr"} <= set(p.volume) or "sigma_mu" in p.volume):
            raise InvalidArgument("volume needs target_corr or sigma_mu")
        if p.intertrade is not None and "p0" not in p.intertrade:
            raise InvalidArgument("intertrade needs p0")
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgument(f"n must be an integer >= 2, got {self.n}")
        if self.realizations < 1:
            raise InvalidArgument("realizations must be >= 1")
        if not self.orders or any(int(o) != o or o < 1 for o in self.orders):
            raise InvalidArgument(f"orders must be positive integers, got {self.orders}")
        if self.n < 2 * max(self.orders) + 1:
            raise InvalidArgument(f"n={self.n} too short for order {max(self.orders)}")
        if self.grid < 1:
            raise InvalidArgument("grid must be >= 1")
        if self.normalization not in NORMALIZATIONS:
            raise InvalidArgument(f"unknown normalization {self.normalization!r}")
        for k in self.kinds:
            if k not in KINDS:
                raise InvalidArgument(f"unknown peak kind {k!r}")
        for q in self.quantities:
            if q not in QUANTITIES:
                raise InvalidArgument(f"unknown quantity {q!r}")
        if "volume" in self.quantities and p.volume is None:
            raise InvalidArgument("quantity 'volume' needs process.volume")
        if "intertrade" in self.quantities and p.intertrade is None:
            raise InvalidArgument("quantity 'intertrade' needs process.intertrade")
        for q, pl in self.placement.items():
            if pl not in PLACEMENTS:
                raise InvalidArgument(f"unknown placement {pl!r} for {q}")
        for f in self.fits:
            if f.form not in FORMS or f.side not in SIDES or f.kind not in KINDS:
                raise InvalidArgument(f"invalid fit spec {f}")
            if f.quantity not in self.quantities or f.kind not in self.kinds:
                raise InvalidArgument(f"fit {f.label} refers to a profile that is not computed")
            if len(f.range) != 2 or not 0 < f.range[0] < f.range[1]:
                raise InvalidArgument(f"fit {f.label}: range must be [d_lo, d_hi] with 0 < d_lo < d_hi")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidArgument(f"malformed config: {exc}") from None

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise InvalidArgument(f"config is not valid YAML: {exc}") from None
        if not isinstance(data, dict):
            raise InvalidArgument("config must be a mapping")
        return cls.from_dict(_expand_log10_ranges(data))


def _expand_log10_ranges(data: dict) -> dict:
    # fits may give ``log10_range: [lo, hi]`` instead of ``range``
    fits = []
    for f in data.get("fits", []) or []:
        f = dict(f)
        if "log10_range" in f:
            lo, hi = f.pop("log10_range")
            f["range"] = [10.0**lo, 10.0**hi]
        fits.append(f)
    if fits:
        data["fits"] = fits
    return data


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise InvalidArgument(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return resources.files("switchlab").joinpath("presets", f"{name}.yaml").read_text()


def load_config(ref: str) -> ExperimentConfig:
    """Preset name or path to a YAML config file."""
    if ref in PRESETS:
        return ExperimentConfig.from_yaml(preset_text(ref))
    path = Path(ref)
    if not path.is_file():
        raise InvalidArgument(f"{ref!r} is neither a preset ({', '.join(PRESETS)}) nor a config file")
    return ExperimentConfig.from_yaml(path.read_text())
