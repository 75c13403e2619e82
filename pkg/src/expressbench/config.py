"""Run configuration and its YAML form.

A full example (every key shown with its default where one exists)::

    version: 1
    experiment: frame-potentials   # resources | frame-potentials | expressibility
                                   # | haar-reference | threshold-scan
    seed: 20240917                 # mandatory, unsigned 64-bit
    threads: 1
    output_dir: out/frame-potentials
    ensembles:
      - family: FQNN
        num_qubits: [10]
        layers: [2, 3, 12]
      - family: CMPS
        num_qubits: [10]
        bond_dim: [2]
      - family: HAAR
        num_qubits: [10]
    sampling:
      resource_samples: 1000
      reference_samples: 1000
      pairs: 1000000
      t_max: 6
    estimation:
      bandwidth: scott             # or a positive number
      reflect: true
      jackknife_blocks: 100
    normalization: empirical       # or asymptotic
    threshold:
      quantity: entanglement       # entanglement | magic | kl
      target: 0.9
    pool_cache: null               # directory for reusable fidelity pools
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from .ensembles import EnsembleSpec, Family
from .errors import ValidationError

CONFIG_VERSION = 1
CONFIG_DIALECT = f"yaml/v{CONFIG_VERSION}"
EXPERIMENTS = ("resources", "frame-potentials", "expressibility", "haar-reference", "threshold-scan")


def _ints(v) -> tuple[int, ...] | None:
    if v is None:
        return None
    if isinstance(v, int):
        v = [v]
    return tuple(int(x) for x in v)


@dataclass(frozen=True)
class GridEntry:
    family: Family
    num_qubits: tuple[int, ...]
    layers: tuple[int, ...] | None = None
    bond_dim: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "num_qubits", _ints(self.num_qubits))
        object.__setattr__(self, "layers", _ints(self.layers))
        object.__setattr__(self, "bond_dim", _ints(self.bond_dim))
        if not self.num_qubits:
            raise ValidationError(f"{self.family.value}: empty num_qubits list")
        need = {Family.FQNN: "layers", Family.MPS: "bond_dim", Family.CMPS: "bond_dim"}.get(self.family)
        for name in ("layers", "bond_dim"):
            val = getattr(self, name)
            if name == need and not val:
                raise ValidationError(f"{self.family.value} needs a {name} list")
            if name != need and val:
                raise ValidationError(f"{self.family.value} takes no {name}")

    @property
    def hyperparameters(self) -> tuple:
        if self.family is Family.FQNN:
            return self.layers
        if self.family in (Family.MPS, Family.CMPS):
            return self.bond_dim
        return (None,)

    def specs(self, seed: int) -> list[EnsembleSpec]:
        out = []
        for n in self.num_qubits:
            for hp in self.hyperparameters:
                if self.family is Family.FQNN:
                    out.append(EnsembleSpec(self.family, n, layers=hp, master_seed=seed))
                elif hp is not None:
                    out.append(EnsembleSpec(self.family, n, bond_dim=hp, master_seed=seed))
                else:
                    out.append(EnsembleSpec(self.family, n, master_seed=seed))
        return out

    def to_dict(self) -> dict:
        d = {"family": self.family.value, "num_qubits": list(self.num_qubits)}
        if self.layers is not None:
            d["layers"] = list(self.layers)
        if self.bond_dim is not None:
            d["bond_dim"] = list(self.bond_dim)
        return d


@dataclass(frozen=True)
class SamplingConfig:
    resource_samples: int = 1000
    reference_samples: int = 1000
    pairs: int = 100_000
    t_max: int = 6

    def __post_init__(self):
        for k, v in asdict(self).items():
            if int(v) < 1:
                raise ValidationError(f"sampling.{k} must be >= 1")


@dataclass(frozen=True)
class EstimationConfig:
    bandwidth: str | float = "scott"
    reflect: bool = True
    jackknife_blocks: int = 100

    def __post_init__(self):
        if self.bandwidth != "scott" and not (isinstance(self.bandwidth, (int, float)) and self.bandwidth > 0):
            raise ValidationError("estimation.bandwidth must be 'scott' or a positive number")
        if self.jackknife_blocks < 10:
            raise ValidationError("estimation.jackknife_blocks must be >= 10")


@dataclass(frozen=True)
class ThresholdConfig:
    quantity: str = "entanglement"
    target: float = 0.9

    def __post_init__(self):
        if self.quantity not in ("entanglement", "magic", "kl"):
            raise ValidationError(f"unknown threshold quantity {self.quantity!r}")
        if self.quantity != "kl" and not 0 <= self.target < 1:
            raise ValidationError("resource targets must lie in [0, 1)")
        if self.quantity == "kl" and not self.target > 0:
            raise ValidationError("KL thresholds must be positive")


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    seed: int
    ensembles: tuple[GridEntry, ...]
    threads: int = 1
    output_dir: str = "out"
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    estimation: EstimationConfig = field(default_factory=EstimationConfig)
    normalization: str = "empirical"
    threshold: ThresholdConfig = field(default_factory=ThresholdConfig)
    pool_cache: str | None = None
    version: int = CONFIG_VERSION

    def __post_init__(self):
        if self.version != CONFIG_VERSION:
            raise ValidationError(f"unsupported config version {self.version}")
        if self.experiment not in EXPERIMENTS:
            raise ValidationError(f"unknown experiment {self.experiment!r}")
        if self.seed is None or not 0 <= int(self.seed) < 1 << 64:
            raise ValidationError("seed is mandatory and must be an unsigned 64-bit integer")
        if self.threads < 1:
            raise ValidationError("threads must be >= 1")
        if self.normalization not in ("empirical", "asymptotic"):
            raise ValidationError(f"unknown normalization {self.normalization!r}")
        object.__setattr__(self, "ensembles", tuple(self.ensembles))
        if not self.ensembles:
            raise ValidationError("config lists no ensembles")

    def specs(self) -> list[EnsembleSpec]:
        return [s for g in self.ensembles for s in g.specs(self.seed)]

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "experiment": self.experiment,
            "seed": int(self.seed),
            "threads": self.threads,
            "output_dir": self.output_dir,
            "ensembles": [g.to_dict() for g in self.ensembles],
            "sampling": asdict(self.sampling),
            "estimation": asdict(self.estimation),
            "normalization": self.normalization,
            "threshold": asdict(self.threshold),
            "pool_cache": self.pool_cache,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown config keys: {sorted(extra)}")
        if "seed" not in d:
            raise ValidationError("seed is mandatory")
        return cls(
            experiment=d["experiment"],
            seed=int(d["seed"]),
            ensembles=tuple(GridEntry(**g) for g in d.get("ensembles", ())),
            threads=int(d.get("threads", 1)),
            output_dir=str(d.get("output_dir", "out")),
            sampling=SamplingConfig(**d.get("sampling", {})),
            estimation=EstimationConfig(**d.get("estimation", {})),
            normalization=d.get("normalization", "empirical"),
            threshold=ThresholdConfig(**d.get("threshold", {})),
            pool_cache=d.get("pool_cache"),
            version=int(d.get("version", CONFIG_VERSION)),
        )

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_yaml(cls, text: str) -> "RunConfig":
        data = yaml.safe_load(text)
        if not isinstance(data, dict):
            raise ValidationError("config document must be a mapping")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_yaml(Path(path).read_text(encoding="utf-8"))


# small grids used when no --config is given
DEFAULT_GRIDS = {
    "resources": [
        {"family": "HAAR", "num_qubits": [6]},
        {"family": "FQNN", "num_qubits": [6], "layers": [1, 2, 3, 6]},
        {"family": "MPS", "num_qubits": [6], "bond_dim": [1, 2, 4]},
        {"family": "CMPS", "num_qubits": [6], "bond_dim": [1, 2]},
    ],
    "frame-potentials": [
        {"family": "HAAR", "num_qubits": [4]},
        {"family": "STABILIZER", "num_qubits": [4]},
        {"family": "FQNN", "num_qubits": [4], "layers": [1, 2, 4]},
        {"family": "CMPS", "num_qubits": [4], "bond_dim": [1, 2]},
    ],
    "expressibility": [
        {"family": "FQNN", "num_qubits": [6], "layers": [1, 2, 4]},
        {"family": "MPS", "num_qubits": [6], "bond_dim": [1, 2, 4]},
        {"family": "CMPS", "num_qubits": [6], "bond_dim": [1]},
    ],
    "haar-reference": [{"family": "HAAR", "num_qubits": [4, 6, 8]}],
    "threshold-scan": [
        {"family": "MPS", "num_qubits": [4, 6], "bond_dim": [1, 2, 3, 4, 6, 8]},
        {"family": "CMPS", "num_qubits": [4, 6], "bond_dim": [1, 2]},
    ],
}


def default_config_dict(experiment: str) -> dict:
    if experiment not in EXPERIMENTS:
        raise ValidationError(f"unknown experiment {experiment!r}")
    return {"experiment": experiment, "ensembles": DEFAULT_GRIDS[experiment], "output_dir": f"out/{experiment}"}
