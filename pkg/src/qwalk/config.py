"""Experiment configuration: a single JSON document, plus the built-in presets."""
import json
from dataclasses import asdict, dataclass, field

import numpy as np

ENGINES = ("spectral", "position", "truncated-1", "truncated-2")
STATE_KINDS = ("localized", "gaussian", "superposition", "eigenbasis", "random")
OBSERVABLES = ("mean", "decomposition", "newton_wigner", "spread")


def encode_complex(values):
    """Complex sequence -> list of ``[re, im]`` pairs (JSON friendly)."""
    return [[float(np.real(v)), float(np.imag(v))] for v in values]


def decode_complex(values):
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            re, im = v
            out.append(complex(re, im))
        else:
            out.append(complex(v))
    return np.array(out)


@dataclass
class ModelConfig:
    family: str
    dimension: int
    mass: float = 0.0


@dataclass
class StateConfig:
    kind: str
    x0: list = None
    spinor: list = None  # [re, im] pairs
    k0: list = None
    sigma: list = None
    branch: list = None  # [s] or [s, p]
    c_plus: list = None  # [re, im]
    c_minus: list = None
    p: int = 1
    weights: list = None  # [re, im] pairs, walk eigenbasis order
    centre: list = None


@dataclass
class ExperimentConfig:
    name: str
    model: ModelConfig
    grid: list
    state: StateConfig
    engine: str = "spectral"
    steps: int = 10
    stride: int = 1
    observables: list = field(default_factory=lambda: ["mean"])
    snapshots: list = field(default_factory=list)
    marginal_axes: list = None
    dumps: bool = False
    seed: int = 0

    def validate(self):
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.state.kind not in STATE_KINDS:
            raise ValueError(f"state kind must be one of {STATE_KINDS}, got {self.state.kind!r}")
        bad = [o for o in self.observables if o not in OBSERVABLES]
        if bad:
            raise ValueError(f"unknown observables {bad}")
        if int(self.steps) < 0 or int(self.stride) < 1:
            raise ValueError("steps must be >= 0 and stride >= 1")
        if len(self.grid) != self.model.dimension:
            raise ValueError(f"grid needs {self.model.dimension} sizes, got {self.grid}")
        if self.engine.startswith("truncated") and self.state.kind not in ("gaussian", "superposition", "eigenbasis"):
            raise ValueError("the truncated engine expands around a packet's k0")
        return self

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["model"] = ModelConfig(**data["model"])
        data["state"] = StateConfig(**data["state"])
        return cls(**data).validate()

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())


_R2 = 1 / np.sqrt(2)


def _presets():
    fig3_state = StateConfig(kind="localized", x0=[32, 32, 32], spinor=encode_complex([1, 0, 0, 0]))
    return {
        "fig2": ExperimentConfig(
            name="fig2",
            model=ModelConfig("dirac", 3, 0.02),
            grid=[64, 64, 64],
            state=StateConfig(kind="gaussian", k0=[0.0, 0.01, 0.0], sigma=[1 / 32] * 3, branch=[1, 1]),
            steps=150,
            stride=10,
            observables=["mean", "spread"],
            snapshots=[0, 50, 100, 150],
            marginal_axes=[0, 1],
        ),
        "fig3": ExperimentConfig(
            name="fig3",
            model=ModelConfig("dirac", 3, 0.03),
            grid=[32, 32, 32],
            state=fig3_state,
            engine="position",
            steps=28,
            stride=4,
            observables=["mean", "spread"],
            snapshots=[0, 8, 16, 28],
            marginal_axes=[0, 1],
        ),
        "fig4": ExperimentConfig(
            name="fig4",
            model=ModelConfig("dirac", 3, 0.03),
            grid=[32, 32, 32],
            state=fig3_state,
            engine="position",
            steps=28,
            stride=28,
            observables=["mean"],
            snapshots=[28],
            marginal_axes=[0, 2],
        ),
        "fig5": ExperimentConfig(
            name="fig5",
            model=ModelConfig("dirac", 1, 0.15),
            grid=[2048],
            state=StateConfig(
                kind="superposition", k0=[0.01 * np.pi], sigma=[1 / 40], c_plus=[_R2, 0.0], c_minus=[_R2, 0.0]
            ),
            steps=150,
            stride=1,
            observables=["mean", "decomposition", "newton_wigner"],
        ),
        "fig6": ExperimentConfig(
            name="fig6",
            model=ModelConfig("dirac", 3, 0.3),
            grid=[64, 64, 64],
            state=StateConfig(
                kind="eigenbasis",
                k0=[0.0, 0.01 * np.pi, 0.0],
                sigma=[1 / 32] * 3,
                weights=encode_complex([_R2, 0, _R2, 0]),
            ),
            steps=200,
            stride=2,
            observables=["mean"],
        ),
    }


PRESET_NOTES = {
    "fig2": "massive 3D packet drifting along y and spreading; z-summed marginals",
    "fig3": "localized spinor (1,0,0,0) on a 32^3 BCC grid; x-y marginals",
    "fig4": "same state at t=28; x-z marginal (summed along y)",
    "fig5": "1D particle/antiparticle superposition; mean-position decomposition",
    "fig6": "3D superposition on the (+,+) and (-,+) branches; jittering mean position",
}


def preset(name):
    presets = _presets()
    if name not in presets:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    return presets[name].validate()


def preset_names():
    return sorted(_presets())
