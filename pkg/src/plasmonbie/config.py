"""Versioned JSON run configuration (strict: unknown fields are rejected)."""

from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, model_validator

SCHEMA_VERSION = 1
COMMANDS = ("spectrum", "polarization", "resonance", "cross-sections", "bounds",
            "scatcoef", "hybridize", "greenmap")


def _complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError("complex numbers are written as [re, im]")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool) or not isinstance(v, (int, float, complex)):
        raise ValueError("expected a number or [re, im]")
    return complex(v)


Cplx = Annotated[complex, BeforeValidator(_complex),
                 PlainSerializer(lambda z: [z.real, z.imag], return_type=list)]


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Ellipse(Strict):
    kind: Literal["ellipse"]
    a: float = Field(gt=0)
    b: float = Field(gt=0)
    center: Tuple[float, float] = (0.0, 0.0)
    rotation: float = 0.0


class Disk(Strict):
    kind: Literal["disk"]
    radius: float = Field(1.0, gt=0)
    center: Tuple[float, float] = (0.0, 0.0)


class FourierStar(Strict):
    kind: Literal["fourier-star"]
    r0: float = Field(1.0, gt=0)
    cos: List[float] = []
    sin: List[float] = []
    center: Tuple[float, float] = (0.0, 0.0)
    rotation: float = 0.0
    max_harmonic: int = Field(16, ge=1)


class Ellipsoid(Strict):
    kind: Literal["ellipsoid"]
    p1: float = Field(gt=0)
    p2: float = Field(gt=0)
    p3: float = Field(gt=0)


class Sphere(Strict):
    kind: Literal["sphere"]


Shape = Annotated[Union[Ellipse, Disk, FourierStar, Ellipsoid, Sphere], Field(discriminator="kind")]


class DrudeBlock(Strict):
    mu0: float = 1.0
    filling: float = Field(0.0, ge=0, le=1)
    omega0: float = Field(0.0, ge=0)
    tau: Optional[float] = Field(None, gt=0)     # None means no damping


class MaterialBlock(Strict):
    eps_m: float = Field(1.0, gt=0)
    mu_m: float = Field(1.0, gt=0)
    eps_c: Cplx = 1.0 + 0j
    mu_c: Optional[Cplx] = None
    drude: Optional[DrudeBlock] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.mu_c is None) == (self.drude is None):
            raise ValueError("give exactly one of mu_c (fixed) or drude")
        return self


class Grid(Strict):
    """Either explicit values or an inclusive linear range."""

    values: Optional[List[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    num: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _shape(self):
        explicit = self.values is not None
        ranged = None not in (self.start, self.stop, self.num)
        if explicit == ranged:
            raise ValueError("give either values or start/stop/num")
        if explicit and len(self.values) == 0:
            raise ValueError("grid is empty")
        return self

    def array(self):
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        return np.linspace(self.start, self.stop, self.num)


class LambdaGrid(Strict):
    re: Grid
    im: Grid


class Raster(Strict):
    origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    u: Tuple[float, float, float] = (0.0, 1.0, 0.0)
    v: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    s: Grid
    t: Grid


class Tune(Strict):
    """Move omega onto the hybridized resonance (j, branch) inside the range."""

    mode: int = Field(1, ge=1, le=3)
    branch: int = Field(0, ge=0)
    range: Tuple[float, float]


class Particles(Strict):
    centers: List[Tuple[float, float, float]]
    delta: float = Field(gt=0)
    separation_floor: float = Field(5.0, gt=0)


class Numeric(Strict):
    N: int = Field(256, ge=16)
    n_max: int = Field(3, ge=1)
    omega: Optional[Grid] = None
    delta: float = Field(1.0, gt=0)
    lambdas: Optional[List[Cplx]] = None
    lambda_grid: Optional[LambdaGrid] = None
    modes: Optional[List[int]] = None
    n_scan: int = Field(2001, ge=11)
    form: Literal["paper", "dipole"] = "paper"
    quasi_static: bool = False
    x0: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    raster: Optional[Raster] = None
    tune: Optional[Tune] = None
    sphere_order: int = Field(8, ge=2)


class Output(Strict):
    csv: Optional[str] = None
    json_path: Optional[str] = Field(None, alias="json")


class RunConfig(Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    command: Literal[COMMANDS]
    shape: Optional[Shape] = None
    particles: Optional[Particles] = None
    material: Optional[MaterialBlock] = None
    numeric: Numeric = Numeric()
    output: Output = Output()

    @model_validator(mode="after")
    def _requirements(self):
        c, n = self.command, self.numeric
        need_shape = c in ("spectrum", "polarization", "resonance", "cross-sections", "bounds",
                           "scatcoef")
        if need_shape and self.shape is None:
            raise ValueError(f"command {c!r} needs a shape")
        if c in ("hybridize", "greenmap") and self.particles is None:
            raise ValueError(f"command {c!r} needs particles")
        if c in ("resonance", "cross-sections", "scatcoef", "hybridize", "greenmap") \
                and self.material is None:
            raise ValueError(f"command {c!r} needs a material")
        if c in ("resonance", "cross-sections", "scatcoef", "hybridize") and n.omega is None:
            raise ValueError(f"command {c!r} needs numeric.omega")
        if c == "polarization" and n.lambdas is None and (n.omega is None or self.material is None):
            raise ValueError("polarization needs numeric.lambdas or numeric.omega with a material")
        if c == "bounds" and n.lambda_grid is None and (n.omega is None or self.material is None):
            raise ValueError("bounds needs numeric.lambda_grid, or numeric.omega with a material")
        if c == "greenmap":
            if n.raster is None:
                raise ValueError("greenmap needs numeric.raster")
            if n.omega is None and n.tune is None:
                raise ValueError("greenmap needs numeric.omega or numeric.tune")
        if n.N % 2:
            raise ValueError("numeric.N must be even")
        return self


def load_config(text):
    return RunConfig.model_validate_json(text)
