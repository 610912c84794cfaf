"""
Experiment configuration schemas
JSON experiment files (register model, pulse settings, run block and an
optional experiment block selected by ``kind``) and the request models whose
fields become command-line flags.
"""
import json
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from nvregsim.core.errors import ConfigValidationError
from nvregsim.simulation.geometry import TETRAHEDRAL_BETA, FieldGeometry
from nvregsim.simulation.hamiltonian import NvParameters, ReducedPairModel, build_pair_model
from nvregsim.simulation.propagation import PropagationOptions
from nvregsim.simulation.readout import DEFAULT_CHARGE_WEIGHTS, ChargeMixture
from nvregsim.simulation.sequences import PulseStyle


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ============================
# REGISTER MODEL
# ============================

class NvConfig(StrictModel):
    d_mhz: float = Field(..., gt=2800.0, lt=2950.0)
    e_mhz: float = Field(0.0, ge=0.0)
    q_mhz: float = -4.945
    a_diag_mhz: Tuple[float, float, float] = (-2.62, -2.62, -2.162)
    contrast: float = Field(0.15, gt=0.0, lt=1.0)
    basis: Literal["e1", "e2"] = "e1"
    carrier_mhz: Optional[float] = Field(None, gt=0.0)

    @field_validator("a_diag_mhz")
    @classmethod
    def axial_hyperfine(cls, value):
        if abs(value[0] - value[1]) > 1e-12:
            raise ValueError("hyperfine tensor must be axial (Axx == Ayy)")
        return value

    def to_parameters(self) -> NvParameters:
        return NvParameters(
            d=self.d_mhz, e=self.e_mhz, q=self.q_mhz, a_diag=tuple(self.a_diag_mhz), contrast_alpha=self.contrast
        )


class FieldConfig(StrictModel):
    b_gauss: float = Field(..., ge=0.0)
    b_gauss_per_nv: Optional[Tuple[float, float]] = None
    theta_deg: Tuple[float, float]
    phi_deg: float = 0.0
    beta_deg: float = TETRAHEDRAL_BETA
    reference_nv: Literal[1, 2] = 1

    @field_validator("theta_deg")
    @classmethod
    def polar_range(cls, value):
        if any(not 0.0 <= t < 180.0 for t in value):
            raise ValueError("polar angles must lie in [0, 180)")
        return value

    def to_geometry(self) -> FieldGeometry:
        return FieldGeometry(
            b_mag=self.b_gauss,
            theta=tuple(self.theta_deg),
            phi=self.phi_deg,
            beta=self.beta_deg,
            reference_nv=self.reference_nv,
            b_mag_per_nv=tuple(self.b_gauss_per_nv) if self.b_gauss_per_nv else None,
        )


class ModelConfig(StrictModel):
    kind: Literal["full", "reduced"] = "full"
    nv1: NvConfig
    nv2: NvConfig
    field: FieldConfig
    nu_dip_mhz: float = Field(..., gt=0.0)
    t2_us: Tuple[float, float] = (454.0, 476.0)
    charge_weights: Tuple[float, float, float, float] = DEFAULT_CHARGE_WEIGHTS
    f_init: Tuple[float, float] = (1.0, 1.0)
    nuclear: Literal["mixed", "polarized"] = "mixed"

    @field_validator("t2_us")
    @classmethod
    def positive_t2(cls, value):
        if min(value) <= 0:
            raise ValueError("T2 values must be positive")
        return value

    @field_validator("charge_weights")
    @classmethod
    def normalized_weights(cls, value):
        if any(w < 0 or w > 1 for w in value):
            raise ValueError("charge weights must lie in [0, 1]")
        if abs(sum(value) - 1.0) > 1e-6:
            raise ValueError("charge weights must sum to 1")
        return value

    @field_validator("f_init")
    @classmethod
    def init_range(cls, value):
        if any(not 1.0 / 3.0 - 1e-9 <= f <= 1.0 for f in value):
            raise ValueError("initialization fidelities must lie in [1/3, 1]")
        return value

    @property
    def contrasts(self) -> Tuple[float, float]:
        return (self.nv1.contrast, self.nv2.contrast)

    def mixture(self) -> ChargeMixture:
        return ChargeMixture(tuple(self.charge_weights))

    def build(self):
        """PairModel for ``full``; ReducedPairModel (carrier-frame, on resonance) for ``reduced``."""
        if self.kind == "reduced":
            return ReducedPairModel(self.nu_dip_mhz, contrasts=self.contrasts)
        carriers = None
        if self.nv1.carrier_mhz is not None and self.nv2.carrier_mhz is not None:
            carriers = (self.nv1.carrier_mhz, self.nv2.carrier_mhz)
        return build_pair_model(
            self.nv1.to_parameters(),
            self.nv2.to_parameters(),
            self.field.to_geometry(),
            self.nu_dip_mhz,
            qubit_basis=(self.nv1.basis, self.nv2.basis),
            carriers=carriers,
        )


class PulseConfig(StrictModel):
    rabi_mhz: float = Field(23.7, gt=0.0)
    envelope: Literal["sine", "rectangular", "instantaneous"] = "sine"
    tau1_ns: float = Field(800.0, gt=0.0)
    n_pi: int = Field(8, gt=0)

    @field_validator("n_pi")
    @classmethod
    def xy_cycle(cls, value):
        if value % 4:
            raise ValueError("n_pi must be a multiple of 4")
        return value

    def style(self) -> PulseStyle:
        return PulseStyle(self.rabi_mhz, self.envelope)


class RunConfig(StrictModel):
    seed: int = 0
    step_density: Optional[float] = Field(None, gt=0.0)
    frame: Literal["lab", "rwa"] = "lab"
    sample: Literal["start", "midpoint"] = "start"
    crosstalk: bool = True
    workers: Optional[int] = Field(None, ge=1)
    output_dir: Optional[str] = None
    format: Literal["csv", "json", "both"] = "both"

    def options(self, step_density: float) -> PropagationOptions:
        return PropagationOptions(step_density=step_density, frame=self.frame, sample=self.sample, crosstalk=self.crosstalk)


# ============================
# EXPERIMENT BLOCKS
# ============================

class DeerExperiment(StrictModel):
    kind: Literal["deer"] = "deer"
    tau2_ns: Optional[List[float]] = None
    tau2_max_ns: float = Field(400.0, gt=0.0)
    points: int = Field(41, ge=5)
    n_pi: int = Field(32, gt=0)
    target: Literal[1, 2] = 2
    control_state: Literal["0", "1"] = "0"
    projections: List[Literal["X", "Y"]] = ["X", "Y"]
    use_mixture: bool = False


class CalibrationExperiment(StrictModel):
    kind: Literal["calibrate"] = "calibrate"
    n_rep: int = Field(4, ge=1)
    points: int = Field(41, ge=5)
    tau2_max_ns: Optional[float] = Field(None, gt=0.0)


class Tau1Experiment(StrictModel):
    kind: Literal["tau1"] = "tau1"
    tau1_ns: List[float] = [200.0, 400.0, 600.0, 800.0, 1000.0, 1200.0]
    n_xy: int = Field(1, ge=1)
    target: Literal[1, 2] = 1


class RepetitiveExperiment(StrictModel):
    kind: Literal["repetitive"] = "repetitive"
    input_states: Optional[List[Tuple[str, str]]] = None
    n_max: int = Field(16, ge=3)
    reverse: bool = True
    use_mixture: bool = False


class RbExperiment(StrictModel):
    kind: Literal["rb"] = "rb"
    lengths: List[int] = [1, 2, 3, 4, 6, 8]
    n_random: int = Field(20, ge=1)
    backend: Literal["pulse", "ideal"] = "pulse"
    depolarizing: float = Field(0.0, ge=0.0, le=1.0)
    # EPC1q for the EPG2q extraction: given, or measured with the named mode
    epc_1q: Optional[float] = Field(None, ge=0.0, lt=1.0)
    single_qubit: Literal["stripped", "bare", "skip"] = "stripped"


class Rb1qExperiment(StrictModel):
    kind: Literal["rb1q"] = "rb1q"
    mode: Literal["bare", "stripped"] = "stripped"
    lengths: List[int] = [1, 2, 4, 8, 16]
    n_random: int = Field(20, ge=1)
    target: Literal[1, 2] = 1


class AblationExperiment(StrictModel):
    kind: Literal["ablation"] = "ablation"
    rabi_mhz: List[float] = [10.0, 15.0, 23.7, 30.0]
    n_cliff: int = Field(2, ge=1)
    n_random: int = Field(10, ge=1)
    spam_a: float = Field(1.0, gt=0.0)
    spam_y0: float = 0.0
    spam_scale: Optional[float] = Field(None, gt=0.0)


class FidelityExperiment(StrictModel):
    kind: Literal["fidelity"] = "fidelity"
    rabi_mhz: List[float] = [10.0, 15.0, 23.7, 30.0, 40.0]


ExperimentBlock = Annotated[
    Union[
        DeerExperiment, CalibrationExperiment, Tau1Experiment, RepetitiveExperiment,
        RbExperiment, Rb1qExperiment, AblationExperiment, FidelityExperiment,
    ],
    Field(discriminator="kind"),
]


class ExperimentConfig(StrictModel):
    model: ModelConfig
    pulses: PulseConfig = PulseConfig()
    run: RunConfig = RunConfig()
    experiment: Optional[ExperimentBlock] = None

    @model_validator(mode="after")
    def known_carriers(self):
        nvs = (self.model.nv1, self.model.nv2)
        if self.model.kind == "full" and sum(nv.carrier_mhz is None for nv in nvs) == 1:
            raise ValueError("carriers must be given for both NVs or for neither")
        return self

    def block(self, block_type):
        """The experiment block if it has ``block_type``'s kind, else that block's defaults."""
        if self.experiment is None:
            return block_type()
        if not isinstance(self.experiment, block_type):
            raise ConfigValidationError(
                f"config holds a {self.experiment.kind!r} experiment block, not {block_type().kind!r}",
                {"fields": [{"field": "experiment.kind", "message": f"expected {block_type().kind!r}"}]},
            )
        return self.experiment


def validation_details(exc: ValidationError) -> List[dict]:
    return [{"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]} for err in exc.errors()]


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate a JSON config; every failure is a ConfigValidationError."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigValidationError(f"config file not found: {path}", {"fields": [{"field": "config", "message": "not found"}]}) from None
    except json.JSONDecodeError as exc:
        raise ConfigValidationError(f"config file is not valid JSON: {exc}", {"fields": [{"field": "config", "message": str(exc)}]}) from None
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        details = validation_details(exc)
        raise ConfigValidationError(f"invalid experiment config: {details[0]['field']}: {details[0]['message']}", {"fields": details}) from None


# ============================
# COMMAND REQUESTS
# ============================

class GeometrySolveRequest(BaseModel):
    nu1: float = Field(..., gt=0.0, description="lower ODMR transition (MHz)")
    nu2: float = Field(..., gt=0.0, description="upper ODMR transition (MHz)")
    d: float = Field(2870.0, gt=0.0, description="zero-field splitting (MHz)")
    e: float = Field(0.0, ge=0.0, description="strain splitting (MHz)")
    theta_b: Optional[float] = Field(None, description="second NV's polar angle (deg) to solve the azimuth")
    beta: float = Field(TETRAHEDRAL_BETA, description="angle between the NV axes (deg)")


class GeometryForwardRequest(BaseModel):
    b_gauss: float = Field(..., ge=0.0, description="field magnitude (G)")
    theta: float = Field(..., ge=0.0, lt=180.0, description="polar angle (deg)")
    phi: float = Field(0.0, description="azimuth (deg)")
    d: float = Field(2870.0, gt=0.0, description="zero-field splitting (MHz)")
    e: float = Field(0.0, ge=0.0, description="strain splitting (MHz)")


class DistanceRequest(BaseModel):
    nu_dip: float = Field(..., gt=0.0, description="effective dipolar coupling (MHz)")


class ChargeFitRequest(BaseModel):
    histogram: str = Field(..., description="CSV with columns n_photons,count")
    method: Literal["ml", "ls"] = Field("ml", description="maximum likelihood or least squares")
    components: int = Field(3, ge=1, description="number of Poisson components")
    window_ms: float = Field(3.5, gt=0.0, description="gating window (ms)")
    joint: Optional[str] = Field(None, description="CSV with columns n_init,n_read for the threshold table")
    max_threshold: int = Field(15, ge=0, description="largest n_thresh in the threshold table")
    output_dir: Optional[str] = Field(None, description="directory for the report")


class AsymmetryRequest(BaseModel):
    p_minus: List[float] = Field([0.4, 0.55, 0.7, 0.85, 1.0], description="NV- probabilities to sweep")
    tau2_max_ns: float = Field(400.0, gt=0.0, description="largest tau2 of each DEER trace (ns)")
    points: int = Field(41, ge=5, description="tau2 points per trace")
    n_pi: int = Field(32, gt=0, description="pi pulses of the DEER sequence")

    @field_validator("p_minus")
    @classmethod
    def probabilities(cls, value):
        if any(not 0.0 < p <= 1.0 for p in value):
            raise ValueError("NV- probabilities must lie in (0, 1]")
        return value


class PhotophysicsRequest(BaseModel):
    rate_column: Literal["gupta", "adapted", "both"] = Field("both", description="rate set")
    b_gauss: float = Field(105.33, ge=0.0, description="field magnitude for the SPAM estimate (G)")
    theta: float = Field(74.08, ge=0.0, lt=180.0, description="misalignment angle (deg)")
    d: float = Field(2867.27, gt=0.0, description="zero-field splitting (MHz)")
    b_max: float = Field(120.0, gt=0.0, description="largest field of the contrast curve (G)")
    b_points: int = Field(13, ge=2, description="points on the contrast curve")
    laser_ns: float = Field(3000.0, ge=0.0, description="green pump length (ns)")
    wait_ns: float = Field(1000.0, ge=0.0, description="dark wait (ns)")
    ground_only: bool = Field(False, description="mix the ground manifold only")
    output_dir: Optional[str] = Field(None, description="directory for the report")
