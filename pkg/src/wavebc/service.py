"""HTTP service wrapping the reconstruction pipeline.

Endpoints run the same library calls the tests assert on and return their
structured reports as JSON.  Compute happens synchronously in the request;
experiments at default resolution take tens of seconds, so deploy behind a
generous timeout.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .checks import control_check, frechet_check, identity_check, operator_check
from .experiments import EXPERIMENT_IDS, ExperimentConfig, run_experiment


class GridParams(BaseModel):
    nx: int = 500
    t_final: float = 5.0
    dt_ratio: float = 0.1


class ExperimentRequest(GridParams):
    experiment_id: int = Field(ge=1, le=3)
    n_modes: int = 10
    noise_levels: list[float] = [0.0, 0.01, 0.05]
    seed: int = 0
    n_seeds: int = 10
    eps: float = 0.001


class ReconstructRequest(GridParams):
    truth_id: int = Field(default=1, ge=1, le=3)
    n_modes: int = 10
    noise_level: float = 0.0
    seed: int = 0
    eps: float = 0.001


class IdentityCheckRequest(GridParams):
    n_pairs: int = 5
    seed: int = 0


class ControlCheckRequest(GridParams):
    n_modes: int = 10


class FrechetCheckRequest(GridParams):
    eps: float = 0.01


class OperatorCheckRequest(GridParams):
    seed: int = 0
    n_traces: int = 100
    n_pairs: int = 3


class CoefficientsModel(BaseModel):
    n_modes: int
    constant: float
    cos: list[float]
    sin: list[float]


class LevelReportModel(BaseModel):
    level: float
    seeds: list[int]
    errors: list[float]
    median_error: float
    recon: list[float]
    coefficients: CoefficientsModel


class ExperimentReportModel(BaseModel):
    experiment_id: int
    x: list[float]
    truth: list[float]
    truth_label: str
    levels: list[LevelReportModel]
    provenance: dict


class CheckItemModel(BaseModel):
    name: str
    value: float
    lower: float
    upper: float
    passed: bool


class CheckReportModel(BaseModel):
    name: str
    passed: bool
    items: list[CheckItemModel]


class HealthModel(BaseModel):
    status: str
    version: str


def create_app() -> FastAPI:
    app = FastAPI(title="wavebc", version=__version__,
                  description="Boundary-control reconstruction service for the "
                              "1D acoustic inverse problem.")

    @app.get("/health", response_model=HealthModel)
    def health() -> HealthModel:
        return HealthModel(status="ok", version=__version__)

    @app.post("/experiments/run", response_model=ExperimentReportModel)
    def experiments_run(req: ExperimentRequest) -> ExperimentReportModel:
        if req.experiment_id not in EXPERIMENT_IDS:
            raise HTTPException(422, f"experiment_id must be one of {EXPERIMENT_IDS}")
        config = ExperimentConfig(
            experiment_id=req.experiment_id, nx=req.nx, t_final=req.t_final,
            dt_ratio=req.dt_ratio, n_modes=req.n_modes,
            noise_levels=tuple(req.noise_levels), seed=req.seed,
            n_seeds=req.n_seeds, eps=req.eps)
        report = run_experiment(config)
        return ExperimentReportModel.model_validate(report.to_dict())

    @app.post("/reconstruct", response_model=ExperimentReportModel)
    def reconstruct_once(req: ReconstructRequest) -> ExperimentReportModel:
        config = ExperimentConfig(
            experiment_id=req.truth_id, nx=req.nx, t_final=req.t_final,
            dt_ratio=req.dt_ratio, n_modes=req.n_modes,
            noise_levels=(req.noise_level,), seed=req.seed, n_seeds=1,
            eps=req.eps)
        report = run_experiment(config)
        return ExperimentReportModel.model_validate(report.to_dict())

    @app.post("/checks/identity", response_model=CheckReportModel)
    def checks_identity(req: IdentityCheckRequest) -> CheckReportModel:
        report = identity_check(req.nx, req.t_final, req.dt_ratio,
                                n_pairs=req.n_pairs, seed=req.seed)
        return CheckReportModel.model_validate(report.to_dict())

    @app.post("/checks/control", response_model=CheckReportModel)
    def checks_control(req: ControlCheckRequest) -> CheckReportModel:
        report = control_check(req.nx, req.t_final, req.dt_ratio,
                               n_modes=req.n_modes)
        return CheckReportModel.model_validate(report.to_dict())

    @app.post("/checks/frechet", response_model=CheckReportModel)
    def checks_frechet(req: FrechetCheckRequest) -> CheckReportModel:
        report = frechet_check(req.nx, req.t_final, req.dt_ratio, eps=req.eps)
        return CheckReportModel.model_validate(report.to_dict())

    @app.post("/checks/operators", response_model=CheckReportModel)
    def checks_operators(req: OperatorCheckRequest) -> CheckReportModel:
        report = operator_check(req.nx, req.t_final, req.dt_ratio,
                                seed=req.seed, n_traces=req.n_traces,
                                n_pairs=req.n_pairs)
        return CheckReportModel.model_validate(report.to_dict())

    return app


app = create_app()
