"""End-to-end orchestration: model, evolution, decoherence, pointer basis,
Wigner symbols, classical limit and the phase-space cross-checks.

Every stage writes a plain-dict section into the report. Timing lives in a
separate ``timing`` section so the rest is reproducible bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .algebra import Observable, StateFunctional, check_state, normalize, pair
from .climit import (
    build_model,
    classical_distribution,
    constancy_check,
    eigen_symbol_limit,
    hamiltonian_flow,
    invariant_volume,
    phase_space_evolution,
    positivity_check,
)
from .climit.limits import band_projector_state
from .config import STAGES, RunConfig
from .diagonal import find_pointer_basis, off_diagonal_mass, reconstruct_state, transform_state
from .errors import InvalidArgumentError, SidlabError, StageError
from .evolution import (
    EvolutionParams,
    decoherence_time,
    decohered_state,
    evolve_observable,
    evolve_state,
    mean_value_parts,
    pre_revival_times,
)
from .phase_space.poly import PolySymbol
from .phase_space.star import commuting_product_check, star_product
from .phase_space.symbols import _realization, density_kernel, observable_symbol, state_symbol


@dataclass
class RunReport:
    config: dict
    seed: int
    stages: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    def to_dict(self, timing: bool = True) -> dict:
        out = {"config": self.config, "seed": self.seed, "stages": self.stages, "files": self.files}
        if timing:
            out["timing"] = self.timing
        return out

    def residuals(self) -> dict:
        """The acceptance-relevant numbers, flattened."""
        s = self.stages
        out = {}
        if "state" in s:
            out["state_min_eigenvalue"] = s["state"]["min_eigenvalue"]
        if "evolution" in s:
            out["t_D"] = s["evolution"]["decoherence"]["t_D"]
        if "decoherence" in s:
            out["window_end_residual"] = s["decoherence"]["window_end_residual"]
        if "diagonalization" in s:
            out["unitarity_residual"] = s["diagonalization"]["unitarity_residual"]
        if "appendix_a" in s:
            out["route_residual"] = s["appendix_a"]["route_residual"]
        return out


# --------------------------------------------------------------------------- inputs

def _profile(grid, center, width):
    return np.exp(-0.25 * ((grid.nodes - center) / width) ** 2)


def build_state(cfg: RunConfig, model) -> StateFunctional:
    """Gaussian energy profile ``g(w)^2`` with a Gaussian regular kernel.

    ``rho_R(w, w') = c g(w) g(w') exp(-(w - w')^2 / (2 s^2))`` where ``c`` is
    ``coherence_weight`` and ``s`` is ``coherence``. The o-dependence is a
    Gaussian profile about the middle of the label grid.
    """
    st = cfg["state"]
    gw, go = model.omega_grid, model.p_grid
    g = _profile(gw, st["center"], st["width"])
    if go.size > 1:
        mid = 0.5 * (go.nodes[0] + go.nodes[-1])
        h = np.exp(-0.5 * ((go.nodes - mid) / (0.25 * (go.nodes[-1] - go.nodes[0]))) ** 2)
    else:
        h = np.ones(1)
    idx = np.arange(go.size)
    sing = np.zeros((gw.size, go.size, go.size), dtype=complex)
    sing[:, idx, idx] = (g**2)[:, None] * h[None, :] / go.weights[None, :]
    gaps = gw.nodes[:, None] - gw.nodes[None, :]
    reg_w = st["coherence_weight"] * np.outer(g, g) * np.exp(-0.5 * (gaps / st["coherence"]) ** 2)
    reg = np.zeros((gw.size, gw.size, go.size, go.size), dtype=complex)
    reg[:, :, idx, idx] = reg_w[:, :, None] * (h / go.weights)[None, None, :]
    return normalize(StateFunctional(gw, go, sing, reg))


def build_observable(cfg: RunConfig, model) -> Observable:
    """``A_S = a(H)`` polynomial in energy plus a constant regular kernel."""
    ob = cfg["observable"]
    gw, go = model.omega_grid, model.p_grid
    a = np.polynomial.polynomial.polyval(gw.nodes, ob["coefficients"])
    A = Observable.diagonal(gw, go, np.repeat(a[:, None], go.size, axis=1))
    reg = np.zeros((gw.size, gw.size, go.size, go.size), dtype=complex)
    idx = np.arange(go.size)
    reg[:, :, idx, idx] = ob["regular"] / go.weights
    return Observable(gw, go, A.singular, reg)


def ridge_start(model, omega: float, p=None) -> tuple[np.ndarray, float]:
    """A point on ``H = omega`` (and ``P = p``) inside the chart, with a flow time."""
    if model.name == "free_translation":
        q0 = model.chart.q_grids[0].nodes[0]
        span = model.chart.q_grids[0].nodes[-1] - q0
        # dq/dt = 1, so the flow crosses 80% of the box
        return np.array([q0 + 0.1 * span, omega]), 0.8 * span
    if model.name == "oscillator":
        return np.array([0.0, np.sqrt(2.0 * omega)]), 2.0 * np.pi
    if model.name == "two_mode":
        p = float(np.atleast_1d(p)[0])
        if not 0 <= p <= omega:
            raise InvalidArgumentError("two_mode needs 0 <= P <= H")
        return np.array([0.0, 0.0, np.sqrt(2.0 * (omega - p)), np.sqrt(2.0 * p)]), 2.0 * np.pi
    raise InvalidArgumentError(f"no ridge start for model {model.name!r}")


# --------------------------------------------------------------------------- stages

class _Run:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.report = RunReport(cfg.to_dict(), cfg["seed"])
        self.out = Path(cfg["out"])
        self.ctx: dict = {}
        self.formats = frozenset(EXPORT_FORMATS)

    def stage_model(self):
        params = dict(self.cfg["model"].get("params") or {})
        params.setdefault("hbar_sequence", tuple(self.cfg["hbar_sequence"]))
        model = build_model(self.cfg.model_name, **params)
        self.ctx["model"] = model
        chk = model.check()
        chk["N"] = model.N
        chk["omega_grid"] = model.omega_grid.to_dict()
        chk["has_kets"] = model.ket_realization is not None
        return chk

    def stage_state(self):
        model = self.ctx["model"]
        rho = build_state(self.cfg, model)
        A = build_observable(self.cfg, model)
        self.ctx.update(rho=rho, A=A)
        out = check_state(rho).to_dict()
        out["observable_hermiticity_residual"] = A.hermiticity_residual()
        out["has_regular"] = rho.has_regular
        return out

    def stage_evolution(self):
        model, rho, A = self.ctx["model"], self.ctx["rho"], self.ctx["A"]
        hbar = self.cfg["hbar"]
        times = pre_revival_times(model.omega_grid, hbar, self.cfg["n_times"],
                                  self.cfg["window_fraction"])
        inv, fl = mean_value_parts(rho, A, times, hbar)
        rep = decoherence_time(rho, A, EvolutionParams(hbar, tuple(times)), self.cfg["epsilon"])
        self.ctx.update(times=times, invariant=inv, fluct=fl)
        return {"invariant": float(np.real(inv)), "fluct_initial": abs(complex(fl[0])),
                "fluct_final": abs(complex(fl[-1])), "n_times": int(times.size),
                "window_end": float(times[-1]), "decoherence": rep.to_dict()}

    def stage_decoherence(self):
        rho, A = self.ctx["rho"], self.ctx["A"]
        rho_star = decohered_state(rho)
        self.ctx["rho_star"] = rho_star
        limit = complex(pair(rho_star, A))
        final = complex(self.ctx["invariant"] + self.ctx["fluct"][-1])
        return {"limit": limit.real, "limit_imag": limit.imag,
                "window_end_value": final.real,
                "window_end_residual": abs(final - limit)}

    def stage_diagonalization(self):
        rho_star = self.ctx["rho_star"]
        U, diag = find_pointer_basis(rho_star)
        back = reconstruct_state(U, diag)
        self.ctx.update(U=U, diag=diag)
        return {"unitarity_residual": U.unitarity_residual(),
                "off_diagonal_mass": off_diagonal_mass(transform_state(rho_star, U)),
                "reconstruction_error": float(np.max(np.abs(back.singular - rho_star.singular))),
                "total": diag.total()}

    def stage_wigner(self):
        model = self.ctx["model"]
        if model.ket_realization is None:
            return {"skipped": f"model {model.name} has no ket realization"}
        sh = self.cfg.get("sharpening") or {}
        omega = sh.get("omega", self.cfg["state"]["center"])
        dw = sh.get("delta_omega", 0.04)
        rep = eigen_symbol_limit(model, omega, dw, hbar_sequence=self.cfg["hbar_sequence"])
        h = self.cfg["hbar_sequence"][0]
        real = _realization(model, h)
        band = band_projector_state(real.grid_w, real.grid_o, omega, dw)
        W = state_symbol(band, model, h)
        self.ctx.update(band_kernel=density_kernel(band, real), band_symbol=W)
        out = rep.to_dict()
        out["symbol_real_residual"] = W.real_residual()
        out["symbol_integral"] = float(np.real(W.integral()))
        return out

    def stage_classical(self):
        model, diag = self.ctx["model"], self.ctx["diag"]
        sigma = self.cfg["sigma"]
        rho_c = classical_distribution(diag, model, sigma)
        self.ctx["rho_c"] = rho_c
        center = self.cfg["state"]["center"]
        p0 = None
        if model.N:
            weights = diag.values * diag.grid_w.weights[:, None]
            p0 = float(diag.grid_p.nodes[int(np.argmax(weights.sum(axis=0)))])
        phi0, T = ridge_start(model, center, p0)
        traj = hamiltonian_flow(model, phi0, T)
        self.ctx["trajectory"] = traj
        const = constancy_check(rho_c, traj)
        vol = invariant_volume(model, center, p0, sigma=sigma)
        return {"integral": rho_c.integral(), "min": float(np.min(rho_c.values)),
                "c_constant": rho_c.c_constant, "C_range": [float(rho_c.C.min()), float(rho_c.C.max())],
                "invariant_volume": vol, "trajectory_drift": traj.drift,
                "constancy": const.to_dict()}

    def stage_appendix_a(self):
        model, rho, A = self.ctx["model"], self.ctx["rho"], self.ctx["A"]
        times = self.ctx["times"]
        cmp_ = phase_space_evolution(rho, A, model, times, self.cfg["hbar"],
                                     self.cfg.get("sigmas"))
        out = cmp_.to_dict()
        out.pop("times")
        return out

    def stage_appendix_b(self):
        model = self.ctx["model"]
        pos = self.cfg.get("positivity")
        if not pos or model.ket_realization is None:
            return {"skipped": "no positivity block or no ket realization"}
        centers = pos.get("centers", [self.cfg["state"]["center"]])
        width = pos.get("width", self.cfg["state"]["width"])

        def profile(w):
            w = np.asarray(w, dtype=float)
            return sum(np.exp(-0.5 * ((w - c) / width) ** 2) for c in centers)

        rep = positivity_check(profile, model, pos.get("hbar_sequence"), pos.get("m", 8),
                               pos.get("n_sets", 20), seed=self.cfg["seed"])
        return rep.to_dict()

    def stage_export(self):
        out, fmt = self.out, self.formats
        files = []
        csv_, binary = "csv" in fmt, "binary" in fmt
        if csv_ and "times" in self.ctx:
            files.append(io.write_trace_csv(self.ctx["times"], self.ctx["fluct"], out / "fluct_trace.csv"))
        if csv_ and "diag" in self.ctx:
            files.append(io.write_diagonal_csv(self.ctx["diag"], out / "diagonal.csv"))
        if "rho_c" in self.ctx:
            # a CSV of a four-dimensional chart is large; the binary file carries it
            if csv_ and self.ctx["rho_c"].chart.dof == 1:
                files.append(io.write_phase_space_csv(self.ctx["rho_c"], out / "rho_c.csv"))
            if binary:
                files.append(io.write_array(self.ctx["rho_c"].values, out / "rho_c.psf", io.PSF_MAGIC))
        if csv_ and "trajectory" in self.ctx:
            files.append(io.write_trajectory_csv(self.ctx["trajectory"], out / "trajectory.csv"))
        if binary and "band_symbol" in self.ctx:
            files.append(io.save_phase_space_function(self.ctx["band_symbol"], out / "band_symbol.psf"))
            files.append(io.save_kernel(self.ctx["band_kernel"], out / "band_kernel.krn"))
        if "json" in fmt:
            files.append(out / "report.json")
        self.report.files = sorted(p.name for p in files)
        return {"directory": str(out), "formats": sorted(fmt), "n_files": len(files)}


EXPORT_FORMATS = ("csv", "json", "binary")


def stages_up_to(stage: str | None) -> tuple[str, ...]:
    if stage is None:
        return STAGES
    if stage not in STAGES:
        raise InvalidArgumentError(f"unknown stage {stage!r}; choose from {list(STAGES)}")
    return STAGES[: STAGES.index(stage) + 1]


def run_pipeline(cfg: RunConfig, stage: str | None = None, write: bool = True,
                 formats=EXPORT_FORMATS) -> RunReport:
    """Run the stages in order (up to ``stage``) and write the requested files.

    ``report.json`` is written when ``"json"`` is among ``formats``. Errors
    inside a stage are re-raised as :class:`StageError` tagged with the
    stage name.
    """
    bad = set(formats) - set(EXPORT_FORMATS)
    if bad:
        raise InvalidArgumentError(f"unknown export formats {sorted(bad)}")
    run = _Run(cfg)
    run.formats = frozenset(formats)
    names = stages_up_to(stage)
    for name in names:
        if name == "export" and not write:
            continue
        t0 = time.perf_counter()
        try:
            run.report.stages[name] = io.to_jsonable(getattr(run, f"stage_{name}")())
        except SidlabError as exc:
            raise StageError(name, exc) from exc
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            raise StageError(name, exc) from exc
        run.report.timing[name] = time.perf_counter() - t0
    if write and "json" in run.formats:
        if "export" not in names:
            run.report.files = ["report.json"]
        try:
            io.write_json(run.report.to_dict(), run.out / "report.json")
        except SidlabError as exc:
            raise StageError("export", exc) from exc
    return run.report


# --------------------------------------------------------------------------- suites

@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.3g} (tol {self.tol:.1g})"


def _check(name, value, tol) -> Check:
    value = float(value)
    return Check(name, value, tol, bool(value <= tol))


def run_checks(cfg: RunConfig) -> list[Check]:
    """Fast invariant suite on the configured model; no files are written."""
    run = _Run(cfg)
    for name in ("model", "state", "evolution", "decoherence", "diagonalization"):
        run.report.stages[name] = getattr(run, f"stage_{name}")()
    st = run.report.stages
    model, rho, A = run.ctx["model"], run.ctx["rho"], run.ctx["A"]
    hbar = cfg["hbar"]
    out = [
        _check("model Poisson residual", st["model"]["poisson_residual"], 1e-8),
        _check("state normalization", st["state"]["normalization_residual"], 1e-12),
        _check("state negativity", max(0.0, -st["state"]["min_eigenvalue"]), 1e-12),
    ]
    times = run.ctx["times"][:: max(1, len(run.ctx["times"]) // 10)]
    rho_s = StateFunctional(rho.grid_w, rho.grid_o, rho.singular)
    A_s = Observable.singular_only(A.grid_w, A.grid_o, A.singular)
    base = pair(rho_s, A_s)
    out.append(_check("singular-sector invariance",
                      max(abs(pair(evolve_state(rho_s, t, hbar), A_s) - base) for t in times), 1e-12))
    out.append(_check("evolution duality",
                      max(abs(pair(evolve_state(rho, t, hbar), A)
                              - pair(rho, evolve_observable(A, t, hbar))) for t in times), 1e-12))
    out.append(_check("pointer unitarity", st["diagonalization"]["unitarity_residual"], 1e-10))
    out.append(_check("pointer off-diagonal mass", st["diagonalization"]["off_diagonal_mass"], 1e-10))
    q, p = PolySymbol.q(), PolySymbol.p()
    comm = star_product(q, p, hbar) - star_product(p, q, hbar) - PolySymbol.constant(1j * hbar)
    out.append(_check("q*p - p*q - i hbar", 0.0 if comm.is_zero() else 1.0, 0.0))
    if model.ket_realization is not None:
        real = _realization(model, hbar)
        sh = cfg.get("sharpening") or {}
        band = band_projector_state(real.grid_w, real.grid_o,
                                    sh.get("omega", cfg["state"]["center"]),
                                    sh.get("delta_omega", 0.04))
        a = np.polynomial.polynomial.polyval(real.grid_w.nodes, cfg["observable"]["coefficients"])
        obs = Observable.diagonal(real.grid_w, real.grid_o, a[:, None])
        W = state_symbol(band, model, hbar)
        out.append(_check("Wigner pairing duality",
                          abs(W.pair(observable_symbol(obs, model, hbar)) - pair(band, obs)), 1e-10))
        out.append(_check("Wigner symbol reality", W.real_residual(), 1e-12))
    return out


def run_sweep(cfg: RunConfig) -> dict:
    """hbar-sequence study: sharpening, commuting-product scaling and positivity."""
    run = _Run(cfg)
    run.report.stages["model"] = run.stage_model()
    model = run.ctx["model"]
    hbars = cfg["hbar_sequence"]
    out: dict = {"config": cfg.to_dict(), "seed": cfg["seed"]}
    try:
        H = model.H_symbol
        out["commuting_product"] = commuting_product_check(H, H * H, model.chart, hbars).to_dict()
        if model.ket_realization is not None:
            sh = cfg.get("sharpening") or {}
            out["sharpening"] = eigen_symbol_limit(
                model, sh.get("omega", cfg["state"]["center"]), sh.get("delta_omega", 0.04),
                hbar_sequence=hbars).to_dict()
            out["appendix_b"] = run.stage_appendix_b()
    except SidlabError as exc:
        raise StageError("sweep", exc) from exc
    return io.to_jsonable(out)
