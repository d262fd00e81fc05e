"""End-to-end irreversibility certificate for a bipartite state.

The rate bookkeeping takes as given that the AB relative entropy of
entanglement is conserved by any reversible asymptotic LOCC transformation
of the tripartite pure state.  Under that assumption a PPT state with a
positive separable-set bound cannot be produced reversibly from EPR and GHZ
states; the certificate records both resulting contradictions.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any

import numpy as np

from . import __version__
from . import entropy as ent
from . import overlap as ov
from . import states
from .tensor_core import Operator

SCHEMA_VERSION = 1

CONSERVATION_ASSUMPTION = (
    "AB relative entropy of entanglement (Sep and PPT sets) is conserved under "
    "reversible asymptotic LOCC transformations of ABC pure states; taken as an axiom, not checked."
)

BETA_ONE_TOL = 1e-8


class CertificationError(RuntimeError):
    def __init__(self, stage: str, message: str, diagnostics: dict | None = None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class CertifyConfig:
    state_id: str = "tiles-delta"
    seed: int = 7
    restarts: int = ov.DEFAULT_RESTARTS
    tol: float = ov.DEFAULT_TOL
    max_iter: int = ov.DEFAULT_MAX_ITER
    n_max: int = 2
    m_list: tuple[int, ...] = (0, 1)
    x1: int = 1
    brute_resolution: int = 16
    allow_n3: bool = False
    upper_grid: tuple[float, ...] = tuple(np.round(np.linspace(0.05, 1.0, 20), 10))

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.n_max not in (1, 2, 3):
            raise ValueError("n_max must be 1, 2 or 3")
        if self.n_max == 3 and not self.allow_n3:
            raise ValueError("n_max = 3 needs allow_n3")
        if any(m < 0 for m in self.m_list):
            raise ValueError("attachment counts must be >= 0")
        if self.x1 < 0:
            raise ValueError("x1 must be >= 0")

    def as_dict(self) -> dict:
        return {
            "state_id": self.state_id,
            "seed": self.seed,
            "restarts": self.restarts,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "n_max": self.n_max,
            "m_list": list(self.m_list),
            "x1": self.x1,
            "brute_resolution": self.brute_resolution,
            "allow_n3": self.allow_n3,
            "upper_grid": [float(p) for p in self.upper_grid],
        }


# -- rate arithmetic --------------------------------------------------------


def conservation_x(ereg: float) -> float:
    """EPR rate forced by conservation, using that one EPR pair carries exactly 1."""
    if ereg < 0:
        raise ValueError("regularized relative entropy cannot be negative")
    return ereg


def basic_contradiction(eppt: float, esep_lower: float) -> dict:
    certified = eppt == 0 and esep_lower > 0
    return {
        "x_from_ppt_law": str(Fraction(eppt)),
        "x_from_sep_law_at_least": esep_lower,
        "margin": esep_lower if certified else 0.0,
        "certified": certified,
        "statement": "0 = x > 0" if certified else "no contradiction certified",
    }


def extended_contradiction(alpha: ent.AlphaBound | None, x1: int) -> dict:
    if x1 < 0:
        raise ValueError("x1 must be >= 0")
    x1_exact = Fraction(x1)
    margin = ent.regularized_lower_bound(alpha) if alpha is not None else 0.0
    certified = margin > 0
    return {
        "x1": str(x1_exact),
        "x2_from_ppt_law": str(x1_exact),
        "x2_from_sep_law_at_least": float(x1_exact) + margin,
        "margin_per_copy": margin,
        "certified": certified,
        "statement": "x1 = x2 > x1" if certified else "no contradiction certified",
    }


@dataclass(frozen=True)
class ConservationLedger:
    omega_applied: tuple[str, ...]
    x_ppt: Fraction
    x_sep_lower: float
    x1: Fraction
    x2_ppt: Fraction
    x2_sep_lower: float

    def as_dict(self) -> dict:
        return {
            "omega_applied": list(self.omega_applied),
            "g": None,
            "y": None,
            "z": None,
            "unconstrained_rates": ["g", "y", "z"],
            "x": {"ppt_law": str(self.x_ppt), "sep_law": {"lower": self.x_sep_lower, "upper": None}},
            "x1": str(self.x1),
            "x2": {"ppt_law": str(self.x2_ppt), "sep_law": {"lower": self.x2_sep_lower, "upper": None}},
        }


@dataclass
class IrreversibilityCertificate:
    state_id: str
    config: CertifyConfig
    beta: ov.OverlapResult
    cross_checks: dict
    ppt: dict
    cert_c: ent.SeparabilityCertificate | None
    alpha: ent.AlphaBound | None
    esep_lower: float
    esep_upper: float
    eppt: float
    ledger: ConservationLedger
    contradiction_basic: dict
    contradiction_extended: dict
    experiments: list[dict]
    seed: int
    tool_version: str = __version__
    timestamps: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.contradiction_basic["certified"] and self.contradiction_extended["certified"]

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool_version": self.tool_version,
            "state_id": self.state_id,
            "seed": self.seed,
            "config": self.config.as_dict(),
            "assumption": CONSERVATION_ASSUMPTION,
            "ppt": self.ppt,
            "beta": self.beta.as_dict(),
            "cross_checks": self.cross_checks,
            "cert_c": self.cert_c.as_dict() if self.cert_c else None,
            "alpha": self.alpha.as_dict() if self.alpha else None,
            "esep_lower": self.esep_lower,
            "esep_upper": self.esep_upper,
            "eppt": self.eppt,
            "ledger": self.ledger.as_dict(),
            "contradiction_basic": self.contradiction_basic,
            "contradiction_extended": self.contradiction_extended,
            "experiments": [{k: v for k, v in row.items() if k != "runtime_s"} for row in self.experiments],
            "certified": self.certified,
            "timestamps": self.timestamps,
        }


def dumps_certificate(cert: IrreversibilityCertificate) -> str:
    return json.dumps(cert.as_dict(), indent=2, sort_keys=True) + "\n"


TABLE_COLUMNS = ("N", "M", "beta_est", "alpha_N", "upper_beta", "bound", "neg_log2_beta_est", "consistent", "runtime_s")


def dumps_table(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in TABLE_COLUMNS})
    return buf.getvalue()


# -- pipeline ---------------------------------------------------------------


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except CertificationError:
        raise
    except Exception as exc:  # noqa: BLE001 - every failure is re-labelled with its stage
        raise CertificationError(name, f"{type(exc).__name__}: {exc}") from exc


def bound_experiments(
    V: ov.Subspace,
    single: ov.OverlapResult,
    alpha: ent.AlphaBound | None,
    config: CertifyConfig,
) -> list[dict]:
    """Seesaw on ``V^{(x) N}`` with ``M`` EPR pairs attached, for every (N, M) on the grid.

    Each composite is warm-started from the tensor product of single-copy
    maximizers (with ``|00>`` on the EPR factors) so the estimate is at least
    ``beta^N / 2^M``.
    """
    rows = []
    epr = states.epr()
    zero = np.array([1.0, 0.0])
    budget = ov.DEFAULT_BUDGET if config.n_max < 3 or config.allow_n3 else 0
    for n in range(1, config.n_max + 1):
        Vn = V if n == 1 else ov.tensor_power(V, n, budget=budget)
        for m in config.m_list:
            t0 = time.perf_counter()
            W = Vn
            for _ in range(m):
                W = ov.attach_pure(W, epr)
            a0, b0 = ov.product_start(*([single] * n))
            for _ in range(m):
                a0, b0 = np.kron(a0, zero), np.kron(b0, zero)
            res = ov.seesaw_overlap(
                W, restarts=config.restarts, tol=config.tol, max_iter=config.max_iter,
                seed=config.seed + 1000 * n + m, initial=[(a0, b0)],
            )
            row = {"N": n, "M": m, "beta_est": res.beta, "converged": res.converged}
            if alpha is not None:
                upper = alpha.alpha**n / 2**m
                bound = ent.combined_bound(n, m, alpha)
                neg = -math.log2(res.beta) + 0.0
                row.update(
                    alpha_N=alpha.alpha**n,
                    upper_beta=upper,
                    bound=bound,
                    neg_log2_beta_est=neg,
                    consistent=bool(neg >= bound - 1e-8 and res.beta >= single.beta**n / 2**m - 1e-8),
                )
            else:
                row.update(alpha_N=None, upper_beta=None, bound=float(m) if m else 0.0,
                           neg_log2_beta_est=-math.log2(res.beta) + 0.0, consistent=None)
            row["runtime_s"] = round(time.perf_counter() - t0, 6)
            rows.append(row)
    return rows


def run_certification(config: CertifyConfig) -> IrreversibilityCertificate:
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()

    rho: Operator = _stage("construct", states.bipartite_density, config.state_id)
    if not rho.is_density():
        raise CertificationError("construct", "state is not a density matrix")
    is_ppt, min_pt = _stage("ppt_check", ent.ppt_check, rho)
    if not is_ppt:
        raise CertificationError("ppt_check", "state is not PPT; the PPT-set law gives no constraint",
                                 {"min_pt_eigenvalue": min_pt})
    eppt = _stage("e_ppt", ent.e_ppt_trivial, rho).value
    V = _stage("support_projector", ov.support_projector, rho)

    beta = _stage("seesaw", ov.seesaw_overlap, V, config.restarts, config.tol, config.max_iter, config.seed)
    if not beta.converged:
        raise CertificationError("seesaw", "best restart hit max_iter without converging",
                                 {"beta": beta.beta, "iterations": list(beta.iterations_per_restart)})
    schmidt = _stage("schmidt_form", ov.max_schmidt_over_subspace, V, config.restarts, config.tol,
                     config.max_iter, config.seed)
    cross = {
        "schmidt_beta": schmidt.beta,
        "schmidt_agrees": abs(schmidt.beta - beta.beta) <= 1e-6,
    }
    if max(V.dims.dim_a, V.dims.dim_b) <= 3:
        brute = _stage("brute_force", ov.brute_force_overlap, V, config.brute_resolution)
        cross.update(
            brute_beta=brute,
            brute_resolution=config.brute_resolution,
            brute_gap_bound=ov.grid_gap_bound(min(V.dims.dim_a, V.dims.dim_b), config.brute_resolution),
            brute_agrees=abs(brute - beta.beta) <= 1e-2,
        )
    if not cross["schmidt_agrees"] or not cross.get("brute_agrees", True):
        raise CertificationError("cross_check", "overlap estimates disagree", cross)

    cert_c = _stage("separability_ball_c", ent.separability_ball_c, V)
    has_product = beta.beta >= 1 - BETA_ONE_TOL
    alpha = None if has_product else _stage("alpha_bound", ent.alpha_bound, beta.beta, cert_c)
    esep_lower = ent.regularized_lower_bound(alpha) if alpha else 0.0
    single_lower = _stage("esep_lower_bound", ent.esep_lower_bound, beta.beta)

    if config.state_id.startswith("tiles"):
        cands = ent.blended_candidates(states.tiles_upb().vectors, rho.dims, config.upper_grid)
    else:
        cands = [rho]  # negative controls: the state itself is the separable candidate
    esep_upper = _stage("esep_upper_bound", ent.esep_upper_bound, rho, cands)
    cross["esep_single_copy_lower"] = single_lower

    experiments = _stage("tensor_experiments", bound_experiments, V, beta, alpha, config)

    x_sep = conservation_x(esep_lower)
    x1 = Fraction(config.x1)
    ledger = ConservationLedger(
        omega_applied=(ent.SetChoice.PPT.value, ent.SetChoice.SEP.value),
        x_ppt=Fraction(0) if eppt == 0 else Fraction(eppt),
        x_sep_lower=x_sep,
        x1=x1,
        x2_ppt=x1,
        x2_sep_lower=float(x1) + esep_lower,
    )
    cert = IrreversibilityCertificate(
        state_id=config.state_id,
        config=config,
        beta=beta,
        cross_checks=cross,
        ppt={"is_ppt": is_ppt, "min_pt_eigenvalue": min_pt},
        cert_c=cert_c,
        alpha=alpha,
        esep_lower=esep_lower,
        esep_upper=esep_upper,
        eppt=eppt,
        ledger=ledger,
        contradiction_basic=basic_contradiction(eppt, esep_lower),
        contradiction_extended=extended_contradiction(alpha, config.x1),
        experiments=experiments,
        seed=config.seed,
    )
    _stage("validate", validate_certificate, cert)
    cert.timestamps = {
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "runtime_s": round(time.perf_counter() - t0, 3),
        "experiment_runtimes_s": [row["runtime_s"] for row in experiments],
    }
    return cert


def validate_certificate(cert: IrreversibilityCertificate, tol: float = 1e-10) -> None:
    """Recompute every derived field from (beta, c, N, M) and compare."""
    problems: list[str] = []

    def check(name, got, want):
        if want is None or got is None:
            if got is not want:
                problems.append(f"{name}: {got} vs {want}")
        elif not abs(got - want) <= tol * max(1.0, abs(want)):
            problems.append(f"{name}: {got} vs {want}")

    b = cert.beta.beta
    V = ov.support_projector(states.bipartite_density(cert.state_id))
    check("beta vs maximizer", b, V.overlap(cert.beta.maximizer_a.amplitudes, cert.beta.maximizer_b.amplitudes))
    if cert.cert_c is not None:
        c = cert.cert_c
        check("ball distance", c.distance, ent.ball_distance(c.c, c.D, c.r))
        if c.distance > c.ball_radius * (1 + 1e-12):
            problems.append("separability certificate outside ball")
    if cert.alpha is not None:
        a = cert.alpha
        check("alpha", a.alpha, (1 + b * a.c) / (1 + a.c))
        if a.alpha1 != b:
            problems.append("alpha1 differs from beta")
        check("esep_lower", cert.esep_lower, -math.log2(a.alpha))
        for row in cert.experiments:
            check(f"bound N={row['N']} M={row['M']}", row["bound"], -row["N"] * math.log2(a.alpha) + row["M"])
    else:
        check("esep_lower", cert.esep_lower, 0.0)
    if cert.esep_lower > cert.esep_upper + 1e-8:
        problems.append(f"lower bound {cert.esep_lower} exceeds upper bound {cert.esep_upper}")
    basic = cert.contradiction_basic["certified"]
    if basic != (cert.esep_lower > 0 and cert.eppt == 0):
        problems.append("basic contradiction flag inconsistent")
    led = cert.ledger
    if led.x2_ppt != led.x1:
        problems.append("PPT branch must record x2 == x1 exactly")
    check("x2 sep lower", led.x2_sep_lower, float(led.x1) + cert.esep_lower)
    if problems:
        raise CertificationError("validate", "; ".join(problems))


def certificate_summary(cert: IrreversibilityCertificate) -> dict[str, Any]:
    return {
        "state_id": cert.state_id,
        "beta": cert.beta.beta,
        "alpha": cert.alpha.alpha if cert.alpha else None,
        "esep_lower": cert.esep_lower,
        "certified": cert.certified,
    }
