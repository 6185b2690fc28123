"""Model-violation statistics for gate-set characterisation data.

For each circuit with observed outcome counts N_o and model probabilities
p_o, the log-likelihood-ratio statistic

    2 dlogL = 2 sum_o N_o ln(f_o / p_o),   f_o = N_o / N_total

measures evidence against the model.  Under a correct (Markovian, context
free) model it is asymptotically chi^2_k with k the circuit's independent
outcome count, so values inside k +- sqrt(2k) are consistent, values
beyond the chi^2_k upper quantile flag a violation, and everything else
is an ordinary fluctuation.  Aggregation sums the statistic per maximum
circuit length, which is how violation grows with circuit depth.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

PROB_FLOOR = 1e-12


@dataclass
class CircuitRecord:
    """Observed counts and model probabilities for one circuit."""

    circuit_id: str
    germ_label: str
    max_length: int
    outcome_counts: np.ndarray
    model_probs: np.ndarray
    k: int = 1

    def __post_init__(self):
        self.outcome_counts = np.asarray(self.outcome_counts, dtype=float)
        self.model_probs = np.asarray(self.model_probs, dtype=float)
        if self.outcome_counts.shape != self.model_probs.shape or self.outcome_counts.ndim != 1:
            raise ValueError(
                f"{self.circuit_id}: counts and probs must be 1-D with matching arity"
            )
        if np.any(self.outcome_counts < 0):
            raise ValueError(f"{self.circuit_id}: counts must be >= 0")
        if self.outcome_counts.sum() < 1:
            raise ValueError(f"{self.circuit_id}: total count must be >= 1")
        if np.any(self.model_probs < 0):
            raise ValueError(f"{self.circuit_id}: probabilities must be >= 0")
        if abs(float(self.model_probs.sum()) - 1.0) > 1e-9:
            raise ValueError(
                f"{self.circuit_id}: model probabilities sum to "
                f"{float(self.model_probs.sum())!r}, not 1"
            )
        if self.k < 1:
            raise ValueError(f"{self.circuit_id}: k must be >= 1")
        if self.max_length < 1:
            raise ValueError(f"{self.circuit_id}: max_length must be >= 1")


@dataclass
class ViolationReport:
    """Per-circuit statistics with flags, plus per-length sums."""

    per_circuit: list[tuple[str, float, str]]
    confidence: float
    thresholds: dict[int, dict[str, float]]
    aggregate_by_length: dict[int, float]


def two_delta_loglik(record: CircuitRecord) -> float:
    """Log-likelihood-ratio statistic; math.inf when an observed outcome
    has model probability exactly zero (infinite evidence against the
    model).  Model probabilities of observed outcomes are clamped to
    1e-12 before the ratio; unobserved outcomes contribute nothing.
    """
    counts = record.outcome_counts
    total = counts.sum()
    stat = 0.0
    for n_o, p_o in zip(counts, record.model_probs):
        if n_o == 0:
            continue
        if p_o == 0.0:
            return math.inf
        f_o = n_o / total
        stat += n_o * math.log(f_o / max(p_o, PROB_FLOOR))
    return max(2.0 * stat, 0.0)


def chi2_quantile(k: int, confidence: float) -> float:
    """Upper quantile of chi^2_k via the regularized incomplete gamma."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    return float(2.0 * special.gammaincinv(k / 2.0, confidence))


def band_edges(k: int) -> tuple[float, float]:
    """The k +- sqrt(2k) consistency band, lower edge clamped at 0."""
    half_width = math.sqrt(2.0 * k)
    return max(0.0, k - half_width), k + half_width


def classify(statistic: float, k: int, confidence: float = 0.95) -> str:
    """Flag a statistic as 'consistent', 'violation' or 'fluctuation'.

    Inside the open band (k - sqrt(2k), k + sqrt(2k)) is consistent;
    above the chi^2_k quantile at the given confidence is a violation;
    anything else (including suspiciously small values) is a fluctuation.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.5 < confidence < 1.0:
        raise ValueError("confidence must be in (0.5, 1)")
    lo, hi = band_edges(k)
    if lo < statistic < hi:
        return "consistent"
    if statistic > chi2_quantile(k, confidence):
        return "violation"
    return "fluctuation"


def aggregate(records: list[CircuitRecord], confidence: float = 0.95) -> ViolationReport:
    """Score and classify every record; sum statistics per max_length.

    Rows are ordered by (max_length, circuit_id) so reports are
    deterministic; sums are taken in that order.
    """
    if not records:
        raise ValueError("aggregate needs at least one record")
    ordered = sorted(records, key=lambda r: (r.max_length, r.circuit_id))
    per_circuit = []
    thresholds: dict[int, dict[str, float]] = {}
    sums: dict[int, float] = {}
    for rec in ordered:
        stat = two_delta_loglik(rec)
        flag = "violation" if math.isinf(stat) else classify(stat, rec.k, confidence)
        per_circuit.append((rec.circuit_id, stat, flag))
        lo, hi = band_edges(rec.k)
        thresholds.setdefault(
            rec.k,
            {
                "band_low": lo,
                "band_high": hi,
                "chi2_quantile": chi2_quantile(rec.k, confidence),
            },
        )
        sums[rec.max_length] = sums.get(rec.max_length, 0.0) + stat
    return ViolationReport(
        per_circuit=per_circuit,
        confidence=confidence,
        thresholds=thresholds,
        aggregate_by_length=dict(sorted(sums.items())),
    )


def read_dataset_csv(path, k: int = 1, k_by_circuit: dict[str, int] | None = None) -> list[CircuitRecord]:
    """Load circuit records from a CSV with columns
    circuit_id,germ,L,outcome,count,model_prob.

    Rows sharing a circuit_id form one record, outcomes in file order.
    Degrees of freedom are never inferred from the data: k applies to all
    circuits unless k_by_circuit overrides it per circuit_id.
    """
    order: list[str] = []
    rows: dict[str, dict] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = ["circuit_id", "germ", "L", "outcome", "count", "model_prob"]
        if reader.fieldnames != expected:
            raise ValueError(
                f"{path}: expected columns {expected}, found {reader.fieldnames}"
            )
        for row in reader:
            cid = row["circuit_id"]
            if cid not in rows:
                rows[cid] = {
                    "germ": row["germ"],
                    "L": int(row["L"]),
                    "counts": [],
                    "probs": [],
                }
                order.append(cid)
            entry = rows[cid]
            if row["germ"] != entry["germ"] or int(row["L"]) != entry["L"]:
                raise ValueError(f"{path}: inconsistent germ/L within circuit {cid}")
            entry["counts"].append(float(row["count"]))
            entry["probs"].append(float(row["model_prob"]))
    records = []
    for cid in order:
        entry = rows[cid]
        records.append(
            CircuitRecord(
                circuit_id=cid,
                germ_label=entry["germ"],
                max_length=entry["L"],
                outcome_counts=np.array(entry["counts"]),
                model_probs=np.array(entry["probs"]),
                k=(k_by_circuit or {}).get(cid, k),
            )
        )
    return records


def record_with_statistic(
    circuit_id: str,
    germ_label: str,
    max_length: int,
    target_statistic: float,
    n_total: int = 100,
    k: int = 1,
) -> CircuitRecord:
    """Construct a two-outcome record whose statistic equals a target.

    Fixes the observed counts at a 60/40 split and solves for the model
    probability p of the first outcome such that two_delta_loglik hits
    target_statistic; used to build synthetic fixtures with prescribed
    per-length sums.  The target must be reachable, i.e. >= 0 and at most
    the statistic against the most extreme representable model.
    """
    if target_statistic < 0:
        raise ValueError("target_statistic must be >= 0")
    n1 = int(round(0.6 * n_total))
    counts = np.array([n1, n_total - n1], dtype=float)
    f1 = counts[0] / n_total

    def stat_at(p1):
        probs = np.array([p1, 1.0 - p1])
        return two_delta_loglik(
            CircuitRecord(circuit_id, germ_label, max_length, counts, probs, k)
        )

    if target_statistic == 0.0:
        p1 = f1
    else:
        # statistic rises monotonically as p1 falls below f1
        lo, hi = 1e-9, f1
        reachable = stat_at(lo)
        if target_statistic > reachable:
            raise ValueError(
                f"target {target_statistic} exceeds the maximum {reachable:.1f} "
                f"reachable with n_total={n_total}; raise n_total"
            )
        p1 = optimize.brentq(
            lambda p: stat_at(p) - target_statistic, lo, hi, xtol=1e-15, rtol=1e-14
        )
    probs = np.array([p1, 1.0 - p1])
    return CircuitRecord(circuit_id, germ_label, max_length, counts, probs, k)
