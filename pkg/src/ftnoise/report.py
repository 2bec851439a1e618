"""Run reports: human-readable text, structured JSON and sweep tables"""

import csv
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional

from ftnoise import __version__
from ftnoise.bound_engine import BoundReport, Verdict
from ftnoise.contraction import ContractionCheck
from ftnoise.dyson import FaultOperatorResult
from ftnoise.noise_model import EtaProfile

_logger = logging.getLogger(__name__)

N_G_REPORTED = 10


@dataclass(frozen=True)
class SweepRow:
    value: float
    alpha: Optional[float]
    epsilon: Optional[float]
    verdict: Verdict

    header = ["value", "alpha", "epsilon", "verdict"]

    @property
    def row(self) -> list:
        return [
            repr(self.value),
            "" if self.alpha is None else repr(self.alpha),
            "" if self.epsilon is None else repr(self.epsilon),
            self.verdict.value,
        ]


def profile_dict(profile: EtaProfile) -> dict:
    return {
        "k_max": profile.k_max,
        "eta_tilde": list(profile.eta_tilde),
        "eta_set": list(profile.eta_set),
        "anchors": list(profile.anchors),
        "evaluations": list(profile.evaluations),
    }


@dataclass
class RunReport:
    """Everything a command produced, echoing the configuration hash and the
    tool version. Only the timestamp varies between identical runs."""

    command: str
    config_hash: str
    version: str = __version__
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )
    profile: Optional[EtaProfile] = None
    bound: Optional[BoundReport] = None
    contraction: List[ContractionCheck] = field(default_factory=list)
    verification: List[FaultOperatorResult] = field(default_factory=list)
    sweep_parameter: Optional[str] = None
    sweep: List[SweepRow] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    @property
    def violations(self) -> List[FaultOperatorResult]:
        return [r for r in self.verification if r.violation]

    def to_dict(self) -> dict:
        values = {
            "command": self.command,
            "config_hash": self.config_hash,
            "version": self.version,
            "timestamp": self.timestamp,
        }
        if self.profile is not None:
            values["profile"] = profile_dict(self.profile)
        if self.bound is not None:
            values["bound"] = self.bound.to_dict(N_G_REPORTED)
        if self.contraction:
            values["contraction"] = [c.to_dict() for c in self.contraction]
        if self.verification:
            values["verification"] = [
                dict(zip(FaultOperatorResult.header, r.row)) for r in self.verification
            ]
            values["violations"] = len(self.violations)
        if self.sweep:
            values["sweep"] = {
                "parameter": self.sweep_parameter,
                "rows": [
                    {
                        "value": r.value,
                        "alpha": r.alpha,
                        "epsilon": r.epsilon,
                        "verdict": r.verdict.value,
                    }
                    for r in self.sweep
                ],
            }
        if self.errors:
            values["errors"] = list(self.errors)
        return values

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def write_json(self, path: Path):
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")
        _logger.info(f"wrote report to {path}")

    def format_text(self) -> str:
        lines = [f"ftnoise {self.version} {self.command} ({self.config_hash[:12]})"]
        if self.profile is not None:
            lines.append("eta_tilde:")
            for k, eta in enumerate(self.profile.eta_tilde, start=1):
                lines.append(f"  k = {k:2d}  {eta:.6g}")
        if self.bound is not None:
            b = self.bound
            lines.append(f"method:   {b.method} [{b.envelope}]")
            lines.append(f"alpha:    {b.alpha:.5f} (alpha0 = {b.alpha0:g})")
            lines.append(f"m:        {b.m}")
            if b.epsilon is None:
                lines.append("epsilon:  undefined")
            else:
                lines.append(f"epsilon:  {b.epsilon:.6g} (epsilon0 = {b.epsilon0:g})")
            if b.theorem1_epsilon is not None and b.method != "theorem1":
                lines.append(f"generic:  {b.theorem1_epsilon:.6g}")
            lines.append(f"verdict:  {b.verdict.value}")
            for caveat in b.caveats:
                lines.append(f"caveat:   {caveat}")
        for check in self.contraction:
            status = "ok" if check.holds else "FAILS"
            lines.append(
                f"contraction r = {check.r}: {check.partition_sum:.6g} <= "
                f"{check.relaxed_bound:.6g} {status}"
            )
        if self.verification:
            lines.append(
                f"verified {len(self.verification)} fault queries, "
                f"{len(self.violations)} violations"
            )
            for result in self.verification:
                location, r, norm, epsilon_r, _, conclusive = result.row
                bound = "n/a" if epsilon_r is None else f"{epsilon_r:.6g}"
                flag = " VIOLATION" if result.violation else ""
                lines.append(
                    f"  [{location}] r = {r}  norm = {norm:.6g}  bound = {bound}{flag}"
                )
        if self.sweep:
            lines.append(f"sweep over {self.sweep_parameter}: {len(self.sweep)} rows")
        for error in self.errors:
            lines.append(f"error:    {error}")
        return "\n".join(lines)


def write_sweep_table(rows: List[SweepRow], fh):
    """Writes sweep rows as CSV with a header row"""
    csvout = csv.writer(fh, dialect="excel")
    csvout.writerow(SweepRow.header)
    for row in rows:
        csvout.writerow(row.row)
