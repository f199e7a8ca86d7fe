"""Cremona-style flat files and the dataset audit.

Only streams handed in by the caller are read; nothing here touches the
network or opens files on its own.
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

from .arith import is_prime, merel_criterion, primes_up_to, neumann_setzer_test, represent_u2_plus_16v2
from .classify import (Citation, ConductorMismatch, Rule, WatkinsReport, WatkinsRow,
                       composite_conditions, level_data, predict_parity_prime_level, theorem_one_filter,
                       watkins_verdict)
from .curve import SingularCurveError, WeierstrassCurve, ap_values, derive_invariants, two_torsion_info
from .modsym import MAX_LEVEL, analytic_rank_parity, build_space, locate_eigenform

log = logging.getLogger(__name__)

_ROW = re.compile(r"^(\d+) ([a-z]+) (\d+) \[(-?\d+),(-?\d+),(-?\d+),(-?\d+),(-?\d+)\] (\S+)(?: (\S+))?$")

DEFAULT_PREDICTION_LEVEL = 1000
DEFAULT_RANK_LEVEL = 500


@dataclass(frozen=True)
class CurveRecord:
    conductor: int
    class_code: str
    curve_number: int
    a_invariants: tuple[int, int, int, int, int]
    rank: int
    torsion_order: int
    degree: Optional[int] = None

    @property
    def label(self) -> str:
        return f"{self.conductor}{self.class_code}{self.curve_number}"

    @property
    def isogeny_class(self) -> str:
        return f"{self.conductor}{self.class_code}"

    def curve(self) -> WeierstrassCurve:
        return derive_invariants(*self.a_invariants)

    def sort_key(self):
        return (self.conductor, len(self.class_code), self.class_code, self.curve_number)

    def to_line(self) -> str:
        a = ",".join(str(x) for x in self.a_invariants)
        return f"{self.conductor} {self.class_code} {self.curve_number} [{a}] {self.rank} {self.torsion_order}"


@dataclass(frozen=True)
class Diagnostic:
    line_no: int
    message: str
    text: str

    def __str__(self) -> str:
        return f"line {self.line_no}: {self.message}: {self.text!r}"


@dataclass
class ParseResult:
    records: list[CurveRecord]
    diagnostics: list[Diagnostic]

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


@dataclass
class DegreeTable:
    degrees: dict[str, int]
    diagnostics: list[Diagnostic]
    warnings: list[str]

    def get(self, label: str) -> Optional[int]:
        return self.degrees.get(label)

    def __len__(self):
        return len(self.degrees)


def _lines(stream: TextIO | Iterable[str]):
    for no, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield no, line


def parse_allcurves(stream: TextIO | Iterable[str]) -> ParseResult:
    """Records in file order; malformed lines become diagnostics."""
    records, diags = [], []
    for no, line in _lines(stream):
        m = _ROW.match(line)
        if not m or m.group(10) is None:
            diags.append(Diagnostic(no, "malformed allcurves line", line))
            continue
        try:
            rank, tors = int(m.group(9)), int(m.group(10))
        except ValueError:
            diags.append(Diagnostic(no, "rank/torsion not integers", line))
            continue
        ainvs = tuple(int(m.group(i)) for i in range(4, 9))
        rec = CurveRecord(int(m.group(1)), m.group(2), int(m.group(3)), ainvs, rank, tors)
        problem = _validate(rec)
        if problem:
            diags.append(Diagnostic(no, problem, line))
            continue
        records.append(rec)
    return ParseResult(records, diags)


def _validate(rec: CurveRecord) -> Optional[str]:
    if rec.conductor < 1 or rec.curve_number < 1:
        return "conductor and curve number must be positive"
    if rec.rank < 0 or rec.torsion_order < 1:
        return "bad rank or torsion order"
    try:
        derive_invariants(*rec.a_invariants)
    except SingularCurveError:
        return "singular curve"
    return None


def parse_degphi(stream: TextIO | Iterable[str]) -> DegreeTable:
    """Label -> modular degree; a repeated label keeps the last value and warns."""
    degrees: dict[str, int] = {}
    diags, warns = [], []
    for no, line in _lines(stream):
        m = _ROW.match(line)
        if not m or m.group(10) is not None:
            diags.append(Diagnostic(no, "malformed degphi line", line))
            continue
        try:
            deg = int(m.group(9))
        except ValueError:
            diags.append(Diagnostic(no, "degree is not an integer", line))
            continue
        if deg < 1:
            diags.append(Diagnostic(no, "degree must be positive", line))
            continue
        label = f"{m.group(1)}{m.group(2)}{m.group(3)}"
        if label in degrees:
            msg = f"line {no}: duplicate label {label}, keeping {deg} over {degrees[label]}"
            warns.append(msg)
            log.warning(msg)
        degrees[label] = deg
    return DegreeTable(degrees, diags, warns)


def attach_degrees(records: Iterable[CurveRecord], degrees: DegreeTable) -> list[CurveRecord]:
    out = []
    for r in records:
        d = degrees.get(r.label)
        out.append(r if d is None else CurveRecord(r.conductor, r.class_code, r.curve_number,
                                                   r.a_invariants, r.rank, r.torsion_order, d))
    return out


# -- audit ---------------------------------------------------------------------

@dataclass(frozen=True)
class AuditOptions:
    max_level: Optional[int] = None
    prediction_max_level: int = DEFAULT_PREDICTION_LEVEL
    rank_max_level: int = DEFAULT_RANK_LEVEL
    threads: int = 1


ROW_COLUMNS = ("label", "conductor", "verdict", "rule", "prediction", "citations",
               "checklist_pass", "rank_source", "degree_parity_actual", "agreement")


@dataclass
class Report:
    rows: list[dict]
    watkins: WatkinsReport
    composite: list[dict]
    merel: list[dict]
    neumann_setzer: list[dict]
    diagnostics: list[str]
    summary: dict = field(default_factory=dict)

    def anomalies(self) -> list[str]:
        out = [f"{r['label']}: predicted {r['verdict']} but degree is {r['degree_parity_actual']}"
               for r in self.rows if r["agreement"] == "disagree"]
        out += [f"{r['label']}: {r['error']}" for r in self.rows if r.get("error")]
        out += [f"watkins: {lab}" for lab in self.watkins.violations]
        out += [f"composite: {r['label']} fails {','.join(r['failures'])}" for r in self.composite if r["failures"]]
        out += [f"merel: {r['N']}" for r in self.merel if not r["agree"]]
        out += [f"neumann-setzer: {r['label']}" for r in self.neumann_setzer if not r["agree"]]
        out += self.diagnostics
        return out

    def as_dict(self) -> dict:
        return {
            "summary": self.summary,
            "rows": self.rows,
            "watkins": {"checked": self.watkins.checked, "excluded_two_torsion": self.watkins.excluded,
                        "violations": self.watkins.violations},
            "composite": self.composite,
            "merel": self.merel,
            "neumann_setzer": self.neumann_setzer,
            "diagnostics": self.diagnostics,
        }


def optimal_records(records: Iterable[CurveRecord], degrees: Optional[DegreeTable] = None) -> list[CurveRecord]:
    """Curves carrying a degree; without degree data, curve number 1 of each class."""
    records = list(records)
    if degrees is not None and len(degrees):
        recs = [r for r in attach_degrees(records, degrees) if r.degree is not None]
    else:
        recs = [r for r in records if r.curve_number == 1]
    return sorted(recs, key=CurveRecord.sort_key)


@dataclass(frozen=True)
class _LevelJob:
    N: int
    curves: tuple                 # (label, a-invariants) pairs
    rank_parity: bool             # compute W_N parity from modular symbols
    predict: bool                 # run the T_m test (prime level)
    eisenstein: bool              # report the Eisenstein factor sizes


def _level_job(job: _LevelJob):
    """Per-level work, run in a worker; returns only small picklable results."""
    N = job.N
    ranks, verdicts, eis = {}, {}, []
    if job.rank_parity and job.curves:
        space = build_space(N)
        primes = [l for l in primes_up_to(2 * space.sturm_bound) if N % l]
        for label, ainvs in job.curves:
            try:
                ap = ap_values(derive_invariants(*ainvs), primes)
                ranks[label] = analytic_rank_parity(space, locate_eigenform(space, ap))
            except Exception as exc:  # recorded as a row anomaly
                ranks[label] = f"error: {type(exc).__name__}: {exc}"
    if job.predict or job.eisenstein:
        data = level_data(N)
        for label, ainvs in job.curves if job.predict else ():
            try:
                verdicts[label] = predict_parity_prime_level(derive_invariants(*ainvs), N, data).as_dict()
            except Exception as exc:
                verdicts[label] = {"error": f"{type(exc).__name__}: {exc}"}
        eis = [f.local_dim for f in data.factors if f.eisenstein]
    return N, ranks, verdicts, eis


def _run_levels(jobs: list[_LevelJob], threads: int) -> dict[int, tuple[dict, dict, list]]:
    out = {}
    jobs = sorted(jobs, key=lambda j: j.N)
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_level_job, jobs))
    else:
        results = [_level_job(j) for j in jobs]
    for N, ranks, verdicts, eis in results:
        out[N] = (ranks, verdicts, eis)
    return out


def audit(records: Iterable[CurveRecord], degrees: Optional[DegreeTable] = None,
          options: AuditOptions = AuditOptions()) -> Report:
    parse_diags = [str(d) for d in getattr(records, "diagnostics", [])]
    recs = optimal_records(records, degrees)
    if options.max_level is not None:
        recs = [r for r in recs if r.conductor <= options.max_level]
    pred_limit = min(options.prediction_max_level, MAX_LEVEL)
    if options.max_level is not None:
        pred_limit = min(pred_limit, options.max_level)
    rank_limit = options.rank_max_level

    curves, errors = {}, {}
    for r in recs:
        try:
            curves[r.label] = r.curve()
        except (SingularCurveError, ValueError) as exc:
            errors[r.label] = f"{type(exc).__name__}: {exc}"

    by_level: dict[int, list] = {}
    for r in recs:
        if r.label in curves:
            by_level.setdefault(r.conductor, []).append((r.label, r.a_invariants))
    # the Merel table covers the levels the dataset reaches
    merel_top = min(pred_limit, max((r.conductor for r in recs), default=0))
    merel_levels = [N for N in range(17, merel_top + 1, 8) if is_prime(N)]
    jobs = []
    for N in sorted(set(by_level) | set(merel_levels)):
        job = _LevelJob(N, tuple(by_level.get(N, ())), N <= rank_limit,
                        is_prime(N) and N <= pred_limit, N in merel_levels)
        if job.rank_parity or job.predict or job.eisenstein:
            jobs.append(job)
    level_results = _run_levels(jobs, options.threads)

    rows = []
    rank_parity = {}
    for r in recs:
        actual = None if r.degree is None else ("odd" if r.degree % 2 else "even")
        row = {"label": r.label, "conductor": r.conductor}
        dataset_parity = "odd" if r.rank % 2 else "even"
        computed = level_results.get(r.conductor, ({}, {}, []))[0].get(r.label)
        if computed in ("odd", "even"):
            rank_parity[r.label], row["rank_source"] = computed, "modular-symbols"
            if computed != dataset_parity:
                row["error"] = f"W_N gives {computed} rank, dataset rank is {r.rank}"
        else:
            rank_parity[r.label], row["rank_source"] = dataset_parity, "dataset"
            if computed is not None:
                row["error"] = computed
        f = None
        if r.label in curves:
            try:
                f = theorem_one_filter(curves[r.label], r.conductor, rank_parity[r.label])
            except ConductorMismatch as exc:
                errors[r.label] = f"{type(exc).__name__}: {exc}"
        if f is None:
            row.update(verdict="error", rule="", prediction="", citations=[Citation.NECESSARY_CONDITIONS.value],
                       checklist_pass=None, degree_parity_actual=actual, agreement="n/a", error=errors[r.label])
            rows.append(row)
            continue
        cites = list(f.citations)
        verdict = f.parity
        if f.parity == "even":
            prediction = ""                       # already decided by a necessary condition
        elif is_prime(r.conductor):
            prediction = "NOT_RUN"                # above the prediction level limit
        else:
            prediction = Rule.OUTSIDE_SCOPE.value  # the T_m test is a prime-level statement
        pred = level_results.get(r.conductor, ({}, {}, []))[1].get(r.label)
        if pred is not None and "error" in pred:
            row["error"] = pred["error"]
        elif pred is not None:
            cites += [c for c in pred["citations"] if c not in cites]
            if f.parity == "even":
                if pred["parity"] != "even":
                    row["error"] = f"necessary conditions force even but {pred['rule']} says {pred['parity']}"
            else:
                verdict, prediction = pred["parity"], pred["rule"]
        checklist = composite_conditions(curves[r.label], r.conductor, rank_parity[r.label])
        if verdict in ("odd", "even") and actual is not None:
            agreement = "agree" if verdict == actual else "disagree"
        else:
            agreement = "n/a"
        row.update(verdict=verdict, rule=f.rule.value, prediction=prediction, citations=cites,
                   checklist_pass=checklist.all_pass(), degree_parity_actual=actual, agreement=agreement)
        rows.append(row)

    watkins = watkins_verdict(
        WatkinsRow(r.label, r.conductor, r.degree, two_torsion_info(curves[r.label]).has_rational_root)
        for r in recs if r.degree is not None and r.label in curves)

    composite = []
    for r in recs:
        if r.degree is None or r.degree % 2 == 0 or r.label not in curves:
            continue
        c = composite_conditions(curves[r.label], r.conductor, rank_parity[r.label])
        composite.append({"label": r.label, "conductor": r.conductor, "failures": c.failures(),
                          "citations": [Citation.COMPOSITE_LEVEL.value, Citation.ODD_PRIME_BOUND.value]})

    merel = []
    for N in merel_levels:
        eis = level_results[N][2]
        rep = represent_u2_plus_16v2(N)
        crit = merel_criterion(N)
        dims = sorted(eis)
        merel.append({"N": N, "u": rep.u, "v": rep.v, "criterion": crit, "eisenstein_dims": dims,
                      "agree": len(dims) == 1 and crit == (dims[0] >= 2),
                      "citations": [Citation.MEREL.value]})

    ns = []
    for r in recs:
        test = neumann_setzer_test(r.conductor) if is_prime(r.conductor) else None
        if test is None or r.degree is None or r.label not in curves:
            continue
        if not two_torsion_info(curves[r.label]).has_rational_root:
            continue
        actual_odd = r.degree % 2 == 1
        ns.append({"label": r.label, "conductor": r.conductor, "u": test.u, "predicted_odd": test.odd_degree,
                   "actual_odd": actual_odd, "agree": test.odd_degree == actual_odd,
                   "citations": [Citation.NEUMANN_SETZER.value]})

    diags = parse_diags + [str(d) for d in getattr(degrees, "diagnostics", [])]
    report = Report(rows, watkins, composite, merel, ns, diags)
    report.summary = _summary(report)
    return report


def _summary(rep: Report) -> dict:
    by_rule = Counter(r["rule"] for r in rep.rows)
    by_verdict = Counter(r["verdict"] for r in rep.rows)
    by_agree = Counter(r["agreement"] for r in rep.rows)
    return {
        "rows": len(rep.rows),
        "by_rule": dict(sorted(by_rule.items())),
        "by_verdict": dict(sorted(by_verdict.items())),
        "agreement": dict(sorted(by_agree.items())),
        "watkins_checked": len(rep.watkins.checked),
        "watkins_violations": len(rep.watkins.violations),
        "composite_checked": len(rep.composite),
        "composite_violations": sum(1 for r in rep.composite if r["failures"]),
        "merel_levels": len(rep.merel),
        "merel_mismatches": sum(1 for r in rep.merel if not r["agree"]),
        "neumann_setzer_checked": len(rep.neumann_setzer),
        "neumann_setzer_mismatches": sum(1 for r in rep.neumann_setzer if not r["agree"]),
        "anomalies": len(rep.anomalies()),
    }
