"""Questionnaire analytics: rank aggregation per question and modality,
summary statistics, segment comparison, and export of a preference table
the knowledge base can load.

Input is a CSV with one row per participant. Rank questions span one column
per modality (``<question>_<modality>``) and each participant's ranks for a
question must form a permutation of 1..k. Standard deviations are sample
estimates (n-1 denominator).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence, Union

from .errors import EmptySegment, InvalidRank, MalformedCsv
from .model import MODALITY_ORDER, DataKind, InputModality

RANK_4 = (
    InputModality.TOUCH,
    InputModality.GESTURE,
    InputModality.SPEECH,
    InputModality.PEN,
)
RANK_2 = (InputModality.TOUCH, InputModality.SPEECH)

# Question registry. exp_* = expectation phase, xp_* = experience phase,
# op_* = opinion, job_* = imagined daily factory use.
RANK_QUESTIONS: dict[str, tuple[InputModality, ...]] = {
    "exp_object": RANK_4,
    "exp_location": RANK_4,
    "exp_constraints": RANK_2,
    "exp_point": RANK_4,
    "exp_edge": RANK_4,
    "xp_load": RANK_4,
    "xp_object": RANK_4,
    "xp_location": RANK_4,
    "xp_constraints": RANK_2,
    "xp_point": RANK_4,
    "xp_edge": RANK_4,
}

NUMERIC_QUESTIONS = ("exp_time_estimate_min", "op_time_saving_pct")

LIKERT_QUESTIONS: dict[str, tuple[int, int]] = {
    **{
        q: (1, 5)
        for q in (
            "op_expect_overall",
            "op_expect_touch",
            "op_expect_speech",
            "op_expect_gesture",
            "op_expect_pen",
            "op_expect_system",
        )
    },
    **{
        q: (1, 6)
        for q in (
            "op_fun",
            "op_preselect",
            "op_natural",
            "op_speech_accuracy",
            "op_fewer_modalities",
            "op_intuitive_speech",
            "op_intuitive_pen",
            "op_intuitive_touch",
            "op_intuitive_gesture",
            "op_intuitive_km",
            "op_difficult_understand",
            "op_satisfied_ease",
            "op_satisfied_time",
            "job_quickly",
            "job_performance",
            "job_productivity",
            "job_slowdown",
            "job_easier",
            "job_useful",
            "job_easy_learn",
            "job_clear",
            "job_complicated",
            "job_skillful",
            "job_difficult",
        )
    },
}

BASE_COLUMNS = ("id", "age", "gender", "expertise", "robotics", "teachpad")
GENDERS = ("male", "female")
EXPERTISE = ("Beginner", "Basic", "Advanced", "Expert")
ROBOTICS = ("NotMuch", "Hobby", "ALot")
TEACHPAD = ("No", "Know", "Used")


def _rank_column(question: str, modality: InputModality) -> str:
    return f"{question}_{modality.value.lower()}"


@dataclass(frozen=True)
class Participant:
    id: str
    age: float
    gender: str
    expertise: str
    robotics: str
    teachpad: str
    ranks: Mapping[tuple[str, InputModality], int]
    numbers: Mapping[str, float]
    likert: Mapping[str, int]

    def rank(self, question: str, modality: InputModality) -> Optional[int]:
        return self.ranks.get((question, modality))

    def answered(self, question: str) -> bool:
        return any(q == question for q, _ in self.ranks)


@dataclass(frozen=True)
class ResponseTable:
    rows: tuple[Participant, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def where(self, predicate: Callable[[Participant], bool]) -> "ResponseTable":
        return ResponseTable(tuple(r for r in self.rows if predicate(r)))


def load_responses(text: str) -> ResponseTable:
    """Parse the responses CSV; rejects unknown columns, bad enum values and
    rank rows that are not permutations (InvalidRank carries row numbers)."""
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    if not header:
        raise MalformedCsv("empty file: header row required")
    known = set(BASE_COLUMNS) | set(NUMERIC_QUESTIONS) | set(LIKERT_QUESTIONS)
    rank_columns: dict[str, tuple[str, InputModality]] = {}
    for question, modalities in RANK_QUESTIONS.items():
        for modality in modalities:
            rank_columns[_rank_column(question, modality)] = (question, modality)
    known |= set(rank_columns)
    unknown = [c for c in header if c not in known]
    if unknown:
        raise MalformedCsv(f"unknown columns: {', '.join(unknown)}")
    missing_base = [c for c in BASE_COLUMNS if c not in header]
    if missing_base:
        raise MalformedCsv(f"missing columns: {', '.join(missing_base)}")
    present_rank: dict[str, list[InputModality]] = {}
    for column in header:
        if column in rank_columns:
            q, modality = rank_columns[column]
            present_rank.setdefault(q, []).append(modality)
    for question, present in present_rank.items():
        expected = RANK_QUESTIONS[question]
        if set(present) != set(expected):
            raise MalformedCsv(f"{question}: incomplete modality columns")

    rows: list[Participant] = []
    bad_rows: list[int] = []
    for line, raw in enumerate(reader, start=2):
        try:
            participant = _parse_row(raw, present_rank, line)
        except InvalidRank:
            bad_rows.append(line)
            continue
        rows.append(participant)
    if bad_rows:
        raise InvalidRank(
            f"rank answers are not permutations at rows: {bad_rows}",
            rows=tuple(bad_rows),
        )
    return ResponseTable(tuple(rows))


def _parse_row(
    raw: Mapping[str, str], present_rank: Mapping[str, list[InputModality]], line: int
) -> Participant:
    def cell(name: str) -> str:
        return (raw.get(name) or "").strip()

    def enum(name: str, allowed: Sequence[str]) -> str:
        v = cell(name)
        if v not in allowed:
            raise MalformedCsv(f"row {line}: {name}={v!r} not in {allowed}")
        return v

    try:
        age = float(cell("age"))
    except ValueError as exc:
        raise MalformedCsv(f"row {line}: bad age {cell('age')!r}") from exc

    ranks: dict[tuple[str, InputModality], int] = {}
    for question, modalities in present_rank.items():
        values = {}
        for modality in modalities:
            v = cell(_rank_column(question, modality))
            if v:
                try:
                    values[modality] = int(v)
                except ValueError as exc:
                    raise InvalidRank(f"row {line}: non-integer rank") from exc
        if not values:
            continue  # participant skipped this question entirely
        k = len(modalities)
        if sorted(values.values()) != list(range(1, k + 1)):
            raise InvalidRank(f"row {line}: {question} ranks not a permutation")
        for modality, rank in values.items():
            ranks[(question, modality)] = rank

    numbers: dict[str, float] = {}
    for q in NUMERIC_QUESTIONS:
        v = cell(q)
        if v:
            try:
                numbers[q] = float(v)
            except ValueError as exc:
                raise MalformedCsv(f"row {line}: bad number for {q}") from exc

    likert: dict[str, int] = {}
    for q, (lo, hi) in LIKERT_QUESTIONS.items():
        v = cell(q)
        if v:
            try:
                score = int(v)
            except ValueError as exc:
                raise MalformedCsv(f"row {line}: bad scale value for {q}") from exc
            if not lo <= score <= hi:
                raise MalformedCsv(f"row {line}: {q}={score} outside {lo}..{hi}")
            likert[q] = score

    return Participant(
        id=cell("id"),
        age=age,
        gender=enum("gender", GENDERS),
        expertise=enum("expertise", EXPERTISE),
        robotics=enum("robotics", ROBOTICS),
        teachpad=enum("teachpad", TEACHPAD),
        ranks=ranks,
        numbers=numbers,
        likert=likert,
    )


# --- statistics -------------------------------------------------------------------

def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def _sample_sd(values: Sequence[float]) -> Optional[float]:
    n = len(values)
    if n < 2:
        return None
    mu = _mean(values)
    return math.sqrt(sum((v - mu) ** 2 for v in values) / (n - 1))


@dataclass(frozen=True)
class ModalityStats:
    mean: float
    sd: Optional[float]
    n: int


@dataclass(frozen=True)
class RankSummary:
    question: str
    stats: Mapping[InputModality, ModalityStats]
    ordering: tuple[InputModality, ...]

    def as_json(self) -> dict:
        return {
            "question": self.question,
            "modalities": {
                m.value: {"mean": s.mean, "sd": s.sd, "n": s.n}
                for m, s in self.stats.items()
            },
            "ordering": [m.value for m in self.ordering],
        }


def rank_summary(
    table: ResponseTable,
    question: str,
    where: Optional[Callable[[Participant], bool]] = None,
) -> RankSummary:
    """Mean rank and sample sd per modality; ordering ascending by mean with
    ties broken by the fixed modality enumeration order."""
    if question not in RANK_QUESTIONS:
        raise MalformedCsv(f"unknown rank question {question!r}")
    modalities = RANK_QUESTIONS[question]
    rows = [r for r in table.rows if (where is None or where(r)) and r.answered(question)]
    if not rows:
        raise EmptySegment(f"{question}: no responses in segment")
    stats = {}
    for modality in modalities:
        ranks = [float(r.rank(question, modality)) for r in rows]
        stats[modality] = ModalityStats(_mean(ranks), _sample_sd(ranks), len(ranks))
    ordering = tuple(
        sorted(modalities, key=lambda m: (stats[m].mean, MODALITY_ORDER.index(m)))
    )
    return RankSummary(question, stats, ordering)


_SEGMENTS: dict[str, tuple[tuple[str, Callable[[Participant], bool]], ...]] = {
    "gender": (
        ("female", lambda r: r.gender == "female"),
        ("male", lambda r: r.gender == "male"),
    ),
    # experts vs everyone else (beginner, basic and advanced)
    "expertise": (
        ("expert", lambda r: r.expertise == "Expert"),
        ("non_expert", lambda r: r.expertise != "Expert"),
    ),
    "robotics": (
        ("a_lot", lambda r: r.robotics == "ALot"),
        ("rest", lambda r: r.robotics != "ALot"),
    ),
    # knowing what the device is counts together with having used it
    "teachpad": (
        ("used_or_know", lambda r: r.teachpad in ("Used", "Know")),
        ("no", lambda r: r.teachpad == "No"),
    ),
}


def segment_compare(
    table: ResponseTable, question: str, dimension: str
) -> dict[str, Optional[RankSummary]]:
    """Per-segment rank summaries; an empty side maps to None."""
    if dimension not in _SEGMENTS:
        raise MalformedCsv(f"unknown segment dimension {dimension!r}")
    out: dict[str, Optional[RankSummary]] = {}
    for name, predicate in _SEGMENTS[dimension]:
        try:
            out[name] = rank_summary(table, question, predicate)
        except EmptySegment:
            out[name] = None
    return out


@dataclass(frozen=True)
class NumericSummary:
    mean: float
    sd: Optional[float]
    min: float
    max: float
    n: int

    def as_json(self) -> dict:
        return {
            "mean": self.mean,
            "sd": self.sd,
            "min": self.min,
            "max": self.max,
            "n": self.n,
        }


def numeric_summary(
    table: ResponseTable,
    question: str,
    where: Optional[Callable[[Participant], bool]] = None,
) -> NumericSummary:
    values = [
        r.numbers[question]
        for r in table.rows
        if (where is None or where(r)) and question in r.numbers
    ]
    if not values:
        raise EmptySegment(f"{question}: no values")
    return NumericSummary(
        _mean(values), _sample_sd(values), min(values), max(values), len(values)
    )


# --- preference export ---------------------------------------------------------------

DEFAULT_EXPORT_MAP: dict[str, DataKind] = {
    "xp_object": DataKind.OBJECT_MODEL_REF,
    "xp_location": DataKind.LOCATION_3D,
    "xp_constraints": DataKind.CONSTRAINT_SET,
    "xp_point": DataKind.VERTEX_REF,
    "xp_edge": DataKind.EDGE_REF,
}


def export_preference_table(
    table: ResponseTable,
    question_map: Optional[Mapping[str, Union[DataKind, str]]] = None,
) -> dict[str, list[str]]:
    """Per data type, modalities ordered by ascending mean rank. The output
    document is loadable by the knowledge base."""
    mapping = question_map if question_map is not None else DEFAULT_EXPORT_MAP
    doc: dict[str, list[str]] = {}
    for question, kind in mapping.items():
        key = kind.value if isinstance(kind, DataKind) else DataKind(kind).value
        summary = rank_summary(table, question)
        doc[key] = [m.value for m in summary.ordering]
    return doc
