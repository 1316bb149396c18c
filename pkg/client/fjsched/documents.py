"""JSON documents for instances, schedules, RTD instances and reports.

Exact numbers are written as integers or `"a/b"` strings and read back as
`Fraction`. Floats are refused on input.
"""
import hashlib
import json
from fractions import Fraction
from typing import Annotated, Any, Optional

from pydantic import (
    AfterValidator,
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    ValidationError,
    model_validator,
)

from .errors import DocumentError
from .model import (
    BranchTask,
    ForkJoinInstance,
    Guarantee,
    GuaranteeKind,
    Schedule,
    SolveReport,
    canonicalize,
    format_fraction,
    to_fraction,
)
from .rtd import RtdInstance, RtdTask
from .version import __version__


def _rational(value):
    return to_fraction(value)


def _positive(value):
    if value <= 0:
        raise ValueError("must be positive")
    return value


def _non_negative(value):
    if value < 0:
        raise ValueError("must not be negative")
    return value


Rational = Annotated[
    Fraction,
    BeforeValidator(_rational),
    PlainSerializer(format_fraction),
]
PositiveRational = Annotated[Rational, AfterValidator(_positive)]
NonNegativeRational = Annotated[Rational, AfterValidator(_non_negative)]


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)


def _unique_ids(tasks):
    seen = set()
    for task in tasks:
        if task.id in seen:
            raise ValueError(f"duplicate task id '{task.id}'")
        seen.add(task.id)


class TaskDocument(_Document):
    id: str = Field(min_length=1)
    p: PositiveRational
    gin: NonNegativeRational = Fraction(0)
    gout: NonNegativeRational = Fraction(0)


class InstanceDocument(_Document):
    p_src: PositiveRational
    p_sink: PositiveRational
    tasks: list[TaskDocument] = Field(default_factory=list)
    speeds: list[PositiveRational] = Field(min_length=1)
    groups: Optional[list[int]] = None

    @model_validator(mode="after")
    def _check_tasks(self):
        _unique_ids(self.tasks)
        if self.groups is not None and len(self.groups) != len(self.speeds):
            raise ValueError("'groups' needs one entry per speed")
        return self

    def to_instance(self):
        return ForkJoinInstance(
            tasks=tuple(
                BranchTask(task.id, task.p, task.gin, task.gout)
                for task in self.tasks
            ),
            p_src=self.p_src,
            p_sink=self.p_sink,
            speeds=tuple(self.speeds),
            groups=None if self.groups is None else tuple(self.groups),
        )

    @classmethod
    def from_instance(cls, instance):
        return cls(
            p_src=instance.p_src,
            p_sink=instance.p_sink,
            tasks=[
                TaskDocument(
                    id=task.id, p=task.p,
                    gin=task.gamma_in, gout=task.gamma_out)
                for task in instance.tasks
            ],
            speeds=list(instance.speeds),
            groups=None if instance.groups is None else list(instance.groups),
        )


class PlacementDocument(_Document):
    id: str
    proc: int = Field(ge=0)
    index_on_proc: int = Field(ge=0)
    start: Optional[NonNegativeRational] = None


class ScheduleDocument(_Document):
    m_src: int = Field(ge=0)
    m_sink: int = Field(ge=0)
    placements: list[PlacementDocument] = Field(default_factory=list)
    sink_start: Optional[NonNegativeRational] = None

    @classmethod
    def from_schedule(cls, schedule):
        placements = []
        for proc, task_ids in enumerate(schedule.order):
            for index, task_id in enumerate(task_ids):
                placements.append(PlacementDocument(
                    id=task_id,
                    proc=proc,
                    index_on_proc=index,
                    start=schedule.start_times[task_id],
                ))
        return cls(
            m_src=schedule.m_src,
            m_sink=schedule.m_sink,
            placements=placements,
            sink_start=schedule.sink_start,
        )


class RtdTaskDocument(_Document):
    id: str = Field(min_length=1)
    p: PositiveRational
    r: NonNegativeRational
    d: Rational


class RtdDocument(_Document):
    tasks: list[RtdTaskDocument] = Field(default_factory=list)
    speeds: list[PositiveRational] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_tasks(self):
        _unique_ids(self.tasks)
        return self


def _load_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(
            exc.msg, f"line {exc.lineno}, column {exc.colno}") from exc


def _validate(model, data):
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        location = ".".join(str(item) for item in error["loc"]) or None
        raise DocumentError(error["msg"], location) from exc


def _dump(document):
    data = document.model_dump(mode="json", exclude_none=True)
    return json.dumps(data, indent=4) + "\n"


def parse_instance(text):
    """Parse an instance document.

    Args:
        text (str): JSON text.

    Returns:
        ForkJoinInstance: Parsed instance.

    Raises:
        DocumentError: Malformed JSON or invalid field, with its location.

    """
    return _validate(InstanceDocument, _load_json(text)).to_instance()


def serialize_instance(instance):
    return _dump(InstanceDocument.from_instance(instance))


def instance_hash(instance):
    """SHA-256 of the canonical instance document."""
    return hashlib.sha256(
        serialize_instance(instance).encode("utf-8")).hexdigest()


def parse_schedule(text, instance):
    """Parse a schedule document against its instance.

    Start times are derived from the placement order unless every placement
    carries an explicit `start` and the document has a `sink_start`; explicit
    times are kept as given so that `validate` can judge them.

    Returns:
        Schedule: Parsed schedule.

    """
    document = _validate(ScheduleDocument, _load_json(text))
    if document.m_src >= instance.n_procs:
        raise DocumentError("unknown processor", "m_src")
    if document.m_sink >= instance.n_procs:
        raise DocumentError("unknown processor", "m_sink")

    per_proc = [[] for _ in range(instance.n_procs)]
    for idx, placement in enumerate(document.placements):
        if placement.proc >= instance.n_procs:
            raise DocumentError(
                "unknown processor", f"placements.{idx}.proc")
        if not instance.has_task(placement.id):
            raise DocumentError(
                f"unknown task id '{placement.id}'", f"placements.{idx}.id")
        per_proc[placement.proc].append(placement)

    order = []
    for proc, placements in enumerate(per_proc):
        placements.sort(key=lambda item: item.index_on_proc)
        indexes = [item.index_on_proc for item in placements]
        if indexes != list(range(len(placements))):
            raise DocumentError(
                f"indexes on processor {proc} are not 0..{len(indexes) - 1}",
                "placements",
            )
        order.append(tuple(item.id for item in placements))

    try:
        schedule = canonicalize(
            instance, document.m_src, document.m_sink, order)
    except ValueError as exc:
        raise DocumentError(str(exc), "placements") from exc

    explicit = all(item.start is not None for item in document.placements)
    if explicit and document.sink_start is not None:
        return Schedule(
            m_src=schedule.m_src,
            m_sink=schedule.m_sink,
            order=schedule.order,
            start_times={
                item.id: item.start for item in document.placements},
            sink_start=document.sink_start,
        )
    return schedule


def serialize_schedule(schedule):
    return _dump(ScheduleDocument.from_schedule(schedule))


def parse_rtd(text):
    document = _validate(RtdDocument, _load_json(text))
    return RtdInstance(
        tasks=tuple(
            RtdTask(task.id, task.p, task.r, task.d)
            for task in document.tasks
        ),
        speeds=tuple(document.speeds),
    )


def serialize_rtd(rtd):
    document = RtdDocument(
        tasks=[
            RtdTaskDocument(id=task.id, p=task.p, r=task.r, d=task.d)
            for task in rtd.tasks
        ],
        speeds=list(rtd.speeds),
    )
    return _dump(document)


def to_jsonable(value):
    """Turn report details into plain JSON values, fractions as 'a/b'."""
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    return value


def report_to_dict(report, instance, wall_time_ms=None):
    """Report document with provenance.

    Args:
        report (SolveReport): Solver result.
        instance (ForkJoinInstance): Solved instance, hashed for provenance.
        wall_time_ms (float, optional): Only written when given.

    """
    guarantee = None
    if report.guarantee is not None:
        bound = report.guarantee.bound
        guarantee = {
            "kind": report.guarantee.kind.value,
            "bound": None if bound is None else format_fraction(bound),
        }
    data = {
        "version": __version__,
        "algorithm": report.algorithm,
        "instance_sha256": instance_hash(instance),
        "makespan": format_fraction(report.makespan),
        "makespan_float": float(report.makespan),
        "guarantee": guarantee,
        "schedule": ScheduleDocument.from_schedule(
            report.schedule).model_dump(mode="json", exclude_none=True),
        "details": to_jsonable(report.details),
    }
    if wall_time_ms is not None:
        data["wall_time_ms"] = round(wall_time_ms, 3)
    return data


def serialize_report(report, instance, wall_time_ms=None):
    data = report_to_dict(report, instance, wall_time_ms)
    return json.dumps(data, indent=4) + "\n"


def parse_report(text, instance):
    """Read a report back, re-deriving the schedule against `instance`."""
    data = _load_json(text)
    if not isinstance(data, dict):
        raise DocumentError("report must be an object")
    for key in ("algorithm", "makespan", "schedule"):
        if key not in data:
            raise DocumentError("missing field", key)
    guarantee: Any = data.get("guarantee")
    if guarantee is not None:
        try:
            bound = guarantee.get("bound")
            guarantee = Guarantee(
                GuaranteeKind(guarantee["kind"]),
                None if bound is None else to_fraction(bound, "bound"),
            )
        except (KeyError, ValueError, AttributeError) as exc:
            raise DocumentError(str(exc), "guarantee") from exc
    try:
        value = to_fraction(data["makespan"], "makespan")
    except ValueError as exc:
        raise DocumentError(str(exc), "makespan") from exc
    return SolveReport(
        schedule=parse_schedule(json.dumps(data["schedule"]), instance),
        makespan=value,
        algorithm=data["algorithm"],
        guarantee=guarantee,
        details=data.get("details") or {},
    )
