"""Workflow definitions: data-driven job DAGs and benchmark workflow generators.

A workflow is a DAG of jobs connected through logical files (LFNs): a job
becomes ready exactly when every file it consumes has been produced (or was
resident on the storage element from the start). The generators build the
two-step chain/split/merge benchmark workflows plus a six-level production
workflow with per-step merge stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

MB = 1_000_000
GB = 1_000_000_000

DEFAULT_PROCESSING_TIME = 300.0
DEFAULT_MAX_RETRIES = 3


class WorkflowError(ValueError):
    """Invalid generator parameters or a malformed workflow."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise WorkflowError(msg)


@dataclass(frozen=True)
class LogicalFile:
    """A named data file with its size in bytes."""

    lfn: str
    size: int

    def __post_init__(self) -> None:
        _require(self.size > 0, f"file {self.lfn!r} must have positive size")


@dataclass(frozen=True)
class JobSpec:
    """One schedulable unit of a workflow.

    ``inputs`` are LFNs consumed during stage-in; ``outputs`` are
    (lfn, size) pairs produced and staged out on success.
    """

    job_id: str
    step: int
    inputs: frozenset[str]
    outputs: tuple[tuple[str, int], ...]
    processing_time: float = DEFAULT_PROCESSING_TIME
    site_requirement: Optional[str] = None
    max_retries: int = DEFAULT_MAX_RETRIES

    def __post_init__(self) -> None:
        _require(self.step >= 0, "step index must be >= 0")
        _require(self.processing_time >= 0, "processing_time must be >= 0")
        for lfn, size in self.outputs:
            _require(size > 0, f"output {lfn!r} must have positive size")
            _require(lfn not in self.inputs,
                     f"job {self.job_id} lists {lfn!r} as both input and output")

    def input_list(self) -> list[str]:
        return sorted(self.inputs)

    def output_lfns(self) -> list[str]:
        return [lfn for lfn, _ in self.outputs]


@dataclass
class WorkflowSpec:
    """A full job DAG plus the SE-resident files available at t=0."""

    jobs: list[JobSpec]
    kind: str
    preexisting: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.validate()

    # -- derived views -------------------------------------------------

    def by_id(self) -> dict[str, JobSpec]:
        return {j.job_id: j for j in self.jobs}

    def produced_files(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for job in self.jobs:
            for lfn, size in job.outputs:
                out[lfn] = size
        return out

    def file_sizes(self) -> dict[str, int]:
        """Sizes of every file in the scenario, SE-resident ones included."""
        sizes = dict(self.preexisting)
        sizes.update(self.produced_files())
        return sizes

    def producer_of(self) -> dict[str, str]:
        prod: dict[str, str] = {}
        for job in self.jobs:
            for lfn, _ in job.outputs:
                prod[lfn] = job.job_id
        return prod

    def job_count(self) -> int:
        return len(self.jobs)

    def total_input_bytes(self) -> int:
        """Bytes of external input data (SE-resident files consumed by the DAG)."""
        return sum(self.preexisting.values())

    def total_output_bytes(self) -> int:
        return sum(size for job in self.jobs for _, size in job.outputs)

    def steps(self) -> list[int]:
        return sorted({j.step for j in self.jobs})

    # -- validation ----------------------------------------------------

    def validate(self) -> None:
        seen_ids: set[str] = set()
        producers: dict[str, str] = {}
        for job in self.jobs:
            _require(job.job_id not in seen_ids, f"duplicate job id {job.job_id}")
            seen_ids.add(job.job_id)
            for lfn, _ in job.outputs:
                _require(lfn not in producers,
                         f"file {lfn!r} produced by more than one job")
                _require(lfn not in self.preexisting,
                         f"file {lfn!r} is both preexisting and produced")
                producers[lfn] = job.job_id
        by_id = {j.job_id: j for j in self.jobs}
        for job in self.jobs:
            for lfn in job.inputs:
                if lfn in self.preexisting:
                    continue
                _require(lfn in producers,
                         f"job {job.job_id} consumes unknown file {lfn!r}")
                prod = by_id[producers[lfn]]
                _require(prod.step < job.step,
                         f"job {job.job_id} (step {job.step}) consumes a file "
                         f"from step {prod.step}")
        # Step ordering makes the producer relation acyclic by construction;
        # a topological pass still guards against manual edits.
        self._topological_order(producers, by_id)

    def _topological_order(self, producers: dict[str, str],
                           by_id: dict[str, JobSpec]) -> list[str]:
        indeg = {j.job_id: 0 for j in self.jobs}
        dependents: dict[str, list[str]] = {j.job_id: [] for j in self.jobs}
        for job in self.jobs:
            for lfn in job.inputs:
                if lfn in self.preexisting:
                    continue
                parent = producers[lfn]
                indeg[job.job_id] += 1
                dependents[parent].append(job.job_id)
        frontier = [jid for jid, d in indeg.items() if d == 0]
        order: list[str] = []
        while frontier:
            jid = frontier.pop()
            order.append(jid)
            for child in dependents[jid]:
                indeg[child] -= 1
                if indeg[child] == 0:
                    frontier.append(child)
        _require(len(order) == len(self.jobs), "workflow dependency graph has a cycle")
        return order


@dataclass
class ReadinessTracker:
    """Tracks which files exist and which jobs have already been dispatched.

    SE-resident files count as completed from the start, so step-0 jobs are
    reported ready on the first call.
    """

    completed_files: set[str]
    dispatched: set[str] = field(default_factory=set)

    @classmethod
    def for_workflow(cls, workflow: WorkflowSpec) -> "ReadinessTracker":
        return cls(completed_files=set(workflow.preexisting))


def ready_jobs(tracker: ReadinessTracker, workflow: WorkflowSpec,
               newly_completed: Iterable[str]) -> list[JobSpec]:
    """Record newly available files and return the jobs they unblock.

    Returns exactly the not-yet-dispatched jobs whose full input set is now
    available, in workflow order, and marks them dispatched.
    """
    known = workflow.file_sizes()
    new = set(newly_completed)
    for lfn in new:
        _require(lfn in known, f"unknown file {lfn!r} reported complete")
    tracker.completed_files.update(new)
    out: list[JobSpec] = []
    for job in workflow.jobs:
        if job.job_id in tracker.dispatched:
            continue
        if job.inputs <= tracker.completed_files:
            tracker.dispatched.add(job.job_id)
            out.append(job)
    return out


# ---------------------------------------------------------------------------
# Two-step benchmark generators
# ---------------------------------------------------------------------------


def generate_chain(n: int, file_size: int, *, step0_input_size: Optional[int] = None,
                   processing_time: float = DEFAULT_PROCESSING_TIME,
                   max_retries: int = DEFAULT_MAX_RETRIES) -> WorkflowSpec:
    """Serial chain: n step-0 jobs, each feeding exactly one step-1 job."""
    _require(n >= 1, "chain needs at least one job per step")
    _require(file_size > 0, "file_size must be positive")
    raw_size = step0_input_size or file_size
    jobs: list[JobSpec] = []
    preexisting: dict[str, int] = {}
    for k in range(n):
        raw = f"chain/raw/{k:04d}"
        preexisting[raw] = raw_size
        jobs.append(JobSpec(
            job_id=f"s0-{k:04d}", step=0, inputs=frozenset({raw}),
            outputs=((f"chain/s0/{k:04d}", file_size),),
            processing_time=processing_time, max_retries=max_retries))
    for k in range(n):
        jobs.append(JobSpec(
            job_id=f"s1-{k:04d}", step=1,
            inputs=frozenset({f"chain/s0/{k:04d}"}),
            outputs=((f"chain/s1/{k:04d}", file_size),),
            processing_time=processing_time, max_retries=max_retries))
    return WorkflowSpec(jobs=jobs, kind="chain", preexisting=preexisting)


def generate_split(n_step0: int, fanout: int, file_size: int, *,
                   files_per_job: int = 1,
                   step0_input_size: Optional[int] = None,
                   processing_time: float = DEFAULT_PROCESSING_TIME,
                   max_retries: int = DEFAULT_MAX_RETRIES) -> WorkflowSpec:
    """Splitting workflow: every step-0 output file is consumed by ``fanout``
    step-1 jobs.

    ``files_per_job`` lets a step-0 job produce several files (each still read
    by ``fanout`` consumers), so both one-file and two-file variants of the
    splitting benchmark are constructible.
    """
    _require(n_step0 >= 1, "split needs at least one step0 job")
    _require(fanout >= 1, "fanout must be >= 1")
    _require(files_per_job >= 1, "files_per_job must be >= 1")
    _require(file_size > 0, "file_size must be positive")
    raw_size = step0_input_size or file_size
    jobs: list[JobSpec] = []
    preexisting: dict[str, int] = {}
    for k in range(n_step0):
        raw = f"split/raw/{k:04d}"
        preexisting[raw] = raw_size
        outs = tuple((f"split/s0/{k:04d}.{j}", file_size) for j in range(files_per_job))
        jobs.append(JobSpec(
            job_id=f"s0-{k:04d}", step=0, inputs=frozenset({raw}), outputs=outs,
            processing_time=processing_time, max_retries=max_retries))
    idx = 0
    for k in range(n_step0):
        for j in range(files_per_job):
            src = f"split/s0/{k:04d}.{j}"
            for _ in range(fanout):
                jobs.append(JobSpec(
                    job_id=f"s1-{idx:04d}", step=1, inputs=frozenset({src}),
                    outputs=((f"split/s1/{idx:04d}", file_size),),
                    processing_time=processing_time, max_retries=max_retries))
                idx += 1
    return WorkflowSpec(jobs=jobs, kind="split", preexisting=preexisting)


def generate_merge(n_step0: int, fanin: int, file_size: int, *,
                   step0_input_size: Optional[int] = None,
                   processing_time: float = DEFAULT_PROCESSING_TIME,
                   max_retries: int = DEFAULT_MAX_RETRIES) -> WorkflowSpec:
    """Merging workflow: each step-1 job consumes ``fanin`` distinct step-0
    files, grouped consecutively (job k reads files fanin*k .. fanin*k+fanin-1).
    """
    _require(n_step0 >= 1, "merge needs at least one step0 job")
    _require(fanin >= 1, "fanin must be >= 1")
    _require(n_step0 % fanin == 0,
             f"step0 count {n_step0} not divisible by fanin {fanin}")
    _require(file_size > 0, "file_size must be positive")
    raw_size = step0_input_size or file_size
    jobs: list[JobSpec] = []
    preexisting: dict[str, int] = {}
    for k in range(n_step0):
        raw = f"merge/raw/{k:04d}"
        preexisting[raw] = raw_size
        jobs.append(JobSpec(
            job_id=f"s0-{k:04d}", step=0, inputs=frozenset({raw}),
            outputs=((f"merge/s0/{k:04d}", file_size),),
            processing_time=processing_time, max_retries=max_retries))
    for k in range(n_step0 // fanin):
        group = frozenset(f"merge/s0/{i:04d}" for i in range(k * fanin, (k + 1) * fanin))
        jobs.append(JobSpec(
            job_id=f"s1-{k:04d}", step=1, inputs=group,
            outputs=((f"merge/s1/{k:04d}", file_size),),
            processing_time=processing_time, max_retries=max_retries))
    return WorkflowSpec(jobs=jobs, kind="merge", preexisting=preexisting)


# ---------------------------------------------------------------------------
# Six-level production workflow (reformat -> merge -> reco -> merge -> skim -> merge)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tier0Params:
    """Shape and sizing of the six-level production workflow.

    The default values form the documented paper-scale preset: 172 jobs in
    total, 83.41 GB of external input and 112 GB of produced output. Merge
    jobs concatenate their inputs byte-for-byte; processing steps shrink the
    data, which is what makes the per-level byte sums work out.

        level 0  repack        80 jobs  reads one 1_042_625_000 B raw file, writes 500 MB
        level 1  repackmerge   20 jobs  fan-in 4, writes 2000 MB
        level 2  promptreco    40 jobs  2 per merged file, writes 300 MB
        level 3  promptmerge   10 jobs  fan-in 4, writes 1200 MB
        level 4  alcareco      20 jobs  2 per merged file, writes 200 MB
        level 5  alcamerge      2 jobs  fan-in 10, writes 2000 MB
    """

    repacker_jobs: int = 80
    repacker_merge_fanin: int = 4
    prompt_fanout: int = 2
    prompt_merge_fanin: int = 4
    alca_fanout: int = 2
    alca_merge_fanin: int = 10
    raw_file_size: int = 1_042_625_000
    repacker_out_size: int = 500 * MB
    prompt_out_size: int = 300 * MB
    alca_out_size: int = 200 * MB
    processing_time: float = DEFAULT_PROCESSING_TIME
    max_retries: int = DEFAULT_MAX_RETRIES


TIER0_PAPER = Tier0Params()
TIER0_MINIMAL = Tier0Params(
    repacker_jobs=1, repacker_merge_fanin=1, prompt_fanout=1,
    prompt_merge_fanin=1, alca_fanout=1, alca_merge_fanin=1)

_TIER0_STEP_NAMES = ("repack", "repackmerge", "promptreco", "promptmerge",
                     "alcareco", "alcamerge")


def generate_tier0(params: Tier0Params = TIER0_PAPER) -> WorkflowSpec:
    """Build the six-level production DAG described by ``params``."""
    p = params
    _require(p.repacker_jobs >= 1, "need at least one repack job")
    for name, v in (("repacker_merge_fanin", p.repacker_merge_fanin),
                    ("prompt_fanout", p.prompt_fanout),
                    ("prompt_merge_fanin", p.prompt_merge_fanin),
                    ("alca_fanout", p.alca_fanout),
                    ("alca_merge_fanin", p.alca_merge_fanin)):
        _require(v >= 1, f"{name} must be >= 1")
    _require(p.repacker_jobs % p.repacker_merge_fanin == 0,
             "repack jobs not divisible by repackmerge fan-in")
    n_rm = p.repacker_jobs // p.repacker_merge_fanin
    n_pr = n_rm * p.prompt_fanout
    _require(n_pr % p.prompt_merge_fanin == 0,
             "promptreco jobs not divisible by promptmerge fan-in")
    n_pm = n_pr // p.prompt_merge_fanin
    n_al = n_pm * p.alca_fanout
    _require(n_al % p.alca_merge_fanin == 0,
             "alcareco jobs not divisible by alcamerge fan-in")
    n_am = n_al // p.alca_merge_fanin

    jobs: list[JobSpec] = []
    preexisting: dict[str, int] = {}

    def job(step: int, idx: int, inputs: Iterable[str],
            out_size: int) -> JobSpec:
        name = _TIER0_STEP_NAMES[step]
        return JobSpec(
            job_id=f"{name}-{idx:04d}", step=step, inputs=frozenset(inputs),
            outputs=((f"tier0/{name}/{idx:04d}", out_size),),
            processing_time=p.processing_time, max_retries=p.max_retries)

    for i in range(p.repacker_jobs):
        raw = f"tier0/raw/{i:04d}"
        preexisting[raw] = p.raw_file_size
        jobs.append(job(0, i, {raw}, p.repacker_out_size))
    for i in range(n_rm):
        grp = [f"tier0/repack/{k:04d}"
               for k in range(i * p.repacker_merge_fanin, (i + 1) * p.repacker_merge_fanin)]
        jobs.append(job(1, i, grp, p.repacker_out_size * p.repacker_merge_fanin))
    for i in range(n_pr):
        jobs.append(job(2, i, {f"tier0/repackmerge/{i // p.prompt_fanout:04d}"},
                        p.prompt_out_size))
    for i in range(n_pm):
        grp = [f"tier0/promptreco/{k:04d}"
               for k in range(i * p.prompt_merge_fanin, (i + 1) * p.prompt_merge_fanin)]
        jobs.append(job(3, i, grp, p.prompt_out_size * p.prompt_merge_fanin))
    for i in range(n_al):
        jobs.append(job(4, i, {f"tier0/promptmerge/{i // p.alca_fanout:04d}"},
                        p.alca_out_size))
    for i in range(n_am):
        grp = [f"tier0/alcareco/{k:04d}"
               for k in range(i * p.alca_merge_fanin, (i + 1) * p.alca_merge_fanin)]
        jobs.append(job(5, i, grp, p.alca_out_size * p.alca_merge_fanin))

    return WorkflowSpec(jobs=jobs, kind="tier0", preexisting=preexisting)


# ---------------------------------------------------------------------------
# Named presets
# ---------------------------------------------------------------------------

WORKFLOW_PRESETS = ("W1", "W2", "W2-dual", "W3", "tier0", "tier0-min")


def workflow_preset(name: str, *, file_size: int = 700 * MB,
                    processing_time: float = DEFAULT_PROCESSING_TIME,
                    max_retries: int = DEFAULT_MAX_RETRIES) -> WorkflowSpec:
    """Benchmark presets: W1 chain 80+80, W2 split 40+80, W3 merge 80+40,
    W2-dual the two-files-per-step0-job split variant, tier0 the paper-scale
    production preset.
    """
    kw = dict(processing_time=processing_time, max_retries=max_retries)
    if name == "W1":
        return generate_chain(80, file_size, **kw)
    if name == "W2":
        return generate_split(40, 2, file_size, **kw)
    if name == "W2-dual":
        return generate_split(40, 1, file_size, files_per_job=2, **kw)
    if name == "W3":
        return generate_merge(80, 2, file_size, **kw)
    if name == "tier0":
        return generate_tier0(Tier0Params(processing_time=processing_time,
                                          max_retries=max_retries))
    if name == "tier0-min":
        return generate_tier0(TIER0_MINIMAL)
    raise WorkflowError(f"unknown workflow preset {name!r}")


def build_workflow(spec: Union[str, Mapping]) -> WorkflowSpec:
    """Build a workflow from a preset name or a generator-parameter mapping."""
    if isinstance(spec, str):
        return workflow_preset(spec)
    params = dict(spec)
    kind = params.pop("kind", None)
    if kind == "chain":
        return generate_chain(**params)
    if kind == "split":
        return generate_split(**params)
    if kind == "merge":
        return generate_merge(**params)
    if kind == "tier0":
        return generate_tier0(Tier0Params(**params))
    if kind == "preset":
        return workflow_preset(**params)
    raise WorkflowError(f"unknown workflow kind {kind!r}")
