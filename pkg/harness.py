"""
Experiment orchestration: seeded trial batches, threshold sweeps and
their CSV / JSON-lines outputs
"""

import hashlib
import json
import logging
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import pandas as pd
import scipy.stats
from tqdm import tqdm

from config import OUTPUT_CONFIG, SIMULATION_CONFIG, get_worker_count
from conn import component_census, is_connected, is_k_vertex_connected, min_degree
from gen import derive_trial_seed, sample_union
from model import (
    BernoulliYQ,
    ConfigError,
    GraphUnionError,
    ModelSpec,
    PreconditionError,
    ValidationReport,
    spec_from_dict,
    spec_to_dict,
    validate_spec,
)
from stats import (
    blossom_census,
    check_profile_invariants,
    d_prime_sequence,
    detect_event_A,
    membership_profile,
    n_counters,
)
from theory import (
    bernoulli_kappa_prime,
    lambda_k,
    model_moments,
    moment_condition,
    predict_connect_prob,
    window_report,
)

logger = logging.getLogger("HARNESS")

STATISTIC_NAMES = ('connected', 'kconn', 'delta', 'eta_census', 'n_counters', 'blossoms', 'event_A')
SWEEP_PARAMETERS = ('m', 'lambda0')
_PARAMETRIZED = re.compile(r'^(kconn|n_counters)\((\d+)\)$')

# parallel fan-out only pays off above this many trials
MIN_PARALLEL_TRIALS = 64

# ============================================================================
# DATA MODELS
# ============================================================================


@dataclass(frozen=True)
class StatisticsRequest:
    connected: bool = True
    kconn: tuple[int, ...] = ()
    delta: bool = True
    eta_census: bool = False
    # membership degree a for the N-counters; None means not requested
    n_counters: Optional[int] = None
    blossoms: bool = False
    event_A: bool = False

    @property
    def needs_profile(self) -> bool:
        return self.n_counters is not None or self.blossoms or self.event_A

    def names(self) -> list[str]:
        out = []
        if self.connected:
            out.append('connected')
        out.extend(f'kconn({k})' for k in self.kconn)
        for flag in ('delta', 'eta_census'):
            if getattr(self, flag):
                out.append(flag)
        if self.n_counters is not None:
            out.append(f'n_counters({self.n_counters})')
        for flag in ('blossoms', 'event_A'):
            if getattr(self, flag):
                out.append(flag)
        return out


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[Union[int, float], ...]


@dataclass(frozen=True)
class ExperimentConfig:
    spec: ModelSpec
    trials: int
    master_seed: int
    statistics: StatisticsRequest = field(default_factory=StatisticsRequest)
    sweep: Optional[SweepSpec] = None


@dataclass
class TrialRecord:
    trial_index: int
    derived_seed: int
    connected: bool
    delta: int
    kconn_results: dict[int, bool]
    eta1: int
    nk_summary: dict[int, int]
    eta_census: dict[int, int] = field(default_factory=dict)
    n_star_summary: dict[int, int] = field(default_factory=dict)
    n_prime_summary: dict[int, int] = field(default_factory=dict)
    blossom_centres: dict[int, int] = field(default_factory=dict)
    event_A: Optional[bool] = None
    invariant_violations: list[str] = field(default_factory=list)
    # excluded from serialized output
    wall_time_micros: int = 0

    def to_dict(self) -> dict:
        data = asdict(self)
        data.pop('wall_time_micros')
        return data


@dataclass(frozen=True)
class AggregateRow:
    statistic: str
    estimate: float
    ci_low: float
    ci_high: float
    count: Optional[int]
    trials: int


@dataclass
class RunResult:
    config: ExperimentConfig
    records: list[TrialRecord]
    aggregates: list[AggregateRow]

    def aggregate(self, statistic: str) -> AggregateRow:
        for row in self.aggregates:
            if row.statistic == statistic:
                return row
        raise KeyError(statistic)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(row) for row in self.aggregates])


@dataclass
class SweepPoint:
    value: Union[int, float]
    m: int
    lambda0: Optional[float]
    lambdas: dict[int, float]
    predicted_connect: Optional[float]
    result: RunResult


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: list[SweepPoint]
    notes: list[str]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for point in self.points:
            row = {
                'sweep_value': point.value,
                'm': point.m,
                'lambda0': point.lambda0,
            }
            for k in self.config.statistics.kconn:
                row[f'lambda_{k - 1}'] = point.lambdas.get(k - 1)
            row['predicted_connect'] = point.predicted_connect
            for agg in point.result.aggregates:
                row[agg.statistic] = agg.estimate
                row[f'{agg.statistic}_lo'] = agg.ci_low
                row[f'{agg.statistic}_hi'] = agg.ci_high
            rows.append(row)
        return pd.DataFrame(rows)


# ============================================================================
# CONFIG PARSING AND VALIDATION
# ============================================================================


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _parse_statistics(items, problems: list[tuple[str, str]]) -> StatisticsRequest:
    flags = {'connected': False, 'delta': False, 'eta_census': False, 'blossoms': False, 'event_A': False}
    kconn = []
    a = None
    if not isinstance(items, list):
        problems.append(('config.statistics', 'must be a list of statistic names'))
        return StatisticsRequest()
    for i, item in enumerate(items):
        path = f'config.statistics[{i}]'
        if not isinstance(item, str):
            problems.append((path, 'must be a string'))
            continue
        match = _PARAMETRIZED.match(item)
        if match:
            name, arg = match.group(1), int(match.group(2))
            if arg < 1:
                problems.append((path, f'{name} argument must be >= 1'))
            elif name == 'kconn':
                kconn.append(arg)
            else:
                a = arg
        elif item in flags:
            flags[item] = True
        elif item in ('kconn', 'n_counters'):
            problems.append((path, f'{item} needs an argument, e.g. {item}(2)'))
        else:
            problems.append((path, f'unknown statistic {item!r}; expected one of {STATISTIC_NAMES}'))
    return StatisticsRequest(kconn=tuple(sorted(set(kconn))), n_counters=a, **flags)


def _parse_sweep(data, problems: list[tuple[str, str]]) -> Optional[SweepSpec]:
    if data is None:
        return None
    if not isinstance(data, dict):
        problems.append(('config.sweep', 'must be an object'))
        return None
    parameter = data.get('parameter')
    values = data.get('values')
    if parameter not in SWEEP_PARAMETERS:
        problems.append(('config.sweep.parameter', f'must be one of {SWEEP_PARAMETERS}, got {parameter!r}'))
    if not isinstance(values, list) or not values:
        problems.append(('config.sweep.values', 'must be a nonempty list'))
        return None
    for i, v in enumerate(values):
        if parameter == 'm' and (not _is_int(v) or v < 0):
            problems.append((f'config.sweep.values[{i}]', f'm must be a nonnegative integer, got {v!r}'))
        elif parameter == 'lambda0' and (isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v)):
            problems.append((f'config.sweep.values[{i}]', f'lambda0 must be a finite number, got {v!r}'))
    return SweepSpec(parameter=parameter, values=tuple(values))


def _parse_config(data) -> tuple[Optional[ExperimentConfig], list[tuple[str, str]]]:
    problems = []
    if not isinstance(data, dict):
        return None, [('config', 'must be an object')]

    spec = None
    if 'spec' not in data:
        problems.append(('config.spec', 'missing'))
    else:
        try:
            spec = spec_from_dict(data['spec'], path='config.spec')
        except ConfigError as e:
            problems.append((e.path, str(e).split(': ', 1)[-1]))
        else:
            problems.extend(('config.spec', message) for message in validate_spec(spec).messages)

    trials = data.get('trials')
    if not _is_int(trials) or trials < 1:
        problems.append(('config.trials', f'must be a positive integer, got {trials!r}'))

    seed = data.get('master_seed', SIMULATION_CONFIG['default_master_seed'])
    if not _is_int(seed) or not 0 <= seed < 2 ** 64:
        problems.append(('config.master_seed', f'must be a 64-bit nonnegative integer, got {seed!r}'))

    statistics = _parse_statistics(data.get('statistics', ['connected', 'delta']), problems)
    sweep = _parse_sweep(data.get('sweep'), problems)

    if problems:
        return None, problems
    return ExperimentConfig(spec=spec, trials=trials, master_seed=seed, statistics=statistics, sweep=sweep), []


def validate_experiment_config(data: dict) -> ValidationReport:
    """Every problem of a config document, prefixed by its field path"""
    _, problems = _parse_config(data)
    return ValidationReport.from_messages(f'{path}: {message}' for path, message in problems)


def experiment_config_from_dict(data: dict) -> ExperimentConfig:
    config, problems = _parse_config(data)
    if problems:
        path, message = problems[0]
        raise ConfigError(path, message if len(problems) == 1 else f'{message} (+{len(problems) - 1} more)')
    return config


def load_experiment_config(file_path: Union[str, Path]) -> ExperimentConfig:
    with open(file_path, encoding='utf-8') as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as e:
            raise ConfigError('config', f'invalid JSON ({e})') from e
    return experiment_config_from_dict(data)


def config_to_dict(config: ExperimentConfig) -> dict:
    data = {
        'spec': spec_to_dict(config.spec),
        'trials': config.trials,
        'master_seed': config.master_seed,
        'statistics': config.statistics.names(),
    }
    if config.sweep is not None:
        data['sweep'] = {'parameter': config.sweep.parameter, 'values': list(config.sweep.values)}
    return data


def config_digest(config: ExperimentConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


# ============================================================================
# TRIALS
# ============================================================================


def _membership_degree(config: ExperimentConfig) -> int:
    if config.statistics.n_counters is not None:
        return config.statistics.n_counters
    try:
        a = model_moments(config.spec).a
    except GraphUnionError:
        a = None
    return a or 1


def run_trial(config: ExperimentConfig, trial_index: int, a: int = 1) -> TrialRecord:
    """One trial: sample with stream (master_seed, trial_index) and measure the requested statistics"""
    started = time.perf_counter_ns()
    request = config.statistics
    seed = derive_trial_seed(config.master_seed, trial_index)
    g = sample_union(config.spec, seed)

    census = component_census(g)
    record = TrialRecord(
        trial_index=trial_index,
        derived_seed=seed,
        connected=is_connected(g),
        delta=min_degree(g),
        kconn_results={k: is_k_vertex_connected(g, k) for k in request.kconn},
        eta1=census.eta(1),
        nk_summary={},
    )
    if request.eta_census:
        record.eta_census = dict(census.sizes_histogram)

    if request.needs_profile:
        profile = membership_profile(g, a)
        counters = n_counters(profile)
        record.nk_summary = dict(counters.n_k)
        if request.n_counters is not None:
            record.n_star_summary = dict(counters.n_star_k)
            record.n_prime_summary = dict(counters.n_prime_k)
            record.invariant_violations = check_profile_invariants(g, profile, counters)
        if request.blossoms:
            record.blossom_centres = {
                k: len(blossom_census(g, profile, k)[1]) for k in sorted(counters.n_k) if k >= 1
            }
        if request.event_A:
            record.event_A = detect_event_A(profile)
    else:
        counts = {}
        for d in d_prime_sequence(g):
            counts[d] = counts.get(d, 0) + 1
        record.nk_summary = dict(sorted(counts.items()))

    record.wall_time_micros = (time.perf_counter_ns() - started) // 1000
    return record


def _run_chunk(config: ExperimentConfig, indices: list[int], a: int) -> list[TrialRecord]:
    return [run_trial(config, t, a) for t in indices]


def _collect_records(config: ExperimentConfig, workers: int) -> list[TrialRecord]:
    a = _membership_degree(config)
    show = SIMULATION_CONFIG['progress']
    indices = list(range(config.trials))

    if workers <= 1 or config.trials < MIN_PARALLEL_TRIALS:
        return [run_trial(config, t, a) for t in tqdm(indices, desc='trials', disable=not show)]

    chunk = max(1, config.trials // (workers * 4))
    chunks = [indices[i:i + chunk] for i in range(0, len(indices), chunk)]
    by_start = {}
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futures = {ex.submit(_run_chunk, config, part, a): part[0] for part in chunks}
        with tqdm(total=config.trials, desc='trials', disable=not show) as bar:
            for fut in as_completed(futures):
                records = fut.result()
                by_start[futures[fut]] = records
                bar.update(len(records))
    # ordered merge by trial index
    return [record for start in sorted(by_start) for record in by_start[start]]


# ============================================================================
# AGGREGATION
# ============================================================================


def wilson_interval(successes: int, trials: int, confidence: Optional[float] = None) -> tuple[float, float]:
    confidence = OUTPUT_CONFIG['confidence'] if confidence is None else confidence
    ci = scipy.stats.binomtest(successes, trials).proportion_ci(confidence_level=confidence, method='wilson')
    return float(ci.low), float(ci.high)


def mean_interval(values: list[float], confidence: Optional[float] = None) -> tuple[float, float, float]:
    """Mean with a Student-t interval; degenerate samples get a zero-width interval"""
    confidence = OUTPUT_CONFIG['confidence'] if confidence is None else confidence
    count = len(values)
    mean = math.fsum(values) / count
    if count < 2 or all(v == values[0] for v in values):
        return mean, mean, mean
    sem = float(scipy.stats.sem(values))
    low, high = scipy.stats.t.interval(confidence, count - 1, loc=mean, scale=sem)
    return mean, float(low), float(high)


def _proportion_row(name: str, hits: int, trials: int) -> AggregateRow:
    low, high = wilson_interval(hits, trials)
    return AggregateRow(name, hits / trials, low, high, hits, trials)


def _mean_row(name: str, values: list[float]) -> AggregateRow:
    mean, low, high = mean_interval(values)
    return AggregateRow(name, mean, low, high, None, len(values))


def aggregate_records(request: StatisticsRequest, records: list[TrialRecord]) -> list[AggregateRow]:
    trials = len(records)
    rows = []
    if request.connected:
        rows.append(_proportion_row('connected', sum(r.connected for r in records), trials))
    for k in request.kconn:
        rows.append(_proportion_row(f'kconn({k})', sum(r.kconn_results[k] for r in records), trials))
    if request.delta:
        rows.append(_mean_row('delta_mean', [float(r.delta) for r in records]))
        for d in sorted({r.delta for r in records}):
            rows.append(_proportion_row(f'delta=={d}', sum(r.delta == d for r in records), trials))
    rows.append(_mean_row('eta1_mean', [float(r.eta1) for r in records]))
    rows.append(_proportion_row('eta1==0', sum(r.eta1 == 0 for r in records), trials))
    if request.eta_census:
        rows.append(_mean_row('components_mean', [float(sum(r.eta_census.values())) for r in records]))
    if request.n_counters is not None:
        rows.append(_proportion_row('invariants_ok', sum(not r.invariant_violations for r in records), trials))
        rows.append(_proportion_row('n_prime_zero', sum(not r.n_prime_summary for r in records), trials))
    if request.blossoms:
        rows.append(_mean_row('blossom_centres_mean', [float(sum(r.blossom_centres.values())) for r in records]))
    if request.event_A:
        rows.append(_proportion_row('event_A', sum(bool(r.event_A) for r in records), trials))
    return rows


def run_trials(config: ExperimentConfig, workers: Optional[int] = None) -> RunResult:
    """All trials of a config, merged in trial order, with interval estimates"""
    if config.trials < 1:
        raise ConfigError('config.trials', 'must be >= 1')
    workers = get_worker_count() if workers is None else workers
    logger.info("running %d trials (n=%d, m=%d, %d workers)", config.trials, config.spec.n, config.spec.m, workers)
    records = _collect_records(config, workers)
    return RunResult(config=config, records=records, aggregates=aggregate_records(config.statistics, records))


# ============================================================================
# SWEEPS
# ============================================================================


def _kappa(spec: ModelSpec) -> float:
    return float(model_moments(spec).kappa)


def sweep(config: ExperimentConfig, workers: Optional[int] = None) -> SweepResult:
    """One aggregate row per sweep value; every point reuses the same trial seeds"""
    if config.sweep is None:
        raise ConfigError('config.sweep', 'missing')
    n = config.spec.n
    kappa = _kappa(config.spec)
    points, notes = [], []

    for value in config.sweep.values:
        if config.sweep.parameter == 'lambda0':
            if kappa <= 0 or n < 2:
                raise PreconditionError('lambda0 sweeps need kappa > 0 and n >= 2')
            m = round(n * (math.log(n) - value) / kappa)
            if m < 1:
                note = f'lambda0={value}: back-solved m={m} < 1, row skipped'
                logger.warning(note)
                notes.append(note)
                continue
        else:
            m = int(value)

        point_config = replace(config, spec=replace(config.spec, m=m), sweep=None)
        lambdas, lambda0, predicted = {}, None, None
        if m >= 1 and n >= 2 and kappa > 0:
            lambda0 = lambda_k(n, m, kappa, 0)
            predicted = predict_connect_prob(lambda0)
            for k in config.statistics.kconn:
                lambdas[k - 1] = lambda_k(n, m, kappa, k - 1)
        logger.info("sweep point %s=%s (m=%d)", config.sweep.parameter, value, m)
        points.append(SweepPoint(
            value=value, m=m, lambda0=lambda0, lambdas=lambdas,
            predicted_connect=predicted, result=run_trials(point_config, workers),
        ))
    return SweepResult(config=config, points=points, notes=notes)


# ============================================================================
# OUTPUT
# ============================================================================


def _header(config: ExperimentConfig) -> str:
    return f'# config_digest={config_digest(config)} master_seed={config.master_seed}\n'


def _float_format() -> str:
    return f"%.{OUTPUT_CONFIG['significant_digits']}g"


def _write_csv(frame: pd.DataFrame, path: Path, config: ExperimentConfig) -> None:
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(_header(config))
        frame.to_csv(handle, index=False, float_format=_float_format(), lineterminator='\n')


def _write_jsonl(records: list[TrialRecord], path: Path, config: ExperimentConfig, extra: Optional[dict] = None) -> None:
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(_header(config))
        for record in records:
            data = record.to_dict()
            if extra:
                data.update(extra)
            handle.write(json.dumps(data, sort_keys=True, separators=(',', ':')) + '\n')


def write_run_outputs(result: RunResult, out_dir: Union[str, Path]) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {'aggregates': out / 'aggregates.csv', 'trials': out / 'trials.jsonl'}
    _write_csv(result.to_frame(), paths['aggregates'], result.config)
    _write_jsonl(result.records, paths['trials'], result.config)
    return paths


def write_sweep_outputs(result: SweepResult, out_dir: Union[str, Path]) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {'sweep': out / 'sweep.csv', 'trials': out / 'trials.jsonl'}
    _write_csv(result.to_frame(), paths['sweep'], result.config)
    with open(paths['trials'], 'w', encoding='utf-8', newline='') as handle:
        handle.write(_header(result.config))
        for point in result.points:
            for record in point.result.records:
                data = record.to_dict()
                data['sweep_value'] = point.value
                data['m'] = point.m
                handle.write(json.dumps(data, sort_keys=True, separators=(',', ':')) + '\n')
    if result.notes:
        (out / 'notes.txt').write_text('\n'.join(result.notes) + '\n', encoding='utf-8')
    return paths


# ============================================================================
# REPORTS
# ============================================================================


def moments_report(spec: ModelSpec) -> dict:
    """Analytic moments and threshold functionals of a spec"""
    moments = model_moments(spec)
    report = {
        'n': spec.n,
        'm': spec.m,
        'kind': spec.kind_name.value,
        'alpha': moments.alpha,
        'kappa': float(moments.kappa),
        'kappa_t': {str(t): float(v) for t, v in moments.kappa_t.items()},
        'a': moments.a,
        'kappa_a': float(moments.kappa_a),
    }
    if spec.n >= 2 and spec.m >= 1 and moments.kappa > 0:
        report['lambda'] = {str(k): lambda_k(spec.n, spec.m, moments.kappa, k) for k in range(4)}
        report['predicted_connect'] = predict_connect_prob(report['lambda']['0'])
        window = window_report(spec.n, spec.m, moments, 0)
        report['window_k0'] = asdict(window)
    if moments.a is not None:
        value, exact = moment_condition(spec, 1, moments.a)
        report['moment_condition_k1'] = {'value': value, 'exact': exact}
    if isinstance(spec.kind, BernoulliYQ):
        report['kappa_prime'] = bernoulli_kappa_prime(spec.kind.support)
    return report


def to_dot(g) -> str:
    """Graphviz DOT text of a union graph"""
    lines = ['graph G {']
    lines.extend(f'  {v};' for v in g.vertices() if g.degree(v) == 0)
    lines.extend(f'  {u} -- {v};' for u, v in g.edges())
    lines.append('}')
    return '\n'.join(lines) + '\n'


def sample_report(spec: ModelSpec, seed: int, dot: bool = False) -> str:
    g = sample_union(spec, seed)
    if dot:
        return to_dot(g)
    census = component_census(g)
    summary = {
        'n': g.n,
        'm': len(g.communities),
        'seed': seed,
        'edges': g.edge_count(),
        'connected': is_connected(g),
        'delta': min_degree(g),
        'components': census.component_count,
        'eta': {str(k): v for k, v in census.sizes_histogram.items()},
    }
    return json.dumps(summary, sort_keys=True, indent=2)
