import click
from click_option_group import optgroup, RequiredMutuallyExclusiveOptionGroup
import concurrent.futures
import csv
import fractions
import io
import json
import math
import numpy as np
import os
import psutil
import sys
import time
import typing as t

from widthlab import cascade, confee, verification
from widthlab import instance as documents
from widthlab.balls import Kind, WidthQuery, DEFAULT_A0, classify_regimes
from widthlab.certified import gluskin_lower_bound
from widthlab.exponents import Exponent
from widthlab.formulas import (
    THEOREMS, BoundReport, RegimeError, evaluate_all, inclusion_upper_bound,
)
from widthlab.norms import IntersectionNorm, LpNorm
from widthlab.oracle import (
    DeskScaleError, OracleBudget, gelfand_estimate, kolmogorov_estimate,
)
from widthlab.sobolev import width_exponent

_DEFAULT_JOBS = psutil.cpu_count()
_DEFAULT_DELTA = 0.05
_SIGNIFICANT = 12

SWEEP_COLUMNS = (
    'row', 'N', 'n', 'nu_ratio', 'regimes',
    *(f'order_{key}' for key in THEOREMS),
    'certified_lower', 'certified_upper', 'oracle', 'oracle_spread',
    'regime_switch',
)

thresholds = [
    (60 * 60 * 24, 'day'),
    (60 * 60, 'hour'),
    (60, 'minute'),
    (1, 'second'),
]

subsecond_units = [
    'seconds',
    'milliseconds',
    'microseconds',
    'nanoseconds',
]

def hrd(d: float) -> str:
    """
    Convert a machine-readable duration into a human-readable one.

    Given a duration calculated by subtracting two results of a time method,
    e.g. `time.perf_counter()`, return a friendly string like "1.23 seconds".
    """
    i = 0
    while i < 3 and thresholds[i][0] > d:
        i += 1
    # Whole seconds or more.
    if i < 3:
        (d1, u1) = thresholds[i]
        q1, r1 = divmod(d, d1)
        if q1 > 1:
            u1 += 's'
        (d2, u2) = thresholds[i+1]
        q2, _ = divmod(r1, d2)
        if q2 > 1:
            u2 += 's'
        return f'{int(q1)} {u1}, {int(q2)} {u2}'
    # We want 3 significant digits.
    i = 0
    while d < 1:
        i += 1
        d *= 1000
    u = subsecond_units[i]
    return f'{d:.3g} {u}'

class BadInput(click.ClickException):
    """A malformed instance or configuration."""
    exit_code = 2

def plain(value):
    """Reduce a result to JSON types, with floats at 12 significant digits."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Exponent):
        return value.json()
    if isinstance(value, (Kind,)):
        return value.value
    if isinstance(value, int) and not isinstance(value, np.integer):
        return value
    if isinstance(value, (float, fractions.Fraction, np.floating, np.integer)):
        if isinstance(value, np.integer):
            return int(value)
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return float(f'{value:.{_SIGNIFICANT}g}')
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, t.Mapping):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    return str(value)

def cell(value) -> str:
    value = plain(value)
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return f'{value:.{_SIGNIFICANT}g}'
    return str(value)

def to_json(document) -> str:
    return json.dumps(plain(document), indent=2, sort_keys=True) + '\n'

def to_csv(columns, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([cell(row.get(column)) for column in columns])
    return buffer.getvalue()

def report_document(report: BoundReport) -> dict:
    return {
        'order_value': report.order_value,
        'regime': report.regime.names(),
        'formula_trace': [{'term': term, 'value': value} for term, value in report.formula_trace],
        'linear_applicable': report.linear_applicable,
        'p1': report.p1,
        'advisories': report.advisories,
        'details': report.details,
    }

def certificate_document(query: WidthQuery):
    if query.kind == Kind.KOLMOGOROV:
        return None
    certificate = gluskin_lower_bound(query)
    return {
        'value': certificate.lower_bound,
        's_star': certificate.s_star,
        'A': certificate.A,
        'K': certificate.K,
        'c': certificate.c,
        'embed': certificate.embed,
        'exhaustive': certificate.exhaustive,
        'covers': list(certificate.covers),
    }

def oracle_estimate(query: WidthQuery, seed: int, budget: OracleBudget):
    """The oracle estimate for the kind of width the query asks about."""
    if query.kind == Kind.GELFAND:
        return gelfand_estimate(query, seed, budget)
    if query.kind == Kind.KOLMOGOROV:
        return kolmogorov_estimate(
            IntersectionNorm(query.set), LpNorm(query.q, query.N), query.n, seed, budget,
        )
    raise BadInput('linear widths have no numerical estimate')

def sweep_row(row: int, query: WidthQuery, a0: float) -> dict:
    set = query.set
    reports = evaluate_all(query, a0)
    values = {
        'row': row,
        'N': query.N,
        'n': query.n,
        'nu_ratio': set.balls[0].nu / set.balls[1].nu if len(set) > 1 else None,
        'regimes': '|'.join(classify_regimes(query, a0).names()),
        'certified_upper': inclusion_upper_bound(query),
        'certified_lower': None,
    }
    for key, report in reports.items():
        values[f'order_{key}'] = None if isinstance(report, RegimeError) else report.order_value
    if query.kind != Kind.KOLMOGOROV:
        values['certified_lower'] = gluskin_lower_bound(query).lower_bound
    return values

@cascade.group(context_settings=dict(
    help_option_names=['--help', '-h'],
    show_default=True,
))
class Widthlab:

    @cascade.value()
    @cascade.option(
        '--config',
        default='.widthlab.toml',
        help='Path to configuration file. A `.json` suffix selects JSON.',
        metavar='PATH',
    )
    def config_(self, config):
        try:
            return confee.read(config)
        except (ValueError, OSError) as error:
            raise BadInput(f'{config}: {error}')

    @cascade.value()
    @cascade.option('--verbose', '-v', count=True, help='Increment verbosity.')
    @cascade.option('--quiet', '-q', count=True, help='Decrement verbosity.')
    def verbosity_(self, config_, verbose, quiet):
        base = config_.verbosity(0)
        return min(max(base + verbose - quiet, 0), 3)

    @cascade.value()
    def log_(self, verbosity_):
        def log(level, message):
            if verbosity_ >= level:
                click.echo(message, err=True)
        return log

    @cascade.value()
    @cascade.option(
        '--jobs', '--parallel', '-j',
        type=int,
        help='Maximum number of simultaneous jobs.',
    )
    def jobs_(self, config_, jobs):
        cap = os.environ.get('WIDTHLAB_THREADS')
        jobs = confee.resolve(jobs, config_.jobs, _DEFAULT_JOBS)
        if cap is not None:
            try:
                jobs = min(jobs, int(cap))
            except ValueError:
                raise BadInput(f'WIDTHLAB_THREADS must be an integer: {cap!r}')
        return max(jobs, 1)

    @cascade.value()
    @cascade.decorator(optgroup.group(
        'Instance', cls=RequiredMutuallyExclusiveOptionGroup,
        help='Where to read the instance document.',
    ))
    @cascade.decorator(optgroup.option(
        '--instance', metavar='PATH',
        help='Path to a JSON or TOML instance document.',
    ))
    @cascade.decorator(optgroup.option(
        '--inline', metavar='JSON',
        help='Instance document given inline.',
    ))
    def document_(self, instance, inline):
        try:
            return documents.load(instance, inline)
        except documents.InstanceError as error:
            raise BadInput(str(error))

    @cascade.value()
    def query_(self, document_):
        try:
            return documents.width_query(document_)
        except ValueError as error:
            raise BadInput(str(error))

    @cascade.value()
    @cascade.option('--seed', type=click.IntRange(0, 2 ** 64 - 1), help='Random seed.')
    def seed_(self, config_, seed):
        return int(confee.resolve(seed, config_.seed, 0))

    @cascade.value()
    @cascade.option('--a0', type=float, help='Constant bounding n in the two-ball regimes.')
    def a0_(self, config_, a0):
        a0 = float(confee.resolve(a0, config_.a0, DEFAULT_A0))
        if not a0 > 0:
            raise BadInput(f'a0 must be positive: {a0}')
        return a0

    @cascade.value()
    @cascade.option('--delta', type=float, help='Relative tolerance around oracle estimates.')
    def delta_(self, config_, delta):
        delta = float(confee.resolve(delta, config_.delta, _DEFAULT_DELTA))
        if not 0 < delta < 1:
            raise BadInput(f'delta must lie in (0, 1): {delta}')
        return delta

    @cascade.value()
    @cascade.option('--restarts', type=int, help='Independent restarts of the oracle.')
    def budget_(self, config_, jobs_, restarts):
        oracle = config_.oracle
        defaults = OracleBudget()
        try:
            return OracleBudget(
                restarts=int(confee.resolve(restarts, oracle.restarts, defaults.restarts)),
                ascent_starts=int(oracle.ascent_starts(defaults.ascent_starts)),
                iterations=int(oracle.iterations(defaults.iterations)),
                rounds=int(oracle.rounds(defaults.rounds)),
                max_dim=int(oracle.max_dim(defaults.max_dim)),
                threads=jobs_,
            )
        except ValueError as error:
            raise BadInput(str(error))

    @cascade.value()
    @cascade.option(
        '--format', type=click.Choice(['json', 'csv']), help='Output format.',
    )
    @cascade.option('--out', metavar='PATH', help='Write output to a file.')
    def emit_(self, config_, format, out):
        format = confee.resolve(format, config_.format, 'json')
        if format not in ('json', 'csv'):
            raise BadInput(f'format must be json or csv: {format}')

        def emit(document, columns=None, rows=None):
            if format == 'csv' and columns is not None:
                text = to_csv(columns, rows)
            else:
                text = to_json(document)
            if out is None:
                click.echo(text, nl=False)
                return
            with confee.atomic(out, 'w') as file:
                file.write(text)
        return emit

    @cascade.command()
    def bounds(self, query_, a0_, emit_, log_):
        """Order estimates and certified bounds for one width."""
        reports = evaluate_all(query_, a0_)
        theorems = {}
        for key, report in reports.items():
            if isinstance(report, RegimeError):
                log_(1, f'{key}: {report}')
                theorems[key] = {'error': str(report)}
            else:
                theorems[key] = report_document(report)
        lower = certificate_document(query_)
        upper = inclusion_upper_bound(query_)
        document = {
            'instance': documents.describe_query(query_),
            'regimes': classify_regimes(query_, a0_).names(),
            'theorems': theorems,
            'certified_lower': lower,
            'certified_upper': upper,
        }
        rows = [
            {
                'theorem': key,
                'applicable': 'error' not in theorems[key],
                'order_value': theorems[key].get('order_value'),
                'certified_lower': None if lower is None else lower['value'],
                'certified_upper': upper,
                'message': theorems[key].get('error'),
            }
            for key in THEOREMS
        ]
        columns = ('theorem', 'applicable', 'order_value', 'certified_lower',
            'certified_upper', 'message')
        emit_(document, columns, rows)

    @cascade.command()
    def estimate(self, query_, seed_, budget_, emit_, log_):
        """Estimate one width numerically."""
        try:
            result = oracle_estimate(query_, seed_, budget_)
        except DeskScaleError as error:
            raise BadInput(str(error))
        for k, value in enumerate(result.restart_values):
            log_(2, f'restart {k}: {value:.12g}')
        log_(1, f'estimate {result.value:.12g}, spread {result.spread:.3g}')
        document = {
            'instance': documents.describe_query(query_),
            'seed': seed_,
            'value': result.value,
            'restarts_used': result.restarts_used,
            'inner_max_exact': result.inner_max_exact,
            'spread': result.spread,
        }
        columns = ('N', 'n', 'value', 'spread', 'restarts_used', 'inner_max_exact')
        rows = [{'N': query_.N, 'n': query_.n, **document}]
        emit_(document, columns, rows)

    @cascade.command()
    @cascade.option('--n-from', type=int, default=0, help='First n.')
    @cascade.option('--n-to', type=int, help='Last n.  [default: N/2]')
    @cascade.option('--n-step', type=click.IntRange(1), default=1, help='Step in n.')
    @cascade.option('--ratio-from', type=float, help='First ratio nu_1/nu_2.')
    @cascade.option('--ratio-to', type=float, help='Last ratio nu_1/nu_2.')
    @cascade.option('--ratio-steps', type=click.IntRange(1), default=9,
        help='Points on the geometric grid of ratios.')
    @cascade.option('--oracle/--no-oracle', default=False, help='Add oracle estimates.')
    def sweep(
        self, query_, a0_, seed_, budget_, jobs_, emit_, log_,
        n_from, n_to, n_step, ratio_from, ratio_to, ratio_steps, oracle,
    ):
        """Tabulate bounds along a range of n or of radius ratios."""
        N = query_.N
        if (ratio_from is None) != (ratio_to is None):
            raise BadInput('give both --ratio-from and --ratio-to')
        if ratio_from is not None:
            if len(query_.set) < 2:
                raise BadInput('a ratio sweep needs at least two balls')
            if not (ratio_from > 0 and ratio_to > 0):
                raise BadInput('ratios must be positive')
            second = query_.set.balls[1].nu
            ratios = np.geomspace(ratio_from, ratio_to, ratio_steps)
            queries = [
                query_.replace(set=query_.set.with_radius(0, float(ratio) * second))
                for ratio in ratios
            ]
        else:
            if n_to is None:
                n_to = N // 2
            if not (0 <= n_from and n_to <= N):
                raise BadInput(f'n range must lie within [0, {N}]')
            queries = [query_.replace(n=n) for n in range(n_from, n_to + 1, n_step)]

        rows = [sweep_row(k, query, a0_) for k, query in enumerate(queries)]
        previous = None
        for row in rows:
            row['regime_switch'] = previous is not None and row['regimes'] != previous
            previous = row['regimes']
            log_(1, f'row {row["row"]}: n={row["n"]} regimes={row["regimes"] or "-"}')

        if oracle:
            inner = budget_.replace(threads=1)
            try:
                with concurrent.futures.ThreadPoolExecutor(jobs_) as pool:
                    estimates = list(pool.map(
                        lambda query: oracle_estimate(query, seed_, inner), queries,
                    ))
            except DeskScaleError as error:
                raise BadInput(str(error))
            for row, result in zip(rows, estimates):
                row['oracle'] = result.value
                row['oracle_spread'] = result.spread

        document = {
            'instance': documents.describe_query(query_),
            'columns': list(SWEEP_COLUMNS),
            'rows': [{column: row.get(column) for column in SWEEP_COLUMNS} for row in rows],
        }
        emit_(document, SWEEP_COLUMNS, rows)

    @cascade.command()
    def sobolev(self, document_, emit_):
        """Width decay exponent for an intersection of Sobolev classes."""
        try:
            problem = documents.sobolev_instance(document_)
            theta, case, details = width_exponent(problem)
        except ValueError as error:
            raise BadInput(str(error))
        document = {
            'instance': documents.describe_sobolev(problem),
            'theta': theta,
            'theta_exact': str(theta) if isinstance(theta, fractions.Fraction) else None,
            'case': case,
            'details': {
                key: [*value] if isinstance(value, tuple) else value
                for key, value in details.items()
            },
        }
        columns = ('case', 'theta', 'theta_exact')
        emit_(document, columns, [document])

    @cascade.command()
    @cascade.option(
        '--suite', 'suites', multiple=True,
        type=click.Choice(list(verification.SUITES)),
        help='Run only these suites.  [default: all]',
    )
    @cascade.option('--lemma-constant', hidden=True,
        help='Replace the quadratic constant, e.g. 1/2.')
    @cascade.option('--swap-lambda', is_flag=True, hidden=True,
        help='Swap the roles of p_i and p_j when interpolating.')
    def verify(
        self, seed_, delta_, budget_, emit_, log_,
        suites, lemma_constant, swap_lambda,
    ):
        """Run the acceptance suites."""
        options = {}
        if lemma_constant is not None:
            try:
                options['c'] = fractions.Fraction(lemma_constant)
            except (ValueError, ZeroDivisionError):
                raise BadInput(f'not a number: {lemma_constant}')
            if not options['c'] > 0:
                raise BadInput(f'lemma constant must be positive: {lemma_constant}')
        if swap_lambda:
            options['interpolator'] = lambda pi, pj, q: (pj.recip - q.recip) / (pj.recip - pi.recip)

        def progress(result):
            status = 'pass' if result.passed else 'FAIL'
            log_(1, f'{result.name}: {status} ({result.checks} checks, '
                f'{result.failures} failures, {result.inconclusive} inconclusive)')

        results = verification.run(
            suites, seed=seed_, delta=delta_, budget=budget_, progress=progress,
            **options,
        )
        passed = all(result.passed for result in results)
        document = {
            'seed': seed_,
            'passed': passed,
            'suites': [result.json() for result in results],
        }
        columns = ('name', 'passed', 'checks', 'failures', 'inconclusive')
        emit_(document, columns, [result.json() for result in results])
        if not passed:
            raise SystemExit(1)


def main():
    start = time.time()
    try:
        Widthlab()
    finally:
        duration = time.time() - start # in seconds
        if duration > 1:
            print(hrd(duration), file=sys.stderr)
