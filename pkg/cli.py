import argparse
import io
import logging
import sys

import numpy as np

from carnot import (
    EXPONENTIAL,
    POLARIZED,
    GradedLieAlgebra,
    GroupElement,
    heisenberg_coordinate_convert,
    load_algebra,
    validate_algebra,
)
from ccmetric import (
    PROPERTY_HEADER,
    DistanceOptions,
    HorizontalFields,
    cc_distance,
    koranyi_bounds,
    property_battery,
    sample_pairs,
)
from clifford import (
    build_rep,
    weighted_sum_spectrum,
)
from helper import (
    DomainError,
    ENDPOINT_TOL,
    MEMBERSHIP_TOL,
    ZERO_TOL,
    atomic_write,
    csv_text,
    dumps,
    parse_floats,
    read_json,
)
from hypo import (
    HYPOELLIPTIC,
    NOT_HYPOELLIPTIC,
    decide,
    dirac_verdict,
    load_laplacian,
    theta_verdict,
)
from spectra import (
    CSV_HEADER,
    Cutoffs,
    NilmanifoldSpec,
    counting_function,
    dimension_fit,
    dirac_spectrum,
    zeta_scan,
)


COMMANDS = ('validate', 'compose', 'spectrum', 'dimfit', 'hypo', 'ccdist', 'ccprops', 'clifford')
EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_EXPECTATION = 3
CLIFFORD_HEADER = ['eigenvalue [imaginary part, units of i]', 'multiplicity']

log = logging.getLogger(__name__)


class JobConfig:
    '''Everything one CLI invocation needs; built from the parsed arguments'''

    def __init__(self, command, paths=(), cutoffs=None, tol=None, seed=0, out=None, expect=None,
                 plot=None, **options):
        if command not in COMMANDS:
            raise DomainError('unknown command {}'.format(command))
        self.command = command
        self.paths = list(paths)
        self.cutoffs = cutoffs or Cutoffs()
        self.tol = tol
        self.seed = seed
        self.out = out
        self.expect = expect
        self.plot = plot
        self.options = options

    def __repr__(self):
        return 'JobConfig({} {}, seed={})'.format(self.command, self.paths, self.seed)

    @classmethod
    def from_args(cls, ns):
        options = {k: v for k, v in vars(ns).items() if k not in (
            'command', 'paths', 'cutoff_tau', 'cutoff_kappa', 'cutoff_alpha', 'cutoff_gamma', 'tol', 'seed',
            'out', 'expect', 'plot', 'verbose')}
        paths = getattr(ns, 'paths', [])
        if ns.command == 'hypo' and paths and paths[0] == 'check':
            paths = paths[1:]
        cutoffs = None
        if ns.command in ('spectrum', 'dimfit'):
            cutoffs = Cutoffs(ns.cutoff_tau, ns.cutoff_kappa, ns.cutoff_alpha, ns.cutoff_gamma)
        return cls(ns.command, paths, cutoffs, getattr(ns, 'tol', None), getattr(ns, 'seed', 0),
                   getattr(ns, 'out', None), getattr(ns, 'expect', None), getattr(ns, 'plot', None), **options)

    def path(self):
        if len(self.paths) != 1:
            raise DomainError('{} takes exactly one input file, got {}'.format(self.command, len(self.paths)))
        return self.paths[0]


def emit(config, text):
    if config.out:
        atomic_write(config.out, text)
    else:
        sys.stdout.write(text)


def _point(alg, text, name):
    coords = parse_floats(text)
    if len(coords) != alg.n:
        raise DomainError('{} needs {} coordinates for {}, got {}'.format(name, alg.n, alg, len(coords)))
    return np.array(coords)


def _finite(value):
    return None if value is None or not np.isfinite(value) else float(value)


def do_validate(config):
    alg = GradedLieAlgebra.parse(read_json(config.path()))
    report = validate_algebra(alg, config.tol or ZERO_TOL)
    emit(config, dumps(report.serialize()))
    if not report.ok:
        sys.stderr.write('{}: {}\n'.format(config.path(), report))
        return EXIT_DOMAIN
    return EXIT_OK


def do_compose(config):
    alg = load_algebra(config.path())
    convention = config.options['convention']
    x = GroupElement(alg, _point(alg, config.options['x'], 'x'), convention)
    y = GroupElement(alg, _point(alg, config.options['y'], 'y'), convention)
    if convention == POLARIZED:
        x = heisenberg_coordinate_convert(x, EXPONENTIAL)
        y = heisenberg_coordinate_convert(y, EXPONENTIAL)
        product = heisenberg_coordinate_convert(x * y, POLARIZED)
    else:
        product = x * y
    emit(config, dumps({'convention': convention, 'product': product.coords.tolist(),
                        'x': parse_floats(config.options['x']), 'y': parse_floats(config.options['y'])}))
    return EXIT_OK


def load_spec(path, delta=None):
    '''a nilmanifold spec file, or an algebra file of a step-2 algebra with
    one-dimensional centre'''
    obj = read_json(path)
    if 'm' in obj:
        return NilmanifoldSpec.parse(obj)
    alg = load_algebra(path)
    return NilmanifoldSpec.from_algebra(alg, obj.get('delta', delta))


def counting_plot(table, title):
    '''SVG of the counting function on log-log axes; byte-stable across runs'''
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt
    matplotlib.rcParams['svg.hashsalt'] = 'counting-function'
    values, _ = table.abs_spectrum()
    values = values[values <= table.complete_below]
    if len(values) == 0:
        raise DomainError('no nonzero eigenvalue below {:.4g} to plot'.format(table.complete_below))
    ts = np.geomspace(values[0], table.complete_below, 200)
    counts = [counting_function(table, t) for t in ts]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(ts, counts, drawstyle='steps-post', color='#2c5282')
    ax.set_xlabel('t')
    ax.set_ylabel('N(t)')
    ax.set_title(title)
    ax.grid(True, which='both', ls=':', alpha=0.4)
    fig.tight_layout()
    buf = io.BytesIO()
    fig.savefig(buf, format='svg', metadata={'Date': None})
    plt.close(fig)
    return buf.getvalue()


def do_spectrum(config):
    spec = load_spec(config.path())
    table = dirac_spectrum(spec, config.cutoffs)
    emit(config, csv_text(CSV_HEADER, table.rows()))
    if config.plot:
        atomic_write(config.plot, counting_plot(table, repr(spec)))
    return EXIT_OK


def do_dimfit(config):
    spec = load_spec(config.path())
    table = dirac_spectrum(spec, config.cutoffs)
    t_range = (config.options['t_min'], config.options['t_max'])
    fit = dimension_fit(table, t_range)
    zeta = []
    for scan in zeta_scan(table, parse_floats(config.options['zeta'])):
        zeta.append({'p': scan.p, 'partial_sum': float(scan.partial[-1]) if len(scan.partial) else 0.0,
                     'tail_slope': _finite(scan.slope), 'diverging': scan.diverging})
    emit(config, dumps({
        'exponent': fit.exponent,
        'intercept': fit.intercept,
        't_range': list(t_range),
        'expected': spec.d + 2,
        'complete_below': table.complete_below,
        'limited_by': table.limit,
        'zeta': zeta,
    }))
    if config.plot:
        atomic_write(config.plot, counting_plot(table, repr(spec)))
    return EXIT_OK


def do_hypo(config):
    tol = config.tol or MEMBERSHIP_TOL
    if config.options.get('dirac') or config.options.get('theta') is not None:
        alg = load_algebra(config.path())
        rep = build_rep(alg.dims[0])
        if config.options.get('theta') is not None:
            verdict = theta_verdict(alg, rep, config.options['theta'], tol)
        else:
            verdict = dirac_verdict(alg, rep, tol)
    else:
        verdict = decide(load_laplacian(config.path()), tol)
    emit(config, dumps(verdict.serialize()))
    if config.expect == 'hypoelliptic' and verdict.status == NOT_HYPOELLIPTIC:
        sys.stderr.write('expected hypoelliptic, got {}\n'.format(verdict))
        return EXIT_EXPECTATION
    if config.expect == 'not-hypoelliptic' and verdict.status == HYPOELLIPTIC:
        sys.stderr.write('expected not hypoelliptic, got {}\n'.format(verdict))
        return EXIT_EXPECTATION
    return EXIT_OK


def _distance_options(config):
    return DistanceOptions(K=config.options['segments'], multistart=config.options['starts'],
                           tol=config.tol or ENDPOINT_TOL, seed=config.seed)


def do_ccdist(config):
    alg = load_algebra(config.path())
    x = _point(alg, config.options['x'], 'x')
    y = _point(alg, config.options['y'], 'y')
    result = cc_distance(HorizontalFields(alg), x, y, _distance_options(config))
    out = result.serialize()
    out.update({'x': x.tolist(), 'y': y.tolist()})
    emit(config, dumps(out))
    return EXIT_OK


def do_ccprops(config):
    alg = load_algebra(config.path())
    fields = HorizontalFields(alg)
    opts = _distance_options(config)
    pairs = sample_pairs(alg, config.options['pairs'], config.options['box'], config.seed)
    rows = [check.row() for check in property_battery(fields, pairs, opts, config.seed)]
    bounds = koranyi_bounds(fields, pairs, opts)
    spread_ok = 0 < bounds.c_hat <= bounds.C_hat < np.inf
    rows.append(['koranyi-ratio-min', bounds.c_hat, '', 'ok' if spread_ok else 'FAIL'])
    rows.append(['koranyi-ratio-max', bounds.C_hat, '', 'ok' if spread_ok else 'FAIL'])
    emit(config, csv_text(PROPERTY_HEADER, rows))
    return EXIT_OK


def do_clifford(config):
    rep = build_rep(config.options['rank'])
    lambdas = parse_floats(config.options['lambdas']) if config.options['lambdas'] else [1.0] * (rep.d // 2)
    wps = weighted_sum_spectrum(rep, lambdas)
    emit(config, csv_text(CLIFFORD_HEADER, [(float(v), mult) for v, mult in wps.spectrum]))
    return EXIT_OK


HANDLERS = {
    'validate': do_validate,
    'compose': do_compose,
    'spectrum': do_spectrum,
    'dimfit': do_dimfit,
    'hypo': do_hypo,
    'ccdist': do_ccdist,
    'ccprops': do_ccprops,
    'clifford': do_clifford,
}


def run(config):
    '''dispatches one job; domain errors become exit status 2 with the
    message on stderr'''
    log.info('running %s', config)
    try:
        return HANDLERS[config.command](config)
    except DomainError as e:
        sys.stderr.write('error: {}\n'.format(e))
        return EXIT_DOMAIN


def build_parser():
    parser = argparse.ArgumentParser(prog='carnot-spectra',
                                     description='Spectral and metric computations on Carnot groups')
    parser.add_argument('-v', '--verbose', action='store_true')
    commands = parser.add_subparsers(dest='command', required=True)

    def command(name, summary, paths='?'):
        sub = commands.add_parser(name, help=summary)
        sub.add_argument('paths', nargs=paths, default=[])
        sub.add_argument('--out')
        sub.add_argument('--tol', type=float)
        sub.add_argument('--seed', type=int, default=0)
        return sub

    command('validate', 'check an algebra file', paths=1)

    sub = command('compose', 'group product of two points', paths=1)
    sub.add_argument('--x', required=True)
    sub.add_argument('--y', required=True)
    sub.add_argument('--convention', choices=[EXPONENTIAL, POLARIZED], default=EXPONENTIAL)

    for name, summary in (('spectrum', 'horizontal Dirac spectrum table (CSV)'),
                       ('dimfit', 'counting-function exponent and zeta scan (JSON)')):
        sub = command(name, summary, paths=1)
        sub.add_argument('--cutoff-tau', type=int, default=2)
        sub.add_argument('--cutoff-kappa', type=int, default=2)
        sub.add_argument('--cutoff-alpha', type=float, default=1.0)
        sub.add_argument('--cutoff-gamma', type=float)
        sub.add_argument('--plot')
        if name == 'dimfit':
            sub.add_argument('--t-min', type=float, default=20.0,
                             help='lower end of the log-log fit window (default 20). Below t = 20 the '
                                  'counting function is still dominated by the first few Landau levels: '
                                  'on H3 a [5, 40] window fits 4.19 instead of 4.0')
            sub.add_argument('--t-max', type=float, default=40.0,
                             help='upper end of the fit window (default 40); the cutoffs must make '
                                  'the table complete up to this value')
            sub.add_argument('--zeta', default='3.5,4.5')

    sub = command('hypo', 'hypoellipticity verdict (JSON)', paths='+')
    sub.add_argument('--dirac', action='store_true')
    sub.add_argument('--theta', type=float)
    sub.add_argument('--expect', choices=['hypoelliptic', 'not-hypoelliptic'])

    for name, summary in (('ccdist', 'Carnot-Caratheodory distance (JSON)'),
                       ('ccprops', 'metric property battery (CSV)')):
        sub = command(name, summary, paths=1)
        sub.add_argument('--segments', type=int, default=32)
        sub.add_argument('--starts', type=int, default=8)
        if name == 'ccdist':
            sub.add_argument('--x', required=True)
            sub.add_argument('--y', required=True)
        else:
            sub.add_argument('--pairs', type=int, default=4)
            sub.add_argument('--box', type=float, default=1.0)

    sub = command('clifford', 'spectrum of sum_j lambda_j c_j c_(m+j) (CSV)', paths=1)
    sub.add_argument('--d', '--rank', dest='rank', type=int, required=True, metavar='D',
                     help='number of Clifford generators')
    sub.add_argument('--lambdas')
    return parser


def main(argv=None):
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    if ns.command == 'clifford' and ns.paths != ['spectrum']:
        sys.stderr.write('error: the clifford command supports "clifford spectrum"\n')
        return EXIT_DOMAIN
    return run(JobConfig.from_args(ns))


if __name__ == '__main__':
    sys.exit(main())
