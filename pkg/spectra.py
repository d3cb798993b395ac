import logging
from itertools import product
from math import floor, pi, sqrt

import numpy as np
from scipy import sparse
from scipy.linalg import eigh

from carnot import levi_normal_form
from clifford import (
    build_rep,
    pair_sum_matrix,
)
from helper import (
    ConsistencyError,
    CutoffError,
    DegenerateLeviError,
    DomainError,
    GROUP_TOL,
    HERMITE_N,
    MalformedInputError,
    ParityError,
    group_eigenvalues,
    require,
)


TORUS = 'torus'
LANDAU = 'landau'
FOUR_PI2 = 4 * pi ** 2
# sign codes of the signed Dirac value stored per block
BOTH_SIGNS = 2.0
UNSIGNED = np.nan
# zeta tails flatter than this log-log slope count as diverging
DIVERGENCE_SLOPE = 0.25
ZETA_BINS = 3

log = logging.getLogger(__name__)


class SpinStructure:

    def __init__(self, delta):
        delta = tuple(int(v) for v in delta)
        if any(v not in (1, -1) for v in delta):
            raise MalformedInputError('spin structure entries must be +1 or -1, got {}'.format(list(delta)))
        self.delta = delta

    @classmethod
    def trivial(cls, d):
        return cls((1,) * d)

    def __len__(self):
        return len(self.delta)

    def __eq__(self, other):
        return other is not None and self.delta == other.delta

    def __repr__(self):
        return 'SpinStructure({})'.format(''.join('+' if v == 1 else '-' for v in self.delta))

    def tail(self, start):
        return self.__class__(self.delta[start:])


def admissible_values(sign, bound):
    '''integers for sign +1, half-integers for sign -1, within [-bound, bound]'''
    if sign == 1:
        k = floor(bound)
        return [float(v) for v in range(-k, k + 1)]
    k = floor(bound - 0.5)
    return [v + 0.5 for v in range(-k - 1, k + 1)]


def next_admissible(sign, bound):
    '''smallest admissible modulus strictly above bound'''
    if sign == 1:
        return floor(bound) + 1.0
    return floor(bound - 0.5) + 1.5


def is_admissible(sign, value):
    shifted = value if sign == 1 else value - 0.5
    return abs(shifted - round(shifted)) < 1e-12


def allowed_lattice(delta, bound):
    if bound < 0:
        raise DomainError('lattice bound must be nonnegative, got {}'.format(bound))
    return list(product(*[admissible_values(sign, bound) for sign in delta.delta]))


class NilmanifoldSpec:
    '''Compact quotient of H^{2m+1} x R^{d-2m} with Levi moduli lambdas and
    spin structure delta on the horizontal torus'''

    def __init__(self, m, lambdas, d, delta=None):
        lambdas = tuple(float(v) for v in lambdas)
        if m < 1 or len(lambdas) != m:
            raise MalformedInputError('need m >= 1 Levi moduli, got m={} lambdas={}'.format(m, list(lambdas)))
        if any(v <= 0 for v in lambdas):
            raise MalformedInputError('Levi moduli must be positive, got {}'.format(list(lambdas)))
        if d < 2 * m:
            raise MalformedInputError('horizontal rank {} is below 2m = {}'.format(d, 2 * m))
        delta = delta if isinstance(delta, SpinStructure) else SpinStructure(delta or (1,) * d)
        if len(delta) != d:
            raise MalformedInputError('spin structure has {} entries, need {}'.format(len(delta), d))
        self.m = m
        self.lambdas = lambdas
        self.d = d
        self.delta = delta
        self.rep = build_rep(d)
        self._unit_offsets = {}

    def __repr__(self):
        return 'NilmanifoldSpec(m={}, lambdas={}, d={}, {})'.format(
            self.m, list(self.lambdas), self.d, self.delta)

    @property
    def horizontal_weights(self):
        return np.array(self.lambdas * 2 + (1.0,) * (self.d - 2 * self.m))

    def unit_offsets(self, sign):
        '''Clifford offsets at tau = sign; offsets scale linearly in |tau|'''
        if sign not in self._unit_offsets:
            matrix = -2j * pi * sign * pair_sum_matrix(self.rep, self.lambdas)
            values = eigh(matrix, eigvals_only=True)
            self._unit_offsets[sign] = group_eigenvalues(values, GROUP_TOL * 2 * pi * sum(self.lambdas))
        return self._unit_offsets[sign]

    @classmethod
    def parse(cls, obj):
        d = int(require(obj, 'd', 'spec'))
        return cls(int(require(obj, 'm', 'spec')), require(obj, 'lambdas', 'spec'), d, obj.get('delta'))

    @classmethod
    def from_algebra(cls, alg, delta=None):
        if alg.step != 2 or alg.dims[1] != 1:
            raise DomainError('{} is not step 2 with a one-dimensional centre'.format(alg))
        levi = levi_normal_form(alg, 1)
        if levi.m == 0:
            raise DegenerateLeviError('{} has a vanishing Levi form'.format(alg))
        return cls(levi.m, levi.lambdas, alg.dims[0], delta)

    def serialize(self):
        return {'m': self.m, 'lambdas': list(self.lambdas), 'd': self.d, 'delta': list(self.delta.delta)}


class EigenBlock:

    def __init__(self, kind, label, square, mult, signed=None, degenerate=False):
        self.kind = kind
        self.label = label
        self.square = square
        self.mult = mult
        self.signed = signed
        self.degenerate = degenerate

    def __repr__(self):
        return 'EigenBlock({} {}: {:.6g} x{})'.format(self.kind, self.label, self.square, self.mult)

    @property
    def abs_value(self):
        return sqrt(self.square)


class Cutoffs:

    def __init__(self, tau=2, kappa=2, alpha=1, gamma=None):
        if min(tau, kappa, alpha) < 0 or (gamma is not None and gamma < 0):
            raise DomainError('cutoffs must be nonnegative')
        self.tau = int(tau)
        self.kappa = int(kappa)
        self.alpha = alpha
        self.gamma = alpha if gamma is None else gamma

    def __repr__(self):
        return 'Cutoffs(tau<={}, kappa<={}, |alpha|<={}, |gamma|<={})'.format(
            self.tau, self.kappa, self.alpha, self.gamma)

    def scaled(self, factor):
        return self.__class__(self.tau * factor, self.kappa * factor, self.alpha * factor, self.gamma * factor)


def _torus_square(spec, alphas):
    alphas = np.asarray(alphas, dtype=float).reshape(-1, spec.d)
    return FOUR_PI2 * alphas ** 2 @ spec.horizontal_weights


def torus_block(spec, bound):
    alphas = allowed_lattice(spec.delta, bound)
    squares = _torus_square(spec, alphas).reshape(-1)
    blocks = []
    for alpha, square in zip(alphas, squares):
        value = sqrt(square)
        signed = (0.0,) if value == 0 else (-value, value)
        blocks.append(EigenBlock(TORUS, alpha, float(square), spec.rep.dim, signed))
    return blocks


def clifford_offsets(spec, tau):
    '''real spectrum of -2 pi i tau sum_j lambda_j c_j c_{m+j} with multiplicities'''
    if tau == 0:
        raise DomainError('tau must be nonzero')
    return [(abs(tau) * value, mult) for value, mult in spec.unit_offsets(1 if tau > 0 else -1)]


def _check_gamma(spec, gamma):
    tail = spec.delta.tail(2 * spec.m)
    gamma = tuple(float(g) for g in gamma)
    if len(gamma) != len(tail):
        raise ParityError('gamma needs {} entries, got {}'.format(len(tail), len(gamma)))
    for sign, g in zip(tail.delta, gamma):
        if not is_admissible(sign, g):
            raise ParityError('gamma entry {} is not admissible for spin sign {:+d}'.format(g, sign))
    return gamma


def _signed_values(code, value):
    if np.isnan(code):
        return None
    if code == BOTH_SIGNS:
        return (0.0,) if value == 0 else (-value, value)
    return (code * value if code else 0.0,)


def _bottom_sign(spec, tau, gamma):
    '''sign code of the ladder bottom (kappa = 0, lowest offset): the
    gamma term acts there only through its restriction to the kernel
    spinors of the gamma-free operator'''
    if not any(gamma):
        return 0.0
    m, rep = spec.m, spec.rep
    # kernel spinors minimize +2 pi i tau P, the ladder commutator term
    values, vectors = eigh(2j * pi * (1 if tau > 0 else -1) * pair_sum_matrix(rep, spec.lambdas))
    kernel = vectors[:, values <= values[0] + GROUP_TOL * 2 * pi * sum(spec.lambdas)]
    term = 2j * pi * sum(g * rep.gens[2 * m + k] for k, g in enumerate(gamma))
    split = eigh(kernel.conj().T @ term @ kernel, eigvals_only=True)
    plus, minus = int((split > 0).sum()), int((split < 0).sum())
    if plus == minus:
        return BOTH_SIGNS
    if minus == 0:
        return 1.0
    if plus == 0:
        return -1.0
    return UNSIGNED


def _landau_rows(spec, tau, gamma, kappa_max):
    '''columns for all (kappa, offset) pairs at fixed (tau, gamma)'''
    kappas = np.array(list(product(range(kappa_max + 1), repeat=spec.m)), dtype=int)
    offsets = clifford_offsets(spec, tau)
    values = np.array([o for o, _ in offsets])
    mults = np.array([mult for _, mult in offsets]) * abs(tau) ** spec.m
    osc = 2 * pi * abs(tau) * (2 * kappas + 1) @ np.array(spec.lambdas)
    shift = FOUR_PI2 * sum(g * g for g in gamma)
    square = osc[:, None] + values[None, :] + shift
    scale = 2 * pi * abs(tau) * sum(spec.lambdas)
    if square.min() < shift - GROUP_TOL * scale:
        raise ConsistencyError('(D^H)^2 value {} below the gamma shift at tau={}'.format(square.min(), tau))
    # the bottom of each (tau, gamma) ladder is exactly the gamma shift
    square[np.abs(square - shift) <= GROUP_TOL * scale] = shift
    degenerate = np.zeros(square.shape, dtype=bool)
    degenerate[np.all(kappas == 0, axis=1), 0] = True
    if spec.m == 1:
        sign = np.where(values < 0, 1.0, -1.0)[None, :].repeat(len(kappas), axis=0)
        sign[square == 0] = 0.0
        sign[0, 0] = _bottom_sign(spec, tau, gamma)
    else:
        sign = np.full(square.shape, UNSIGNED)
    return kappas, square, np.broadcast_to(mults, square.shape), sign, degenerate


def landau_block(spec, tau, gamma, kappa_max):
    if tau == 0:
        raise DomainError('tau must be nonzero')
    if kappa_max < 0:
        raise DomainError('kappa cutoff must be nonnegative')
    gamma = _check_gamma(spec, gamma)
    kappas, square, mults, sign, degenerate = _landau_rows(spec, tau, gamma, kappa_max)
    blocks = []
    for i, kappa in enumerate(kappas):
        for l in range(square.shape[1]):
            v = float(square[i, l])
            s = sign[i, l]
            signed = _signed_values(s, sqrt(v))
            blocks.append(EigenBlock(LANDAU, (tau, gamma, tuple(int(k) for k in kappa), l), v,
                                     int(mults[i, l]), signed, bool(degenerate[i, l])))
    return blocks


class SpectrumTable:
    '''Column store of eigenvalue blocks, ordered by (D^H)^2 value and then
    by construction order, which is label order'''

    def __init__(self, spec, cutoffs, kind, labels, square, mult, sign, degenerate,
                 complete_below=None, limit=None):
        order = np.lexsort((kind, square))
        self.spec = spec
        self.cutoffs = cutoffs
        self.kind = np.asarray(kind)[order]
        self.labels = [labels[i] for i in order]
        self.square = np.asarray(square, dtype=float)[order]
        self.mult = np.asarray(mult, dtype=np.int64)[order]
        self.sign = np.asarray(sign, dtype=float)[order]
        self.degenerate = np.asarray(degenerate, dtype=bool)[order]
        counted = self.counted_mask()
        if complete_below is None:
            complete_below = float(np.sqrt(self.square[counted].max())) if counted.any() else 0.0
            limit = 'table'
        self.complete_below = complete_below
        self.limit = limit

    def __len__(self):
        return len(self.square)

    def __repr__(self):
        return 'SpectrumTable({} blocks, complete below {:.4g})'.format(len(self), self.complete_below)

    @classmethod
    def from_values(cls, abs_values, mults=None):
        '''table of bare |eigenvalues|, complete up to its largest entry'''
        abs_values = np.asarray(abs_values, dtype=float)
        mults = np.ones(len(abs_values), dtype=np.int64) if mults is None else mults
        n = len(abs_values)
        return cls(None, None, np.zeros(n, dtype=np.int8), [(i,) for i in range(n)], abs_values ** 2,
                   mults, np.full(n, BOTH_SIGNS), np.zeros(n, dtype=bool))

    def counted_mask(self):
        return (self.square > 0) & ~self.degenerate

    def sub_table(self, kind):
        '''the blocks of one kind as a table with the same completeness bound'''
        code = 0 if kind == TORUS else 1
        keep = np.nonzero(self.kind == code)[0]
        table = self.__class__(self.spec, self.cutoffs, self.kind[keep], [self.labels[i] for i in keep],
                               self.square[keep], self.mult[keep], self.sign[keep], self.degenerate[keep])
        if kind == TORUS and self.limit is not None and self.spec is not None:
            table.complete_below, table.limit = _torus_completeness(self.spec, self.cutoffs)
        else:
            table.complete_below, table.limit = self.complete_below, self.limit
        return table

    def abs_spectrum(self):
        '''sorted nonzero |eigenvalues| with multiplicities, degenerate values excluded'''
        counted = self.counted_mask()
        return np.sqrt(self.square[counted]), self.mult[counted]

    def require_complete(self, t):
        if t > self.complete_below:
            raise CutoffError('table is complete only below {:.6g} (limited by the {} cutoff); '
                              'increase the {} cutoff to reach t = {:.6g}'.format(
                                  self.complete_below, self.limit, self.limit, t))

    @property
    def blocks(self):
        return [self.block(i) for i in range(len(self))]

    def block(self, i):
        kind = TORUS if self.kind[i] == 0 else LANDAU
        square = float(self.square[i])
        return EigenBlock(kind, self.labels[i], square, int(self.mult[i]), self.signed(i),
                          bool(self.degenerate[i]))

    def signed(self, i):
        return _signed_values(self.sign[i], sqrt(self.square[i]))

    def rows(self):
        '''CSV rows: kind, label, signed Dirac value when determined else |mu|,
        (D^H)^2 value, multiplicity'''
        for i in range(len(self)):
            kind = TORUS if self.kind[i] == 0 else LANDAU
            signed = self.signed(i)
            value = signed[0] if signed is not None and len(signed) == 1 else sqrt(self.square[i])
            yield kind, format_label(kind, self.labels[i]), float(value), float(self.square[i]), int(self.mult[i])


CSV_HEADER = ['label_kind', 'label', 'dirac_value_or_abs [D^H]', 'square_value [(D^H)^2]', 'multiplicity']


def format_label(kind, label):
    def tup(values):
        return '(' + ' '.join('{:g}'.format(v) for v in values) + ')'
    if kind == TORUS:
        return 'alpha=' + tup(label)
    tau, gamma, kappa, l = label
    return 'tau={} gamma={} kappa={} l={}'.format(tau, tup(gamma), tup(kappa), l)


def _torus_completeness(spec, cutoffs):
    nxt = np.array([next_admissible(sign, cutoffs.alpha) for sign in spec.delta.delta])
    return float(2 * pi * np.min(np.sqrt(spec.horizontal_weights) * nxt)), 'alpha'


def _completeness(spec, cutoffs):
    '''largest t such that every counted eigenvalue <= t lies inside the cutoffs'''
    limits = {}
    limits['alpha'] = _torus_completeness(spec, cutoffs)[0]
    lam_min = min(spec.lambdas)
    limits['kappa'] = sqrt(4 * pi * lam_min * (cutoffs.kappa + 1))
    gaps = []
    for sign in (1, -1):
        offsets = [o for o, _ in spec.unit_offsets(sign)]
        gaps.append(offsets[1] - offsets[0])
    limits['tau'] = sqrt((cutoffs.tau + 1) * min(4 * pi * lam_min, min(gaps)))
    tail = spec.delta.tail(2 * spec.m)
    if len(tail):
        limits['gamma'] = 2 * pi * min(next_admissible(sign, cutoffs.gamma) for sign in tail.delta)
    limit = min(limits, key=limits.get)
    return limits[limit], limit


def dirac_spectrum(spec, cutoffs):
    kinds, labels, squares, mults, signs, degenerate = [], [], [], [], [], []
    alphas = allowed_lattice(spec.delta, cutoffs.alpha)
    torus = _torus_square(spec, alphas).reshape(-1)
    kinds.append(np.zeros(len(alphas), dtype=np.int8))
    labels.extend(alphas)
    squares.append(torus)
    mults.append(np.full(len(alphas), spec.rep.dim))
    signs.append(np.full(len(alphas), BOTH_SIGNS))
    degenerate.append(np.zeros(len(alphas), dtype=bool))
    gammas = allowed_lattice(spec.delta.tail(2 * spec.m), cutoffs.gamma)
    taus = [t for t in range(-cutoffs.tau, cutoffs.tau + 1) if t != 0]
    for tau in taus:
        for gamma in gammas:
            kappas, square, mult, sign, degen = _landau_rows(spec, tau, gamma, cutoffs.kappa)
            k, l = np.meshgrid(np.arange(len(kappas)), np.arange(square.shape[1]), indexing='ij')
            kappa_labels = [tuple(int(v) for v in kappa) for kappa in kappas]
            labels.extend((tau, gamma, kappa_labels[i], int(j)) for i, j in zip(k.ravel(), l.ravel()))
            kinds.append(np.ones(square.size, dtype=np.int8))
            squares.append(square.ravel())
            mults.append(np.asarray(mult).ravel())
            signs.append(sign.ravel())
            degenerate.append(degen.ravel())
    complete_below, limit = _completeness(spec, cutoffs)
    table = SpectrumTable(spec, cutoffs, np.concatenate(kinds), labels, np.concatenate(squares),
                          np.concatenate(mults), np.concatenate(signs), np.concatenate(degenerate),
                          complete_below, limit)
    log.info('%s: %d blocks, complete below %.4g (%s)', spec, len(table), complete_below, limit)
    return table


class HermiteTruncation:

    def __init__(self, N=HERMITE_N, edge_weight=0.75):
        if N < 1:
            raise DomainError('Hermite truncation needs N >= 1, got {}'.format(N))
        self.N = N
        self.edge_weight = edge_weight

    def __repr__(self):
        return 'HermiteTruncation(N={})'.format(self.N)

    def scale(self, tau):
        return sqrt(2 * pi * abs(tau))

    def ladder(self):
        '''lowering operator a in the Hermite basis, a h_n = sqrt(n) h_{n-1}'''
        return sparse.diags(np.sqrt(np.arange(1, self.N)), 1, format='csr')


def _off_edge(values, vectors, N, m, dim, edge_weight):
    '''Mask of eigenvalues kept after dropping truncation artifacts.
    Artifacts can share an eigenvalue with genuine states, and eigh
    returns an arbitrary basis of such a cluster, so the edge weight is
    measured per cluster: the eigenvalues of V^H V, with V the cluster
    restricted to the top Hermite level of any direction, count the
    artifacts it holds.'''
    on_edge = np.zeros((N,) * m + (dim,), dtype=bool)
    for j in range(m):
        index = [slice(None)] * (m + 1)
        index[j] = N - 1
        on_edge[tuple(index)] = True
    on_edge = on_edge.reshape(-1)
    tol = GROUP_TOL * max(1.0, float(np.max(np.abs(values))))
    keep = np.ones(len(values), dtype=bool)
    start = 0
    for i in range(1, len(values) + 1):
        if i < len(values) and values[i] - values[i - 1] <= tol:
            continue
        edge = vectors[on_edge, start:i]
        weights = eigh(edge.conj().T @ edge, eigvals_only=True)
        keep[start:start + int((weights > edge_weight).sum())] = False
        start = i
    return keep


def hermite_oracle(spec, tau, gamma, trunc):
    '''eigenvalues of the reduced horizontal Dirac operator on
    L^2(R^m) x spinors, truncated to N Hermite functions per direction'''
    if tau == 0:
        raise DomainError('tau must be nonzero')
    if trunc.N < 2:
        raise DomainError('the oracle needs N >= 2')
    gamma = _check_gamma(spec, gamma)
    N, m, rep = trunc.N, spec.m, spec.rep
    s = trunc.scale(tau)
    a = trunc.ladder()
    u = (a + a.T) / (sqrt(2) * s)
    du = s * (a - a.T) / sqrt(2)
    eye_n = sparse.identity(N, format='csr')

    def embed(op, j):
        out = sparse.identity(1, format='csr')
        for i in range(m):
            out = sparse.kron(out, op if i == j else eye_n, format='csr')
        return out

    size = N ** m * rep.dim
    D = sparse.csr_matrix((size, size), dtype=complex)
    for j, lam in enumerate(spec.lambdas):
        D = D + sqrt(lam) * (sparse.kron(embed(du, j), rep.gens[j])
                             + 2j * pi * tau * sparse.kron(embed(u, j), rep.gens[m + j]))
    for k, g in enumerate(gamma):
        D = D + 2j * pi * g * sparse.kron(sparse.identity(N ** m), rep.gens[2 * m + k])
    D = D.toarray()
    residual = np.max(np.abs(D - D.conj().T))
    if residual > 1e-10 * max(1.0, np.max(np.abs(D))):
        raise ConsistencyError('reduced Dirac matrix is not Hermitian (residual {:.3g})'.format(residual))
    values, vectors = eigh(D)
    if trunc.edge_weight is not None:
        values = values[_off_edge(values, vectors, N, m, rep.dim, trunc.edge_weight)]
    log.debug('oracle tau=%d gamma=%s N=%d: kept %d of %d eigenvalues', tau, gamma, N, len(values), size)
    return np.sort(values)


def counting_function(table, t):
    '''number of nonzero |eigenvalues| <= t with multiplicity'''
    table.require_complete(t)
    values, mults = table.abs_spectrum()
    return int(mults[values <= t].sum())


def _counts(table, ts):
    values, mults = table.abs_spectrum()
    cumulative = np.concatenate([[0], np.cumsum(mults)])
    return cumulative[np.searchsorted(values, ts, side='right')]


class DimensionFit:

    def __init__(self, exponent, intercept, ts, counts):
        self.exponent = exponent
        self.intercept = intercept
        self.ts = ts
        self.counts = counts

    def __float__(self):
        return float(self.exponent)

    def __repr__(self):
        return 'DimensionFit(exponent={:.4f})'.format(self.exponent)


def dimension_fit(table, t_range, samples=24):
    '''least-squares slope of log N(t) against log t on log-spaced samples'''
    lo, hi = t_range
    if not 0 < lo < hi:
        raise DomainError('t range must satisfy 0 < t_min < t_max, got {}'.format(t_range))
    if samples < 20:
        raise DomainError('dimension fit needs at least 20 samples')
    table.require_complete(hi)
    ts = np.geomspace(lo, hi, samples)
    counts = _counts(table, ts)
    if counts[0] == 0:
        raise DomainError('no nonzero eigenvalue below t_min = {}'.format(lo))
    slope, intercept = np.polyfit(np.log(ts), np.log(counts), 1)
    return DimensionFit(float(slope), float(intercept), ts, counts)


class ZetaScan:

    def __init__(self, p, values, partial, slope):
        self.p = p
        self.values = values
        self.partial = partial
        self.slope = slope

    @property
    def diverging(self):
        return bool(not np.isnan(self.slope) and self.slope > -DIVERGENCE_SLOPE)

    def __repr__(self):
        return 'ZetaScan(p={}, sum={:.6g}, tail slope={:.3f}{})'.format(
            self.p, self.partial[-1] if len(self.partial) else 0.0, self.slope,
            ', diverging' if self.diverging else '')


def zeta_scan(table, p_list, bins=ZETA_BINS):
    '''partial sums of |mu|^-p in increasing |mu| order; the tail slope is
    the fitted log-log slope of the sums over equal log-bins ending at the
    completeness bound'''
    values, mults = table.abs_spectrum()
    inside = values <= table.complete_below
    values, mults = values[inside], mults[inside]
    edges = np.geomspace(table.complete_below / 2 ** bins, table.complete_below, bins + 1)
    centers = np.sqrt(edges[:-1] * edges[1:])
    scans = []
    for p in p_list:
        terms = mults * values ** (-float(p))
        partial = np.cumsum(terms)
        sums = np.array([terms[(values > lo) & (values <= hi)].sum() for lo, hi in zip(edges[:-1], edges[1:])])
        filled = sums > 0
        slope = np.nan
        if filled.sum() >= 2:
            slope = float(np.polyfit(np.log(centers[filled]), np.log(sums[filled]), 1)[0])
        scans.append(ZetaScan(p, values, partial, slope))
    return scans
