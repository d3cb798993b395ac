import logging
from itertools import combinations
from math import factorial

import numpy as np
import sympy
from scipy.linalg import schur

from helper import (
    ConventionError,
    DomainError,
    LayerIndexError,
    MalformedInputError,
    RANK_TOL,
    UnsupportedError,
    ZERO_TOL,
    read_json,
    require,
)


EXPONENTIAL = 'exponential'
POLARIZED = 'polarized'
MAX_BCH_STEP = 4

log = logging.getLogger(__name__)


class InvalidAlgebraError(MalformedInputError):

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class GradedLieAlgebra:
    '''A stratified nilpotent Lie algebra given by structure constants on
    the graded basis X_{S,j}, S = 1..R, j = 1..d_S (both 1-based).'''

    def __init__(self, dims, structure=None, name=None):
        if len(dims) == 0 or any(int(d) < 1 for d in dims):
            raise MalformedInputError(
                'dims must be a nonempty list of positive integers, got {}'.format(list(dims)))
        self.dims = tuple(int(d) for d in dims)
        self.step = len(self.dims)
        self.name = name
        self.n = sum(self.dims)
        self.offsets = tuple(int(o) for o in np.cumsum((0,) + self.dims))
        self.weights = np.repeat(np.arange(1, self.step + 1), self.dims)
        self.structure = {}
        self.tensor = np.zeros((self.n, self.n, self.n))
        given = set()
        for (a, b), out in (structure or {}).items():
            ia, ib = self.index(*a), self.index(*b)
            vec = np.zeros(self.n)
            for (layer, l), coeff in out.items():
                vec[self.index(layer, l)] += coeff
            self.structure[(tuple(a), tuple(b))] = dict(out)
            self.tensor[ia, ib] = vec
            given.add((ia, ib))
        # pairs listed in one order only get the other by antisymmetry
        for ia, ib in given:
            if (ib, ia) not in given:
                self.tensor[ib, ia] = -self.tensor[ia, ib]

    def __eq__(self, other):
        if other is None:
            return False
        return self.dims == other.dims and np.array_equal(self.tensor, other.tensor)

    def __repr__(self):
        return 'GradedLieAlgebra({}, dims={})'.format(self.name or 'unnamed', list(self.dims))

    def index(self, layer, j):
        '''flat 0-based position of the generator X_{layer,j}'''
        if not 1 <= layer <= self.step or not 1 <= j <= self.dims[layer - 1]:
            raise MalformedInputError('generator ({},{}) outside dims {}'.format(
                layer, j, list(self.dims)))
        return self.offsets[layer - 1] + j - 1

    def label(self, a):
        layer = int(np.searchsorted(self.offsets, a, side='right'))
        return (layer, a - self.offsets[layer - 1] + 1)

    def layer(self, coords, layer):
        return coords[..., self.offsets[layer - 1]:self.offsets[layer]]

    def bracket(self, x, y):
        return np.einsum('...a,...b,abc->...c', x, y, self.tensor)

    def ad(self, x):
        '''matrix of v -> [x, v]'''
        return np.einsum('a,abc->cb', x, self.tensor)

    def levi_matrix(self, nu):
        if self.step < 2:
            raise LayerIndexError('{} has no layer 2'.format(self))
        if not 1 <= nu <= self.dims[1]:
            raise LayerIndexError('layer-2 index {} outside 1..{}'.format(nu, self.dims[1]))
        d1 = self.dims[0]
        return self.tensor[:d1, :d1, self.index(2, nu)].copy()

    def heisenberg_rank(self):
        '''m when this is h_{2m+1} (times an abelian factor) in its
        standard frame, None otherwise'''
        if self.step != 2 or self.dims[1] != 1:
            return None
        L = self.levi_matrix(1)
        d1 = self.dims[0]
        for m in range(d1 // 2, 0, -1):
            want = np.zeros((d1, d1))
            want[:m, m:2 * m] = np.eye(m)
            want[m:2 * m, :m] = -np.eye(m)
            if np.allclose(L, want, atol=ZERO_TOL, rtol=0):
                return m
        return None

    def change_horizontal_frame(self, O):
        '''The same algebra written in the horizontal frame X'_j = sum_i O_ij X_i.
        Higher layers keep their basis.'''
        O = np.asarray(O, dtype=float)
        d1 = self.dims[0]
        if O.shape != (d1, d1):
            raise DomainError('frame change must be {0}x{0}'.format(d1))
        B = np.eye(self.n)
        B[:d1, :d1] = O
        C = np.einsum('pa,qb,pqr,cr->abc', B, B, self.tensor, np.linalg.inv(B))
        rotated = GradedLieAlgebra(self.dims, name=self.name)
        rotated.tensor = C
        rotated.structure = rotated._structure_from_tensor()
        return rotated

    def _structure_from_tensor(self):
        structure = {}
        for a, b in combinations(range(self.n), 2):
            nz = np.nonzero(self.tensor[a, b])[0]
            if len(nz):
                structure[(self.label(a), self.label(b))] = {
                    self.label(c): float(self.tensor[a, b, c]) for c in nz}
        return structure

    @classmethod
    def abelian(cls, n):
        return cls((n,), name='R{}'.format(n))

    @classmethod
    def heisenberg(cls, m, abelian=0, lambdas=None):
        '''h_{2m+1} x R^abelian with [X_j, X_{m+j}] = lambda_j X_{2,1}'''
        lambdas = lambdas or [1.0] * m
        structure = {}
        for j, lam in enumerate(lambdas, start=1):
            structure[((1, j), (1, m + j))] = {(2, 1): float(lam)}
        name = 'h{}'.format(2 * m + 1) + ('xR{}'.format(abelian) if abelian else '')
        return cls((2 * m + abelian, 1), structure, name=name)

    @classmethod
    def filiform(cls, step):
        '''model filiform algebra: [X_1, Y_S] = Y_{S+1} with Y_1 = X_{1,2}'''
        if step < 2:
            raise DomainError('filiform algebras have step at least 2')
        structure = {((1, 1), (1, 2)): {(2, 1): 1.0}}
        for s in range(2, step):
            structure[((1, 1), (s, 1))] = {(s + 1, 1): 1.0}
        return cls((2,) + (1,) * (step - 1), structure, name='filiform{}'.format(step))

    @classmethod
    def from_levi(cls, matrices, name=None):
        '''step-2 algebra whose nu-th Levi matrix is matrices[nu-1]'''
        matrices = [np.asarray(L, dtype=float) for L in matrices]
        d1 = matrices[0].shape[0]
        structure = {}
        for j, k in combinations(range(d1), 2):
            out = {(2, nu + 1): float(L[j, k]) for nu, L in enumerate(matrices) if L[j, k] != 0}
            if out:
                structure[((1, j + 1), (1, k + 1))] = out
        return cls((d1, len(matrices)), structure, name=name)

    @classmethod
    def parse(cls, obj, name=None):
        step = require(obj, 'step', 'algebra')
        dims = require(obj, 'dims', 'algebra')
        if not isinstance(dims, list) or step != len(dims):
            raise MalformedInputError('algebra: step {} does not match dims {}'.format(step, dims))
        structure = {}
        for i, entry in enumerate(obj.get('brackets', [])):
            where = 'brackets[{}]'.format(i)
            try:
                a = tuple(int(v) for v in require(entry, 'a', where))
                b = tuple(int(v) for v in require(entry, 'b', where))
                out = {}
                for layer, l, coeff in require(entry, 'out', where):
                    out[(int(layer), int(l))] = out.get((int(layer), int(l)), 0.0) + float(coeff)
            except (TypeError, ValueError):
                raise MalformedInputError('{}: expected a:[S,j], b:[T,k], out:[[U,l,c],...]'.format(where))
            if len(a) != 2 or len(b) != 2:
                raise MalformedInputError('{}: generators are [layer, index] pairs'.format(where))
            if (a, b) in structure:
                raise MalformedInputError('{}: pair {} {} listed twice'.format(where, a, b))
            structure[(a, b)] = out
        return cls(dims, structure, name=name or obj.get('name'))

    def serialize(self):
        brackets = []
        for (a, b), out in sorted(self.structure.items()):
            brackets.append({
                'a': list(a),
                'b': list(b),
                'out': [[layer, l, coeff] for (layer, l), coeff in sorted(out.items())],
            })
        obj = {'step': self.step, 'dims': list(self.dims), 'brackets': brackets}
        if self.name:
            obj['name'] = self.name
        return obj


class ValidationReport:

    def __init__(self, violations):
        self.violations = violations

    @property
    def ok(self):
        return len(self.violations) == 0

    def __repr__(self):
        if self.ok:
            return 'ok'
        return '; '.join('{} violated at {}'.format(kind, witness) for kind, witness in self.violations)

    def serialize(self):
        return {
            'ok': self.ok,
            'violations': [{'invariant': kind, 'witness': [list(w) for w in witness]}
                           for kind, witness in self.violations],
        }


def validate_algebra(alg, tol=ZERO_TOL):
    '''Checks antisymmetry, grading, the Jacobi identity and bracket
    generation, listing every violation with the generators witnessing it'''
    C = alg.tensor
    scale = max(1.0, float(np.max(np.abs(C))) if C.size else 1.0)
    violations = []
    n = alg.n
    for a in range(n):
        for b in range(a, n):
            if np.max(np.abs(C[a, b] + C[b, a])) > tol * scale:
                violations.append(('antisymmetry', (alg.label(a), alg.label(b))))
    w = alg.weights
    for a in range(n):
        for b in range(n):
            outside = w != w[a] + w[b]
            if np.max(np.abs(C[a, b][outside]), initial=0.0) > tol * scale:
                violations.append(('grading', (alg.label(a), alg.label(b))))
    # T[a,b,c] = [a,[b,c]]
    T = np.einsum('bce,aef->abcf', C, C)
    J = T + np.transpose(T, (2, 0, 1, 3)) + np.transpose(T, (1, 2, 0, 3))
    for a, b, c in combinations(range(n), 3):
        if np.max(np.abs(J[a, b, c])) > tol * scale * scale:
            violations.append(('jacobi', (alg.label(a), alg.label(b), alg.label(c))))
    d1 = alg.dims[0]
    span = np.eye(n)[:, :d1]
    for layer in range(2, alg.step + 1):
        vectors = np.einsum('bk,ibc->ikc', span, C[:d1]).reshape(-1, n)
        lo, hi = alg.offsets[layer - 1], alg.offsets[layer]
        block = vectors[:, lo:hi]
        rank = np.linalg.matrix_rank(block, tol=RANK_TOL * scale) if block.size else 0
        if rank < alg.dims[layer - 1]:
            violations.append(('bracket-generating', ((layer, rank),)))
        _, _, vt = np.linalg.svd(block, full_matrices=False)
        span = np.zeros((n, max(rank, 1)))
        if rank:
            span[lo:hi] = vt[:rank].T
    log.debug('validated %s: %d violations', alg, len(violations))
    return ValidationReport(violations)


def load_algebra(path, check=True):
    '''Reads an algebra file; with check set, rejects algebras that fail
    validate_algebra, attaching the report to the error'''
    alg = GradedLieAlgebra.parse(read_json(path))
    if check:
        report = validate_algebra(alg)
        if not report.ok:
            raise InvalidAlgebraError('{}: {}'.format(path, report), report)
    return alg


class GroupElement:

    def __init__(self, alg, coords, convention=EXPONENTIAL):
        coords = np.array(coords, dtype=float)
        if coords.shape != (alg.n,):
            raise MalformedInputError('{} needs {} coordinates, got {}'.format(
                alg, alg.n, coords.shape))
        if convention not in (EXPONENTIAL, POLARIZED):
            raise ConventionError('unknown coordinate convention {}'.format(convention))
        if convention == POLARIZED and alg.heisenberg_rank() is None:
            raise ConventionError('polarized coordinates need a Heisenberg-type algebra')
        self.alg = alg
        self.coords = coords
        self.convention = convention

    @classmethod
    def identity(cls, alg):
        return cls(alg, np.zeros(alg.n))

    def __eq__(self, other):
        if other is None:
            return False
        return (self.alg == other.alg and self.convention == other.convention
                and np.array_equal(self.coords, other.coords))

    def __repr__(self):
        return 'GroupElement_{}({})'.format(self.convention[:3], list(self.coords))

    def isclose(self, other, tol=ZERO_TOL):
        return (self.convention == other.convention
                and np.allclose(self.coords, other.coords, atol=tol, rtol=tol))

    def __mul__(self, other):
        return bch_compose(self.alg, self, other)

    def __rmul__(self, coefficient):
        return dilate(self.alg, coefficient, self)

    def inverse(self):
        if self.convention != EXPONENTIAL:
            raise ConventionError('inverse is taken in exponential coordinates')
        return self.__class__(self.alg, -self.coords)


def bch_coords(alg, x, y):
    '''exp-coordinates of exp(x)exp(y) on raw arrays; broadcasts over
    leading axes'''
    if alg.step > MAX_BCH_STEP:
        raise UnsupportedError('BCH is implemented up to step {}, got {}'.format(
            MAX_BCH_STEP, alg.step))
    z = x + y
    if alg.step >= 2:
        xy = alg.bracket(x, y)
        z = z + xy / 2
    if alg.step >= 3:
        z = z + (alg.bracket(x, xy) - alg.bracket(y, xy)) / 12
    if alg.step >= 4:
        z = z - alg.bracket(y, alg.bracket(x, xy)) / 24
    return z


def bch_compose(alg, x, y):
    for g in (x, y):
        if g.convention != EXPONENTIAL:
            raise ConventionError('bch_compose needs exponential coordinates, got {}'.format(
                g.convention))
        if g.alg != alg:
            raise ConventionError('{} does not belong to {}'.format(g, alg))
    return GroupElement(alg, bch_coords(alg, x.coords, y.coords))


def heisenberg_coordinate_convert(x, to):
    '''phi: exponential -> polarized adds half of sum x_j x_{m+j} to the
    central coordinate; the inverse subtracts it'''
    m = x.alg.heisenberg_rank()
    if m is None:
        raise UnsupportedError('{} is not of Heisenberg type'.format(x.alg))
    if to not in (EXPONENTIAL, POLARIZED):
        raise ConventionError('unknown coordinate convention {}'.format(to))
    coords = x.coords.copy()
    if x.convention != to:
        shift = 0.5 * coords[:m] @ coords[m:2 * m]
        t = x.alg.offsets[1]
        coords[t] += shift if to == POLARIZED else -shift
    return GroupElement(x.alg, coords, to)


def dilate(alg, lam, x):
    if lam <= 0:
        raise DomainError('dilation factor must be positive, got {}'.format(lam))
    return GroupElement(alg, x.coords * float(lam) ** alg.weights, x.convention)


def koranyi_norm(alg, x):
    if x.convention != EXPONENTIAL:
        raise ConventionError('the Koranyi gauge is taken in exponential coordinates')
    power = 2 * factorial(alg.step)
    # rescale by the largest homogeneous component to keep the powers finite
    roots = np.abs(x.coords) ** (1.0 / alg.weights)
    top = roots.max()
    if top == 0:
        return 0.0
    return float(top * np.sum((roots / top) ** power) ** (1.0 / power))


def koranyi_dist(alg, x, y):
    return koranyi_norm(alg, y.inverse() * x)


def homogeneous_dimension(alg):
    return int(np.sum(alg.weights))


def left_invariant_fields(alg, x):
    '''Matrix whose column a is the left-invariant field X_a at the point
    with exponential coordinates x; broadcasts to shape (..., n, n).
    d/dt log(exp(x)exp(t e_a)) = (I + ad_x/2 + ad_x^2/12) e_a through step 4.'''
    if alg.step > MAX_BCH_STEP:
        raise UnsupportedError('fields are implemented up to step {}, got {}'.format(
            MAX_BCH_STEP, alg.step))
    ad = np.einsum('...a,abc->...cb', np.asarray(x, dtype=float), alg.tensor)
    return np.eye(alg.n) + ad / 2 + ad @ ad / 12


def symbolic_fields(alg, symbols):
    '''sympy version of left_invariant_fields with exact coefficients'''
    if alg.step > MAX_BCH_STEP:
        raise UnsupportedError('fields are implemented up to step {}, got {}'.format(
            MAX_BCH_STEP, alg.step))
    n = alg.n
    ad = sympy.zeros(n, n)
    for a, b, c in zip(*np.nonzero(alg.tensor)):
        ad[c, b] += sympy.nsimplify(float(alg.tensor[a, b, c])) * symbols[a]
    return sympy.eye(n) + ad / 2 + ad * ad / 12


class LeviData:

    def __init__(self, nu, matrix, lambdas, basis):
        self.nu = nu
        self.matrix = matrix
        self.lambdas = tuple(float(v) for v in lambdas)
        self.basis = basis

    def __repr__(self):
        return 'LeviData(nu={}, m={}, lambdas={})'.format(self.nu, self.m, list(self.lambdas))

    @property
    def m(self):
        return len(self.lambdas)

    @property
    def trace_norm(self):
        return 2 * sum(self.lambdas)

    @property
    def half_trace(self):
        return sum(self.lambdas)

    @property
    def rank_deficit(self):
        '''dimension of the kernel of L, i.e. d - 2m'''
        return self.matrix.shape[0] - 2 * self.m

    def block_form(self):
        d, m = self.matrix.shape[0], self.m
        B = np.zeros((d, d))
        B[:m, m:2 * m] = np.diag(self.lambdas)
        B[m:2 * m, :m] = -np.diag(self.lambdas)
        return B


def normal_form(matrix, nu=None, tol=RANK_TOL):
    '''Orthogonal O with O^T L O = [[0,D,0],[-D,0,0],[0,0,0]], D descending'''
    L = np.asarray(matrix, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise DomainError('Levi matrix must be square, got shape {}'.format(L.shape))
    fro = np.linalg.norm(L)
    if not np.allclose(L, -L.T, atol=ZERO_TOL * max(1.0, fro), rtol=0):
        raise DomainError('Levi matrix is not skew-symmetric')
    d = L.shape[0]
    if fro == 0:
        return LeviData(nu, L, (), np.eye(d))
    T, Z = schur(L, output='real')
    pairs, kernel = [], []
    i = 0
    while i < d:
        if i + 1 < d and abs(T[i + 1, i]) > tol * fro:
            lam = (T[i, i + 1] - T[i + 1, i]) / 2
            p, q = Z[:, i], Z[:, i + 1]
            if lam < 0:
                p, q, lam = q, p, -lam
            pairs.append((lam, p, q))
            i += 2
        else:
            kernel.append(Z[:, i])
            i += 1
    pairs.sort(key=lambda pair: -pair[0])
    columns = [p for _, p, _ in pairs] + [q for _, _, q in pairs] + kernel
    return LeviData(nu, L, [lam for lam, _, _ in pairs], np.column_stack(columns))


def levi_normal_form(alg, nu):
    return normal_form(alg.levi_matrix(nu), nu)


class QuotientMap:

    def __init__(self, source, target, projector, kernel, nu):
        self.source = source
        self.target = target
        self.projector = projector
        self.kernel = kernel
        self.nu = nu

    def __repr__(self):
        return 'QuotientMap({} -> {}, nu={})'.format(self.source, self.target, self.nu)

    def apply(self, v):
        return np.asarray(v) @ self.projector.T

    def psi(self, x):
        '''group-level map; linear in exponential coordinates'''
        if x.convention != EXPONENTIAL:
            raise ConventionError('psi acts on exponential coordinates')
        return GroupElement(self.target, self.apply(x.coords))

    def homomorphism_defects(self, tol=ZERO_TOL):
        eye = np.eye(self.source.n)
        lhs = self.apply(self.source.bracket(eye[:, None, :], eye[None, :, :]))
        images = self.apply(eye)
        rhs = self.target.bracket(images[:, None, :], images[None, :, :])
        bad = np.argwhere(np.max(np.abs(lhs - rhs), axis=2) > tol)
        return [(self.source.label(a), self.source.label(b)) for a, b in bad]


def quotient_codim1(alg, nu):
    '''V_1 + span{X_{2,nu}} with bracket pr o [.,.]'''
    L = alg.levi_matrix(nu)
    d1 = alg.dims[0]
    keep = list(range(d1)) + [alg.index(2, nu)]
    projector = np.eye(alg.n)[keep]
    kernel = np.eye(alg.n)[[a for a in range(alg.n) if a not in keep]].T
    target = GradedLieAlgebra.from_levi([L], name='{}/nu{}'.format(alg.name or 'g', nu))
    return target, QuotientMap(alg, target, projector, kernel, nu)


def christoffel(alg):
    '''G[j,k,l] = Gamma^l_{jk} for the metric making the graded frame
    orthonormal, from the Koszul formula'''
    C = alg.tensor
    return 0.5 * (-np.transpose(C, (0, 2, 1)) - np.transpose(C, (1, 0, 2))
                  + np.transpose(C, (2, 0, 1)))
