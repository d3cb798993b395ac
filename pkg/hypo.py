import logging
import os
from itertools import combinations, product

import numpy as np
from scipy.linalg import eigvals

from carnot import (
    GradedLieAlgebra,
    levi_normal_form,
    load_algebra,
    quotient_codim1,
)
from helper import (
    DegenerateLeviError,
    DomainError,
    MEMBERSHIP_TOL,
    MalformedInputError,
    PairingError,
    group_eigenvalues,
    read_json,
    require,
    snap,
)


HYPOELLIPTIC = 'Hypoelliptic'
NOT_HYPOELLIPTIC = 'NotHypoelliptic'
INCONCLUSIVE = 'Inconclusive'

DISCRETE = 'discrete'
RAYS = 'rays'
HEISENBERG = 'heisenberg'
HEISENBERG_TIMES_ABELIAN = 'heisenberg-times-abelian'

log = logging.getLogger(__name__)


class LaplacianSpec:
    '''-sum X_j^2 - i sum_{j<k} A_jk [X_j, X_k] acting on C^p valued
    functions; A maps 1-based horizontal pairs (j, k) to p x p matrices'''

    def __init__(self, alg, p, A=None):
        if alg.step < 2:
            raise DomainError('{} has step 1; the operator is elliptic'.format(alg))
        if p < 1:
            raise MalformedInputError('bundle rank must be positive, got {}'.format(p))
        d1 = alg.dims[0]
        self.alg = alg
        self.p = int(p)
        self.A = {}
        for (j, k), matrix in (A or {}).items():
            matrix = np.asarray(matrix, dtype=complex).reshape(np.shape(matrix) or (1, 1))
            if matrix.shape != (p, p):
                raise MalformedInputError('A[{},{}] has shape {}, need {}x{}'.format(j, k, matrix.shape, p, p))
            if j == k or not (1 <= j <= d1 and 1 <= k <= d1):
                raise MalformedInputError('A[{},{}] is not a pair of distinct horizontal indices 1..{}'.format(
                    j, k, d1))
            # [X_k, X_j] = -[X_j, X_k]
            if j > k:
                j, k, matrix = k, j, -matrix
            self.A[(j, k)] = self.A.get((j, k), 0) + matrix

    def __repr__(self):
        return 'LaplacianSpec({}, p={}, {} pairs)'.format(self.alg, self.p, len(self.A))

    def scaled(self, s):
        return self.__class__(self.alg, self.p, {key: s * value for key, value in self.A.items()})

    def change_horizontal_frame(self, O):
        '''the same operator written in the frame X'_j = sum_i O_ij X_i'''
        O = np.asarray(O, dtype=float)
        d1 = self.alg.dims[0]
        full = np.zeros((d1, d1, self.p, self.p), dtype=complex)
        for (j, k), matrix in self.A.items():
            full[j - 1, k - 1] = matrix
            full[k - 1, j - 1] = -matrix
        rotated = np.einsum('aj,bk,abpq->jkpq', O, O, full)
        A = {(j + 1, k + 1): rotated[j, k] for j, k in combinations(range(d1), 2)}
        return self.__class__(self.alg.change_horizontal_frame(O), self.p, A)

    @classmethod
    def parse(cls, obj, base=None):
        '''{"algebra": <file or inline algebra>, "p": p,
        "A": [{"j": j, "k": k, "re": [[...]], "im": [[...]]}, ...]}'''
        source = require(obj, 'algebra', 'laplacian')
        if isinstance(source, dict):
            alg = GradedLieAlgebra.parse(source)
        else:
            path = source if base is None or os.path.isabs(source) else os.path.join(base, source)
            alg = load_algebra(path)
        p = int(require(obj, 'p', 'laplacian'))
        A = {}
        for i, entry in enumerate(obj.get('A', [])):
            where = 'A[{}]'.format(i)
            try:
                j, k = int(require(entry, 'j', where)), int(require(entry, 'k', where))
                matrix = np.array(require(entry, 're', where), dtype=float).reshape(p, p) + 0j
                if 'im' in entry:
                    matrix = matrix + 1j * np.array(entry['im'], dtype=float).reshape(p, p)
            except (TypeError, ValueError):
                raise MalformedInputError('{}: expected j, k and {}x{} "re"/"im" matrices'.format(where, p, p))
            if (min(j, k), max(j, k)) in A:
                raise MalformedInputError('{}: pair ({},{}) listed twice'.format(where, j, k))
            A[(min(j, k), max(j, k))] = matrix if j < k else -matrix
        return cls(alg, p, A)

    def serialize(self):
        entries = []
        for (j, k), matrix in sorted(self.A.items()):
            entries.append({'j': j, 'k': k, 're': matrix.real.tolist(), 'im': matrix.imag.tolist()})
        return {'algebra': self.alg.serialize(), 'p': self.p, 'A': entries}


def load_laplacian(path):
    return LaplacianSpec.parse(read_json(path), base=os.path.dirname(os.path.abspath(path)))


class SingularSet:

    def __init__(self, kind, half_trace, lambdas=(), tol=MEMBERSHIP_TOL):
        self.kind = kind
        self.half_trace = float(half_trace)
        self.lambdas = tuple(float(v) for v in lambdas)
        self.tol = tol

    def __repr__(self):
        h = self.half_trace
        if self.kind == RAYS:
            return 'SingularSet((-inf, {:g}] u [{:g}, inf))'.format(-h, h)
        return 'SingularSet(+-({:g} + 2 sum a_j lambda_j), lambdas={})'.format(h, list(self.lambdas))

    def _sums(self, limit):
        '''distinct values of sum a_j lambda_j <= limit over a in N^m'''
        sums = np.zeros(1)
        for lam in self.lambdas:
            steps = np.arange(int(np.floor(limit / lam + self.tol)) + 1) * lam
            sums = (sums[:, None] + steps[None, :]).ravel()
            sums = sums[sums <= limit * (1 + self.tol) + self.tol]
            sums = np.array([v for v, _ in group_eigenvalues(sums, self.tol * max(1.0, limit))])
        return sums

    def elements(self, limit):
        '''members of the discrete set with |value| <= limit, with multiplicity'''
        if self.kind != DISCRETE:
            raise DomainError('a ray singular set has no element list')
        h = self.half_trace
        if limit < h:
            return []
        ranges = [range(int(np.floor((limit - h) / (2 * lam) + self.tol)) + 1) for lam in self.lambdas]
        values = [h + 2 * sum(a * lam for a, lam in zip(alpha, self.lambdas)) for alpha in product(*ranges)]
        positive = group_eigenvalues([v for v in values if v <= limit * (1 + self.tol)], self.tol * max(1.0, limit))
        return sorted([(-v, mult) for v, mult in positive] + positive)

    def match(self, x):
        '''the element of the set matching the real number x, or None'''
        h, r = self.half_trace, abs(x)
        slack = self.tol * max(1.0, r)
        if r < h - slack:
            return None
        if self.kind == RAYS:
            return float(np.sign(x) * max(r, h))
        sums = self._sums(max(r - h, 0.0) / 2)
        value = h + 2 * sums
        nearest = value[np.argmin(np.abs(value - r))]
        if abs(nearest - r) <= slack:
            return float(np.copysign(nearest, x))
        return None


def singular_set(levi, group_kind=None, tol=MEMBERSHIP_TOL):
    '''Forbidden eigenvalues of the layer-2 coefficient on the quotient
    group with Levi data levi: discrete on H^{2m+1}, two rays on
    H^{2m+1} x R^k with k > 0'''
    if levi.m == 0:
        raise DegenerateLeviError('Levi form {} vanishes; the criterion does not apply'.format(levi.nu))
    natural = HEISENBERG if levi.rank_deficit == 0 else HEISENBERG_TIMES_ABELIAN
    group_kind = group_kind or natural
    if group_kind != natural:
        raise DomainError('Levi form of rank {} on {} generators is not {}'.format(
            2 * levi.m, levi.matrix.shape[0], group_kind))
    if group_kind == HEISENBERG:
        return SingularSet(DISCRETE, levi.half_trace, levi.lambdas, tol)
    return SingularSet(RAYS, levi.half_trace, tol=tol)


def membership(mu, sset):
    '''(True, element) when mu lies in sset; non-real mu is never a member'''
    mu = complex(mu)
    if abs(mu.imag) > sset.tol * (1 + abs(mu)):
        return False, None
    element = sset.match(mu.real)
    return element is not None, element


def effective_matrix(spec, nu):
    '''A_nu = sum_{j<k} A_jk L^nu_jk'''
    L = spec.alg.levi_matrix(nu)
    Anu = np.zeros((spec.p, spec.p), dtype=complex)
    for (j, k), matrix in spec.A.items():
        Anu += L[j - 1, k - 1] * matrix
    return Anu


class Verdict:

    def __init__(self, status, witness=None, notes=()):
        if status == NOT_HYPOELLIPTIC and witness is None:
            raise ValueError('a NotHypoelliptic verdict needs a witness')
        self.status = status
        self.witness = witness
        self.notes = list(notes)

    def __eq__(self, other):
        if other is None:
            return False
        return self.status == other.status and self.witness == other.witness

    def __repr__(self):
        if self.witness is None:
            return 'Verdict({})'.format(self.status)
        return 'Verdict({}, nu={nu}, mu={mu:g}, element={element:g})'.format(self.status, **self.witness)

    @property
    def hypoelliptic(self):
        return self.status == HYPOELLIPTIC

    def serialize(self):
        return {'status': self.status, 'witness': self.witness, 'notes': self.notes}


def decide(spec, tol=MEMBERSHIP_TOL):
    '''Runs the codimension-1 reduction over every layer-2 direction. The
    first eigenvalue of some A_nu inside the singular set of the quotient
    group proves non-hypoellipticity; no hit is conclusive only on step-2
    algebras with one-dimensional centre.'''
    alg = spec.alg
    notes = []
    skipped = 0
    for nu in range(1, alg.dims[1] + 1):
        target, _ = quotient_codim1(alg, nu)
        levi = levi_normal_form(target, 1)
        if levi.m == 0:
            skipped += 1
            notes.append('nu={}: Levi form vanishes, direction skipped'.format(nu))
            continue
        sset = singular_set(levi, tol=tol)
        values = eigvals(effective_matrix(spec, nu))
        values = values[np.lexsort((-values.imag, -values.real))]
        log.debug('nu=%d: %s, eigenvalues %s', nu, sset, values)
        complex_seen = False
        for mu in values:
            hit, element = membership(mu, sset)
            if hit:
                witness = {'nu': nu, 'mu': snap(mu.real, tol), 'element': element}
                log.info('%s is not hypoelliptic: eigenvalue %g of A_%d is in %s', spec, mu.real, nu, sset)
                return Verdict(NOT_HYPOELLIPTIC, witness, notes)
            if abs(mu.imag) > tol * (1 + abs(mu)):
                complex_seen = True
        if complex_seen:
            notes.append('nu={}: non-real eigenvalues of A_nu treated as outside the singular set'.format(nu))
    if skipped == alg.dims[1]:
        raise DegenerateLeviError('every Levi form of {} vanishes'.format(alg))
    if alg.step == 2 and alg.dims[1] == 1:
        return Verdict(HYPOELLIPTIC, notes=notes)
    notes.append('no singular eigenvalue found; the reduction is one-directional here')
    return Verdict(INCONCLUSIVE, notes=notes)


def _check_rep(alg, rep):
    if rep.d != alg.dims[0]:
        raise PairingError('Clifford rank {} does not match the horizontal rank {}'.format(rep.d, alg.dims[0]))


def dirac_square_spec(alg, rep):
    '''the layer-2 part of (D^H)^2: A_jk = i c(e_j) c(e_k)'''
    _check_rep(alg, rep)
    A = {(j + 1, k + 1): 1j * rep.gens[j] @ rep.gens[k] for j, k in combinations(range(rep.d), 2)}
    return LaplacianSpec(alg, rep.dim, A)


def dirac_verdict(alg, rep, tol=MEMBERSHIP_TOL):
    return decide(dirac_square_spec(alg, rep), tol)


def theta_family_spec(alg, rep, theta):
    '''Delta^hor + theta-deformation: A_jk = (1 - theta) i c(e_j) c(e_k)'''
    if not 0 < theta <= 1:
        raise DomainError('theta must lie in (0, 1], got {}'.format(theta))
    if alg.step != 2 or alg.dims[1] != 1:
        raise DomainError('the theta family is defined on step-2 algebras with a one-dimensional centre')
    return dirac_square_spec(alg, rep).scaled(1 - theta)


def theta_verdict(alg, rep, theta, tol=MEMBERSHIP_TOL):
    return decide(theta_family_spec(alg, rep, theta), tol)
