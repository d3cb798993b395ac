import logging

import numpy as np
from scipy.linalg import eigh

from helper import (
    CLIFFORD_CAP,
    DomainError,
    GROUP_TOL,
    PairingError,
    SizeError,
    group_eigenvalues,
)


log = logging.getLogger(__name__)

E2 = np.array([[0, 1j], [1j, 0]])
E3 = np.array([[0, -1], [1, 0]], dtype=complex)
# tensor factor for the inherited generators; squares to +I so that the
# inherited generators keep squaring to -I
PARITY = np.array([[1, 0], [0, -1]], dtype=complex)


def _generators(d):
    if d == 0:
        return []
    if d == 1:
        return [np.array([[1j]])]
    m = d // 2
    inner = _generators(d - 2)
    eye = np.eye(2 ** ((d - 2) // 2), dtype=complex)
    gens = []
    for j in range(1, d + 1):
        if j < m:
            gens.append(np.kron(inner[j - 1], PARITY))
        elif j == m:
            gens.append(np.kron(eye, E2))
        elif j < 2 * m:
            gens.append(np.kron(inner[j - 2], PARITY))
        elif j == 2 * m:
            gens.append(np.kron(eye, E3))
        else:
            gens.append(np.kron(inner[j - 3], PARITY))
    return gens


class CliffordRep:

    def __init__(self, d, gens):
        self.d = d
        self.gens = gens
        self.dim = gens[0].shape[0] if gens else 1

    def __repr__(self):
        return 'CliffordRep(d={}, dim={})'.format(self.d, self.dim)

    def c(self, j):
        '''generator c(e_j), 1-based'''
        if not 1 <= j <= self.d:
            raise DomainError('generator index {} outside 1..{}'.format(j, self.d))
        return self.gens[j - 1]

    def relation_defects(self):
        '''pairs (j,k) where c_j c_k + c_k c_j != -2 delta_jk I, compared exactly'''
        eye = np.eye(self.dim)
        bad = []
        for j in range(self.d):
            for k in range(j, self.d):
                a, b = self.gens[j], self.gens[k]
                want = -2 * eye if j == k else 0 * eye
                if not np.array_equal(a @ b + b @ a, want):
                    bad.append((j + 1, k + 1))
        return bad


def build_rep(d):
    if not 1 <= d <= CLIFFORD_CAP:
        raise SizeError('Clifford rank must be in 1..{}, got {}'.format(CLIFFORD_CAP, d))
    rep = CliffordRep(d, _generators(d))
    log.debug('built %s', rep)
    return rep


def pair_product_eigs(rep, k, l):
    '''(multiplicity of +i, multiplicity of -i) for c(e_k)c(e_l)'''
    if k == l:
        raise DomainError('c(e_k)c(e_k) = -I; pick two distinct generators')
    product = rep.c(k) @ rep.c(l)
    # i*P is Hermitian and P v = -i mu v for i*P v = mu v
    mu = eigh(1j * product, eigvals_only=True)
    return int(np.sum(np.isclose(mu, -1))), int(np.sum(np.isclose(mu, 1)))


class WeightedPairSum:

    def __init__(self, lambdas, matrix, spectrum):
        self.lambdas = tuple(lambdas)
        self.matrix = matrix
        self.spectrum = spectrum

    @property
    def m(self):
        return len(self.lambdas)

    def __repr__(self):
        return 'WeightedPairSum({}: {})'.format(list(self.lambdas), ', '.join(
            '{:+g}i x{}'.format(v, mult) for v, mult in self.spectrum))


def pair_sum_matrix(rep, lambdas):
    m = len(lambdas)
    if m < 1:
        raise DomainError('need at least one Clifford pair')
    if 2 * m > rep.d:
        raise PairingError('{} pairs need at least {} generators, rep has {}'.format(m, 2 * m, rep.d))
    if any(lam <= 0 for lam in lambdas):
        raise DomainError('pair weights must be positive, got {}'.format(list(lambdas)))
    return sum(lam * rep.gens[j] @ rep.gens[m + j] for j, lam in enumerate(lambdas))


def weighted_sum_spectrum(rep, lambdas):
    '''spectrum of sum_j lambda_j c(e_j)c(e_{m+j}) as (imaginary part, multiplicity)'''
    matrix = pair_sum_matrix(rep, lambdas)
    mu = eigh(1j * matrix, eigvals_only=True)
    spectrum = group_eigenvalues(-mu, GROUP_TOL * sum(lambdas))
    return WeightedPairSum(lambdas, matrix, spectrum)
