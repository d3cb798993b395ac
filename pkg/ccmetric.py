import logging

import numpy as np
import sympy
from scipy.optimize import minimize

from carnot import (
    GroupElement,
    bch_coords,
    dilate,
    koranyi_dist,
    koranyi_norm,
    left_invariant_fields,
    symbolic_fields,
)
from helper import (
    ConsistencyError,
    DomainError,
    ENDPOINT_TOL,
    FD_STEP,
    UnsupportedError,
    ZERO_TOL,
)


# coordinate roundoff the endpoint residual can actually reach
ROUNDOFF = 1e-14
JACOBIAN_STEP = 1e-6
MIN_SUBSTEPS = 8

log = logging.getLogger(__name__)


def _coords(x):
    return x.coords if isinstance(x, GroupElement) else np.asarray(x, dtype=float)


class HorizontalFields:
    '''The layer-1 left-invariant fields X_1..X_d as polynomial vector
    fields on R^n in exponential coordinates'''

    def __init__(self, alg):
        self.alg = alg
        self.d = alg.dims[0]
        self.n = alg.n

    def __repr__(self):
        return 'HorizontalFields({})'.format(self.alg)

    def __call__(self, x):
        '''(..., n, d) matrix whose column j is X_j at x'''
        return left_invariant_fields(self.alg, x)[..., :self.d]

    def velocity(self, x, u):
        return np.einsum('...ij,...j->...i', self(x), u)

    def pad(self, u):
        '''horizontal vectors as full Lie algebra vectors'''
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape[:-1] + (self.n,))
        out[..., :self.d] = u
        return out

    def flow(self, x, u, t=1.0):
        '''exact time-t flow of sum u_j X_j from x: x exp(t u)'''
        return bch_coords(self.alg, _coords(x), t * self.pad(u))


class PathControls:
    '''Piecewise-constant horizontal velocities on K equal segments of [0, 1]'''

    def __init__(self, u):
        u = np.asarray(u, dtype=float)
        if u.ndim != 2:
            raise DomainError('controls must be a K x d matrix, got shape {}'.format(u.shape))
        if not np.all(np.isfinite(u)):
            raise DomainError('controls must be finite')
        self.u = u

    @property
    def K(self):
        return self.u.shape[0]

    @property
    def length(self):
        return float(np.linalg.norm(self.u, axis=1).sum() / self.K)

    @property
    def energy(self):
        return float((self.u ** 2).sum() / self.K)

    def __repr__(self):
        return 'PathControls(K={}, length={:.6g})'.format(self.K, self.length)

    def serialize(self):
        return {'K': self.K, 'u': self.u.tolist()}


def integrate(fields, x0, controls, substeps=MIN_SUBSTEPS):
    '''classical RK4 for x' = sum_j u_j X_j(x), at least 8 substeps per segment'''
    substeps = max(substeps, MIN_SUBSTEPS)
    x = np.array(_coords(x0), dtype=float)
    h = 1.0 / (controls.K * substeps)
    for u in controls.u:
        for _ in range(substeps):
            k1 = fields.velocity(x, u)
            k2 = fields.velocity(x + h / 2 * k1, u)
            k3 = fields.velocity(x + h / 2 * k2, u)
            k4 = fields.velocity(x + h * k3, u)
            x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise ConsistencyError('horizontal path blew up from {}'.format(list(_coords(x0))))
    return x


def compose_path(fields, x0, controls):
    '''exact endpoint: x0 exp(u_1/K) ... exp(u_K/K)'''
    x = np.array(_coords(x0), dtype=float)
    for u in controls.u:
        x = fields.flow(x, u, 1.0 / controls.K)
    return x


def _endpoints(fields, U):
    '''exact endpoints from the origin for a batch of control matrices (..., K, d)'''
    K = U.shape[-2]
    x = np.zeros(U.shape[:-2] + (fields.n,))
    steps = fields.pad(U) / K
    for k in range(K):
        x = bch_coords(fields.alg, x, steps[..., k, :])
    return x


class DistanceOptions:

    def __init__(self, K=32, multistart=8, penalties=(1.0, 10.0, 100.0, 1000.0), tol=ENDPOINT_TOL,
                 seed=0, maxiter=300, shortcut=True):
        if K < 1 or multistart < 1:
            raise DomainError('need K >= 1 segments and at least one start')
        self.K = int(K)
        self.multistart = int(multistart)
        self.penalties = tuple(penalties)
        self.tol = tol
        self.seed = seed
        self.maxiter = maxiter
        self.shortcut = shortcut

    def __repr__(self):
        return 'DistanceOptions(K={}, starts={}, tol={:g}, seed={})'.format(
            self.K, self.multistart, self.tol, self.seed)


class DistanceResult:

    def __init__(self, value, controls, endpoint_residual, converged):
        self.value = float(value)
        self.controls = controls
        self.endpoint_residual = float(endpoint_residual)
        self.converged = bool(converged)

    def __repr__(self):
        return 'DistanceResult({:.6g}, residual={:.2g}{})'.format(
            self.value, self.endpoint_residual, '' if self.converged else ', not converged')

    def __float__(self):
        return self.value

    def serialize(self):
        return {
            'value': self.value,
            'endpoint_residual': self.endpoint_residual,
            'converged': self.converged,
            'controls': self.controls.serialize(),
        }


class _EndpointProblem:
    '''min energy(u) subject to exp(u_1/K)...exp(u_K/K) = target, with the
    target normalized to Koranyi gauge 1'''

    def __init__(self, fields, target, K):
        self.fields = fields
        self.alg = fields.alg
        self.target = target
        self.K = K
        self.size = K * fields.d

    def residual(self, v):
        '''coordinates of endpoint^-1 target, batched over leading axes of v'''
        U = v.reshape(v.shape[:-1] + (self.K, self.fields.d))
        return bch_coords(self.alg, -_endpoints(self.fields, U), self.target)

    def jacobian(self, v):
        '''central differences, all coordinates in one batch'''
        h = JACOBIAN_STEP
        eye = np.eye(self.size) * h
        r = self.residual(np.concatenate([v + eye, v - eye]))
        return ((r[:self.size] - r[self.size:]) / (2 * h)).T

    def gauge(self, v):
        return koranyi_norm(self.alg, GroupElement(self.alg, self.residual(v)))

    def energy(self, v):
        return float(v @ v / self.K)

    def penalized(self, v, mu):
        r = self.residual(v)
        J = self.jacobian(v)
        value = self.energy(v) + mu * float(r @ r)
        grad = 2 * v / self.K + 2 * mu * J.T @ r
        return value, grad

    def polish(self, v, maxiter):
        constraint = {'type': 'eq', 'fun': self.residual, 'jac': self.jacobian}
        out = minimize(lambda w: (self.energy(w), 2 * w / self.K), v, jac=True, method='SLSQP',
                       constraints=[constraint], options={'maxiter': maxiter, 'ftol': 1e-14})
        if np.all(np.isfinite(out.x)) and np.linalg.norm(self.residual(out.x)) <= np.linalg.norm(self.residual(v)):
            return out.x
        return v

    def project(self, v, rounds=30):
        '''Gauss-Newton steps onto the endpoint constraint, minimal-norm updates'''
        for _ in range(rounds):
            r = self.residual(v)
            if np.abs(r).max() <= ROUNDOFF:
                break
            step, *_ = np.linalg.lstsq(self.jacobian(v), -r, rcond=None)
            v = v + step
        return v

    def solve(self, v, penalties, maxiter):
        for mu in penalties:
            out = minimize(self.penalized, v, args=(mu,), jac=True, method='L-BFGS-B',
                           options={'maxiter': maxiter, 'gtol': 1e-12})
            v = out.x
        v = self.polish(v, maxiter)
        return self.project(v)


def _tolerance(alg, tol):
    return max(tol, ROUNDOFF ** (1.0 / alg.step))


def cc_distance(fields, x, y, opts=None):
    '''Carnot-Caratheodory distance by fixed-horizon energy minimization
    over piecewise-constant horizontal controls; the value is the length
    of the best constant-speed path found, an upper bound on d_CC'''
    opts = opts or DistanceOptions()
    alg = fields.alg
    x, y = _coords(x), _coords(y)
    g = bch_coords(alg, -x, y)
    zero = PathControls(np.zeros((opts.K, fields.d)))
    scale = koranyi_norm(alg, GroupElement(alg, g))
    if scale <= ZERO_TOL:
        return DistanceResult(0.0, zero, 0.0, True)
    horizontal = g[:fields.d]
    if opts.shortcut and np.all(np.abs(g[fields.d:]) <= ZERO_TOL * max(1.0, np.abs(g).max())):
        controls = PathControls(np.tile(horizontal, (opts.K, 1)))
        return DistanceResult(np.linalg.norm(horizontal), controls, 0.0, True)
    tol = _tolerance(alg, opts.tol)
    # solve between 0 and the dilated target at unit gauge, then scale back
    target = dilate(alg, 1.0 / scale, GroupElement(alg, g)).coords
    problem = _EndpointProblem(fields, target, opts.K)
    rng = np.random.default_rng(opts.seed)
    straight = np.tile(target[:fields.d], opts.K)
    best = None
    for start in range(opts.multistart):
        noise = rng.normal(size=problem.size)
        v0 = straight + (0.1 if start == 0 else 1.0) * noise
        v = problem.solve(v0, opts.penalties, opts.maxiter)
        residual = problem.gauge(v)
        candidate = (residual > tol, problem.energy(v) if residual <= tol else residual, v, residual)
        log.debug('start %d: energy %.8g residual %.3g', start, problem.energy(v), residual)
        if best is None or candidate[:2] < best[:2]:
            best = candidate
    failed, _, v, residual = best
    controls = PathControls(scale * v.reshape(opts.K, fields.d))
    result = DistanceResult(np.sqrt(controls.energy), controls, scale * residual, not failed)
    if failed:
        log.warning('cc_distance did not meet the endpoint tolerance %.2g (residual %.3g)', tol, residual)
    else:
        log.info('d_CC(%s, %s) = %.8g', list(x), list(y), result.value)
    return result


class KoranyiBounds:

    def __init__(self, ratios, skipped, failed):
        self.ratios = np.asarray(ratios, dtype=float)
        self.skipped = skipped
        self.failed = failed

    @property
    def c_hat(self):
        return float(self.ratios.min())

    @property
    def C_hat(self):
        return float(self.ratios.max())

    def __repr__(self):
        return 'KoranyiBounds([{:.4g}, {:.4g}] over {} pairs, {} skipped, {} failed)'.format(
            self.c_hat, self.C_hat, len(self.ratios), self.skipped, self.failed)

    def serialize(self):
        return {'c_hat': self.c_hat, 'C_hat': self.C_hat, 'pairs': len(self.ratios),
                'skipped': self.skipped, 'failed': self.failed}


def koranyi_bounds(fields, pairs, opts=None):
    '''empirical min and max of d_Koranyi / d_CC over sample pairs'''
    alg = fields.alg
    ratios, skipped, failed = [], 0, 0
    for x, y in zip(*pairs):
        if np.allclose(x, y, atol=ZERO_TOL, rtol=0):
            skipped += 1
            continue
        result = cc_distance(fields, x, y, opts)
        if not result.converged:
            failed += 1
            continue
        ratios.append(koranyi_dist(alg, GroupElement(alg, x), GroupElement(alg, y)) / result.value)
    if not ratios:
        raise DomainError('no usable sample pair')
    return KoranyiBounds(ratios, skipped, failed)


def sample_pairs(alg, count, box=1.0, seed=0):
    '''count pairs of points uniform in the coordinate box [-box, box]^n'''
    rng = np.random.default_rng(seed)
    return (rng.uniform(-box, box, size=(count, alg.n)), rng.uniform(-box, box, size=(count, alg.n)))


def _directions(d, count, seed):
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        angles = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    rng = np.random.default_rng(seed)
    random = rng.normal(size=(count, d))
    random /= np.linalg.norm(random, axis=1, keepdims=True)
    return np.concatenate([np.eye(d), -np.eye(d), random])


def horizontal_stencil(fields, bases, h=1e-3, directions=16, seed=0):
    '''pairs (x, x exp(h u)) for every base point x and unit horizontal
    direction u; d_CC of each pair is exactly h'''
    bases = np.atleast_2d(np.asarray(bases, dtype=float))
    units = _directions(fields.d, directions, seed)
    xs = np.repeat(bases, len(units), axis=0)
    us = np.tile(units, (len(bases), 1))
    return xs, fields.flow(xs, us, h)


def _measured(fields, pairs, opts):
    '''(x, y, d_CC) for the distinct pairs whose distance converged'''
    out = []
    for x, y in zip(*pairs):
        if np.allclose(x, y, atol=ZERO_TOL, rtol=0):
            continue
        result = cc_distance(fields, x, y, opts)
        if result.converged and result.value > 0:
            out.append((x, y, result.value))
    return out


def _lipschitz(f, measured):
    return max((abs(float(f(x)) - float(f(y))) / d for x, y, d in measured), default=0.0)


def lip_cc(f, fields, pairs, opts=None):
    '''max of |f(x) - f(y)| / d_CC(x, y) over sample pairs; f maps
    coordinate arrays (..., n) to values (...)'''
    return _lipschitz(f, _measured(fields, pairs, opts))


def linear_horizontal_functions(fields, directions=16, seed=0):
    '''f(x) = <u, x_horizontal> for unit horizontal directions u; each is
    1-Lipschitz for d_CC'''
    return [lambda x, u=u: np.asarray(x)[..., :len(u)] @ u
            for u in _directions(fields.d, directions, seed)]


def gauge_cone(fields, center):
    '''f(x) = Koranyi distance from center to x'''
    alg, center = fields.alg, GroupElement(fields.alg, _coords(center))
    return lambda x: koranyi_dist(alg, GroupElement(alg, x), center)


class ConnesEstimate:

    def __init__(self, value, witness, lipschitz):
        self.value = float(value)
        self.witness = witness
        self.lipschitz = list(lipschitz)

    def __repr__(self):
        return 'ConnesEstimate({:.6g}, witness={})'.format(self.value, self.witness)


def connes_distance(fields, x, y, pairs, functions=None, opts=None):
    '''Sampled Connes distance: sup |f(x) - f(y)| over test functions
    rescaled to Lip_CC(f) <= 1. Lip_CC is estimated with lip_cc on the
    sample pairs together with (x, y) itself, so the estimate never
    exceeds the computed d_CC(x, y). The default test functions are the
    linear horizontal coordinates and the gauge cone centred at x.'''
    x, y = _coords(x), _coords(y)
    if functions is None:
        functions = linear_horizontal_functions(fields) + [gauge_cone(fields, x)]
    xs = np.concatenate([np.atleast_2d(pairs[0]), [x]])
    ys = np.concatenate([np.atleast_2d(pairs[1]), [y]])
    measured = _measured(fields, (xs, ys), opts)
    best, witness, lipschitz = 0.0, None, []
    for i, f in enumerate(functions):
        lip = _lipschitz(f, measured)
        lipschitz.append(lip)
        if lip <= ZERO_TOL:
            continue
        value = abs(float(f(x)) - float(f(y))) / lip
        if value > best:
            best, witness = value, i
    log.debug('connes estimate %.6g from %d functions on %d pairs', best, len(functions), len(measured))
    return ConnesEstimate(best, witness, lipschitz)


def horizontal_gradient(f, fields, points, h=FD_STEP):
    '''(X_1 f, ..., X_d f) at each point by central differences along the
    exact flows exp(t X_j)'''
    points = np.atleast_2d(np.asarray(points, dtype=float))
    eye = np.eye(fields.d)

    def diff(step):
        plus = f(fields.flow(points[:, None, :], eye[None], step))
        minus = f(fields.flow(points[:, None, :], eye[None], -step))
        return (plus - minus) / (2 * step)

    grad = diff(h)
    coarse = diff(2 * h)
    # Richardson: the two estimates differ by 3/4 of the O(h^2) error
    drift = np.max(np.abs(grad - coarse) / (1 + np.abs(grad)))
    if drift > 1e-4:
        log.warning('horizontal derivative unstable at step %g (relative drift %.2g)', h, drift)
    return grad


def grad_h_sup(f, fields, points, h=FD_STEP):
    return float(np.max(np.linalg.norm(horizontal_gradient(f, fields, points, h), axis=1)))


def _symbols(alg):
    return sympy.symbols('x1:{}'.format(alg.n + 1))


def _polynomial(f, symbols):
    expr = sympy.sympify(f)
    if not expr.is_polynomial(*symbols):
        raise UnsupportedError('{} is not a polynomial in {}; use lip_cc instead'.format(expr, symbols))
    return expr


def double_commutator_value(f, target):
    '''The multiplication operator 1/2 [[Delta, f], f] for a horizontal
    Laplacian Delta on the algebra (or LaplacianSpec) target, as a sympy
    polynomial in x1..xn. Scalar A_jk enter the first-order part; matrix
    A_jk are replaced by symbols since they commute with f.'''
    alg = getattr(target, 'alg', target)
    symbols = _symbols(alg)
    f = _polynomial(f, symbols)
    M = symbolic_fields(alg, symbols)
    d = alg.dims[0]
    coefficients = {}
    for (j, k), matrix in getattr(target, 'A', {}).items():
        matrix = np.asarray(matrix)
        if matrix.size == 1:
            a = complex(matrix.ravel()[0])
            coefficients[(j, k)] = sympy.nsimplify(a.real) + sympy.I * sympy.nsimplify(a.imag)
        else:
            coefficients[(j, k)] = sympy.Symbol('a_{}{}'.format(j, k))

    def field(a, g):
        return sum(M[c, a] * sympy.diff(g, symbols[c]) for c in range(alg.n))

    def laplacian(g):
        out = -sum(field(j, field(j, g)) for j in range(d))
        for (j, k), a in coefficients.items():
            # [X_j, X_k] = sum_c C_jkc X_c
            bracket = sum(sympy.nsimplify(float(alg.tensor[j - 1, k - 1, c])) * field(int(c), g)
                          for c in np.nonzero(alg.tensor[j - 1, k - 1])[0])
            out -= sympy.I * a * bracket
        return out

    u = sympy.Function('u')(*symbols)
    expr = sympy.expand(laplacian(f ** 2 * u) - 2 * f * laplacian(f * u) + f ** 2 * laplacian(u))
    coefficient = expr.coeff(u)
    if sympy.expand(expr - coefficient * u) != 0:
        raise ConsistencyError('[[Delta, f], f] is not a multiplication operator for f = {}'.format(f))
    return sympy.expand(coefficient / 2)


def commutator_lipnorm(f, target, points):
    '''sup over points of sqrt(-1/2 [[Delta, f], f])'''
    alg = getattr(target, 'alg', target)
    value = double_commutator_value(f, target)
    evaluate = sympy.lambdify(_symbols(alg), value, 'numpy')
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.broadcast_to(np.real(evaluate(*points.T)), len(points))
    return float(np.sqrt(np.max(np.maximum(-values, 0.0))))


class SandwichVerdict:

    def __init__(self, holds, eps, worst, witness):
        self.holds = holds
        self.eps = eps
        self.worst = worst
        self.witness = witness

    @property
    def lower(self):
        return 1 - self.eps

    @property
    def upper(self):
        return 1 + self.eps

    def __repr__(self):
        if self.holds:
            return 'SandwichVerdict({:g} <= rho_0 / rho_theta <= {:g})'.format(self.lower, self.upper)
        return 'SandwichVerdict(fails at sample {}, deviation {:.3g})'.format(self.witness, self.worst)

    def serialize(self):
        return {'holds': self.holds, 'eps': self.eps, 'lower': self.lower, 'upper': self.upper,
                'worst_deviation': self.worst, 'witness': self.witness}


def lipnorm_sandwich(L0, Ltheta, eps):
    '''|Ltheta(f) - L0(f)| <= eps L0(f) on all samples gives
    (1 - eps) rho_theta <= rho_0 <= (1 + eps) rho_theta'''
    L0 = np.asarray(L0, dtype=float)
    Ltheta = np.asarray(Ltheta, dtype=float)
    if L0.shape != Ltheta.shape or len(L0) == 0:
        raise DomainError('need paired, nonempty Lip-norm samples')
    if np.any(L0 <= 0):
        raise DomainError('reference Lip-norms must be positive')
    deviation = np.abs(Ltheta - L0) / L0
    worst = int(np.argmax(deviation))
    holds = bool(deviation[worst] <= eps + ZERO_TOL)
    return SandwichVerdict(holds, eps, float(deviation[worst]), None if holds else worst)


class PropertyCheck:

    def __init__(self, name, worst, bound):
        self.name = name
        self.worst = float(worst)
        self.bound = float(bound)

    @property
    def ok(self):
        return self.worst <= self.bound

    def __repr__(self):
        return 'PropertyCheck({}: {:.3g} vs {:.3g})'.format(self.name, self.worst, self.bound)

    def row(self):
        return [self.name, self.worst, self.bound, 'ok' if self.ok else 'FAIL']


PROPERTY_HEADER = ['property', 'worst_relative_deviation', 'bound', 'status']


def property_battery(fields, pairs, opts=None, seed=0):
    '''symmetry, left-invariance, dilation, triangle and planar-projection
    checks of cc_distance on sample pairs; deviations are relative'''
    opts = opts or DistanceOptions()
    alg = fields.alg
    rng = np.random.default_rng(seed)
    xs, ys = pairs
    rel = 2 * _tolerance(alg, opts.tol) + 0.02
    worst = {'symmetry': 0.0, 'left-invariance': 0.0, 'dilation': 0.0, 'triangle': 0.0, 'lower-bound': 0.0}

    def dist(a, b):
        return cc_distance(fields, a, b, opts).value

    for x, y in zip(xs, ys):
        base = dist(x, y)
        if base == 0:
            continue
        worst['symmetry'] = max(worst['symmetry'], abs(dist(y, x) - base) / base)
        g = rng.uniform(-1, 1, size=alg.n)
        moved = abs(dist(bch_coords(alg, g, x), bch_coords(alg, g, y)) - base) / base
        worst['left-invariance'] = max(worst['left-invariance'], moved)
        for lam in (0.5, 2.0):
            scaled = dist(x * lam ** alg.weights, y * lam ** alg.weights)
            worst['dilation'] = max(worst['dilation'], abs(scaled - lam * base) / (lam * base))
        z = rng.uniform(-1, 1, size=alg.n)
        excess = (base - dist(x, z) - dist(z, y)) / base
        worst['triangle'] = max(worst['triangle'], excess)
        planar = np.linalg.norm(bch_coords(alg, -x, y)[:fields.d])
        worst['lower-bound'] = max(worst['lower-bound'], (planar - base) / base)
    return [PropertyCheck(name, value, rel) for name, value in worst.items()]
