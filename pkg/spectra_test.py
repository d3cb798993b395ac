from math import pi, sqrt
from unittest import TestCase

import numpy as np

from carnot import GradedLieAlgebra
from helper import (
    CutoffError,
    DomainError,
    MalformedInputError,
    ParityError,
    group_eigenvalues,
)
from spectra import (
    LANDAU,
    TORUS,
    Cutoffs,
    HermiteTruncation,
    NilmanifoldSpec,
    SpectrumTable,
    SpinStructure,
    allowed_lattice,
    clifford_offsets,
    counting_function,
    dimension_fit,
    dirac_spectrum,
    hermite_oracle,
    landau_block,
    torus_block,
    zeta_scan,
)


H3 = NilmanifoldSpec(1, [1], 2)
H5 = NilmanifoldSpec(2, [1, 1], 4)


def offsets_dict(offsets):
    return {round(o / pi, 9): mult for o, mult in offsets}


def signed_spectrum(blocks, threshold):
    '''signed Dirac values below threshold, repeated by multiplicity'''
    values = []
    for b in blocks:
        if b.abs_value < threshold:
            for v in b.signed:
                values.extend([v] * (b.mult // len(b.signed)))
    return np.sort(values)


def expanded(table):
    '''all (D^H)^2 values repeated by multiplicity'''
    return np.sort(np.repeat(table.square, table.mult))


class LatticeTest(TestCase):

    def test_examples(self):
        self.assertEqual(len(allowed_lattice(SpinStructure((1, 1)), 1)), 9)
        half = allowed_lattice(SpinStructure((-1, -1)), 1)
        self.assertEqual(sorted(half), [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)])
        mixed = allowed_lattice(SpinStructure((1, -1)), 1)
        self.assertEqual(len(mixed), 6)
        self.assertEqual({a for a, _ in mixed}, {-1.0, 0.0, 1.0})
        self.assertEqual(allowed_lattice(SpinStructure(()), 3), [()])
        self.assertEqual(allowed_lattice(SpinStructure((-1,)), 0.2), [])

    def test_errors(self):
        self.assertRaises(DomainError, allowed_lattice, SpinStructure((1,)), -1)
        self.assertRaises(MalformedInputError, SpinStructure, (1, 0))


class NilmanifoldSpecTest(TestCase):

    def test_from_algebra(self):
        spec = NilmanifoldSpec.from_algebra(GradedLieAlgebra.heisenberg(2))
        self.assertEqual((spec.m, spec.d), (2, 4))
        self.assertTrue(np.allclose(spec.lambdas, [1, 1]))
        self.assertEqual(spec.rep.dim, 4)
        spec = NilmanifoldSpec.from_algebra(GradedLieAlgebra.heisenberg(1, abelian=1), delta=(1, 1, -1))
        self.assertEqual((spec.m, spec.d), (1, 3))
        self.assertRaises(DomainError, NilmanifoldSpec.from_algebra, GradedLieAlgebra.filiform(3))

    def test_parse(self):
        spec = NilmanifoldSpec.parse({'m': 1, 'lambdas': [2.0], 'd': 3, 'delta': [1, -1, 1]})
        self.assertEqual(NilmanifoldSpec.parse(spec.serialize()).serialize(), spec.serialize())
        self.assertRaises(MalformedInputError, NilmanifoldSpec.parse, {'m': 2, 'lambdas': [1, 1], 'd': 3})
        self.assertRaises(MalformedInputError, NilmanifoldSpec.parse, {'m': 1, 'lambdas': [0], 'd': 2})
        self.assertRaises(MalformedInputError, NilmanifoldSpec.parse, {'m': 1, 'lambdas': [1], 'd': 2,
                                                                        'delta': [1]})


class TorusBlockTest(TestCase):

    def test_examples(self):
        blocks = {b.label: b for b in torus_block(H3, 1)}
        self.assertEqual(blocks[(0.0, 0.0)].square, 0.0)
        self.assertEqual(blocks[(0.0, 0.0)].mult, 2)
        self.assertEqual(blocks[(0.0, 0.0)].signed, (0.0,))
        self.assertAlmostEqual(blocks[(1.0, 0.0)].abs_value, 2 * pi)
        self.assertEqual(len(blocks[(1.0, 0.0)].signed), 2)
        spec = NilmanifoldSpec(1, [1], 2, (-1, -1))
        blocks = {b.label: b for b in torus_block(spec, 1)}
        self.assertAlmostEqual(blocks[(0.5, 0.5)].abs_value, pi * sqrt(2))
        self.assertEqual(len(blocks), 4)

    def test_multiplicity(self):
        spec = NilmanifoldSpec(1, [1], 5)
        self.assertTrue(all(b.mult == 4 for b in torus_block(spec, 1)))


class OffsetTest(TestCase):

    def test_examples(self):
        self.assertEqual(offsets_dict(clifford_offsets(H3, 1)), {-2: 1, 2: 1})
        self.assertEqual(offsets_dict(clifford_offsets(H5, 1)), {-4: 1, 0: 2, 4: 1})
        self.assertEqual(offsets_dict(clifford_offsets(H3, -3)), {-6: 1, 6: 1})
        self.assertRaises(DomainError, clifford_offsets, H3, 0)

    def test_extremes(self):
        spec = NilmanifoldSpec(2, [1.5, 0.25], 5)
        for tau in (1, -2, 3):
            offsets = clifford_offsets(spec, tau)
            self.assertAlmostEqual(offsets[0][0], -2 * pi * abs(tau) * 1.75)
            self.assertAlmostEqual(offsets[-1][0], 2 * pi * abs(tau) * 1.75)


class LandauBlockTest(TestCase):

    def test_h3(self):
        blocks = landau_block(H3, 1, (), 1)
        kernel = [b for b in blocks if b.square == 0]
        self.assertEqual(len(kernel), 1)
        self.assertEqual(kernel[0].label, (1, (), (0,), 0))
        self.assertEqual(kernel[0].mult, 1)
        self.assertTrue(kernel[0].degenerate)
        level1 = sorted(b.square for b in blocks if b.label[2] == (1,))
        self.assertTrue(np.allclose(level1, [4 * pi, 8 * pi]))
        self.assertTrue(np.allclose(sorted(b.abs_value for b in blocks if b.label[2] == (1,)),
                                    [2 * sqrt(pi), 2 * sqrt(2 * pi)]))
        self.assertTrue(all(b.mult == 3 for b in landau_block(H3, -3, (), 2)))

    def test_h3_signs(self):
        blocks = landau_block(H3, 2, (), 3)
        by_value = {}
        for b in blocks:
            if b.square > 0:
                by_value.setdefault(round(b.square, 9), []).append(b.signed[0])
        for value, signs in by_value.items():
            if len(signs) == 2:
                self.assertAlmostEqual(sum(signs), 0.0)

    def test_h3_list(self):
        values = sorted({round(b.abs_value, 9) for b in landau_block(H3, 1, (), 10) if b.abs_value <= 8})
        want = [0, 2 * sqrt(pi), 2 * sqrt(2 * pi), 2 * sqrt(3 * pi), 2 * sqrt(4 * pi), 2 * sqrt(5 * pi)]
        self.assertTrue(np.allclose(values, want))

    def test_h5(self):
        blocks = [b for b in landau_block(H5, 1, (), 1) if b.label[2] == (0, 0)]
        got = sorted((round(b.square / pi, 9), b.mult) for b in blocks)
        self.assertEqual(got, [(0, 1), (4, 2), (8, 1)])
        self.assertTrue(all(b.signed is None for b in blocks))
        self.assertTrue(all(b.mult % 4 == 0 for b in landau_block(H5, 2, (), 1)))

    def test_gamma(self):
        spec = NilmanifoldSpec(1, [1], 3, (1, 1, -1))
        self.assertRaises(ParityError, landau_block, spec, 1, (1,), 1)
        self.assertRaises(ParityError, landau_block, spec, 1, (), 1)
        blocks = landau_block(spec, 1, (0.5,), 1)
        self.assertAlmostEqual(min(b.square for b in blocks), pi ** 2)
        self.assertRaises(DomainError, landau_block, spec, 0, (0.5,), 1)

    def test_bottom_sign(self):
        spec = NilmanifoldSpec(1, [1], 3, (1, 1, -1))
        for gamma in ((0.5,), (-0.5,), (1.5,)):
            bottom = [b for b in landau_block(spec, 1, gamma, 2) if b.degenerate]
            self.assertEqual(len(bottom), 1)
            self.assertEqual(len(bottom[0].signed), 1)
            self.assertAlmostEqual(abs(bottom[0].signed[0]), 2 * pi * abs(gamma[0]))
        up = [b for b in landau_block(spec, 1, (0.5,), 0) if b.degenerate][0]
        down = [b for b in landau_block(spec, 1, (-0.5,), 0) if b.degenerate][0]
        self.assertAlmostEqual(up.signed[0], -down.signed[0])
        spec = NilmanifoldSpec(1, [1], 4)
        bottom = [b for b in landau_block(spec, 1, (1, 0), 0) if b.degenerate][0]
        self.assertEqual(bottom.mult, 2)
        self.assertTrue(np.allclose(bottom.signed, [-2 * pi, 2 * pi]))
        self.assertEqual([b.signed for b in landau_block(H3, 1, (), 0) if b.degenerate], [(0.0,)])

    def test_extra_generators_balanced(self):
        spec = NilmanifoldSpec(1, [1], 4)
        for gamma in ((0, 0), (1, 1), (0, 1)):
            values = signed_spectrum(landau_block(spec, 2, gamma, 6), 12)
            self.assertTrue(np.allclose(values, -values[::-1]))

    def test_pair_permutation(self):
        a = NilmanifoldSpec(2, [1, 2], 4)
        b = NilmanifoldSpec(2, [2, 1], 4)
        for tau in (1, -2):
            left = sorted((round(x.square, 8), x.mult) for x in landau_block(a, tau, (), 3))
            right = sorted((round(x.square, 8), x.mult) for x in landau_block(b, tau, (), 3))
            self.assertEqual(left, right)


class DiracSpectrumTest(TestCase):

    def test_kernel(self):
        table = dirac_spectrum(H3, Cutoffs(tau=2, kappa=2, alpha=1))
        self.assertEqual(int(table.mult[table.square == 0].sum()), 8)
        self.assertEqual(table.block(0).square, 0.0)

    def test_kernel_law(self):
        for delta, torus in (((1, 1), 2), ((-1, 1), 0)):
            spec = NilmanifoldSpec(1, [1], 2, delta)
            table = dirac_spectrum(spec, Cutoffs(tau=5, kappa=3, alpha=2))
            self.assertEqual(int(table.mult[table.square == 0].sum()), torus + 2 * 15)

    def test_torus_part(self):
        table = dirac_spectrum(H3, Cutoffs(tau=1, kappa=1, alpha=2)).sub_table(TORUS)
        for block in table.blocks:
            self.assertAlmostEqual(block.abs_value, 2 * pi * sqrt(sum(a * a for a in block.label)))
        self.assertEqual(len(table), 25)

    def test_signed_values(self):
        table = dirac_spectrum(H3, Cutoffs(tau=1, kappa=3, alpha=0))
        landau = [b for b in table.blocks if b.kind == LANDAU]
        self.assertTrue(all(len(b.signed) == 1 for b in landau))
        table = dirac_spectrum(H5, Cutoffs(tau=1, kappa=1, alpha=0))
        self.assertTrue(all(b.signed is None for b in table.blocks if b.kind == LANDAU))

    def test_rows(self):
        table = dirac_spectrum(H3, Cutoffs(tau=1, kappa=1, alpha=1))
        rows = list(table.rows())
        self.assertEqual(rows[0][3], 0.0)
        self.assertEqual([r[3] for r in rows], sorted(r[3] for r in rows))
        self.assertTrue(all(r[0] in (TORUS, LANDAU) for r in rows))


class CountingTest(TestCase):

    @classmethod
    def setUpClass(cls):
        cls.table = dirac_spectrum(H3, Cutoffs(tau=130, kappa=130, alpha=8))

    def test_monotone(self):
        counts = [counting_function(self.table, t) for t in np.linspace(0, 40, 81)]
        self.assertEqual(counts, sorted(counts))
        self.assertEqual(counting_function(self.table, 3.0), 0)
        self.assertEqual(counting_function(self.table, 4.0), 4)

    def test_guard(self):
        self.assertGreater(self.table.complete_below, 40)
        with self.assertRaises(CutoffError) as ctx:
            counting_function(self.table, 100)
        self.assertIn('increase the', str(ctx.exception))
        small = dirac_spectrum(H3, Cutoffs(tau=3, kappa=100, alpha=8))
        with self.assertRaises(CutoffError) as ctx:
            dimension_fit(small, (5, 40))
        self.assertIn('tau', str(ctx.exception))

    def test_heisenberg_dimension(self):
        fit = dimension_fit(self.table, (20, 40))
        self.assertAlmostEqual(fit.exponent, 4.0, delta=0.15)
        doubled = dirac_spectrum(H3, Cutoffs(tau=130, kappa=130, alpha=8).scaled(2))
        self.assertAlmostEqual(dimension_fit(doubled, (20, 40)).exponent, fit.exponent, delta=0.02)

    def test_torus_dimension(self):
        table = dirac_spectrum(H3, Cutoffs(tau=1, kappa=1, alpha=33)).sub_table(TORUS)
        self.assertAlmostEqual(dimension_fit(table, (20, 200)).exponent, 2.0, delta=0.15)

    def test_synthetic(self):
        table = SpectrumTable.from_values(np.arange(1, 70001) ** (1 / 3))
        self.assertAlmostEqual(dimension_fit(table, (5, 40)).exponent, 3.0, delta=0.05)
        self.assertRaises(DomainError, dimension_fit, table, (40, 5))

    def test_zeta(self):
        converging, diverging = zeta_scan(self.table, [4.5, 3.5])
        self.assertFalse(converging.diverging)
        self.assertTrue(diverging.diverging)
        self.assertLess(converging.partial[-1] - converging.partial[-2], 1e-3)
        self.assertTrue(np.all(np.diff(converging.partial) > 0))

    def test_zeta_single(self):
        scan, = zeta_scan(SpectrumTable.from_values([2.0]), [3])
        self.assertEqual(list(scan.partial), [0.125])
        self.assertFalse(scan.diverging)


class HermiteOracleTest(TestCase):

    def test_lowest(self):
        values = hermite_oracle(H3, 1, (), HermiteTruncation(200))
        lowest = sorted(sorted(values, key=abs)[:5])
        want = [-2 * sqrt(2 * pi), -2 * sqrt(pi), 0, 2 * sqrt(pi), 2 * sqrt(2 * pi)]
        self.assertTrue(np.allclose(lowest, want, atol=1e-6))

    def test_closed_form_h3(self):
        threshold = 2 * sqrt(15 * pi)
        trunc = HermiteTruncation(200)
        for tau in (1, -1, 2, -2, 3, -3, 4, -4, 5, -5):
            closed = np.array([2 * sqrt(k * pi * abs(tau)) for k in range(21)])
            closed = closed[closed < threshold]
            oracle = np.abs(hermite_oracle(H3, tau, (), trunc))
            oracle = oracle[oracle < threshold - 1e-3]
            for v in closed:
                self.assertLess(np.min(np.abs(oracle - v)), 1e-4)
            for v in oracle:
                self.assertLess(np.min(np.abs(closed - v)), 1e-4)

    def test_mirror(self):
        trunc = HermiteTruncation(200)
        plus = np.sort(np.abs(hermite_oracle(H3, 1, (), trunc)))
        minus = np.sort(np.abs(hermite_oracle(H3, -1, (), trunc)))
        self.assertTrue(np.allclose(plus, minus, atol=1e-8))

    def test_gamma_shift(self):
        spec = NilmanifoldSpec(1, [1], 3)
        trunc = HermiteTruncation(60, edge_weight=None)
        base = np.sort(hermite_oracle(spec, 1, (0,), trunc) ** 2)
        shifted = np.sort(hermite_oracle(spec, 1, (1,), trunc) ** 2)
        self.assertTrue(np.allclose(shifted, base + 4 * pi ** 2, atol=1e-6))

    def test_closed_form_h5(self):
        trunc = HermiteTruncation(16)
        squares = hermite_oracle(H5, 1, (), trunc) ** 2
        closed = {b.square for b in landau_block(H5, 1, (), 4) if b.square < 30}
        self.assertEqual(len(closed), 3)
        for v in closed:
            self.assertLess(np.min(np.abs(squares - v)), 1e-4)

    def test_signed_gamma(self):
        cases = [
            (NilmanifoldSpec(1, [1], 3, (1, 1, -1)), (0.5,), 8.0),
            (NilmanifoldSpec(1, [1], 3, (1, 1, -1)), (-0.5,), 8.0),
            (NilmanifoldSpec(1, [1], 4), (1, 0), 9.0),
            (NilmanifoldSpec(1, [1], 4), (1, 1), 10.5),
        ]
        trunc = HermiteTruncation(80)
        for spec, gamma, threshold in cases:
            closed = signed_spectrum(landau_block(spec, 1, gamma, 12), threshold)
            oracle = hermite_oracle(spec, 1, gamma, trunc)
            oracle = oracle[np.abs(oracle) < threshold]
            self.assertEqual(len(oracle), len(closed))
            self.assertTrue(np.allclose(oracle, closed, atol=1e-6))
        spec = NilmanifoldSpec(1, [1], 3, (1, 1, -1))
        values = hermite_oracle(spec, 1, (0.5,), trunc)
        lowest = values[np.argmin(np.abs(values))]
        bottom = [b for b in landau_block(spec, 1, (0.5,), 0) if b.degenerate][0]
        self.assertAlmostEqual(bottom.signed[0], -pi)
        self.assertAlmostEqual(lowest, -pi, places=6)

    def test_multiplicities_h5(self):
        threshold = 60
        for lambdas in ([1, 1], [1, 2]):
            spec = NilmanifoldSpec(2, lambdas, 4)
            closed = [(b.square, b.mult) for b in landau_block(spec, 1, (), 6) if b.square < threshold]
            closed = group_eigenvalues(np.repeat([v for v, _ in closed], [k for _, k in closed]), 1e-6)
            for N in (16, 24):
                squares = hermite_oracle(spec, 1, (), HermiteTruncation(N)) ** 2
                oracle = group_eigenvalues(squares[squares < threshold], 1e-6)
                self.assertEqual([k for _, k in oracle], [k for _, k in closed])
                self.assertTrue(np.allclose([v for v, _ in oracle], [v for v, _ in closed], atol=1e-6))
        want = [(0.0, 1), (4 * pi, 4), (8 * pi, 8), (12 * pi, 12), (16 * pi, 16)]
        squares = hermite_oracle(H5, 1, (), HermiteTruncation(24)) ** 2
        oracle = group_eigenvalues(squares[squares < threshold], 1e-6)
        self.assertEqual([k for _, k in oracle], [k for _, k in want])
        self.assertTrue(np.allclose([v for v, _ in oracle], [v for v, _ in want], atol=1e-6))

    def test_errors(self):
        self.assertRaises(DomainError, hermite_oracle, H3, 0, (), HermiteTruncation(10))
        self.assertRaises(DomainError, hermite_oracle, H3, 1, (), HermiteTruncation(1))
        self.assertRaises(DomainError, HermiteTruncation, 0)
