import csv
import os
import shutil
import tempfile
import unittest

import numpy as np

from fpeit.boundary_solver import BoundarySystem, assemble, error_norm, \
    fit, inner_product, orthonormalize, raw_traces, reconstruct_interior, \
    slot_name, uniform_angles, write_boundary_fit, write_coefficients
from fpeit.conductivity import ConstantField, radial_rings
from fpeit.config import cubic_potential
from fpeit.errors import ValidationError
from fpeit.formal_powers import build_table
from fpeit.pseudoanalytic import RadialMesh, build_sequence

SQRT_PI = np.sqrt(np.pi)


def classical_system(P, N, S=50):
    table = build_table(build_sequence(ConstantField(1.0)),
                        RadialMesh.uniform(P, S), N, boundary_only=True)
    return assemble(table)


def dense_traces(field, Q, N, S=50):
    mesh = RadialMesh.uniform(Q, S)
    table = build_table(build_sequence(field), mesh, N, boundary_only=True)
    return (mesh.boundary_angles, raw_traces(table))


def cubic_on_rim(theta):
    return cubic_potential(0.0)(np.cos(theta), np.sin(theta))


class InnerProductTest(unittest.TestCase):

    def test_trigonometric_orthogonality(self):
        theta = uniform_angles(16)
        w = np.full(16, 2 * np.pi / 16)
        self.assertAlmostEqual(inner_product(np.cos(theta), np.cos(theta), w),
                               np.pi)
        self.assertAlmostEqual(inner_product(np.cos(theta), np.sin(theta), w),
                               0.0)
        self.assertAlmostEqual(inner_product(np.ones(16), np.ones(16), w),
                               2 * np.pi)

    def test_mismatched_nodes(self):
        with self.assertRaises(ValidationError):
            inner_product(np.ones(4), np.ones(5), np.ones(5))

    def test_slot_names(self):
        self.assertEqual(slot_name(0, 17), 'Re Z(0)(1)')
        self.assertEqual(slot_name(17, 17), 'Re Z(17)(1)')
        self.assertEqual(slot_name(35, 17), 'Re Z(17)(i)')


class OrthonormalizeTest(unittest.TestCase):

    def system(self, sin_row):
        theta = uniform_angles(16)
        raw = np.array([np.ones(16), np.cos(theta), np.zeros(16), sin_row])
        return BoundarySystem(theta, np.full(16, 2 * np.pi / 16), raw, 1)

    def test_small_system(self):
        theta = uniform_angles(16)
        basis = orthonormalize(self.system(np.sin(theta)))
        self.assertEqual(basis.kept, [0, 1, 3])
        self.assertEqual(basis.dropped, [])
        np.testing.assert_allclose(basis.functions[0], 1 / np.sqrt(2 * np.pi))
        np.testing.assert_allclose(basis.functions[1],
                                   np.cos(theta) / SQRT_PI, atol=1e-15)
        np.testing.assert_allclose(basis.gram(), np.eye(3), atol=1e-14)

    def test_dependent_function_is_dropped(self):
        theta = uniform_angles(16)
        with self.assertLogs('fpeit.boundary_solver', 'WARNING') as logs:
            basis = orthonormalize(self.system(2 * np.cos(theta)))
        self.assertEqual(basis.kept, [0, 1])
        self.assertEqual([slot for (slot, _) in basis.dropped], [3])
        self.assertLess(basis.dropped[0][1], 1e-10)
        self.assertIn('Re Z(1)(i)', logs.output[0])

    def test_nothing_left(self):
        raw = np.zeros((4, 8))
        system = BoundarySystem(uniform_angles(8), np.ones(8), raw, 1)
        with self.assertRaises(ValidationError):
            orthonormalize(system)

    def test_raw_shape_is_checked(self):
        with self.assertRaises(ValidationError):
            BoundarySystem(uniform_angles(8), np.ones(8), np.zeros((3, 8)), 1)

    def test_classical_basis_is_complete(self):
        system = classical_system(35, 17)
        self.assertEqual(len(system.slots), 35)
        self.assertNotIn(18, system.slots)
        basis = orthonormalize(system)
        self.assertEqual(basis.size, 35)
        np.testing.assert_allclose(np.linalg.eigvalsh(basis.gram()), 1,
                                   atol=1e-10)

    def test_too_few_rays(self):
        system = classical_system(5, 3)
        with self.assertLogs('fpeit.boundary_solver', 'WARNING'):
            basis = orthonormalize(system)
        # cos 3t and sin 3t alias onto degree 2 on five rays
        self.assertEqual(basis.size, 5)
        self.assertEqual(sorted(s for (s, _) in basis.dropped), [3, 7])

    def test_size_limit_follows_degree(self):
        system = classical_system(35, 17)
        with self.assertLogs('fpeit.boundary_solver', 'INFO') as logs:
            basis = orthonormalize(system, limit=6)
        self.assertEqual(basis.kept, [0, 1, 2, 3, 19, 20])
        self.assertEqual(len(basis.left_out), 29)
        self.assertNotIn(18, basis.left_out)
        self.assertIn('left out Re Z(4)(1), Re Z(5)(1)', logs.output[0])
        np.testing.assert_allclose(basis.gram(), np.eye(6), atol=1e-12)

    def test_limit_above_the_slot_count(self):
        basis = orthonormalize(classical_system(35, 17), limit=100)
        self.assertEqual(basis.size, 35)
        self.assertEqual(basis.left_out, [])


class FitTest(unittest.TestCase):

    def setUp(self):
        self.system = classical_system(35, 17)
        self.basis = orthonormalize(self.system)
        self.theta = self.system.theta

    def test_zero_data(self):
        result = fit(self.basis, np.zeros(35))
        np.testing.assert_array_equal(result.coefficients, 0)
        self.assertEqual(result.E, 0.0)
        self.assertEqual(result.significant(), [])

    def test_harmonic_data_on_dense_traces(self):
        data_fn = lambda t: np.cos(2 * t)
        dense = dense_traces(ConstantField(1.0), 1000, 17)
        result = fit(self.basis, data_fn(self.theta), 1000, data_fn, dense)
        self.assertLessEqual(result.E, 1e-8)
        self.assertEqual(len(result.theta_q), 1000)
        significant = result.significant()
        self.assertEqual([alpha for (alpha, _) in significant], [2])
        self.assertAlmostEqual(significant[0][1], SQRT_PI, places=8)

    def test_interpolated_error_points(self):
        data_fn = lambda t: np.cos(2 * t)
        result = fit(self.basis, data_fn(self.theta), 1000, data_fn)
        self.assertLess(result.E, 5e-2)
        self.assertLess(result.residual_norm, 1e-10)

    def test_projection_is_optimal(self):
        data = np.exp(np.cos(self.theta)) * np.sin(3 * self.theta + 0.2)
        result = fit(self.basis, data)
        w = self.system.weights
        best = inner_product(data - result.fitted, data - result.fitted, w)
        rng = np.random.default_rng(7)
        for _ in range(5):
            other = result.coefficients + 1e-3 * rng.standard_normal(35)
            fitted = np.dot(other, self.basis.functions)
            self.assertGreater(inner_product(data - fitted, data - fitted, w),
                               best)

    def test_residual_shrinks_with_the_degree(self):
        P = 41
        theta = classical_system(P, 1).theta
        data = np.exp(np.cos(theta) + np.sin(2 * theta))
        norms = []
        for N in (2, 5, 10, 20):
            basis = orthonormalize(classical_system(P, N))
            norms.append(fit(basis, data).residual_norm)
        for (coarse, fine) in zip(norms, norms[1:]):
            self.assertLessEqual(fine, coarse + 1e-12)

    def test_invalid_inputs(self):
        with self.assertRaises(ValidationError):
            fit(self.basis, np.zeros(34))
        with self.assertRaises(ValidationError):
            fit(self.basis, np.zeros(35), Q=20)


class RadialRingsTest(unittest.TestCase):
    """Traces of a radial conductivity are trigonometric polynomials, so the
    orthonormal basis is the Fourier one and cubic data need exactly four
    functions."""

    def test_four_coefficients(self):
        field = radial_rings()
        table = build_table(build_sequence(field), RadialMesh.uniform(35, 50),
                            17, boundary_only=True)
        basis = orthonormalize(assemble(table))
        self.assertEqual(basis.size, 35)
        theta = table.mesh.boundary_angles
        result = fit(basis, cubic_on_rim(theta), 1000, cubic_on_rim,
                     dense_traces(field, 1000, 17))
        b = dict(result.significant())
        self.assertEqual(sorted(b), [1, 3, 19, 21])
        self.assertAlmostEqual(b[1], 0.35 * SQRT_PI, places=8)
        self.assertAlmostEqual(b[19], -b[1], places=8)
        self.assertAlmostEqual(b[3], SQRT_PI / 12, places=8)
        self.assertAlmostEqual(b[21], b[3], places=8)
        self.assertLessEqual(result.E, 1e-8)


class ErrorNormTest(unittest.TestCase):

    def test_constant_residual(self):
        self.assertAlmostEqual(error_norm(np.ones(100), np.zeros(100)),
                               np.sqrt(2 * np.pi))
        theta = np.sort(np.random.default_rng(1).uniform(0, 2 * np.pi, 50))
        self.assertAlmostEqual(error_norm(np.ones(50), np.zeros(50), theta),
                               np.sqrt(2 * np.pi))

    def test_shapes_must_agree(self):
        with self.assertRaises(ValidationError):
            error_norm(np.ones(3), np.ones(4))


class InteriorTest(unittest.TestCase):

    def setUp(self):
        self.mesh = RadialMesh.uniform(35, 50)
        self.table = build_table(build_sequence(ConstantField(1.0)),
                                 self.mesh, 17)
        self.basis = orthonormalize(assemble(self.table))

    def test_harmonic_continuation(self):
        result = fit(self.basis, np.cos(2 * self.mesh.boundary_angles))
        u = reconstruct_interior(self.table, self.basis, result.coefficients)
        self.assertEqual(u.shape, self.mesh.nodes.shape)
        np.testing.assert_allclose(u, self.mesh.x ** 2 - self.mesh.y ** 2,
                                   atol=1e-6)

    def test_zero_coefficients(self):
        u = reconstruct_interior(self.table, self.basis, np.zeros(35))
        np.testing.assert_array_equal(u, 0)

    def test_boundary_only_table(self):
        rim = build_table(build_sequence(ConstantField(1.0)), self.mesh, 17,
                          boundary_only=True)
        with self.assertRaises(ValidationError):
            reconstruct_interior(rim, self.basis, np.zeros(35))


class WriterTest(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.tmp)
        system = classical_system(35, 17)
        self.result = fit(orthonormalize(system), np.cos(system.theta), 70)

    def read(self, name):
        with open(os.path.join(self.tmp, name)) as handle:
            return list(csv.reader(handle))

    def test_coefficients(self):
        write_coefficients(self.result, os.path.join(self.tmp, 'c.csv'))
        rows = self.read('c.csv')
        self.assertEqual(rows[0], ['alpha', 'b'])
        self.assertEqual(len(rows), 36)
        self.assertAlmostEqual(float(rows[2][1]), SQRT_PI)

    def test_boundary_fit(self):
        write_boundary_fit(self.result, os.path.join(self.tmp, 'f.csv'))
        rows = self.read('f.csv')
        self.assertEqual(rows[0], ['theta', 'l', 'data', 'fit', 'residual'])
        self.assertEqual(len(rows), 71)
        self.assertEqual(rows[5][0], rows[5][1])
