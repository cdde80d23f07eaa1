import itertools
import os
import tempfile
import unittest

import numpy as np

from fpeit.conductivity import AnalyticSeparable, ConstantField, Disk, \
    GeometricScene, GriddedSampler, LimitCase, Polygon, build_piecewise, \
    eval_radial_piecewise, evaluate, radial_rings, sample_piecewise
from fpeit.errors import DomainError, ValidationError


def lorentzian(beta=0.0):
    return AnalyticSeparable(lambda x: 1 / ((x - beta) ** 2 + 0.1),
                             lambda y: 1 / (y ** 2 + 0.1))


class EvaluateTest(unittest.TestCase):

    def test_separable_product(self):
        self.assertAlmostEqual(evaluate(lorentzian(), 0.0, 0.0), 100.0)
        self.assertAlmostEqual(evaluate(lorentzian(), 1.0, 0.0),
                               100.0 / 11.0)

    def test_rim_is_inside(self):
        x = np.cos(0.7)
        y = np.sin(0.7)
        self.assertGreater(evaluate(lorentzian(), x, y), 0)

    def test_outside_the_disk(self):
        with self.assertRaises(DomainError):
            evaluate(lorentzian(), 1.0, 0.5)

    def test_non_positive_value(self):
        field = AnalyticSeparable(lambda x: x, lambda y: np.ones_like(y))
        with self.assertRaises(ValidationError):
            evaluate(field, -0.5, 0.0)

    def test_vectorised(self):
        values = evaluate(ConstantField(3.0), np.zeros(4),
                          np.linspace(0.0, 0.5, 4))
        np.testing.assert_allclose(values, 3.0)
        self.assertEqual(ConstantField(3.0).bounds, (3.0, 3.0))

    def test_constant_must_be_positive(self):
        with self.assertRaises(ValidationError):
            ConstantField(0.0)


class RadialPiecewiseTest(unittest.TestCase):

    def test_ring_values(self):
        for (r, expected) in ((0.0, 100), (0.1, 100), (0.2, 30), (0.5, 20),
                              (0.7, 15), (0.9, 30), (1.0, 30)):
            self.assertEqual(eval_radial_piecewise(r), expected)

    def test_radius_out_of_range(self):
        for r in (-0.1, 1.2):
            with self.assertRaises(DomainError):
                eval_radial_piecewise(r)

    def test_field_is_radial(self):
        field = radial_rings()
        theta = np.linspace(0, 2 * np.pi, 17)
        values = field.sample(0.3 * np.cos(theta), 0.3 * np.sin(theta))
        np.testing.assert_array_equal(values, 30.0)

    def test_ring_edge_on_every_ray(self):
        theta = np.linspace(0, 2 * np.pi, 101)
        values = radial_rings().sample(0.4 * np.cos(theta),
                                       0.4 * np.sin(theta))
        np.testing.assert_array_equal(values, 20.0)


class PiecewiseTest(unittest.TestCase):

    def setUp(self):
        self.samples = [(-0.5, [(-1.0, 2.0), (1.0, 4.0)]),
                        (0.5, [(-1.0, 1.0), (0.0, 1.0), (1.0, 1.0)])]

    def test_slab_product(self):
        field = build_piecewise(self.samples, [-1.0, 0.0, 1.0], K=2.0)
        self.assertAlmostEqual(field.sample(-0.5, 0.0), 3.0)
        self.assertAlmostEqual(field.sample(0.25, 0.3), 2.25 / 2.5)

    def test_edges_are_half_open(self):
        field = build_piecewise(self.samples, [-1.0, 0.0, 1.0])
        index = field.slab_index(np.array([-1.0, 0.0, 1.0]))
        np.testing.assert_array_equal(index, [0, 1, 1])

    def test_cubic_interpolant(self):
        samples = [(0.0, [(y, 1.0 + y * y) for y in np.linspace(-1, 1, 9)])]
        field = build_piecewise(samples, [-1.0, 1.0], interpolant='cubic')
        self.assertAlmostEqual(field.sample(0.0, 0.3), 1.09, places=3)

    def test_invalid_inputs(self):
        edges = [-1.0, 0.0, 1.0]
        with self.assertRaises(ValidationError):
            build_piecewise(self.samples, edges, K=1.0)
        with self.assertRaises(ValidationError):
            build_piecewise(self.samples[:1], edges)
        with self.assertRaises(ValidationError):
            build_piecewise([(0.5, self.samples[0][1]), self.samples[1]],
                            edges)
        with self.assertRaises(ValidationError):
            build_piecewise(self.samples, [-1.0, 0.2, 0.9])
        with self.assertRaises(ValidationError):
            build_piecewise([(-0.5, [(0.0, 1.0), (0.0, 2.0)]),
                             self.samples[1]], edges)

    def test_sampling_converges(self):
        def sigma(x, y):
            return (2 + np.cos(np.pi * x)) * (2 + np.sin(np.pi * y))

        (x, y) = np.meshgrid(np.linspace(-0.7, 0.7, 41),
                             np.linspace(-0.7, 0.7, 41))
        errors = []
        for M in (4, 16, 64):
            field = sample_piecewise(sigma, M, M, extent='full')
            errors.append(np.max(np.abs(field.sample(x, y) - sigma(x, y))))
        self.assertLess(errors[1], errors[0])
        self.assertLess(errors[2], errors[1])
        self.assertLess(errors[2], 0.5)


class GridTest(unittest.TestCase):

    def write(self, text):
        handle = tempfile.NamedTemporaryFile('w', suffix='.csv', delete=False)
        handle.write(text)
        handle.close()
        self.addCleanup(os.remove, handle.name)
        return handle.name

    def test_bilinear_is_exact_for_linear_fields(self):
        rows = ['x,y,sigma']
        for x in (-1.0, 0.0, 1.0):
            for y in (-1.0, 0.0, 1.0):
                rows.append('%g,%g,%g' % (x, y, 4 + x + 2 * y))
        sampler = GriddedSampler.from_csv(self.write('\n'.join(rows) + '\n'))
        field = LimitCase(sampler)
        value = evaluate(field, 0.3, -0.2)
        self.assertEqual(np.ndim(value), 0)
        self.assertAlmostEqual(value, 3.9)
        grid = np.full((2, 3), 0.25)
        self.assertEqual(evaluate(field, grid, -grid).shape, (2, 3))

    def test_bad_header(self):
        path = self.write('a,b,c\n0,0,1\n0,1,1\n1,0,1\n1,1,1\n')
        with self.assertRaises(ValidationError):
            GriddedSampler.from_csv(path)

    def test_incomplete_grid(self):
        path = self.write('x,y,sigma\n0,0,1\n0,1,1\n1,0,1\n')
        with self.assertRaises(ValidationError):
            GriddedSampler.from_csv(path)

    def test_missing_file(self):
        with self.assertRaises(ValidationError):
            GriddedSampler.from_csv('/nonexistent/grid.csv')


class SceneTest(unittest.TestCase):

    def test_last_shape_wins(self):
        scene = GeometricScene(10.0, [Disk(0.0, 0.0, 0.2, 100.0),
                                      Disk(0.0, 0.0, 0.01, 50.0)])
        self.assertEqual(evaluate(scene, 0.0, 0.0), 50.0)
        self.assertEqual(evaluate(scene, 0.3, 0.0), 100.0)
        self.assertEqual(evaluate(scene, 0.9, 0.0), 10.0)
        self.assertEqual(scene.bounds, (10.0, 100.0))

    def test_order_of_disjoint_shapes_does_not_matter(self):
        shapes = [Disk(0.5, 0.0, 0.04, 100.0), Disk(-0.5, 0.0, 0.04, 50.0),
                  Polygon([(0.0, 0.3), (0.2, 0.6), (-0.2, 0.6)], 70.0)]
        (x, y) = np.meshgrid(np.linspace(-0.7, 0.7, 29),
                             np.linspace(-0.7, 0.7, 29))
        reference = GeometricScene(10.0, shapes).sample(x, y)
        self.assertEqual(set(np.unique(reference)), {10.0, 50.0, 70.0, 100.0})
        for order in itertools.permutations(shapes):
            with self.subTest(order=order):
                np.testing.assert_array_equal(
                    GeometricScene(10.0, order).sample(x, y), reference)

    def test_polygon_boundary_belongs_to_the_shape(self):
        triangle = Polygon([(0.0, 0.0), (0.5, 0.0), (0.0, 0.5)], 100.0)
        scene = GeometricScene(10.0, [triangle])
        values = scene.sample(np.array([0.1, 0.25, 0.6]),
                              np.array([0.1, 0.0, 0.6]))
        np.testing.assert_array_equal(values, [100.0, 100.0, 10.0])
        self.assertEqual(len(scene.corners()), 3)

    def test_self_intersecting_polygon(self):
        with self.assertRaises(ValidationError):
            Polygon([(0, 0), (0.5, 0.5), (0.5, 0), (0, 0.5)], 5.0)

    def test_positive_values_only(self):
        with self.assertRaises(ValidationError):
            GeometricScene(0.0, [])
        with self.assertRaises(ValidationError):
            GeometricScene(1.0, [Disk(0, 0, 0.1, -1.0)])
