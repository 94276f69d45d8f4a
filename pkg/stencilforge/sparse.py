"""Off-grid points: multilinear injection into and sampling from grids."""
import itertools
import logging

import numpy as np

from .algebra import substitute
from .data import POINT_DIMENSION
from .data import SparseFunction
from .data import TableFunction
from .expression import Eqn
from .expression import TIME_DIMENSION
from .expression import as_expr
from .lowering import CustomIteration
from .lowering import indexify
from .nodes import Dimension
from .types import Int32


log = logging.getLogger(__name__)


class OutOfDomain(ValueError):
    pass


def corners(ndim):
    """Corner offsets of a cell, the first dimension varying slowest."""
    return list(itertools.product((0, 1), repeat=ndim))


def interpolation_weights(coordinates, spacing, shape=None, halo=0,
                          origin=0.):
    """Cell indices and multilinear weights of points.

    :param coordinates: array ``(npoints, ndim)`` of physical coordinates
    :param spacing: grid spacing, scalar or per dimension
    :param shape: grid extents; points must lie inside, keeping ``halo``
        cells free on both sides
    :returns: ``(cells, weights)`` with ``cells`` of shape
        ``(npoints, ndim)`` and ``weights`` of shape ``(npoints, 2**ndim)``
        in :func:`corners` order

    >>> cells, weights = interpolation_weights([[1.5, 2.0]], 1.0)
    >>> cells.tolist(), weights.tolist()
    ([[1, 2]], [[0.5, 0.0, 0.5, 0.0]])
    """
    coordinates = np.atleast_2d(np.asarray(coordinates, dtype=np.float64))
    npoints, ndim = coordinates.shape
    spacing = np.broadcast_to(np.asarray(spacing, dtype=np.float64), (ndim,))
    origin = np.broadcast_to(np.asarray(origin, dtype=np.float64), (ndim,))
    position = (coordinates - origin) / spacing
    cells = np.floor(position).astype(np.int64)
    frac = position - cells

    if shape is not None:
        shape = np.asarray(shape)
        low = halo
        high = shape - 1 - halo
        bad = np.any((cells < low) | (cells + 1 > high), axis=1)
        if np.any(bad):
            raise OutOfDomain(
                'Points outside the interior of grid {}: {}'.format(
                    tuple(shape.tolist()),
                    coordinates[bad].tolist(),
                )
            )

    weights = np.ones((npoints, 2 ** ndim), dtype=np.float64)
    for k, corner in enumerate(corners(ndim)):
        for d, bit in enumerate(corner):
            weights[:, k] *= frac[:, d] if bit else 1. - frac[:, d]
    return cells, weights


class SparsePointSet(object):
    """Named set of points with a time series per point.

    Registers three functions: the series ``name`` shaped
    ``(nt, npoints)``, the integer cell table ``name_cells`` and the
    weight table ``name_weights``.
    """

    def __init__(self, name, coordinates, nt, grid_shape, spacing,
                 element_type='f32', registry=None, halo=0, origin=0.):
        self.name = name
        self.coordinates = np.atleast_2d(
            np.asarray(coordinates, dtype=np.float64)
        )
        self.grid_shape = tuple(grid_shape)
        if self.coordinates.shape[1] != len(self.grid_shape):
            raise OutOfDomain(
                'Points of dimension {} for a grid of dimension {}'.format(
                    self.coordinates.shape[1], len(self.grid_shape)
                )
            )
        self.spacing = spacing
        cells, weights = interpolation_weights(
            self.coordinates, spacing, shape=self.grid_shape, halo=halo,
            origin=origin,
        )
        self.data_function = SparseFunction(
            name, nt, self.npoints, element_type=element_type,
            registry=registry,
        )
        self.cell_function = TableFunction(
            name + '_cells', cells.shape, element_type=Int32,
            registry=registry,
        )
        self.weight_function = TableFunction(
            name + '_weights', weights.shape, element_type=element_type,
            registry=registry,
        )
        self.cell_function.data = cells
        self.weight_function.data = weights
        self.cells = cells
        self.weights = weights

    @property
    def npoints(self):
        return self.coordinates.shape[0]

    @property
    def ndim(self):
        return self.coordinates.shape[1]

    @property
    def nt(self):
        return self.data_function.nt

    @property
    def data(self):
        return self.data_function.data

    @data.setter
    def data(self, value):
        self.data_function.data = value

    @property
    def dimension(self):
        return Dimension(POINT_DIMENSION.name, self.npoints, parallel=False)

    def corner_indices(self, corner):
        point = POINT_DIMENSION
        return [
            self.cell_function[point, d] + bit
            for d, bit in enumerate(corner)
        ]

    def _corner_index(self, corner):
        return tuple(
            self.cells[:, d] + bit for d, bit in enumerate(corner)
        )

    def inject(self, array, values, scale=None):
        """Adds ``values`` at the points into ``array`` in place.

        ``scale`` is an optional grid array multiplying every corner
        contribution.
        """
        values = np.asarray(values, dtype=np.float64)
        for k, corner in enumerate(corners(self.ndim)):
            index = self._corner_index(corner)
            contribution = self.weights[:, k] * values
            if scale is not None:
                contribution = contribution * scale[index]
            np.add.at(array, index, contribution)
        return array

    def interpolate(self, array):
        """Samples ``array`` at the points."""
        res = np.zeros(self.npoints, dtype=np.float64)
        for k, corner in enumerate(corners(self.ndim)):
            index = self._corner_index(corner)
            res += self.weights[:, k] * array[index]
        return res

    def __repr__(self):
        return '<SparsePointSet {} npoints={} nt={}>'.format(
            self.name, self.npoints, self.nt
        )


def _check_field(field, points):
    if not field.is_time:
        raise OutOfDomain(
            '{} has no time dimension'.format(field.name)
        )
    if field.space_shape != points.grid_shape:
        raise OutOfDomain(
            'Points were placed on grid {} but {} is {}'.format(
                points.grid_shape, field.name, field.space_shape
            )
        )


def build_inject(field, points, scale=1, time_offset=1, position='after'):
    """Equations adding point values into ``field`` at every timestep.

    ``scale`` is an expression in the symbolic view of grid functions,
    evaluated at every corner the value goes into.
    """
    _check_field(field, points)
    scale = indexify(as_expr(scale), registry=field.registry)
    time_index = TIME_DIMENSION + time_offset
    value = points.data_function[TIME_DIMENSION, POINT_DIMENSION]
    eqs = []
    for k, corner in enumerate(corners(points.ndim)):
        indices = points.corner_indices(corner)
        target = field[(time_index,) + tuple(indices)]
        corner_scale = substitute(scale, list(zip(
            field.space_dimensions, indices
        )))
        weight = points.weight_function[POINT_DIMENSION, k]
        eqs.append(Eqn(target, target + weight * corner_scale * value))
    log.debug('Injection of %s into %s: %d equations',
              points.name, field.name, len(eqs))
    return CustomIteration(eqs, points.dimension, position=position)


def build_sample(field, points, time_offset=1, position='after'):
    """Equation sampling ``field`` at the points into their series."""
    _check_field(field, points)
    time_index = TIME_DIMENSION + time_offset
    terms = []
    for k, corner in enumerate(corners(points.ndim)):
        indices = points.corner_indices(corner)
        weight = points.weight_function[POINT_DIMENSION, k]
        terms.append(weight * field[(time_index,) + tuple(indices)])
    target = points.data_function[TIME_DIMENSION, POINT_DIMENSION]
    rhs = terms[0]
    for term in terms[1:]:
        rhs = rhs + term
    return CustomIteration([Eqn(target, rhs)], points.dimension,
                           position=position)
