"""Import and export of grid buffers, receiver matrices and point sets.

The binary format is one ASCII header line followed by the raw
little-endian values in C order::

    STENCILFORGE u float 64,64

The CSV format is meant for small one and two dimensional grids and
carries the same header as a comment line.
"""
import io
import logging
import os

import numpy as np

from .types import ValidationError
from .types import get_type


log = logging.getLogger(__name__)


MAGIC = 'STENCILFORGE'


class CodecError(ValueError):
    pass


def _header(name, array):
    element_type = get_type(array.dtype)
    return '{} {} {} {}'.format(
        MAGIC, name, element_type.__visit_name__,
        ','.join(str(n) for n in array.shape),
    )


def _parse_header(line):
    parts = line.strip().split()
    if len(parts) != 4 or parts[0] != MAGIC:
        raise CodecError('Not a grid data header: {!r}'.format(line))
    _, name, type_name, shape = parts
    try:
        element_type = get_type(type_name)
        shape = tuple(int(n) for n in shape.split(','))
    except (ValidationError, ValueError) as e:
        raise CodecError('Invalid grid data header {!r}: {}'.format(line, e))
    return name, element_type, shape


class BaseCodec(object):
    mode = 't'

    def encode(self, array, name='data'):
        raise NotImplementedError()

    def decode(self, data):
        raise NotImplementedError()

    def dump(self, path, array, name='data'):
        with open(path, 'w' + self.mode) as f:
            f.write(self.encode(array, name=name))
        log.info('Wrote %s%r to %s', name, tuple(np.shape(array)), path)
        return path

    def load(self, path):
        with open(path, 'r' + self.mode) as f:
            return self.decode(f.read())


class BinaryCodec(BaseCodec):
    mode = 'b'

    def encode(self, array, name='data'):
        array = np.ascontiguousarray(array)
        header = _header(name, array) + '\n'
        return header.encode('ascii') + \
            array.astype(array.dtype.newbyteorder('<')).tobytes()

    def decode(self, data):
        """Returns ``(name, array)``."""
        head, sep, body = data.partition(b'\n')
        if not sep:
            raise CodecError('Missing grid data header')
        name, element_type, shape = _parse_header(head.decode('ascii'))
        dtype = np.dtype(element_type.dtype).newbyteorder('<')
        count = 1
        for n in shape:
            count *= n
        if len(body) != count * dtype.itemsize:
            raise CodecError(
                '{}: expected {} bytes of data, got {}'.format(
                    name, count * dtype.itemsize, len(body)
                )
            )
        array = np.frombuffer(body, dtype=dtype).reshape(shape)
        return name, array.astype(element_type.dtype)


class CsvCodec(BaseCodec):
    delimiter = ','

    def encode(self, array, name='data'):
        array = np.asarray(array)
        if array.ndim not in (1, 2):
            raise CodecError(
                'CSV holds one or two dimensional data, got shape {}'.format(
                    array.shape
                )
            )
        buf = io.StringIO()
        fmt = '%d' if array.dtype.kind == 'i' else '%.17g'
        np.savetxt(
            buf, np.atleast_2d(array), fmt=fmt, delimiter=self.delimiter,
            header=_header(name, array), comments='# ',
        )
        return buf.getvalue()

    def decode(self, data):
        lines = data.splitlines()
        if not lines or not lines[0].startswith('#'):
            raise CodecError('Missing grid data header')
        name, element_type, shape = _parse_header(lines[0].lstrip('# '))
        values = np.loadtxt(
            io.StringIO('\n'.join(lines[1:])), delimiter=self.delimiter,
            dtype=np.float64, ndmin=2,
        )
        try:
            values = values.reshape(shape)
        except ValueError:
            raise CodecError('{}: {} values for shape {}'.format(
                name, values.size, shape
            ))
        return name, values.astype(element_type.dtype)


class PointSetCodec(object):
    """Text format of point sets.

    One line per point: the coordinates, then optionally a reference to
    a file holding its time series. Blank lines and ``#`` comments are
    skipped.
    """

    def decode(self, data):
        """Returns ``(coordinates, references)``."""
        coordinates = []
        references = []
        for lineno, line in enumerate(data.splitlines(), 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            values = []
            reference = None
            for part in parts:
                try:
                    values.append(float(part))
                except ValueError:
                    if reference is not None or not values:
                        raise CodecError(
                            'Line {}: cannot parse {!r}'.format(lineno, line)
                        )
                    reference = part
            if coordinates and len(values) != len(coordinates[0]):
                raise CodecError(
                    'Line {}: expected {} coordinates, got {}'.format(
                        lineno, len(coordinates[0]), len(values)
                    )
                )
            coordinates.append(values)
            references.append(reference)
        if not coordinates:
            raise CodecError('No points')
        return np.array(coordinates, dtype=np.float64), references

    def encode(self, coordinates, references=None):
        coordinates = np.atleast_2d(np.asarray(coordinates, dtype=np.float64))
        references = references or [None] * len(coordinates)
        lines = []
        for point, reference in zip(coordinates, references):
            parts = ['{!r}'.format(float(c)) for c in point]
            if reference:
                parts.append(reference)
            lines.append(' '.join(parts))
        return '\n'.join(lines) + '\n'

    def load(self, path):
        with open(path) as f:
            return self.decode(f.read())


CODECS = {
    'binary': BinaryCodec,
    'csv': CsvCodec,
}


def get_codec(path, fmt=None):
    if fmt is None:
        ext = os.path.splitext(path)[1].lower()
        fmt = 'csv' if ext in ('.csv', '.txt') else 'binary'
    try:
        return CODECS[fmt]()
    except KeyError:
        raise CodecError('Unknown format: {!r}'.format(fmt))


def dump_field(path, array, name='data', fmt=None):
    """Writes an array, CSV for ``.csv`` and ``.txt`` paths."""
    return get_codec(path, fmt).dump(path, array, name=name)


def load_field(path, fmt=None):
    return get_codec(path, fmt).load(path)
